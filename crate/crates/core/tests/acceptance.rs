//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `--nocapture` to see them). Criterion 1 is
//! the long pole (three 7-qubit noisy density simulations).

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nisqsim::circuit::{build_grover, build_qft, grover_success_analytic, Circuit};
use nisqsim::engine;
use nisqsim::gates::unitary_of;
use nisqsim::hardware::{builtin, coupling_density, BUILTIN_NAMES};
use nisqsim::noise::{self, NoiseKind, NoiseSpec};
use nisqsim::qmath::{self, DensityMatrix, PureState};
use nisqsim::transpiler;
use nisqsim::vqc::{self, TrainingConfig, VqcParameters};

const LIMITED_BACKENDS: [&str; 2] = ["ibmq_kolkata", "rigetti_aspen_m3"];

fn native_model(name: &str) -> noise::NoiseModel {
    let backend = builtin(name).unwrap();
    noise::build_native_model(&backend).unwrap()
}

/// Simulate an algorithm circuit on a backend under its native noise;
/// returns (success probability, marked-state fidelity) for the marked
/// bitstring.
fn grover_native_point(name: &str, n: usize, seed: u64) -> (f64, f64) {
    let backend = builtin(name).unwrap();
    let marked = "1".repeat(n);
    let circuit = build_grover(n, &marked).unwrap();
    let report = transpiler::transpile_for_simulation(&circuit, &backend, seed).unwrap();
    let (compact, positions) = transpiler::compact_for_simulation(&report).unwrap();
    let model = native_model(name);
    let sim = engine::simulate(&compact, Some(&model)).unwrap();

    let mut full = vec![false; compact.num_qubits()];
    for (i, &p) in positions.iter().enumerate() {
        full[p] = marked.as_bytes()[i] == b'1';
    }
    let target: String = full.iter().map(|b| if *b { '1' } else { '0' }).collect();
    let success = engine::success_probability(&sim, &target).unwrap();

    let marked_index = full
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
    let marked_state = PureState::basis(compact.num_qubits(), marked_index);
    let fidelity = engine::state_fidelity(&sim, &marked_state).unwrap();
    (success, fidelity)
}

#[test]
fn acceptance_01_grover_collapse_under_native_noise() {
    let n = 7;
    let marked = "1".repeat(n);
    let logical = build_grover(n, &marked).unwrap();
    let clean = engine::simulate(&logical, None).unwrap();
    let p_clean = engine::success_probability(&clean, &marked).unwrap();
    assert!(
        p_clean > 0.9,
        "noiseless n=7 success {p_clean} should exceed 0.9"
    );

    let mut noisy = Vec::new();
    for name in BUILTIN_NAMES {
        let (p_noisy, _) = grover_native_point(name, n, 1);
        assert!(
            p_noisy < 0.05,
            "{name}: native-noise n=7 success {p_noisy} should be below 0.05"
        );
        noisy.push(format!("{name}={p_noisy:.4}"));
    }
    println!(
        "PASS criterion 1: Grover n=7 noiseless success {p_clean:.4} > 0.9; native-noise {} all < 0.05",
        noisy.join(", ")
    );
}

#[test]
fn acceptance_02_grover_depth_blowup() {
    let c = build_grover(7, &"1".repeat(7)).unwrap();
    let mut depths = Vec::new();
    for name in LIMITED_BACKENDS {
        let backend = builtin(name).unwrap();
        let report = transpiler::transpile(&c, &backend, 1).unwrap();
        assert!(
            report.depth_after > 1000,
            "{name}: transpiled Grover(7) depth {} should exceed 1000",
            report.depth_after
        );
        depths.push(format!("{name}={}", report.depth_after));
    }
    println!(
        "PASS criterion 2: transpiled Grover(7) depth {} > 1000",
        depths.join(", ")
    );
}

#[test]
fn acceptance_03_qft_depth_landmark() {
    let c = build_qft(11).unwrap();
    let mut depths = Vec::new();
    for name in BUILTIN_NAMES {
        let backend = builtin(name).unwrap();
        let report = transpiler::transpile(&c, &backend, 1).unwrap();
        assert!(
            (75..=300).contains(&report.depth_after),
            "{name}: QFT(11) depth {} outside [75, 300]",
            report.depth_after
        );
        depths.push(format!("{name}={}", report.depth_after));
    }
    println!(
        "PASS criterion 3: QFT(11) native depth {} within [75, 300]",
        depths.join(", ")
    );
}

/// R² of a least-squares line through (x, y).
fn linear_r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    (sxy * sxy) / (sxx * syy)
}

#[test]
fn acceptance_04_connectivity_ablation() {
    let sizes: Vec<usize> = (2..=11).collect();
    for name in BUILTIN_NAMES {
        let backend = builtin(name).unwrap();
        let mesh = backend.full_mesh();
        let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
        let mut mesh_depths = Vec::new();
        let mut native_depths = Vec::new();
        for &n in &sizes {
            let c = build_qft(n).unwrap();
            mesh_depths.push(transpiler::transpile(&c, &mesh, 1).unwrap().depth_after as f64);
            native_depths.push(transpiler::transpile(&c, &backend, 1).unwrap().depth_after as f64);
        }
        let r2 = linear_r_squared(&xs, &mesh_depths);
        assert!(
            r2 > 0.98,
            "{name}: full-mesh QFT depth R² {r2} not linear enough"
        );
        if LIMITED_BACKENDS.contains(&name) {
            let native11 = native_depths.last().unwrap();
            let mesh11 = mesh_depths.last().unwrap();
            assert!(
                native11 >= &(1.25 * mesh11),
                "{name}: native depth {native11} not ≥ 1.25× mesh depth {mesh11} at n=11"
            );
        }
        println!(
            "PASS criterion 4 [{name}]: mesh R²={r2:.4}, native@11={} vs mesh@11={}",
            native_depths.last().unwrap(),
            mesh_depths.last().unwrap()
        );
    }
}

#[test]
fn acceptance_05_coupling_density_transcription() {
    let expected = [
        ("ibmq_kolkata", 7.98),
        ("ionq_aria", 100.0),
        ("rigetti_aspen_m3", 3.35),
    ];
    for (name, want) in expected {
        let density = coupling_density(&builtin(name).unwrap().graph);
        let rounded = (density * 100.0).round() / 100.0;
        assert!(
            (rounded - want).abs() < 1e-9,
            "{name}: density {density} rounds to {rounded}, expected {want}"
        );
    }
    println!("PASS criterion 5: coupling densities 7.98% / 100.00% / 3.35% reproduced");
}

#[test]
fn acceptance_06_composite_calibration_round_trip() {
    for name in BUILTIN_NAMES {
        let backend = builtin(name).unwrap();
        let model = noise::build_native_model(&backend).unwrap();
        let f1 = noise::average_gate_fidelity(&model.one_qubit);
        let f2 = noise::average_gate_fidelity(&model.two_qubit);
        assert!(
            (f1 - backend.f1).abs() < 1e-6,
            "{name}: F1 round trip {f1} vs {}",
            backend.f1
        );
        assert!(
            (f2 - backend.f2).abs() < 1e-6,
            "{name}: F2 round trip {f2} vs {}",
            backend.f2
        );
    }
    println!("PASS criterion 6: native channel fidelities match the vendor metrics within 1e-6");
}

fn random_density(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let dim = 1usize << n;
    let mut b = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for v in b.iter_mut() {
        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let psd = b.dot(&qmath::dagger(&b));
    let tr = qmath::trace(&psd).re;
    psd.mapv(|z| z / tr)
}

#[test]
fn acceptance_07_channel_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checks = 0usize;
    while checks < 1000 {
        let p: f64 = rng.gen_range(0.0..=1.0);
        let ch = match checks % 7 {
            0 => noise::bit_flip(p).unwrap(),
            1 => noise::phase_flip(p).unwrap(),
            2 => noise::bit_phase_flip(p).unwrap(),
            3 => noise::depolarizing(p, 1).unwrap(),
            4 => noise::depolarizing(p, 2).unwrap(),
            5 => {
                let t1 = rng.gen_range(10.0..200.0);
                let t2 = rng.gen_range(0.1..2.0 * t1);
                noise::thermal_relaxation(t1, t2, rng.gen_range(0.0..20.0)).unwrap()
            }
            _ => {
                let t1 = rng.gen_range(10.0..200.0);
                let t2 = rng.gen_range(0.1..1.5 * t1);
                let tg = rng.gen_range(0.0..2.0);
                let single = noise::thermal_relaxation(t1, t2, tg).unwrap();
                let f_r = noise::average_gate_fidelity(&single.tensor(&single));
                let f_target = rng.gen_range(0.3..1.0) * (f_r - 0.25) + 0.25;
                noise::calibrate_composite(f_target, t1, t2, tg, 2)
                    .unwrap()
                    .0
            }
        };
        assert!(
            ch.completeness_defect() <= 1e-9,
            "completeness defect {} at check {checks}",
            ch.completeness_defect()
        );
        let rho = random_density(ch.num_qubits(), &mut rng);
        let out = ch.apply(&rho);
        DensityMatrix::new(ch.num_qubits(), out)
            .unwrap_or_else(|e| panic!("channel output invalid at check {checks}: {e}"))
            .validate()
            .unwrap();
        checks += 1;
    }

    // depolarizing closed form vs Kraus realization at 1e-12
    for n in 1..=2usize {
        for _ in 0..25 {
            let p: f64 = rng.gen_range(0.0..=1.0);
            let ch = noise::depolarizing(p, n).unwrap();
            let rho = random_density(n, &mut rng);
            let dim = 1usize << n;
            let closed =
                rho.mapv(|z| z * (1.0 - p)) + qmath::identity(dim).mapv(|z| z * (p / dim as f64));
            let diff = qmath::max_abs_diff(&ch.apply(&rho), &closed);
            assert!(diff < 1e-12, "depolarizing mismatch {diff}");
        }
    }

    // thermal decay laws at 1e-10, including the Rigetti T2 > T1 regime
    for (t1, t2) in [(109.90, 96.80), (24.98, 28.04), (50.0, 99.0)] {
        let t = 7.5;
        let ch = noise::thermal_relaxation(t1, t2, t).unwrap();
        let rho = random_density(1, &mut rng);
        let out = ch.apply(&rho);
        let e1 = (-t / t1).exp();
        let e2 = (-t / t2).exp();
        assert!((out[[1, 1]].re - rho[[1, 1]].re * e1).abs() < 1e-10);
        assert!((out[[0, 0]].re - (rho[[0, 0]].re + rho[[1, 1]].re * (1.0 - e1))).abs() < 1e-10);
        assert!((out[[0, 1]] - rho[[0, 1]] * e2).norm() < 1e-10);
    }
    println!("PASS criterion 7: 1000 CPTP checks, closed-form and decay-law agreement");
}

#[test]
fn acceptance_08_noiseless_algorithm_oracles() {
    for n in 2..=6usize {
        let marked = "1".repeat(n);
        let c = build_grover(n, &marked).unwrap();
        let sim = engine::simulate(&c, None).unwrap();
        let p = engine::success_probability(&sim, &marked).unwrap();
        let analytic = grover_success_analytic(n, nisqsim::circuit::grover_iterations(n));
        assert!(
            (p - analytic).abs() < 1e-9,
            "grover n={n}: simulated {p} vs analytic {analytic}"
        );
    }

    for n in 1..=4usize {
        let c = build_qft(n).unwrap();
        let u = circuit_unitary(&c);
        let dim = 1usize << n;
        let norm = 1.0 / (dim as f64).sqrt();
        for j in 0..dim {
            for k in 0..dim {
                let angle = 2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / dim as f64;
                let want = Complex64::from_polar(norm, angle);
                let got = u[[k, j]];
                assert!(
                    (got - want).norm() < 1e-9,
                    "qft n={n}: entry ({k},{j}) {got} vs DFT {want}"
                );
            }
        }
    }
    println!("PASS criterion 8: Grover matches sin²((2k+1)θ) and QFT matches the DFT matrix");
}

/// Independent full-unitary oracle: multiply embedded gate matrices.
fn circuit_unitary(c: &Circuit) -> Array2<Complex64> {
    let n = c.num_qubits();
    let mut u = qmath::identity(1 << n);
    for g in c.instructions() {
        let m = unitary_of(g).unwrap();
        let full = qmath::embed_gate(&m, &g.qubits, n).unwrap();
        u = full.dot(&u);
    }
    u
}

fn random_logical_circuit(n: usize, len: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        match rng.gen_range(0..6) {
            0 => c.h(rng.gen_range(0..n)).unwrap(),
            1 => c.x(rng.gen_range(0..n)).unwrap(),
            2 => c.ry(rng.gen_range(0..n), rng.gen_range(-3.0..3.0)).unwrap(),
            3 => c.rz(rng.gen_range(0..n), rng.gen_range(-3.0..3.0)).unwrap(),
            4 => {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                c.cx(a, b).unwrap();
            }
            _ => {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                c.cp(a, b, rng.gen_range(-3.0..3.0)).unwrap();
            }
        }
    }
    c
}

#[test]
fn acceptance_09_transpiler_semantic_preservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let backends: Vec<_> = BUILTIN_NAMES.iter().map(|n| builtin(n).unwrap()).collect();
    let mut worst: f64 = 1.0;
    for trial in 0..200u64 {
        let n = 3 + (trial as usize % 2);
        let c = random_logical_circuit(n, 14, &mut rng);
        let ideal = engine::simulate_pure(&c).unwrap();
        for backend in &backends {
            for spec in [backend.clone(), backend.full_mesh()] {
                let report = transpiler::transpile(&c, &spec, trial).unwrap();
                let (compact, positions) = transpiler::compact_for_simulation(&report).unwrap();
                let sim = engine::simulate(&compact, None).unwrap();
                let embedded = ideal.embed(&positions, compact.num_qubits()).unwrap();
                let fidelity = engine::state_fidelity(&sim, &embedded).unwrap();
                assert!(
                    fidelity >= 1.0 - 1e-9,
                    "trial {trial} on {}: fidelity {fidelity}",
                    spec.name
                );
                worst = worst.min(fidelity);
            }
        }
    }
    println!("PASS criterion 9: 200 random circuits × 6 targets, worst fidelity {worst:.12}");
}

#[test]
fn acceptance_10_parameter_shift_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-5;
    let noisy_model = NoiseSpec::new(NoiseKind::Depolarizing, 0.01)
        .unwrap()
        .build_model(None)
        .unwrap();
    let mut worst_clean: f64 = 0.0;
    let mut worst_noisy: f64 = 0.0;
    for _ in 0..20 {
        let mut theta = VqcParameters::zeros();
        for t in theta.theta.iter_mut() {
            *t = rng.gen_range(-2.0..2.0);
        }
        let x: f64 = rng.gen_range(-1.0..1.0);
        for (model, tol, worst) in [
            (None, 1e-4, &mut worst_clean),
            (noisy_model.as_ref(), 1e-3, &mut worst_noisy),
        ] {
            let grad = vqc::gradient(x, &theta, model).unwrap();
            for (i, g) in grad.iter().enumerate() {
                let lp = vqc::loss(x, &theta.shifted(i, h), model).unwrap();
                let lm = vqc::loss(x, &theta.shifted(i, -h), model).unwrap();
                let fd = (lp - lm) / (2.0 * h);
                let dev = (g - fd).abs();
                assert!(dev < tol, "component {i}: |{g} - {fd}| = {dev} ≥ {tol}");
                *worst = worst.max(dev);
            }
        }
    }
    println!(
        "PASS criterion 10: parameter shift vs finite differences, worst noiseless {worst_clean:.2e} (< 1e-4), noisy {worst_noisy:.2e} (< 1e-3)"
    );
}

#[test]
fn acceptance_11_vqc_learning() {
    let noiseless = vqc::train(&TrainingConfig::default()).unwrap();
    let clean_final = noiseless.final_mean_loss(10);
    assert!(
        clean_final < 0.01,
        "noiseless final-10 mean loss {clean_final}"
    );

    let mut finals = vec![clean_final];
    for p in [0.005, 0.05] {
        let config = TrainingConfig {
            noise: NoiseSpec::new(NoiseKind::Depolarizing, p).unwrap(),
            ..Default::default()
        };
        finals.push(vqc::train(&config).unwrap().final_mean_loss(10));
    }
    assert!(
        finals[0] <= finals[1] && finals[1] <= finals[2],
        "final losses not monotone in noise strength: {finals:?}"
    );
    println!(
        "PASS criterion 11: noiseless final loss {clean_final:.5} < 0.01; depolarizing sweep monotone {finals:?}"
    );
}

#[test]
fn acceptance_12_hoeffding_utility() {
    let s = engine::hoeffding_samples(0.01, 0.05).unwrap();
    assert_eq!(s, 18445);
    println!("PASS criterion 12: hoeffding_samples(0.01, 0.05) = {s}");
}

#[test]
fn acceptance_13_fidelity_success_agreement() {
    let mut worst: f64 = 0.0;
    for name in BUILTIN_NAMES {
        for n in 2..=5usize {
            let (success, fidelity) = grover_native_point(name, n, 1);
            let diff = (success - fidelity).abs();
            assert!(
                diff < 0.02,
                "{name} n={n}: |success {success} − fidelity {fidelity}| = {diff}"
            );
            worst = worst.max(diff);
        }
    }
    // noiseless agreement between the two numeric routes
    for n in 2..=5usize {
        let marked = "1".repeat(n);
        let c = build_grover(n, &marked).unwrap();
        let sim = engine::simulate(&c, None).unwrap();
        let success = engine::success_probability(&sim, &marked).unwrap();
        let idx = marked
            .chars()
            .fold(0usize, |acc, ch| (acc << 1) | usize::from(ch == '1'));
        let fid = engine::state_fidelity(&sim, &PureState::basis(n, idx)).unwrap();
        assert!((success - fid).abs() < 1e-9, "n={n}: {success} vs {fid}");
    }
    println!(
        "PASS criterion 13: success vs marked-state fidelity, worst |difference| {worst:.2e} < 0.02"
    );
}
