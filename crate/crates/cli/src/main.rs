//! Experiment runner: batch Grover/QFT/variational studies over the modeled
//! backends, plus transpilation, calibration and backend inspection
//! commands. Results are CSV by default (`--format json` for nested output);
//! plotting is left to external tools.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use nisqsim::circuit::{build_grover, build_qft, parse_bitstring, Circuit};
use nisqsim::engine;
use nisqsim::hardware::{self, BackendSpec, BUILTIN_NAMES};
use nisqsim::noise::{self, NoiseKind, NoiseSpec};
use nisqsim::transpiler;
use nisqsim::vqc;

#[derive(Parser)]
#[command(
    name = "nisqsim",
    version,
    about = "Noisy quantum-circuit experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grover search sweep: success probability and depth per size and backend
    Grover(AlgoArgs),
    /// Quantum Fourier transform sweep
    Qft(AlgoArgs),
    /// Train the variational circuit across noise kinds and strengths
    Vqc(VqcArgs),
    /// Transpile a circuit (from IR or a named builder) and report metrics
    Transpile(TranspileArgs),
    /// Solve and verify the composite noise calibration per backend
    Calibrate(CalibrateArgs),
    /// List or inspect backend definitions
    Backends(BackendsArgs),
}

#[derive(Args, Clone)]
struct AlgoArgs {
    /// Backend: builtin name, path to a backend file, or `all`
    #[arg(long, default_value = "all")]
    backend: String,
    /// Noise: none|native|bitflip|phaseflip|bitphaseflip|depolarizing|thermal
    #[arg(long, default_value = "native")]
    noise: String,
    /// Strength p for the elementary noise kinds
    #[arg(long, default_value_t = 0.0)]
    noise_strength: f64,
    /// Qubit range `a..b` (inclusive) or a single size
    #[arg(long)]
    qubits: Option<String>,
    /// Replace the coupling graph by a complete graph
    #[arg(long)]
    full_connectivity: bool,
    /// Marked bitstring for the Grover oracle (default: all ones)
    #[arg(long)]
    marked: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads for independent config points
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct VqcArgs {
    /// Noise kind to sweep, or `all` for bitflip/phaseflip/bitphaseflip/depolarizing
    #[arg(long, default_value = "all")]
    noise: String,
    /// Comma-separated strengths
    #[arg(long, default_value = "0,0.001,0.005,0.01,0.05")]
    strengths: String,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 0.5)]
    learning_rate: f64,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for trace and prediction files
    #[arg(long, default_value = "vqc_out")]
    output: PathBuf,
    /// csv or json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct TranspileArgs {
    /// Circuit IR file
    #[arg(long, conflicts_with = "algorithm")]
    circuit: Option<PathBuf>,
    /// Named builder: grover or qft
    #[arg(long)]
    algorithm: Option<String>,
    /// Qubit count for the named builder
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long, default_value = "all")]
    backend: String,
    #[arg(long)]
    full_connectivity: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the transpiled circuit IR here (single backend only)
    #[arg(long)]
    emit: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value = "all")]
    backend: String,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct BackendsArgs {
    #[command(subcommand)]
    action: BackendsAction,
}

#[derive(Subcommand)]
enum BackendsAction {
    /// One summary line per builtin backend
    List,
    /// Full dump of one backend
    Inspect {
        name: String,
        /// Write the backend definition file here
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

/// One row of a sweep: everything needed to reproduce and plot the point.
#[derive(Debug, Clone, Serialize)]
struct ExperimentRecord {
    algorithm: String,
    backend: String,
    connectivity: String,
    noise: String,
    noise_strength: f64,
    qubits: usize,
    seed: u64,
    depth_logical: usize,
    depth_transpiled: usize,
    swaps: usize,
    success_probability: f64,
    fidelity: f64,
    wall_time: f64,
}

const RECORD_HEADER: &str = "algorithm,backend,connectivity,noise,noise_strength,qubits,seed,\
depth_logical,depth_transpiled,swaps,success_probability,fidelity,wall_time";

impl ExperimentRecord {
    fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.backend,
            self.connectivity,
            self.noise,
            self.noise_strength,
            self.qubits,
            self.seed,
            self.depth_logical,
            self.depth_transpiled,
            self.swaps,
            self.success_probability,
            self.fidelity,
            self.wall_time
        )
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(0) => 0,
        Ok(failures) => {
            eprintln!("{failures} config point(s) failed");
            1
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<usize> {
    match cli.command {
        Command::Grover(args) => run_algorithm(Algorithm::Grover, args),
        Command::Qft(args) => run_algorithm(Algorithm::Qft, args),
        Command::Vqc(args) => run_vqc(args),
        Command::Transpile(args) => run_transpile(args),
        Command::Calibrate(args) => run_calibrate(args),
        Command::Backends(args) => run_backends(args),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Algorithm {
    Grover,
    Qft,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Grover => "grover",
            Algorithm::Qft => "qft",
        }
    }

    fn default_range(self) -> (usize, usize) {
        match self {
            Algorithm::Grover => (2, 8),
            Algorithm::Qft => (2, 11),
        }
    }
}

fn parse_qubit_range(spec: Option<&str>, default: (usize, usize)) -> anyhow::Result<Vec<usize>> {
    let (lo, hi) = match spec {
        None => default,
        Some(s) => match s.split_once("..") {
            Some((a, b)) => (
                a.trim().parse().context("invalid range start")?,
                b.trim().parse().context("invalid range end")?,
            ),
            None => {
                let n = s.trim().parse().context("invalid qubit count")?;
                (n, n)
            }
        },
    };
    if lo > hi || lo == 0 {
        bail!("invalid qubit range {lo}..{hi}");
    }
    Ok((lo..=hi).collect())
}

fn resolve_backends(spec: &str) -> anyhow::Result<Vec<BackendSpec>> {
    if spec == "all" {
        return BUILTIN_NAMES
            .iter()
            .map(|n| hardware::builtin(n).map_err(|e| anyhow!(e)))
            .collect();
    }
    let builtin = hardware::builtin(spec);
    match builtin {
        Ok(b) => Ok(vec![b]),
        Err(_) if Path::new(spec).exists() => Ok(vec![hardware::load_backend(spec)?]),
        Err(e) => Err(anyhow!("{e}; `{spec}` is not a file either")),
    }
}

fn parse_noise(kind: &str, strength: f64) -> anyhow::Result<NoiseSpec> {
    let kind = NoiseKind::from_name(kind).ok_or_else(|| anyhow!("unknown noise kind `{kind}`"))?;
    Ok(NoiseSpec::new(kind, strength)?)
}

fn check_format(format: &str) -> anyhow::Result<()> {
    match format {
        "csv" | "json" => Ok(()),
        other => bail!("unknown format `{other}` (csv or json)"),
    }
}

struct AlgoPoint {
    backend: BackendSpec,
    n: usize,
}

fn run_algorithm(algo: Algorithm, args: AlgoArgs) -> anyhow::Result<usize> {
    check_format(&args.format)?;
    let sizes = parse_qubit_range(args.qubits.as_deref(), algo.default_range())?;
    let backends = resolve_backends(&args.backend)?;
    let noise_spec = parse_noise(&args.noise, args.noise_strength)?;
    if algo == Algorithm::Grover {
        if let Some(m) = &args.marked {
            if sizes.len() > 1 {
                bail!("--marked needs a single qubit size (it fixes the bitstring length)");
            }
            parse_bitstring(m, sizes[0])?;
        }
    }

    let mut points = Vec::new();
    for n in &sizes {
        for b in &backends {
            points.push(AlgoPoint {
                backend: b.clone(),
                n: *n,
            });
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let results: Vec<Result<ExperimentRecord, String>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                run_algo_point(algo, p, &args, noise_spec)
                    .map_err(|e| format!("{} n={} {}: {e:#}", algo.name(), p.n, p.backend.name))
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = 0usize;
    for r in results {
        match r {
            Ok(rec) => rows.push(rec),
            Err(msg) => {
                eprintln!("failed: {msg}");
                failures += 1;
            }
        }
    }
    emit_records(&rows, args.output.as_deref(), &args.format)?;
    Ok(failures)
}

fn run_algo_point(
    algo: Algorithm,
    point: &AlgoPoint,
    args: &AlgoArgs,
    noise_spec: NoiseSpec,
) -> anyhow::Result<ExperimentRecord> {
    let t0 = Instant::now();
    let n = point.n;
    let marked = match (algo, &args.marked) {
        (Algorithm::Grover, Some(m)) => m.clone(),
        (Algorithm::Grover, None) => "1".repeat(n),
        _ => String::new(),
    };
    let circuit = match algo {
        Algorithm::Grover => build_grover(n, &marked)?,
        Algorithm::Qft => build_qft(n)?,
    };
    let hardware_spec = if args.full_connectivity {
        point.backend.full_mesh()
    } else {
        point.backend.clone()
    };
    let report = transpiler::transpile_for_simulation(&circuit, &hardware_spec, args.seed)?;
    let (compact, positions) = transpiler::compact_for_simulation(&report)?;
    let model = noise_spec.build_model(Some(&hardware_spec))?;

    let ideal = engine::simulate_pure(&circuit)?;
    let (success, fidelity) = match &model {
        None => {
            // ideal run: the logical circuit is the transpiled one up to the
            // layout permutation (semantic preservation), and far cheaper
            let sim = engine::simulate(&circuit, None)?;
            let fidelity = engine::state_fidelity(&sim, &ideal)?;
            let success = match algo {
                Algorithm::Grover => engine::success_probability(&sim, &marked)?,
                Algorithm::Qft => fidelity,
            };
            (success, fidelity)
        }
        Some(nm) => {
            let sim = engine::simulate(&compact, Some(nm))?;
            let embedded = ideal.embed(&positions, compact.num_qubits())?;
            let fidelity = engine::state_fidelity(&sim, &embedded)?;
            let success = match algo {
                Algorithm::Grover => {
                    let bits = parse_bitstring(&marked, n)?;
                    let mut full = vec![false; compact.num_qubits()];
                    for (i, b) in bits.iter().enumerate() {
                        full[positions[i]] = *b;
                    }
                    let target: String = full.iter().map(|b| if *b { '1' } else { '0' }).collect();
                    engine::success_probability(&sim, &target)?
                }
                Algorithm::Qft => fidelity,
            };
            (success, fidelity)
        }
    };

    Ok(ExperimentRecord {
        algorithm: algo.name().into(),
        backend: point.backend.name.clone(),
        connectivity: if args.full_connectivity {
            "full"
        } else {
            "native"
        }
        .into(),
        noise: noise_spec.kind.name().into(),
        noise_strength: noise_spec.strength,
        qubits: n,
        seed: args.seed,
        depth_logical: circuit.depth(),
        depth_transpiled: report.depth_after,
        swaps: report.swaps_inserted,
        success_probability: success,
        fidelity,
        wall_time: t0.elapsed().as_secs_f64(),
    })
}

fn emit_records(
    rows: &[ExperimentRecord],
    output: Option<&Path>,
    format: &str,
) -> anyhow::Result<()> {
    let text = match format {
        "csv" => {
            let mut out = String::from(RECORD_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&r.to_csv_row());
                out.push('\n');
            }
            out
        }
        "json" => serde_json::to_string_pretty(rows)? + "\n",
        other => bail!("unknown format `{other}` (csv or json)"),
    };
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path:?}"))?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct VqcRunDoc {
    noise: String,
    strength: f64,
    learning_rate: f64,
    seed: u64,
    iterations: Vec<VqcIterDoc>,
    predictions: Vec<PredictionDoc>,
}

#[derive(Serialize)]
struct VqcIterDoc {
    iteration: usize,
    x: f64,
    loss: f64,
    theta: Vec<f64>,
}

#[derive(Serialize)]
struct PredictionDoc {
    x: f64,
    prediction: f64,
    target: f64,
}

fn run_vqc(args: VqcArgs) -> anyhow::Result<usize> {
    check_format(&args.format)?;
    let kinds: Vec<NoiseKind> = if args.noise == "all" {
        vec![
            NoiseKind::BitFlip,
            NoiseKind::PhaseFlip,
            NoiseKind::BitPhaseFlip,
            NoiseKind::Depolarizing,
        ]
    } else {
        vec![NoiseKind::from_name(&args.noise)
            .ok_or_else(|| anyhow!("unknown noise kind `{}`", args.noise))?]
    };
    let strengths: Vec<f64> = args
        .strengths
        .split(',')
        .map(|s| s.trim().parse::<f64>().context("invalid strength"))
        .collect::<anyhow::Result<_>>()?;
    std::fs::create_dir_all(&args.output).with_context(|| format!("creating {:?}", args.output))?;

    let mut runs = Vec::new();
    for &kind in &kinds {
        for &p in &strengths {
            runs.push((kind, p));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()?;
    let results: Vec<Result<(), String>> = pool.install(|| {
        runs.par_iter()
            .map(|&(kind, p)| {
                vqc_run(&args, kind, p).map_err(|e| format!("vqc {kind} p={p}: {e:#}"))
            })
            .collect()
    });

    let mut failures = 0;
    for r in results {
        if let Err(msg) = r {
            eprintln!("failed: {msg}");
            failures += 1;
        }
    }
    Ok(failures)
}

fn vqc_run(args: &VqcArgs, kind: NoiseKind, strength: f64) -> anyhow::Result<()> {
    let config = vqc::TrainingConfig {
        iterations: args.iterations,
        learning_rate: args.learning_rate,
        seed: args.seed,
        noise: NoiseSpec::new(kind, strength)?,
        backend: None,
        sample_count: args.samples,
    };
    let trace = vqc::train(&config)?;

    let model = config.noise.build_model(None)?;
    let grid: Vec<f64> = (0..21).map(|i| -1.0 + i as f64 * 0.1).collect();
    let mut predictions = Vec::with_capacity(grid.len());
    for &x in &grid {
        let pred = vqc::predict(x, &trace.final_parameters, model.as_ref())?;
        predictions.push(PredictionDoc {
            x,
            prediction: pred,
            target: x * x,
        });
    }

    let stem = format!("vqc_{}_{}", kind.name(), strength);
    match args.format.as_str() {
        "csv" => {
            let trace_path = args.output.join(format!("{stem}.csv"));
            std::fs::write(&trace_path, trace.to_csv())?;
            let mut pred_csv = String::from("x,prediction,target\n");
            for p in &predictions {
                let _ = writeln!(pred_csv, "{},{},{}", p.x, p.prediction, p.target);
            }
            std::fs::write(
                args.output.join(format!("{stem}_predictions.csv")),
                pred_csv,
            )?;
        }
        "json" => {
            let doc = VqcRunDoc {
                noise: kind.name().into(),
                strength,
                learning_rate: trace.learning_rate,
                seed: trace.seed,
                iterations: trace
                    .records
                    .iter()
                    .map(|r| VqcIterDoc {
                        iteration: r.iteration,
                        x: r.x,
                        loss: r.loss,
                        theta: r.theta.to_vec(),
                    })
                    .collect(),
                predictions,
            };
            std::fs::write(
                args.output.join(format!("{stem}.json")),
                serde_json::to_string_pretty(&doc)? + "\n",
            )?;
        }
        other => bail!("unknown format `{other}`"),
    }
    Ok(())
}

#[derive(Serialize)]
struct TranspileRow {
    backend: String,
    connectivity: String,
    qubits: usize,
    seed: u64,
    depth_logical: usize,
    depth_transpiled: usize,
    swaps: usize,
    gates: usize,
}

fn run_transpile(args: TranspileArgs) -> anyhow::Result<usize> {
    check_format(&args.format)?;
    let circuit = match (&args.circuit, &args.algorithm) {
        (Some(path), None) => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
            Circuit::from_ir(&text)?
        }
        (None, Some(name)) => {
            let n = args
                .qubits
                .ok_or_else(|| anyhow!("--algorithm needs --qubits"))?;
            match name.as_str() {
                "grover" => build_grover(n, &"1".repeat(n))?,
                "qft" => build_qft(n)?,
                other => bail!("unknown algorithm `{other}` (grover or qft)"),
            }
        }
        _ => bail!("provide exactly one of --circuit or --algorithm"),
    };

    let backends = resolve_backends(&args.backend)?;
    if args.emit.is_some() && backends.len() != 1 {
        bail!("--emit needs a single backend");
    }

    let mut rows = Vec::new();
    for b in &backends {
        let spec = if args.full_connectivity {
            b.full_mesh()
        } else {
            b.clone()
        };
        let report = transpiler::transpile(&circuit, &spec, args.seed)?;
        rows.push(TranspileRow {
            backend: b.name.clone(),
            connectivity: if args.full_connectivity {
                "full"
            } else {
                "native"
            }
            .into(),
            qubits: circuit.num_qubits(),
            seed: args.seed,
            depth_logical: report.depth_before,
            depth_transpiled: report.depth_after,
            swaps: report.swaps_inserted,
            gates: report.output.len(),
        });
        if let Some(path) = &args.emit {
            std::fs::write(path, report.output.to_ir())?;
        }
    }

    let text = match args.format.as_str() {
        "csv" => {
            let mut out = String::from(
                "backend,connectivity,qubits,seed,depth_logical,depth_transpiled,swaps,gates\n",
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.backend,
                    r.connectivity,
                    r.qubits,
                    r.seed,
                    r.depth_logical,
                    r.depth_transpiled,
                    r.swaps,
                    r.gates
                );
            }
            out
        }
        "json" => serde_json::to_string_pretty(&rows)? + "\n",
        other => bail!("unknown format `{other}`"),
    };
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct CalibrationRow {
    backend: String,
    arity: usize,
    f_target: f64,
    f_thermal: f64,
    p: f64,
    f_roundtrip: f64,
}

fn run_calibrate(args: CalibrateArgs) -> anyhow::Result<usize> {
    check_format(&args.format)?;
    let backends = resolve_backends(&args.backend)?;
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for b in &backends {
        for (arity, f_target, tg) in [(1usize, b.f1, b.tg1_seconds()), (2, b.f2, b.tg2_seconds())] {
            let single = noise::thermal_relaxation(b.t1_seconds(), b.t2_seconds(), tg)?;
            let thermal = if arity == 1 {
                single.clone()
            } else {
                single.tensor(&single)
            };
            let f_thermal = noise::average_gate_fidelity(&thermal);
            match noise::calibrate_composite(f_target, b.t1_seconds(), b.t2_seconds(), tg, arity) {
                Ok((channel, p)) => rows.push(CalibrationRow {
                    backend: b.name.clone(),
                    arity,
                    f_target,
                    f_thermal,
                    p,
                    f_roundtrip: noise::average_gate_fidelity(&channel),
                }),
                Err(e) => {
                    eprintln!(
                        "{} arity {arity}: infeasible target {f_target} vs thermal-only fidelity \
                         {f_thermal}: {e}",
                        b.name
                    );
                    failures += 1;
                }
            }
        }
    }

    let text = match args.format.as_str() {
        "csv" => {
            let mut out = String::from("backend,arity,f_target,f_thermal,p,f_roundtrip\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.backend, r.arity, r.f_target, r.f_thermal, r.p, r.f_roundtrip
                );
            }
            out
        }
        "json" => serde_json::to_string_pretty(&rows)? + "\n",
        other => bail!("unknown format `{other}`"),
    };
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(failures)
}

fn run_backends(args: BackendsArgs) -> anyhow::Result<usize> {
    match args.action {
        BackendsAction::List => {
            for name in BUILTIN_NAMES {
                let b = hardware::builtin(name)?;
                let gates: Vec<&str> = b.native_gates.iter().map(|k| k.name()).collect();
                println!(
                    "{name}: {} qubits, {} edges ({:.2}% coupling density), gates {{{}}}",
                    b.graph.num_qubits(),
                    b.graph.edge_count(),
                    hardware::coupling_density(&b.graph),
                    gates.join(", ")
                );
            }
        }
        BackendsAction::Inspect { name, save } => {
            let b = resolve_backends(&name)?
                .into_iter()
                .next()
                .ok_or_else(|| anyhow!("no backend"))?;
            print!("{}", hardware::format_backend(&b));
            println!(
                "# coupling density: {:.2}%",
                hardware::coupling_density(&b.graph)
            );
            if let Some(path) = save {
                hardware::save_backend(&b, &path)?;
                eprintln!("saved to {path:?}");
            }
        }
    }
    Ok(0)
}
