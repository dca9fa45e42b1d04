//! Quantum noise channels in Kraus form, channel fidelities, and the
//! hardware-matched composite calibration.
//!
//! Every channel is a CPTP map given as operators E_k with Σ E_k†E_k = 1;
//! applying it sends ρ to Σ E_k ρ E_k†. The composite model attaches one
//! channel per gate arity: a depolarizing channel composed after thermal
//! relaxation, with the depolarizing strength solved so the channel's average
//! gate fidelity matches the vendor's reported values.

use ndarray::Array2;
use num_complex::Complex64;

use crate::hardware::BackendSpec;
use crate::qmath::{
    self, dagger, hermitian_eigen, identity, max_abs_diff, tensor_product, trace, ComplexMatrix,
    C_ONE, C_ZERO,
};
use crate::{Error, Result};

/// Completeness tolerance for Σ E†E = 1.
pub const TOL_COMPLETENESS: f64 = 1e-9;

/// A completely-positive trace-preserving map as a finite list of Kraus
/// operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    num_qubits: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::invalid("channel needs at least one Kraus operator"))?;
        let dim = first.nrows();
        let num_qubits = qmath::qubits_of_dim(dim)
            .filter(|_| first.ncols() == dim)
            .ok_or_else(|| {
                Error::invalid("Kraus operators must be square with power-of-two dimension")
            })?;
        if operators.iter().any(|op| op.dim() != (dim, dim)) {
            return Err(Error::invalid("Kraus operators differ in dimension"));
        }
        let ch = Self {
            num_qubits,
            operators,
        };
        let defect = ch.completeness_defect();
        if defect > TOL_COMPLETENESS {
            return Err(Error::invariant(
                "operators",
                format!("completeness defect {defect:.3e} exceeds {TOL_COMPLETENESS:.0e}"),
            ));
        }
        Ok(ch)
    }

    pub fn identity_channel(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            operators: vec![identity(1 << num_qubits)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// ‖Σ E†E − 1‖_max.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let mut sum = Array2::from_elem((dim, dim), C_ZERO);
        for op in &self.operators {
            sum = sum + dagger(op).dot(op);
        }
        max_abs_diff(&sum, &identity(dim))
    }

    /// Apply the channel to a full-dimension density matrix: Σ E ρ E†.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let dim = self.dim();
        assert_eq!(rho.dim(), (dim, dim), "state dimension mismatch");
        let mut out = Array2::from_elem((dim, dim), C_ZERO);
        for op in &self.operators {
            out = out + op.dot(rho).dot(&dagger(op));
        }
        out
    }

    /// Sequential composition: `outer ∘ inner`, inner applied first.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if outer.num_qubits != inner.num_qubits {
            return Err(Error::invalid("composed channels must share arity"));
        }
        let operators = outer
            .operators
            .iter()
            .flat_map(|o| inner.operators.iter().map(move |i| o.dot(i)))
            .collect();
        Ok(Self {
            num_qubits: outer.num_qubits,
            operators,
        })
    }

    /// Independent channels on two registers; `self` takes the more
    /// significant qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let operators = self
            .operators
            .iter()
            .flat_map(|a| other.operators.iter().map(move |b| tensor_product(a, b)))
            .collect();
        Self {
            num_qubits: self.num_qubits + other.num_qubits,
            operators,
        }
    }

    /// Choi matrix J with `J[(a,i),(b,j)] = Σ_k E_k[a,i]·conj(E_k[b,j])`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut j = Array2::from_elem((d * d, d * d), C_ZERO);
        for op in &self.operators {
            for a in 0..d {
                for i in 0..d {
                    let left = op[[a, i]];
                    if left == C_ZERO {
                        continue;
                    }
                    for b in 0..d {
                        for jj in 0..d {
                            j[[a * d + i, b * d + jj]] += left * op[[b, jj]].conj();
                        }
                    }
                }
            }
        }
        j
    }

    /// Rebuild the channel from a Choi matrix by eigendecomposition; the
    /// result has at most d² operators.
    pub fn from_choi(num_qubits: usize, choi: &ComplexMatrix) -> Result<Self> {
        let d = 1usize << num_qubits;
        if choi.dim() != (d * d, d * d) {
            return Err(Error::invalid("Choi matrix dimension mismatch"));
        }
        let (vals, vecs) = hermitian_eigen(choi);
        let mut operators = Vec::new();
        for (idx, &lambda) in vals.iter().enumerate() {
            if lambda < -1e-10 {
                return Err(Error::invalid(format!(
                    "Choi matrix has negative eigenvalue {lambda:.3e}; map is not CP"
                )));
            }
            if lambda <= 1e-12 {
                continue;
            }
            let scale = Complex64::new(lambda.sqrt(), 0.0);
            let mut op = Array2::from_elem((d, d), C_ZERO);
            for a in 0..d {
                for i in 0..d {
                    op[[a, i]] = scale * vecs[[a * d + i, idx]];
                }
            }
            operators.push(op);
        }
        Self::new(operators)
    }

    /// Equivalent channel with a minimal Kraus set (≤ d² operators); the
    /// action is unchanged.
    pub fn reduced(&self) -> Result<Self> {
        Self::from_choi(self.num_qubits, &self.choi())
    }
}

/// Applies Pauli X with probability p: {√(1−p)·1, √p·X}.
pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    pauli_mix_channel(p, crate::gates::GateKind::X)
}

/// Applies Pauli Z with probability p.
pub fn phase_flip(p: f64) -> Result<KrausChannel> {
    pauli_mix_channel(p, crate::gates::GateKind::Z)
}

/// Applies Pauli Y with probability p.
pub fn bit_phase_flip(p: f64) -> Result<KrausChannel> {
    pauli_mix_channel(p, crate::gates::GateKind::Y)
}

fn pauli_mix_channel(p: f64, kind: crate::gates::GateKind) -> Result<KrausChannel> {
    check_probability(p)?;
    let pauli = crate::gates::kind_matrix(kind, &[])?;
    let keep = identity(2).mapv(|z| z * (1.0 - p).sqrt());
    let flip = pauli.mapv(|z| z * p.sqrt());
    KrausChannel::new(vec![keep, flip])
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// The four single-qubit Pauli matrices 1, X, Y, Z.
fn pauli_basis_1q() -> [ComplexMatrix; 4] {
    use crate::gates::{kind_matrix, GateKind};
    [
        identity(2),
        kind_matrix(GateKind::X, &[]).unwrap(),
        kind_matrix(GateKind::Y, &[]).unwrap(),
        kind_matrix(GateKind::Z, &[]).unwrap(),
    ]
}

/// n-qubit depolarizing channel: ρ ↦ (1−p)ρ + p·2^{−n}·1, realized as the
/// uniform Pauli-string Kraus set.
pub fn depolarizing(p: f64, n: usize) -> Result<KrausChannel> {
    check_probability(p)?;
    if !(1..=2).contains(&n) {
        return Err(Error::invalid(format!(
            "depolarizing arity {n} outside {{1, 2}}"
        )));
    }
    let singles = pauli_basis_1q();
    let strings: Vec<ComplexMatrix> = if n == 1 {
        singles.to_vec()
    } else {
        singles
            .iter()
            .flat_map(|a| singles.iter().map(move |b| tensor_product(a, b)))
            .collect()
    };
    let count = strings.len() as f64; // 4^n
    let w_other = p / count;
    let w_identity = 1.0 - p + w_other;
    let mut operators = Vec::with_capacity(strings.len());
    for (i, s) in strings.into_iter().enumerate() {
        let w = if i == 0 { w_identity } else { w_other };
        if w <= 0.0 {
            continue;
        }
        operators.push(s.mapv(|z| z * w.sqrt()));
    }
    KrausChannel::new(operators)
}

/// Average fidelity of the n-qubit depolarizing channel: 1 − p(1 − 2^{−n}).
pub fn depolarizing_fidelity(p: f64, n: usize) -> f64 {
    1.0 - p * (1.0 - 0.5f64.powi(n as i32))
}

/// Single-qubit thermal relaxation over `t_gate`: populations decay toward
/// |0⟩ with rate 1/T1, coherences with rate 1/T2. Valid (CPTP) exactly when
/// T2 ≤ 2·T1, which covers devices with T2 > T1; the Kraus operators come
/// from the channel's Choi matrix.
pub fn thermal_relaxation(t1: f64, t2: f64, t_gate: f64) -> Result<KrausChannel> {
    if t1.is_nan() || t1 <= 0.0 {
        return Err(Error::invalid(format!("T1 {t1} must be positive")));
    }
    if t2.is_nan() || t2 <= 0.0 {
        return Err(Error::invalid(format!("T2 {t2} must be positive")));
    }
    if t2 > 2.0 * t1 {
        return Err(Error::invalid(format!(
            "T2 {t2} exceeds 2·T1 {}; map would not be CPTP",
            2.0 * t1
        )));
    }
    if t_gate.is_nan() || t_gate < 0.0 {
        return Err(Error::invalid(format!(
            "gate time {t_gate} must be non-negative"
        )));
    }
    let e1 = (-t_gate / t1).exp();
    let e2 = (-t_gate / t2).exp();
    let gamma = 1.0 - e1;
    // Choi indices (a,i) with a the output row: basis |00⟩,|01⟩,|10⟩,|11⟩
    let mut choi = Array2::from_elem((4, 4), C_ZERO);
    choi[[0, 0]] = C_ONE;
    choi[[0, 3]] = Complex64::new(e2, 0.0);
    choi[[3, 0]] = Complex64::new(e2, 0.0);
    choi[[1, 1]] = Complex64::new(gamma, 0.0);
    choi[[3, 3]] = Complex64::new(1.0 - gamma, 0.0);
    KrausChannel::from_choi(1, &choi)
}

/// Average gate fidelity over Haar-distributed pure inputs, via the process
/// fidelity: F_avg = (d·F_pro + 1)/(d + 1) with F_pro = Σ|Tr E_k|²/d².
pub fn average_gate_fidelity(ch: &KrausChannel) -> f64 {
    let d = ch.dim() as f64;
    let f_pro: f64 = ch
        .operators()
        .iter()
        .map(|op| trace(op).norm_sqr())
        .sum::<f64>()
        / (d * d);
    (d * f_pro + 1.0) / (d + 1.0)
}

/// Composite channel E_D ∘ E_R (thermal relaxation first, then n-qubit
/// depolarizing) with the depolarizing strength solved from
/// p = (F_R − F_targ)/(F_R − 2^{−n}), so the result's average gate fidelity
/// equals `f_target`. Returns the reduced channel and the solved p.
pub fn calibrate_composite(
    f_target: f64,
    t1: f64,
    t2: f64,
    t_gate: f64,
    n: usize,
) -> Result<(KrausChannel, f64)> {
    if !(1..=2).contains(&n) {
        return Err(Error::invalid(format!(
            "composite arity {n} outside {{1, 2}}"
        )));
    }
    let floor = 0.5f64.powi(n as i32);
    if f_target.is_nan() || f_target <= floor {
        return Err(Error::invalid(format!(
            "target fidelity {f_target} must exceed the depolarized floor {floor}"
        )));
    }
    let single = thermal_relaxation(t1, t2, t_gate)?;
    let thermal = if n == 1 {
        single.clone()
    } else {
        single.tensor(&single)
    };
    let f_r = average_gate_fidelity(&thermal);
    if f_target > f_r + 1e-12 {
        return Err(Error::Infeasible(format!(
            "thermal relaxation alone has fidelity {f_r:.8}, below the target {f_target}"
        )));
    }
    let p = ((f_r - f_target) / (f_r - floor)).max(0.0);
    let depol = depolarizing(p, n)?;
    let channel = KrausChannel::compose(&depol, &thermal)?.reduced()?;
    Ok((channel, p))
}

/// Per-arity noise: one channel after every non-virtual 1-qubit gate, another
/// after every 2-qubit gate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub one_qubit: KrausChannel,
    pub two_qubit: KrausChannel,
}

impl NoiseModel {
    pub fn new(one_qubit: KrausChannel, two_qubit: KrausChannel) -> Result<Self> {
        if one_qubit.num_qubits() != 1 || two_qubit.num_qubits() != 2 {
            return Err(Error::invalid(
                "noise model channels must have arity 1 and 2",
            ));
        }
        Ok(Self {
            one_qubit,
            two_qubit,
        })
    }

    pub fn channel_for_arity(&self, arity: usize) -> Option<&KrausChannel> {
        match arity {
            1 => Some(&self.one_qubit),
            2 => Some(&self.two_qubit),
            _ => None,
        }
    }
}

/// Noise model calibrated to a backend's reported metrics: the 1-qubit
/// channel matches F1 over duration TG1, the 2-qubit channel matches F2 over
/// TG2 (two-qubit thermal relaxation is the tensor product of independent
/// per-qubit channels).
pub fn build_native_model(backend: &BackendSpec) -> Result<NoiseModel> {
    let (one, _) = calibrate_composite(
        backend.f1,
        backend.t1_seconds(),
        backend.t2_seconds(),
        backend.tg1_seconds(),
        1,
    )?;
    let (two, _) = calibrate_composite(
        backend.f2,
        backend.t1_seconds(),
        backend.t2_seconds(),
        backend.tg2_seconds(),
        2,
    )?;
    NoiseModel::new(one, two)
}

/// The noise variants selectable in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    Depolarizing,
    Thermal,
    NativeComposite,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::BitFlip => "bitflip",
            NoiseKind::PhaseFlip => "phaseflip",
            NoiseKind::BitPhaseFlip => "bitphaseflip",
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Thermal => "thermal",
            NoiseKind::NativeComposite => "native",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "none" => Some(NoiseKind::None),
            "bitflip" | "bit_flip" => Some(NoiseKind::BitFlip),
            "phaseflip" | "phase_flip" => Some(NoiseKind::PhaseFlip),
            "bitphaseflip" | "bit_phase_flip" => Some(NoiseKind::BitPhaseFlip),
            "depolarizing" => Some(NoiseKind::Depolarizing),
            "thermal" => Some(NoiseKind::Thermal),
            "native" | "native_composite" => Some(NoiseKind::NativeComposite),
            _ => None,
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A noise selection: which channel family, and its strength where one
/// applies (ignored for thermal and native noise, which take their parameters
/// from a backend).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub strength: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            strength: 0.0,
        }
    }

    pub fn new(kind: NoiseKind, strength: f64) -> Result<Self> {
        check_probability(strength)?;
        Ok(Self { kind, strength })
    }

    /// Materialize the channels. Elementary single-qubit kinds act on both
    /// qubits of a two-qubit gate as a tensor product; depolarizing noise on
    /// a two-qubit gate is the joint channel. Thermal and native noise need a
    /// backend for T1/T2/F/TG.
    pub fn build_model(&self, backend: Option<&BackendSpec>) -> Result<Option<NoiseModel>> {
        let p = self.strength;
        let model = match self.kind {
            NoiseKind::None => return Ok(None),
            NoiseKind::BitFlip => single_kind_model(bit_flip(p)?)?,
            NoiseKind::PhaseFlip => single_kind_model(phase_flip(p)?)?,
            NoiseKind::BitPhaseFlip => single_kind_model(bit_phase_flip(p)?)?,
            NoiseKind::Depolarizing => NoiseModel::new(depolarizing(p, 1)?, depolarizing(p, 2)?)?,
            NoiseKind::Thermal => {
                let b = backend
                    .ok_or_else(|| Error::invalid("thermal noise needs a backend for T1/T2/TG"))?;
                let one = thermal_relaxation(b.t1_seconds(), b.t2_seconds(), b.tg1_seconds())?;
                let two_single =
                    thermal_relaxation(b.t1_seconds(), b.t2_seconds(), b.tg2_seconds())?;
                NoiseModel::new(one, two_single.tensor(&two_single))?
            }
            NoiseKind::NativeComposite => {
                let b = backend.ok_or_else(|| {
                    Error::invalid("native noise needs a backend for its metrics")
                })?;
                build_native_model(b)?
            }
        };
        Ok(Some(model))
    }
}

fn single_kind_model(one: KrausChannel) -> Result<NoiseModel> {
    let two = one.tensor(&one);
    NoiseModel::new(one, two)
}
