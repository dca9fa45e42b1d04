//! Exact density-matrix simulation of a circuit under an optional noise
//! model, plus the scalar result metrics.
//!
//! Evolution starts at |0…0⟩⟨0…0|; each instruction applies its embedded
//! unitary (ρ → UρU†), and, when a noise model is attached and the gate is
//! not virtual, the arity-matching channel (ρ → Σ E ρ E†) on the touched
//! qubits. Operators are never materialized at full 2^n×2^n size: the
//! simulator mixes the affected rows and columns of ρ in place, which is
//! algebraically identical to multiplying by the embedded operator.

use ndarray::Array2;
use num_complex::Complex64;

use crate::circuit::{bitstring_index, parse_bitstring, Circuit};
use crate::gates::{self, GateInstance};
use crate::noise::{KrausChannel, NoiseModel};
use crate::qmath::{ComplexMatrix, DensityMatrix, PureState, C_ONE, C_ZERO};
use crate::{Error, Result};

/// Largest simulable register; a 2^12-dim density matrix is ~16M entries.
pub const MAX_QUBITS: usize = 12;

/// Final state, measurement statistics, and the circuit's depth.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub final_state: DensityMatrix,
    pub probabilities: Vec<f64>,
    pub depth: usize,
}

/// Simulate a circuit exactly. With a noise model, the arity-matching channel
/// follows every non-virtual gate on exactly the gate's qubits; gates of
/// arity ≥ 3 are only simulable noiselessly (transpiled circuits never
/// contain them).
pub fn simulate(c: &Circuit, noise: Option<&NoiseModel>) -> Result<SimulationResult> {
    let n = c.num_qubits();
    if n == 0 {
        return Err(Error::invalid("cannot simulate a zero-qubit circuit"));
    }
    if n > MAX_QUBITS {
        return Err(Error::Resource(format!(
            "{n} qubits exceed the {MAX_QUBITS}-qubit density-matrix limit"
        )));
    }
    let dim = 1usize << n;
    let mut flat = vec![C_ZERO; dim * dim];
    flat[0] = C_ONE;
    // local channel tensors, built once per model
    let superops = noise.map(|nm| {
        (
            ChannelSuperOp::new(&nm.one_qubit),
            ChannelSuperOp::new(&nm.two_qubit),
        )
    });

    for g in c.instructions() {
        apply_instruction(&mut flat, dim, n, g)?;
        if let Some((sup1, sup2)) = &superops {
            if !g.is_virtual() {
                let sup = match g.arity() {
                    1 => sup1,
                    2 => sup2,
                    k => {
                        return Err(Error::invalid(format!(
                            "no noise channel for {k}-qubit gate {}",
                            g.kind
                        )))
                    }
                };
                sup.apply(&mut flat, dim, n, &g.qubits);
            }
        }
        debug_assert!(
            {
                let tr: Complex64 = (0..dim).map(|i| flat[i * dim + i]).sum();
                (tr - C_ONE).norm() < 1e-8
            },
            "trace drifted after {:?}",
            g.kind
        );
    }

    let matrix = Array2::from_shape_vec((dim, dim), flat).expect("shape");
    let final_state = DensityMatrix::new(n, matrix)?;
    let probabilities = checked_probabilities(&final_state)?;
    Ok(SimulationResult {
        final_state,
        probabilities,
        depth: c.depth(),
    })
}

/// Noiseless statevector evolution. This is the reference path for ideal
/// states and oracles; the density-matrix route above stays the primary
/// simulation path.
pub fn simulate_pure(c: &Circuit) -> Result<PureState> {
    let n = c.num_qubits();
    if n == 0 {
        return Err(Error::invalid("cannot simulate a zero-qubit circuit"));
    }
    if n > MAX_QUBITS {
        return Err(Error::Resource(format!(
            "{n} qubits exceed the {MAX_QUBITS}-qubit limit"
        )));
    }
    let dim = 1usize << n;
    let mut amps = vec![C_ZERO; dim];
    amps[0] = C_ONE;
    for g in c.instructions() {
        let locality = GateLocality::prepare(g, n)?;
        locality.apply_to_vector(&mut amps, dim);
    }
    PureState::new(n, amps.into())
}

fn checked_probabilities(state: &DensityMatrix) -> Result<Vec<f64>> {
    let mut sum = 0.0;
    let mut probs = Vec::with_capacity(state.matrix().nrows());
    for z in state.matrix().diag() {
        if z.im.abs() > 1e-10 {
            return Err(Error::invariant(
                "probabilities",
                format!("diagonal entry has imaginary part {}", z.im),
            ));
        }
        probs.push(z.re);
        sum += z.re;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invariant(
            "probabilities",
            format!("sum {sum} deviates from 1"),
        ));
    }
    Ok(probs)
}

/// Probability of measuring the given basis outcome.
pub fn success_probability(r: &SimulationResult, target: &str) -> Result<f64> {
    let n = r.final_state.num_qubits();
    let bits = parse_bitstring(target, n)?;
    Ok(r.probabilities[bitstring_index(&bits)])
}

/// Overlap ⟨ψ|ρ|ψ⟩ with an ideal pure state.
pub fn state_fidelity(r: &SimulationResult, ideal: &PureState) -> Result<f64> {
    if ideal.num_qubits() != r.final_state.num_qubits() {
        return Err(Error::invalid("fidelity dimension mismatch"));
    }
    let rho = r.final_state.matrix();
    let psi = ideal.amplitudes();
    let mut acc = C_ZERO;
    for (i, pi) in psi.iter().enumerate() {
        if *pi == C_ZERO {
            continue;
        }
        for (j, pj) in psi.iter().enumerate() {
            acc += pi.conj() * rho[[i, j]] * pj;
        }
    }
    debug_assert!(acc.im.abs() < 1e-9, "fidelity should be real");
    Ok(acc.re.clamp(0.0, 1.0))
}

/// Tr(ρ·Z_qubit): +1 for |0⟩, −1 for |1⟩ on the measured qubit.
pub fn expectation_z(r: &SimulationResult, qubit: usize) -> Result<f64> {
    let n = r.final_state.num_qubits();
    if qubit >= n {
        return Err(Error::invalid(format!(
            "qubit {qubit} out of range for n={n}"
        )));
    }
    Ok(r.probabilities
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            let bit = crate::qmath::bit_of(idx, qubit, n);
            if bit == 0 {
                p
            } else {
                -p
            }
        })
        .sum())
}

/// Smallest sample count s with s ≥ (1/2ε²)·ln(2/δ) (Höffding bound).
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta {delta} outside (0, 1)")));
    }
    let bound = (2.0 / delta).ln() / (2.0 * epsilon * epsilon);
    Ok(bound.ceil() as u64)
}

/// A gate prepared for local application: its matrix (or diagonal) plus the
/// precomputed index offsets of its target qubits.
struct GateLocality {
    /// Local dimension 2^k.
    m: usize,
    /// Offset of each local basis state within a full index.
    offsets: Vec<usize>,
    /// Target bit positions, ascending, for rest-pattern expansion.
    sorted_shifts: Vec<usize>,
    op: LocalOp,
}

enum LocalOp {
    Diagonal(Vec<Complex64>),
    Matrix(ComplexMatrix),
}

impl GateLocality {
    fn prepare(g: &GateInstance, n: usize) -> Result<Self> {
        let op = match gates::diagonal_of(g) {
            Some(d) => LocalOp::Diagonal(d),
            None => LocalOp::Matrix(gates::unitary_of(g)?),
        };
        Ok(Self::for_targets(op, &g.qubits, n))
    }

    fn for_targets(op: LocalOp, targets: &[usize], n: usize) -> Self {
        let k = targets.len();
        let m = 1usize << k;
        let shifts: Vec<usize> = targets.iter().map(|&q| n - 1 - q).collect();
        let mut offsets = vec![0usize; m];
        for (local, off) in offsets.iter_mut().enumerate() {
            for (j, &shift) in shifts.iter().enumerate() {
                if (local >> (k - 1 - j)) & 1 == 1 {
                    *off |= 1 << shift;
                }
            }
        }
        let mut sorted_shifts = shifts;
        sorted_shifts.sort_unstable();
        Self {
            m,
            offsets,
            sorted_shifts,
            op,
        }
    }

    /// Full index with the target bits cleared, for the `rest`-th pattern of
    /// the remaining bits.
    #[inline]
    fn expand_rest(&self, rest: usize) -> usize {
        let mut idx = rest;
        for &p in &self.sorted_shifts {
            let low = idx & ((1usize << p) - 1);
            idx = ((idx >> p) << (p + 1)) | low;
        }
        idx
    }

    fn apply_to_vector(&self, amps: &mut [Complex64], dim: usize) {
        match &self.op {
            LocalOp::Diagonal(d) => {
                for (idx, a) in amps.iter_mut().enumerate() {
                    *a *= d[self.local_index(idx)];
                }
            }
            LocalOp::Matrix(u) => {
                let m = self.m;
                let mut gathered = vec![C_ZERO; m];
                for rest in 0..(dim >> self.sorted_shifts.len()) {
                    let base = self.expand_rest(rest);
                    for (j, g) in gathered.iter_mut().enumerate() {
                        *g = amps[base | self.offsets[j]];
                    }
                    for j in 0..m {
                        let mut acc = C_ZERO;
                        for (mm, g) in gathered.iter().enumerate() {
                            acc += u[[j, mm]] * g;
                        }
                        amps[base | self.offsets[j]] = acc;
                    }
                }
            }
        }
    }

    /// Local basis index of a full index (bits at the target positions).
    #[inline]
    fn local_index(&self, idx: usize) -> usize {
        let k = self.offsets.len().trailing_zeros() as usize;
        let mut local = 0usize;
        // offsets[1 << (k-1-j)] is the single-bit mask of target j
        for j in 0..k {
            let mask = self.offsets[1 << (k - 1 - j)];
            if idx & mask != 0 {
                local |= 1 << (k - 1 - j);
            }
        }
        local
    }

    /// ρ ← M_emb · ρ (mix rows).
    fn apply_left(&self, flat: &mut [Complex64], dim: usize, scratch: &mut Vec<Complex64>) {
        let LocalOp::Matrix(u) = &self.op else {
            unreachable!("diagonal ops use apply_diagonal");
        };
        let m = self.m;
        scratch.resize(m * dim, C_ZERO);
        for rest in 0..(dim >> self.sorted_shifts.len()) {
            let base = self.expand_rest(rest);
            for j in 0..m {
                let row = (base | self.offsets[j]) * dim;
                scratch[j * dim..(j + 1) * dim].copy_from_slice(&flat[row..row + dim]);
            }
            for j in 0..m {
                let row = (base | self.offsets[j]) * dim;
                let out = &mut flat[row..row + dim];
                for (col, o) in out.iter_mut().enumerate() {
                    let mut acc = C_ZERO;
                    for mm in 0..m {
                        acc += u[[j, mm]] * scratch[mm * dim + col];
                    }
                    *o = acc;
                }
            }
        }
    }

    /// ρ ← ρ · M_emb† (mix columns).
    fn apply_right_dagger(&self, flat: &mut [Complex64], dim: usize) {
        let LocalOp::Matrix(u) = &self.op else {
            unreachable!("diagonal ops use apply_diagonal");
        };
        let m = self.m;
        let mut gathered = vec![C_ZERO; m];
        for row in 0..dim {
            let slice = &mut flat[row * dim..(row + 1) * dim];
            for rest in 0..(dim >> self.sorted_shifts.len()) {
                let base = self.expand_rest(rest);
                for (mm, g) in gathered.iter_mut().enumerate() {
                    *g = slice[base | self.offsets[mm]];
                }
                for j in 0..m {
                    let mut acc = C_ZERO;
                    for (mm, g) in gathered.iter().enumerate() {
                        acc += g * u[[j, mm]].conj();
                    }
                    slice[base | self.offsets[j]] = acc;
                }
            }
        }
    }

    /// ρ ← D_emb ρ D_emb† for a diagonal operator.
    fn apply_diagonal(&self, flat: &mut [Complex64], dim: usize, factors: &mut Vec<Complex64>) {
        let LocalOp::Diagonal(d) = &self.op else {
            unreachable!("matrix ops use apply_left/right");
        };
        factors.clear();
        factors.extend((0..dim).map(|idx| d[self.local_index(idx)]));
        for row in 0..dim {
            let fr = factors[row];
            let slice = &mut flat[row * dim..(row + 1) * dim];
            for (col, v) in slice.iter_mut().enumerate() {
                *v *= fr * factors[col].conj();
            }
        }
    }
}

fn apply_instruction(flat: &mut [Complex64], dim: usize, n: usize, g: &GateInstance) -> Result<()> {
    let locality = GateLocality::prepare(g, n)?;
    match locality.op {
        LocalOp::Diagonal(_) => {
            let mut factors = Vec::new();
            locality.apply_diagonal(flat, dim, &mut factors);
        }
        LocalOp::Matrix(_) => {
            let mut scratch = Vec::new();
            locality.apply_left(flat, dim, &mut scratch);
            locality.apply_right_dagger(flat, dim);
        }
    }
    Ok(())
}

/// The channel Σ_k E_k ρ E_k† collapsed into a tensor over the doubled
/// local index of the target qubits: S[(j,m),(j',m')] = Σ_k E_k[j,j']·
/// conj(E_k[m,m']). Applying S to each (row-rest, col-rest) block of ρ is
/// algebraically identical to the embedded Kraus sum but touches the full
/// matrix once; the tensor itself is at most 16×16.
struct ChannelSuperOp {
    /// Channel arity.
    k: usize,
    /// 4^k local index pairs.
    pairs: usize,
    s: Vec<Complex64>,
}

impl ChannelSuperOp {
    fn new(ch: &KrausChannel) -> Self {
        let ld = ch.dim();
        let pairs = ld * ld;
        let mut s = vec![C_ZERO; pairs * pairs];
        for op in ch.operators() {
            for j in 0..ld {
                for jp in 0..ld {
                    let e = op[[j, jp]];
                    if e == C_ZERO {
                        continue;
                    }
                    for m in 0..ld {
                        for mp in 0..ld {
                            s[(j * ld + m) * pairs + (jp * ld + mp)] += e * op[[m, mp]].conj();
                        }
                    }
                }
            }
        }
        Self {
            k: ch.num_qubits(),
            pairs,
            s,
        }
    }

    fn apply(&self, flat: &mut [Complex64], dim: usize, n: usize, targets: &[usize]) {
        debug_assert_eq!(targets.len(), self.k);
        let ld = 1usize << self.k;
        let locality = GateLocality::for_targets(LocalOp::Diagonal(vec![C_ONE; ld]), targets, n);
        let offsets = &locality.offsets;
        let rests = dim >> self.k;
        let mut gathered = vec![C_ZERO; self.pairs];
        let mut emitted = vec![C_ZERO; self.pairs];
        for rr in 0..rests {
            let base_r = locality.expand_rest(rr);
            for cc in 0..rests {
                let base_c = locality.expand_rest(cc);
                for jp in 0..ld {
                    let row = (base_r | offsets[jp]) * dim;
                    for mp in 0..ld {
                        gathered[jp * ld + mp] = flat[row + (base_c | offsets[mp])];
                    }
                }
                for (out, e) in emitted.iter_mut().enumerate() {
                    let mut acc = C_ZERO;
                    let row = &self.s[out * self.pairs..(out + 1) * self.pairs];
                    for (sv, gv) in row.iter().zip(gathered.iter()) {
                        acc += sv * gv;
                    }
                    *e = acc;
                }
                for j in 0..ld {
                    let row = (base_r | offsets[j]) * dim;
                    for m in 0..ld {
                        flat[row + (base_c | offsets[m])] = emitted[j * ld + m];
                    }
                }
            }
        }
    }
}
