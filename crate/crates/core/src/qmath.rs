//! Dense complex linear algebra for density-matrix simulation.
//!
//! Everything here follows one fixed bit-ordering convention: **qubit 0 is the
//! most significant bit** of a basis-state index. The basis state |q0 q1 … q(n-1)⟩
//! has index Σ qi · 2^(n-1-i), and `tensor_product(a, b)` places `a` on the more
//! significant qubits. Matrices are dense and row-major; the target scale is
//! n ≤ 12 (a 4096×4096 density matrix).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix; the working representation for unitaries, Kraus
/// operators and density matrices.
pub type ComplexMatrix = Array2<Complex64>;

/// Tolerance for structural checks (Hermiticity, unit trace, unit norm, unitarity).
pub const TOL_STRUCTURAL: f64 = 1e-10;

/// Eigenvalue floor for positive-semidefiniteness; slack absorbs accumulated
/// floating-point error over deep circuits.
pub const TOL_EIGEN_FLOOR: f64 = -1e-9;

pub(crate) const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Identity matrix of the given dimension.
pub fn identity(dim: usize) -> ComplexMatrix {
    Array2::from_diag_elem(dim, C_ONE)
}

/// Conjugate transpose.
pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.t().mapv(|z| z.conj())
}

/// Matrix trace.
pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diag().sum()
}

/// Largest entrywise absolute difference between two equal-shaped matrices.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product; qubit 0 lives in the left (more significant) factor.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ndarray::linalg::kron(a, b)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            if (m[[i, j]] - m[[j, i]].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let prod = m.dot(&dagger(m));
    max_abs_diff(&prod, &identity(m.nrows())) <= tol
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Number of qubits for a 2^n-dimensional square matrix.
pub(crate) fn qubits_of_dim(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() && dim > 0 {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Bit value of qubit `q` in basis index `idx` for an `n`-qubit register
/// (qubit 0 = most significant bit).
#[inline]
pub(crate) fn bit_of(idx: usize, q: usize, n: usize) -> usize {
    (idx >> (n - 1 - q)) & 1
}

/// Lift a k-qubit unitary to the full 2^n space, acting as `u` on `targets`
/// (`targets[0]` is the most significant qubit of `u`'s own index space) and as
/// identity elsewhere.
pub fn embed_gate(u: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix> {
    let k = targets.len();
    let udim = 1usize << k;
    if u.nrows() != udim || u.ncols() != udim {
        return Err(Error::invalid(format!(
            "operator dimension {}x{} does not match {} target qubit(s)",
            u.nrows(),
            u.ncols(),
            k
        )));
    }
    if !is_unitary(u, TOL_STRUCTURAL) {
        return Err(Error::invalid("operator is not unitary"));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::invalid(format!(
                "target qubit {t} out of range for n={n}"
            )));
        }
        if targets[..i].contains(&t) {
            return Err(Error::invalid(format!("duplicate target qubit {t}")));
        }
    }

    let dim = 1usize << n;
    let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let mut out = Array2::from_elem((dim, dim), C_ZERO);
    for rest_bits in 0..(1usize << rest.len()) {
        // base index with all target bits zero
        let mut base = 0usize;
        for (i, &q) in rest.iter().enumerate() {
            let bit = (rest_bits >> (rest.len() - 1 - i)) & 1;
            base |= bit << (n - 1 - q);
        }
        for j in 0..udim {
            let row = base | scatter_bits(j, targets, n);
            for m in 0..udim {
                let col = base | scatter_bits(m, targets, n);
                out[[row, col]] = u[[j, m]];
            }
        }
    }
    Ok(out)
}

/// Place the k bits of `local` (MSB first) at the qubit positions in `targets`.
#[inline]
pub(crate) fn scatter_bits(local: usize, targets: &[usize], n: usize) -> usize {
    let k = targets.len();
    let mut out = 0usize;
    for (j, &q) in targets.iter().enumerate() {
        let bit = (local >> (k - 1 - j)) & 1;
        out |= bit << (n - 1 - q);
    }
    out
}

/// A pure n-qubit state: unit-norm complex amplitude vector of length 2^n.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Array1<Complex64>,
}

impl PureState {
    pub fn new(num_qubits: usize, amplitudes: Array1<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::invalid(format!(
                "amplitude vector length {} does not match {} qubit(s)",
                amplitudes.len(),
                num_qubits
            )));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL_STRUCTURAL {
            return Err(Error::invariant("amplitudes", format!("norm {norm} != 1")));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state |index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = Array1::from_elem(1 << num_qubits, C_ZERO);
        amps[index] = C_ONE;
        Self {
            num_qubits,
            amplitudes: amps,
        }
    }

    /// |0…0⟩.
    pub fn ground(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    /// Apply a unitary to the full state vector.
    pub fn evolved(&self, u: &ComplexMatrix) -> Self {
        Self {
            num_qubits: self.num_qubits,
            amplitudes: u.dot(&self.amplitudes),
        }
    }

    /// Lift this state onto a wider `m`-qubit register: qubit `i` of `self`
    /// goes to position `positions[i]`, every other qubit is |0⟩.
    pub fn embed(&self, positions: &[usize], m: usize) -> Result<Self> {
        if positions.len() != self.num_qubits {
            return Err(Error::invalid("positions length must match qubit count"));
        }
        let mut amps = Array1::from_elem(1usize << m, C_ZERO);
        for (idx, &a) in self.amplitudes.iter().enumerate() {
            amps[scatter_bits(idx, positions, m)] = a;
        }
        PureState::new(m, amps)
    }
}

/// An n-qubit density matrix: Hermitian, unit-trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Construct with full invariant validation.
    pub fn new(num_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self { num_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Construct without validation; for internal evolution steps where the
    /// invariants hold by construction.
    pub(crate) fn new_unchecked(num_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { num_qubits, matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let n = state.num_qubits();
        let dim = 1usize << n;
        let amps = state.amplitudes();
        let mut m = Array2::from_elem((dim, dim), C_ZERO);
        for i in 0..dim {
            for j in 0..dim {
                m[[i, j]] = amps[i] * amps[j].conj();
            }
        }
        Self {
            num_qubits: n,
            matrix: m,
        }
    }

    /// |0…0⟩⟨0…0|.
    pub fn ground(num_qubits: usize) -> Self {
        Self::from_pure(&PureState::ground(num_qubits))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Check all three invariants: Hermiticity and unit trace at 1e-10,
    /// smallest eigenvalue ≥ −1e-9.
    pub fn validate(&self) -> Result<()> {
        let dim = 1usize << self.num_qubits;
        if self.matrix.nrows() != dim || self.matrix.ncols() != dim {
            return Err(Error::invariant("matrix", "dimension != 2^n"));
        }
        if !all_finite(&self.matrix) {
            return Err(Error::invariant("matrix", "non-finite entries"));
        }
        if !is_hermitian(&self.matrix, TOL_STRUCTURAL) {
            return Err(Error::invariant("matrix", "not Hermitian"));
        }
        let tr = trace(&self.matrix);
        if (tr - C_ONE).norm() > TOL_STRUCTURAL {
            return Err(Error::invariant("matrix", format!("trace {tr} != 1")));
        }
        if !psd_within(&self.matrix, TOL_EIGEN_FLOOR) {
            return Err(Error::invariant("matrix", "not positive semidefinite"));
        }
        Ok(())
    }

    /// Diagonal of ρ as real outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }
}

/// Trace out every qubit not in `keep`; the kept qubits stay in ascending
/// index order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    if keep.is_empty() {
        return Err(Error::invalid("keep set must be nonempty"));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&q| q >= n) {
        return Err(Error::invalid("keep qubit out of range"));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let dim_out = 1usize << k;
    let mut out = Array2::from_elem((dim_out, dim_out), C_ZERO);
    let m = rho.matrix();
    for a in 0..dim_out {
        let arow = scatter_bits(a, &keep, n);
        for b in 0..dim_out {
            let bcol = scatter_bits(b, &keep, n);
            let mut acc = C_ZERO;
            for t in 0..(1usize << traced.len()) {
                let tbits = scatter_bits(t, &traced, n);
                acc += m[[arow | tbits, bcol | tbits]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok(DensityMatrix::new_unchecked(k, out))
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching unit eigenvectors
/// as columns, so that `A · V = V · diag(λ)`.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    debug_assert!(is_hermitian(a, 1e-8), "matrix must be Hermitian");
    let mut m = a.clone();
    let mut v = identity(n);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[[p, q]].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let tau = (aqq - app) / (2.0 * r);
                // smaller-magnitude root of t² − 2τt − 1 = 0
                let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J: col p ← c·e_p + s·conj(phase)·e_q, col q ← −s·phase·e_p + c·e_q
                let sp = Complex64::new(s, 0.0) * phase.conj();
                let sq = Complex64::new(s, 0.0) * phase;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = Complex64::new(c, 0.0) * mkp + sp * mkq;
                    m[[k, q]] = -sq * mkp + Complex64::new(c, 0.0) * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = Complex64::new(c, 0.0) * mpk + sp.conj() * mqk;
                    m[[q, k]] = -sq.conj() * mpk + Complex64::new(c, 0.0) * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = Complex64::new(c, 0.0) * vkp + sp * vkq;
                    v[[k, q]] = -sq * vkp + Complex64::new(c, 0.0) * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.partial_cmp(&m[[j, j]].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[[i, i]].re).collect();
    let mut vecs = Array2::from_elem((n, n), C_ZERO);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vecs[[k, new_col]] = v[[k, old_col]];
        }
    }
    (vals, vecs)
}

/// True when every eigenvalue of the Hermitian matrix is ≥ `floor`.
/// Small matrices go through the Jacobi solver; larger ones use a shifted
/// Cholesky factorization, which tests the same bound without a full
/// eigendecomposition.
pub fn psd_within(m: &ComplexMatrix, floor: f64) -> bool {
    debug_assert!(floor <= 0.0);
    if m.nrows() <= 64 {
        let (vals, _) = hermitian_eigen(m);
        vals.first().is_none_or(|&lo| lo >= floor)
    } else {
        cholesky_succeeds(m, -floor)
    }
}

/// Attempt the Cholesky factorization of m + shift·I; succeeds iff the shifted
/// matrix is positive (semi)definite up to roundoff.
fn cholesky_succeeds(m: &ComplexMatrix, shift: f64) -> bool {
    let n = m.nrows();
    let mut l = Array2::from_elem((n, n), C_ZERO);
    for j in 0..n {
        let mut d = m[[j, j]].re + shift;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        // tiny negative pivots are roundoff at the tolerance boundary
        if d < -1e-12 {
            return false;
        }
        let ljj = d.max(0.0).sqrt();
        l[[j, j]] = Complex64::new(ljj, 0.0);
        if ljj == 0.0 {
            continue;
        }
        for i in (j + 1)..n {
            let mut acc = m[[i, j]]
                + if i == j {
                    Complex64::new(shift, 0.0)
                } else {
                    C_ZERO
                };
            for k in 0..j {
                acc -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = acc / ljj;
        }
    }
    true
}
