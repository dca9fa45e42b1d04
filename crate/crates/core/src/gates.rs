//! Gate catalog: matrices, arities and parameter counts for the logical gate
//! set used by the algorithm builders and for every vendor-native gate.
//!
//! Matrix conventions for the vendor gates the literature names but does not
//! define are pinned here and documented as conventions:
//! GPi(φ) = [[0, e^{−iφ}], [e^{iφ}, 0]], GPi2(φ) = (1/√2)[[1, −i e^{−iφ}],
//! [−i e^{iφ}, 1]] (IonQ's published forms), XY(θ) is the parameterized
//! iSWAP family per Rigetti, and MS is the fixed maximally-entangling
//! XX(π/4) gate. Two-qubit gates put the control on `qubits[0]`, the more
//! significant bit of the gate's own index space.

use ndarray::Array2;
use num_complex::Complex64;

use crate::qmath::{ComplexMatrix, C_ONE, C_ZERO};
use crate::{Error, Result};

/// Gate arity; MCZ is the one catalog entry whose qubit count is per-instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Fixed(usize),
    /// At least this many qubits (multi-controlled Z).
    AtLeast(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    Sx,
    H,
    Y,
    Z,
    Rx,
    Ry,
    Rz,
    P,
    Cx,
    Cz,
    Cp,
    Xy,
    Swap,
    Ms,
    GPi,
    GPi2,
    Mcz,
}

impl GateKind {
    pub const ALL: [GateKind; 18] = [
        GateKind::X,
        GateKind::Sx,
        GateKind::H,
        GateKind::Y,
        GateKind::Z,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::P,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Cp,
        GateKind::Xy,
        GateKind::Swap,
        GateKind::Ms,
        GateKind::GPi,
        GateKind::GPi2,
        GateKind::Mcz,
    ];

    pub fn arity(self) -> Arity {
        match self {
            GateKind::X
            | GateKind::Sx
            | GateKind::H
            | GateKind::Y
            | GateKind::Z
            | GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::P
            | GateKind::GPi
            | GateKind::GPi2 => Arity::Fixed(1),
            GateKind::Cx
            | GateKind::Cz
            | GateKind::Cp
            | GateKind::Xy
            | GateKind::Swap
            | GateKind::Ms => Arity::Fixed(2),
            GateKind::Mcz => Arity::AtLeast(2),
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::P
            | GateKind::Cp
            | GateKind::Xy
            | GateKind::GPi
            | GateKind::GPi2 => 1,
            _ => 0,
        }
    }

    /// Diagonal phase gates realized in software with zero duration, zero
    /// error and no depth contribution.
    pub fn is_virtual(self) -> bool {
        matches!(self, GateKind::Z | GateKind::Rz | GateKind::P)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Sx => "SX",
            GateKind::H => "H",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Rx => "Rx",
            GateKind::Ry => "Ry",
            GateKind::Rz => "Rz",
            GateKind::P => "P",
            GateKind::Cx => "CX",
            GateKind::Cz => "CZ",
            GateKind::Cp => "CP",
            GateKind::Xy => "XY",
            GateKind::Swap => "SWAP",
            GateKind::Ms => "MS",
            GateKind::GPi => "GPi",
            GateKind::GPi2 => "GPi2",
            GateKind::Mcz => "MCZ",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate applied to specific qubits with bound parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GateInstance {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl GateInstance {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        match kind.arity() {
            Arity::Fixed(k) if qubits.len() != k => {
                return Err(Error::invalid(format!(
                    "{} expects {} qubit(s), got {}",
                    kind.name(),
                    k,
                    qubits.len()
                )));
            }
            Arity::AtLeast(k) if qubits.len() < k => {
                return Err(Error::invalid(format!(
                    "{} expects at least {} qubits, got {}",
                    kind.name(),
                    k,
                    qubits.len()
                )));
            }
            _ => {}
        }
        for (i, &q) in qubits.iter().enumerate() {
            if qubits[..i].contains(&q) {
                return Err(Error::invalid(format!(
                    "duplicate qubit {q} in {}",
                    kind.name()
                )));
            }
        }
        if params.len() != kind.param_count() {
            return Err(Error::invalid(format!(
                "{} expects {} parameter(s), got {}",
                kind.name(),
                kind.param_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite gate parameter"));
        }
        Ok(Self {
            kind,
            qubits,
            params,
        })
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_virtual(&self) -> bool {
        self.kind.is_virtual()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(entries: [[Complex64; 2]; 2]) -> ComplexMatrix {
    let mut m = Array2::from_elem((2, 2), C_ZERO);
    for (i, row) in entries.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            m[[i, j]] = e;
        }
    }
    m
}

fn diag(entries: &[Complex64]) -> ComplexMatrix {
    let mut m = Array2::from_elem((entries.len(), entries.len()), C_ZERO);
    for (i, &e) in entries.iter().enumerate() {
        m[[i, i]] = e;
    }
    m
}

/// Multi-controlled Z on `num_qubits` qubits: diag(1, …, 1, −1).
pub fn mcz_matrix(num_qubits: usize) -> ComplexMatrix {
    let dim = 1usize << num_qubits;
    let mut entries = vec![C_ONE; dim];
    entries[dim - 1] = c(-1.0, 0.0);
    diag(&entries)
}

/// Matrix for a fixed-arity gate kind with the given parameters. MCZ has
/// per-instance arity and must go through [`unitary_of`].
pub fn kind_matrix(kind: GateKind, params: &[f64]) -> Result<ComplexMatrix> {
    if kind == GateKind::Mcz {
        return Err(Error::invalid("MCZ arity is per-instance; use unitary_of"));
    }
    if params.len() != kind.param_count() {
        return Err(Error::invalid(format!(
            "{} expects {} parameter(s), got {}",
            kind.name(),
            kind.param_count(),
            params.len()
        )));
    }
    Ok(raw_matrix(kind, params))
}

fn raw_matrix(kind: GateKind, params: &[f64]) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::X => mat2([[C_ZERO, C_ONE], [C_ONE, C_ZERO]]),
        GateKind::Y => mat2([[C_ZERO, c(0.0, -1.0)], [c(0.0, 1.0), C_ZERO]]),
        GateKind::Z => diag(&[C_ONE, c(-1.0, 0.0)]),
        GateKind::H => mat2([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]),
        GateKind::Sx => mat2([[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]]),
        GateKind::Rx => {
            let (s, co) = (params[0] / 2.0).sin_cos();
            mat2([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
        }
        GateKind::Ry => {
            let (s, co) = (params[0] / 2.0).sin_cos();
            mat2([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
        }
        GateKind::Rz => {
            let half = params[0] / 2.0;
            diag(&[
                Complex64::from_polar(1.0, -half),
                Complex64::from_polar(1.0, half),
            ])
        }
        GateKind::P => diag(&[C_ONE, Complex64::from_polar(1.0, params[0])]),
        GateKind::GPi => {
            let phi = params[0];
            mat2([
                [C_ZERO, Complex64::from_polar(1.0, -phi)],
                [Complex64::from_polar(1.0, phi), C_ZERO],
            ])
        }
        GateKind::GPi2 => {
            let phi = params[0];
            mat2([
                [c(h, 0.0), c(0.0, -h) * Complex64::from_polar(1.0, -phi)],
                [c(0.0, -h) * Complex64::from_polar(1.0, phi), c(h, 0.0)],
            ])
        }
        GateKind::Cx => {
            let mut m = identity4();
            m[[2, 2]] = C_ZERO;
            m[[3, 3]] = C_ZERO;
            m[[2, 3]] = C_ONE;
            m[[3, 2]] = C_ONE;
            m
        }
        GateKind::Cz => diag(&[C_ONE, C_ONE, C_ONE, c(-1.0, 0.0)]),
        GateKind::Cp => diag(&[C_ONE, C_ONE, C_ONE, Complex64::from_polar(1.0, params[0])]),
        GateKind::Swap => {
            let mut m = identity4();
            m[[1, 1]] = C_ZERO;
            m[[2, 2]] = C_ZERO;
            m[[1, 2]] = C_ONE;
            m[[2, 1]] = C_ONE;
            m
        }
        GateKind::Xy => {
            let (s, co) = (params[0] / 2.0).sin_cos();
            let mut m = identity4();
            m[[1, 1]] = c(co, 0.0);
            m[[2, 2]] = c(co, 0.0);
            m[[1, 2]] = c(0.0, s);
            m[[2, 1]] = c(0.0, s);
            m
        }
        GateKind::Ms => {
            // exp(−i·(π/4)·X⊗X) = (I − i·X⊗X)/√2
            let mut m = Array2::from_elem((4, 4), C_ZERO);
            for i in 0..4 {
                m[[i, i]] = c(h, 0.0);
                m[[i, 3 - i]] = c(0.0, -h);
            }
            m
        }
        GateKind::Mcz => unreachable!("kind_matrix rejects MCZ"),
    }
}

fn identity4() -> ComplexMatrix {
    Array2::from_diag_elem(4, C_ONE)
}

/// The 2^arity unitary of a gate instance.
pub fn unitary_of(g: &GateInstance) -> Result<ComplexMatrix> {
    match g.kind {
        GateKind::Mcz => Ok(mcz_matrix(g.qubits.len())),
        kind => kind_matrix(kind, &g.params),
    }
}

/// Diagonal of the gate unitary when the gate is diagonal in the
/// computational basis; the simulator uses this as a fast path.
pub(crate) fn diagonal_of(g: &GateInstance) -> Option<Vec<Complex64>> {
    match g.kind {
        GateKind::Z => Some(vec![C_ONE, c(-1.0, 0.0)]),
        GateKind::Rz => {
            let half = g.params[0] / 2.0;
            Some(vec![
                Complex64::from_polar(1.0, -half),
                Complex64::from_polar(1.0, half),
            ])
        }
        GateKind::P => Some(vec![C_ONE, Complex64::from_polar(1.0, g.params[0])]),
        GateKind::Cz => Some(vec![C_ONE, C_ONE, C_ONE, c(-1.0, 0.0)]),
        GateKind::Cp => Some(vec![
            C_ONE,
            C_ONE,
            C_ONE,
            Complex64::from_polar(1.0, g.params[0]),
        ]),
        GateKind::Mcz => {
            let dim = 1usize << g.qubits.len();
            let mut d = vec![C_ONE; dim];
            d[dim - 1] = c(-1.0, 0.0);
            Some(d)
        }
        _ => None,
    }
}
