//! Backend registry: per-vendor hardware metrics, native gate sets and
//! coupling graphs, plus a flat text file format for custom (co-design)
//! backends.
//!
//! All durations are stored in seconds internally; the file format uses the
//! suffixed units of its keys (`t1_us`, `tg1_ns`, …).

use std::collections::BTreeSet;
use std::path::Path;

use crate::gates::GateKind;
use crate::{Error, Result};

/// Undirected device connectivity; two-qubit gates run only on edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    num_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CouplingGraph {
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::invariant("edges", format!("self-loop on qubit {a}")));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::invariant(
                    "edges",
                    format!("edge {a}-{b} exceeds qubit count {num_qubits}"),
                ));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let graph = Self {
            num_qubits,
            edges: set,
        };
        if !graph.is_connected() {
            return Err(Error::invariant("edges", "coupling graph is not connected"));
        }
        Ok(graph)
    }

    pub fn complete(num_qubits: usize) -> Self {
        let mut edges = BTreeSet::new();
        for a in 0..num_qubits {
            for b in (a + 1)..num_qubits {
                edges.insert((a, b));
            }
        }
        Self { num_qubits, edges }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    fn is_connected(&self) -> bool {
        if self.num_qubits == 0 {
            return false;
        }
        if self.num_qubits == 1 {
            return true;
        }
        let mut seen = vec![false; self.num_qubits];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(q) = stack.pop() {
            for nb in self.neighbors(q) {
                if !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Edge fraction of the complete graph, as a percentage.
pub fn coupling_density(g: &CouplingGraph) -> f64 {
    let n = g.num_qubits();
    assert!(n >= 2, "density needs at least two qubits");
    let pairs = (n * (n - 1) / 2) as f64;
    100.0 * g.edge_count() as f64 / pairs
}

/// One modeled hardware platform: metrics, native gates and connectivity.
/// Durations are stored in the file schema's units (µs for coherence times,
/// ns for gate times); the `*_seconds` accessors convert.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendSpec {
    pub name: String,
    pub graph: CouplingGraph,
    pub native_gates: BTreeSet<GateKind>,
    /// Relaxation time T1 in microseconds.
    pub t1_us: f64,
    /// Dephasing time T2 in microseconds.
    pub t2_us: f64,
    /// Average one-qubit gate fidelity.
    pub f1: f64,
    /// Average two-qubit gate fidelity.
    pub f2: f64,
    /// One-qubit gate duration in nanoseconds.
    pub tg1_ns: f64,
    /// Two-qubit gate duration in nanoseconds.
    pub tg2_ns: f64,
}

impl BackendSpec {
    pub fn t1_seconds(&self) -> f64 {
        self.t1_us * 1e-6
    }

    pub fn t2_seconds(&self) -> f64 {
        self.t2_us * 1e-6
    }

    pub fn tg1_seconds(&self) -> f64 {
        self.tg1_ns * 1e-9
    }

    pub fn tg2_seconds(&self) -> f64 {
        self.tg2_ns * 1e-9
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("f1", self.f1), ("f2", self.f2)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invariant(field, format!("{v} outside (0, 1]")));
            }
        }
        for (field, v) in [("t1_us", self.t1_us), ("t2_us", self.t2_us)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invariant(field, format!("{v} must be positive")));
            }
        }
        // zero allows hypothetical instantaneous-gate backends used in
        // calibration studies
        for (field, v) in [("tg1_ns", self.tg1_ns), ("tg2_ns", self.tg2_ns)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invariant(field, format!("{v} must be non-negative")));
            }
        }
        if self.native_gates.is_empty() {
            return Err(Error::invariant("gates", "native gate set is empty"));
        }
        let has_entangler = self.native_gates.iter().any(|k| {
            matches!(
                k,
                GateKind::Cx | GateKind::Cz | GateKind::Cp | GateKind::Xy | GateKind::Ms
            )
        });
        if !has_entangler {
            return Err(Error::invariant("gates", "no entangling two-qubit gate"));
        }
        let has_phase = self
            .native_gates
            .iter()
            .any(|k| matches!(k, GateKind::Rz | GateKind::P));
        let has_mixer = self.native_gates.iter().any(|k| {
            matches!(
                k,
                GateKind::X
                    | GateKind::Sx
                    | GateKind::H
                    | GateKind::Y
                    | GateKind::Rx
                    | GateKind::Ry
                    | GateKind::GPi
                    | GateKind::GPi2
            )
        });
        if !has_phase || !has_mixer {
            return Err(Error::invariant(
                "gates",
                "single-qubit set is not a universal rotation basis",
            ));
        }
        Ok(())
    }

    /// Same backend with an all-to-all coupling graph; noise metrics and the
    /// gate set are untouched.
    pub fn full_mesh(&self) -> BackendSpec {
        let mut spec = self.clone();
        spec.graph = CouplingGraph::complete(self.graph.num_qubits());
        spec
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["ibmq_kolkata", "ionq_aria", "rigetti_aspen_m3"];

/// One of the three modeled vendor platforms.
pub fn builtin(name: &str) -> Result<BackendSpec> {
    let spec = match name {
        "ibmq_kolkata" => BackendSpec {
            name: name.into(),
            graph: CouplingGraph::new(27, kolkata_edges())?,
            native_gates: gate_set(&[GateKind::X, GateKind::Sx, GateKind::Rz, GateKind::Cx]),
            t1_us: 109.90,
            t2_us: 96.80,
            f1: 0.99968,
            f2: 0.98909,
            tg1_ns: 35.56,
            tg2_ns: 415.37,
        },
        "ionq_aria" => BackendSpec {
            name: name.into(),
            graph: CouplingGraph::complete(21),
            native_gates: gate_set(&[GateKind::GPi, GateKind::GPi2, GateKind::Rz, GateKind::Ms]),
            // T1 is quoted as 10s-100s; 50 s is the working value
            t1_us: 50.0e6,
            t2_us: 1.0e6,
            f1: 0.9995,
            f2: 0.996,
            tg1_ns: 135.0e3,
            tg2_ns: 600.0e3,
        },
        "rigetti_aspen_m3" => BackendSpec {
            name: name.into(),
            graph: CouplingGraph::new(80, aspen_m3_edges())?,
            native_gates: gate_set(&[
                GateKind::X,
                GateKind::Sx,
                GateKind::Rx,
                GateKind::Rz,
                GateKind::Cz,
                GateKind::Cp,
                GateKind::Xy,
            ]),
            t1_us: 24.98,
            t2_us: 28.04,
            f1: 0.99614,
            f2: 0.90588,
            tg1_ns: 40.0,
            tg2_ns: 240.0,
        },
        other => {
            return Err(Error::invalid(format!(
                "unknown backend `{other}`; builtins are {BUILTIN_NAMES:?}"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn gate_set(kinds: &[GateKind]) -> BTreeSet<GateKind> {
    kinds.iter().copied().collect()
}

/// 27-qubit heavy-hex lattice (28 edges, coupling density 7.98%).
fn kolkata_edges() -> Vec<(usize, usize)> {
    vec![
        (0, 1),
        (1, 2),
        (1, 4),
        (2, 3),
        (3, 5),
        (4, 7),
        (5, 8),
        (6, 7),
        (7, 10),
        (8, 9),
        (8, 11),
        (10, 12),
        (11, 14),
        (12, 13),
        (12, 15),
        (13, 14),
        (14, 16),
        (15, 18),
        (16, 19),
        (17, 18),
        (18, 21),
        (19, 20),
        (19, 22),
        (21, 23),
        (22, 25),
        (23, 24),
        (24, 25),
        (25, 26),
    ]
}

/// 80-qubit linked-octagon lattice (2 rows × 5 columns of 8-qubit rings,
/// two links between horizontally and vertically adjacent octagons;
/// 106 edges, coupling density 3.35%).
fn aspen_m3_edges() -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let octagon = |row: usize, col: usize| 8 * (row * 5 + col);
    for row in 0..2 {
        for col in 0..5 {
            let b = octagon(row, col);
            for i in 0..8 {
                edges.push((b + i, b + (i + 1) % 8));
            }
            if col + 1 < 5 {
                let r = octagon(row, col + 1);
                edges.push((b + 1, r + 6));
                edges.push((b + 2, r + 5));
            }
            if row == 0 {
                let d = octagon(1, col);
                edges.push((b + 3, d));
                edges.push((b + 4, d + 7));
            }
        }
    }
    edges
}

/// Serialize a backend to the flat text schema (`[metrics]`, `[gates]`,
/// `[edges]` sections).
pub fn format_backend(spec: &BackendSpec) -> String {
    let mut out = String::new();
    out.push_str("[metrics]\n");
    out.push_str(&format!("name = {}\n", spec.name));
    out.push_str(&format!("t1_us = {}\n", spec.t1_us));
    out.push_str(&format!("t2_us = {}\n", spec.t2_us));
    out.push_str(&format!("f1 = {}\n", spec.f1));
    out.push_str(&format!("f2 = {}\n", spec.f2));
    out.push_str(&format!("tg1_ns = {}\n", spec.tg1_ns));
    out.push_str(&format!("tg2_ns = {}\n", spec.tg2_ns));
    out.push_str("\n[gates]\n");
    for kind in &spec.native_gates {
        out.push_str(kind.name());
        out.push('\n');
    }
    out.push_str("\n[edges]\n");
    for (a, b) in spec.graph.edges() {
        out.push_str(&format!("{a}-{b}\n"));
    }
    out
}

pub fn save_backend(spec: &BackendSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_backend(spec))?;
    Ok(())
}

pub fn load_backend(path: impl AsRef<Path>) -> Result<BackendSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_backend(&text)
}

/// Parse the backend text schema; errors carry 1-based line numbers, and
/// invariant violations name the offending field.
pub fn parse_backend(text: &str) -> Result<BackendSpec> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Metrics,
        Gates,
        Edges,
    }
    let mut section = Section::None;
    let mut name = None;
    let mut metrics: std::collections::BTreeMap<String, f64> = Default::default();
    let mut gates = BTreeSet::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        match line {
            "[metrics]" => {
                section = Section::Metrics;
                continue;
            }
            "[gates]" => {
                section = Section::Gates;
                continue;
            }
            "[edges]" => {
                section = Section::Edges;
                continue;
            }
            _ => {}
        }
        match section {
            Section::None => {
                return Err(parse_err("expected a section header like [metrics]".into()))
            }
            Section::Metrics => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| parse_err("expected `key = value`".into()))?;
                let key = key.trim();
                let value = value.trim();
                if key == "name" {
                    name = Some(value.to_string());
                } else {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| parse_err(format!("invalid number `{value}` for {key}")))?;
                    metrics.insert(key.to_string(), v);
                }
            }
            Section::Gates => {
                let kind = GateKind::from_name(line)
                    .ok_or_else(|| parse_err(format!("unknown gate `{line}`")))?;
                gates.insert(kind);
            }
            Section::Edges => {
                let (a, b) = line
                    .split_once('-')
                    .ok_or_else(|| parse_err("expected edge `a-b`".into()))?;
                let a: usize = a
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("invalid qubit `{a}`")))?;
                let b: usize = b
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("invalid qubit `{b}`")))?;
                edges.push((a, b));
            }
        }
    }

    let name = name.ok_or(Error::Parse {
        line: 0,
        msg: "missing `name` in [metrics]".into(),
    })?;
    let metric = |key: &str| -> Result<f64> {
        metrics.get(key).copied().ok_or(Error::Parse {
            line: 0,
            msg: format!("missing `{key}` in [metrics]"),
        })
    };
    if edges.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "missing [edges] section".into(),
        });
    }
    let num_qubits = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0) + 1;
    let spec = BackendSpec {
        name,
        graph: CouplingGraph::new(num_qubits, edges)?,
        native_gates: gates,
        t1_us: metric("t1_us")?,
        t2_us: metric("t2_us")?,
        f1: metric("f1")?,
        f2: metric("f2")?,
        tg1_ns: metric("tg1_ns")?,
        tg2_ns: metric("tg2_ns")?,
    };
    spec.validate()?;
    Ok(spec)
}
