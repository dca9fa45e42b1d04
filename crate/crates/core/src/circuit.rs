//! Circuit intermediate representation, the depth metric, and builders for
//! the three subject algorithms (Grover search, QFT, the 4-qubit variational
//! circuit).
//!
//! Circuits also serialize to a line-oriented textual IR: a `qubits N` header
//! followed by one instruction per line, `GATE q0[,q1..] [@ p0,p1..]`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::gates::{GateInstance, GateKind};
use crate::{Error, Result};

/// Ordered list of gate instructions over a fixed-width qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<GateInstance>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            instructions: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[GateInstance] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn push(&mut self, g: GateInstance) -> Result<()> {
        if let Some(&q) = g.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for a {}-qubit circuit",
                self.num_qubits
            )));
        }
        self.instructions.push(g);
        Ok(())
    }

    pub fn add(&mut self, kind: GateKind, qubits: &[usize], params: &[f64]) -> Result<()> {
        self.push(GateInstance::new(kind, qubits.to_vec(), params.to_vec())?)
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.add(GateKind::H, &[q], &[])
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.add(GateKind::X, &[q], &[])
    }

    pub fn ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.add(GateKind::Ry, &[q], &[theta])
    }

    pub fn rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.add(GateKind::Rz, &[q], &[theta])
    }

    /// CX with `control` on the more significant position of the gate matrix.
    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.add(GateKind::Cx, &[control, target], &[])
    }

    pub fn cp(&mut self, control: usize, target: usize, lambda: f64) -> Result<()> {
        self.add(GateKind::Cp, &[control, target], &[lambda])
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.add(GateKind::Swap, &[a, b], &[])
    }

    pub fn mcz(&mut self, qubits: &[usize]) -> Result<()> {
        self.add(GateKind::Mcz, qubits, &[])
    }

    /// Longest dependency chain over the instructions. Two instructions
    /// conflict iff they share a qubit; virtual gates contribute nothing.
    pub fn depth(&self) -> usize {
        let mut per_qubit = vec![0usize; self.num_qubits];
        let mut max_depth = 0usize;
        for g in &self.instructions {
            if g.is_virtual() {
                continue;
            }
            let level = 1 + g.qubits.iter().map(|&q| per_qubit[q]).max().unwrap_or(0);
            for &q in &g.qubits {
                per_qubit[q] = level;
            }
            max_depth = max_depth.max(level);
        }
        max_depth
    }

    /// Serialize to the textual IR.
    pub fn to_ir(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for g in &self.instructions {
            let qubits = g
                .qubits
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let _ = write!(out, "{} {}", g.kind.name(), qubits);
            if !g.params.is_empty() {
                let params = g
                    .params
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                let _ = write!(out, " @ {params}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse the textual IR; errors carry 1-based line numbers.
    pub fn from_ir(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            match &mut circuit {
                None => {
                    let rest = line
                        .strip_prefix("qubits")
                        .ok_or_else(|| parse_err("expected header `qubits N`".into()))?;
                    let n: usize = rest
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(format!("invalid qubit count `{}`", rest.trim())))?;
                    circuit = Some(Circuit::new(n));
                }
                Some(c) => {
                    let (gate_part, param_part) = match line.split_once('@') {
                        Some((g, p)) => (g.trim(), Some(p.trim())),
                        None => (line, None),
                    };
                    let mut tokens = gate_part.split_whitespace();
                    let name = tokens
                        .next()
                        .ok_or_else(|| parse_err("missing gate name".into()))?;
                    let kind = GateKind::from_name(name)
                        .ok_or_else(|| parse_err(format!("unknown gate `{name}`")))?;
                    let qubit_list = tokens
                        .next()
                        .ok_or_else(|| parse_err("missing qubit list".into()))?;
                    if tokens.next().is_some() {
                        return Err(parse_err("unexpected trailing tokens".into()));
                    }
                    let qubits = qubit_list
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<usize>()
                                .map_err(|_| parse_err(format!("invalid qubit index `{s}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let params = match param_part {
                        None => vec![],
                        Some(p) => p
                            .split(',')
                            .map(|s| {
                                s.trim()
                                    .parse::<f64>()
                                    .map_err(|_| parse_err(format!("invalid parameter `{s}`")))
                            })
                            .collect::<Result<Vec<_>>>()?,
                    };
                    let inst = GateInstance::new(kind, qubits, params)
                        .map_err(|e| parse_err(e.to_string()))?;
                    c.push(inst).map_err(|e| parse_err(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            msg: "empty circuit file".into(),
        })
    }
}

/// Number of Grover iterations for an n-qubit search: ⌊(π/4)·√(2^n)⌋.
pub fn grover_iterations(n: usize) -> usize {
    ((PI / 4.0) * ((1u64 << n) as f64).sqrt()).floor() as usize
}

/// Noiseless Grover success probability: sin²((2k+1)·asin(2^{−n/2})).
pub fn grover_success_analytic(n: usize, iterations: usize) -> f64 {
    let theta = (1.0 / ((1u64 << n) as f64).sqrt()).asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Grover search circuit: uniform-superposition layer, then
/// ⌊(π/4)·√(2^n)⌋ repetitions of {phase oracle for `marked`, diffusion}.
/// The oracle is an MCZ conjugated by X on the zero bits of `marked`; the
/// diffusion operator is H-layer, X-layer, MCZ, X-layer, H-layer.
pub fn build_grover(n: usize, marked: &str) -> Result<Circuit> {
    if !(2..=12).contains(&n) {
        return Err(Error::invalid(format!(
            "grover qubit count {n} outside 2..=12"
        )));
    }
    let bits = parse_bitstring(marked, n)?;
    let mut c = Circuit::new(n);
    let all: Vec<usize> = (0..n).collect();
    for &q in &all {
        c.h(q)?;
    }
    for _ in 0..grover_iterations(n) {
        // oracle: flip the sign of |marked⟩
        for (q, &bit) in bits.iter().enumerate() {
            if !bit {
                c.x(q)?;
            }
        }
        c.mcz(&all)?;
        for (q, &bit) in bits.iter().enumerate() {
            if !bit {
                c.x(q)?;
            }
        }
        // diffusion
        for &q in &all {
            c.h(q)?;
        }
        for &q in &all {
            c.x(q)?;
        }
        c.mcz(&all)?;
        for &q in &all {
            c.x(q)?;
        }
        for &q in &all {
            c.h(q)?;
        }
    }
    Ok(c)
}

/// Standard QFT: per qubit j an H and then CP(π/2^k) from each later qubit,
/// followed by the qubit-reversal SWAP layer.
pub fn build_qft(n: usize) -> Result<Circuit> {
    if !(1..=12).contains(&n) {
        return Err(Error::invalid(format!(
            "qft qubit count {n} outside 1..=12"
        )));
    }
    let mut c = Circuit::new(n);
    for j in 0..n {
        c.h(j)?;
        for k in (j + 1)..n {
            let angle = PI / (1u64 << (k - j)) as f64;
            c.cp(k, j, angle)?;
        }
    }
    for j in 0..n / 2 {
        c.swap(j, n - 1 - j)?;
    }
    Ok(c)
}

/// Trainable parameters of the variational circuit; θ₀..θ₁₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqcParameters {
    pub theta: [f64; 12],
}

impl VqcParameters {
    pub fn zeros() -> Self {
        Self { theta: [0.0; 12] }
    }

    pub fn shifted(&self, index: usize, delta: f64) -> Self {
        let mut theta = self.theta;
        theta[index] += delta;
        Self { theta }
    }
}

/// The 4-qubit variational circuit: an encoding layer Ry(asin x) on every
/// qubit, a trainable Ry/Rz layer, CX entanglers, a second trainable layer on
/// the middle qubits, and a final CX. The register starts at |0000⟩ and the
/// observable is measured on qubit 1.
pub fn build_vqc(x: f64, params: &VqcParameters) -> Result<Circuit> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("vqc input {x} outside [-1, 1]")));
    }
    let t = &params.theta;
    let xi = x.asin();
    let mut c = Circuit::new(4);
    for q in 0..4 {
        c.ry(q, xi)?;
    }
    for (q, &angle) in t.iter().enumerate().take(4) {
        c.ry(q, angle)?;
    }
    for (q, &angle) in t.iter().enumerate().skip(4).take(4) {
        c.rz(q - 4, angle)?;
    }
    c.cx(1, 0)?; // control q1, target q0
    c.cx(3, 2)?;
    c.ry(1, t[8])?;
    c.ry(2, t[9])?;
    c.rz(1, t[10])?;
    c.rz(2, t[11])?;
    c.cx(2, 1)?;
    Ok(c)
}

/// Parse a bitstring of '0'/'1' characters; char 0 is qubit 0 (most
/// significant bit).
pub fn parse_bitstring(s: &str, n: usize) -> Result<Vec<bool>> {
    if s.len() != n {
        return Err(Error::invalid(format!(
            "bitstring `{s}` length {} does not match {n} qubit(s)",
            s.len()
        )));
    }
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::invalid(format!(
                "invalid bitstring character `{ch}`"
            ))),
        })
        .collect()
}

/// Basis-state index of a bitstring under the qubit-0-is-MSB convention.
pub fn bitstring_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}
