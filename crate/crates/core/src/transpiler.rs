//! Lowering of logical circuits to hardware: decompose non-native gates into
//! a backend's gate set, map logical to physical qubits, and insert SWAPs so
//! every two-qubit gate acts on a coupling-graph edge.
//!
//! The router is deliberately simple: the initial layout is the identity
//! mapping, and each offending gate greedily swaps one operand along a
//! shortest path until the pair is adjacent. Ties between equally short next
//! hops go to already-used physical qubits first, then to a seeded RNG, so
//! a `(circuit, backend, seed)` triple always produces the same output.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::Circuit;
use crate::gates::{GateInstance, GateKind};
use crate::hardware::{BackendSpec, CouplingGraph};
use crate::qmath::ComplexMatrix;
use crate::{Error, Result};

/// Rotation angles below this are dropped during lowering.
const ANGLE_TOL: f64 = 1e-12;

/// Bijection from logical qubits to physical qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    map: Vec<usize>,
}

impl Layout {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.map[logical]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

/// Everything a transpilation run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TranspileReport {
    pub output: Circuit,
    pub final_layout: Layout,
    pub swaps_inserted: usize,
    pub depth_before: usize,
    pub depth_after: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq)]
#[allow(clippy::enum_variant_names)]
enum OneQubitBasis {
    /// Rz–SX–Rz–SX–Rz.
    SxRz,
    /// Rz–Rx–Rz.
    RxRz,
    /// Rz–GPi2–Rz–GPi2–Rz (GPi2(0) is an X(π/2) pulse).
    GPi2Rz,
}

#[derive(Clone, Copy, PartialEq)]
enum Entangler {
    Cx,
    Cz,
    Ms,
}

fn select_basis(target: &BTreeSet<GateKind>) -> Result<OneQubitBasis> {
    if !target.contains(&GateKind::Rz) {
        return Err(Error::invalid("target set lacks Rz; cannot lower phases"));
    }
    if target.contains(&GateKind::Sx) {
        Ok(OneQubitBasis::SxRz)
    } else if target.contains(&GateKind::Rx) {
        Ok(OneQubitBasis::RxRz)
    } else if target.contains(&GateKind::GPi2) {
        Ok(OneQubitBasis::GPi2Rz)
    } else {
        Err(Error::invalid(
            "target set has no SX/Rx/GPi2; single-qubit lowering is impossible",
        ))
    }
}

fn select_entangler(target: &BTreeSet<GateKind>) -> Result<Entangler> {
    if target.contains(&GateKind::Cx) {
        Ok(Entangler::Cx)
    } else if target.contains(&GateKind::Cz) {
        Ok(Entangler::Cz)
    } else if target.contains(&GateKind::Ms) {
        Ok(Entangler::Ms)
    } else {
        Err(Error::invalid(
            "target set has no CX/CZ/MS; two-qubit lowering is impossible",
        ))
    }
}

/// Rewrite every instruction into gates from `target`. Native instructions
/// pass through unchanged, so a native circuit is returned as-is.
pub fn decompose(c: &Circuit, target: &BTreeSet<GateKind>) -> Result<Circuit> {
    let basis = select_basis(target)?;
    let ent = select_entangler(target)?;
    let mut out = Circuit::new(c.num_qubits());
    for g in c.instructions() {
        lower(g.clone(), target, basis, ent, &mut out)?;
    }
    Ok(out)
}

fn lower(
    g: GateInstance,
    target: &BTreeSet<GateKind>,
    basis: OneQubitBasis,
    ent: Entangler,
    out: &mut Circuit,
) -> Result<()> {
    if target.contains(&g.kind) && !(g.kind == GateKind::Mcz && g.arity() > 2) {
        return out.push(g);
    }
    let recurse = |pieces: Vec<GateInstance>, out: &mut Circuit| -> Result<()> {
        for p in pieces {
            lower(p, target, basis, ent, out)?;
        }
        Ok(())
    };
    match g.kind {
        GateKind::Mcz if g.arity() == 2 => recurse(vec![inst(GateKind::Cz, &g.qubits, &[])?], out),
        GateKind::Mcz => {
            let (controls, t) = g.qubits.split_at(g.arity() - 1);
            let mut pieces = Vec::new();
            emit_mcp(std::f64::consts::PI, controls, t[0], &mut pieces)?;
            recurse(pieces, out)
        }
        GateKind::Swap => {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            if target.contains(&GateKind::Xy) && target.contains(&GateKind::Cz) {
                // SWAP = (S†⊗S†)·CZ·iSWAP with iSWAP = XY(π); both entanglers
                // are native here and the corrections are virtual
                let half = std::f64::consts::FRAC_PI_2;
                recurse(
                    vec![
                        inst(GateKind::Xy, &[a, b], &[std::f64::consts::PI])?,
                        inst(GateKind::Cz, &[a, b], &[])?,
                        inst(GateKind::Rz, &[a], &[-half])?,
                        inst(GateKind::Rz, &[b], &[-half])?,
                    ],
                    out,
                )
            } else {
                recurse(
                    vec![
                        inst(GateKind::Cx, &[a, b], &[])?,
                        inst(GateKind::Cx, &[b, a], &[])?,
                        inst(GateKind::Cx, &[a, b], &[])?,
                    ],
                    out,
                )
            }
        }
        GateKind::Cx => {
            let (c, t) = (g.qubits[0], g.qubits[1]);
            match ent {
                Entangler::Cx => out.push(g),
                Entangler::Cz => recurse(
                    vec![
                        inst(GateKind::H, &[t], &[])?,
                        inst(GateKind::Cz, &[c, t], &[])?,
                        inst(GateKind::H, &[t], &[])?,
                    ],
                    out,
                ),
                Entangler::Ms => recurse(cx_from_ms(c, t)?, out),
            }
        }
        GateKind::Cz => {
            let (c, t) = (g.qubits[0], g.qubits[1]);
            recurse(
                vec![
                    inst(GateKind::H, &[t], &[])?,
                    inst(GateKind::Cx, &[c, t], &[])?,
                    inst(GateKind::H, &[t], &[])?,
                ],
                out,
            )
        }
        GateKind::Cp => {
            let (c, t) = (g.qubits[0], g.qubits[1]);
            let half = g.params[0] / 2.0;
            recurse(
                vec![
                    inst(GateKind::P, &[c], &[half])?,
                    inst(GateKind::Cx, &[c, t], &[])?,
                    inst(GateKind::P, &[t], &[-half])?,
                    inst(GateKind::Cx, &[c, t], &[])?,
                    inst(GateKind::P, &[t], &[half])?,
                ],
                out,
            )
        }
        GateKind::Xy => {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            let beta = -g.params[0] / 2.0;
            let mut pieces = rxx(beta, a, b)?;
            pieces.extend(ryy(beta, a, b)?);
            recurse(pieces, out)
        }
        GateKind::Ms => {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            recurse(rxx(std::f64::consts::FRAC_PI_2, a, b)?, out)
        }
        // remaining kinds are single-qubit
        kind if kind.is_virtual() => {
            // Z and P differ from Rz only by a global phase
            let angle = match kind {
                GateKind::Z => std::f64::consts::PI,
                GateKind::P => g.params[0],
                _ => unreachable!("Rz is native whenever lowering is possible"),
            };
            recurse(vec![inst(GateKind::Rz, &g.qubits, &[angle])?], out)
        }
        _ => {
            let u = crate::gates::unitary_of(&g)?;
            emit_single_qubit(&u, g.qubits[0], basis, out)
        }
    }
}

fn inst(kind: GateKind, qubits: &[usize], params: &[f64]) -> Result<GateInstance> {
    GateInstance::new(kind, qubits.to_vec(), params.to_vec())
}

/// Multi-controlled phase: CP(θ/2) on (last control, target), multi-controlled
/// X onto the last control, CP(−θ/2), MCX again, then the recursion on the
/// remaining controls.
fn emit_mcp(
    theta: f64,
    controls: &[usize],
    target: usize,
    out: &mut Vec<GateInstance>,
) -> Result<()> {
    match controls.len() {
        0 => {
            out.push(inst(GateKind::P, &[target], &[theta])?);
            Ok(())
        }
        1 => {
            out.push(inst(GateKind::Cp, &[controls[0], target], &[theta])?);
            Ok(())
        }
        _ => {
            let (rest, last) = controls.split_at(controls.len() - 1);
            let last = last[0];
            out.push(inst(GateKind::Cp, &[last, target], &[theta / 2.0])?);
            emit_mcx(rest, last, out)?;
            out.push(inst(GateKind::Cp, &[last, target], &[-theta / 2.0])?);
            emit_mcx(rest, last, out)?;
            emit_mcp(theta / 2.0, rest, target, out)
        }
    }
}

fn emit_mcx(controls: &[usize], target: usize, out: &mut Vec<GateInstance>) -> Result<()> {
    match controls.len() {
        0 => {
            out.push(inst(GateKind::X, &[target], &[])?);
            Ok(())
        }
        1 => {
            out.push(inst(GateKind::Cx, &[controls[0], target], &[])?);
            Ok(())
        }
        _ => {
            out.push(inst(GateKind::H, &[target], &[])?);
            emit_mcp(std::f64::consts::PI, controls, target, out)?;
            out.push(inst(GateKind::H, &[target], &[])?);
            Ok(())
        }
    }
}

/// CNOT built around the fixed MS = exp(−iπ/4·XX) interaction, with Z/H/Rz
/// corrections (global phase dropped).
fn cx_from_ms(c: usize, t: usize) -> Result<Vec<GateInstance>> {
    Ok(vec![
        inst(GateKind::Rz, &[c], &[std::f64::consts::FRAC_PI_2])?,
        inst(GateKind::H, &[c], &[])?,
        inst(GateKind::Z, &[c], &[])?,
        inst(GateKind::H, &[t], &[])?,
        inst(GateKind::Rz, &[t], &[std::f64::consts::FRAC_PI_2])?,
        inst(GateKind::H, &[t], &[])?,
        inst(GateKind::Ms, &[c, t], &[])?,
        inst(GateKind::Z, &[c], &[])?,
        inst(GateKind::H, &[c], &[])?,
    ])
}

/// exp(−iβ/2·XX) via H-conjugated ZZ rotation; exact including phase.
fn rxx(beta: f64, a: usize, b: usize) -> Result<Vec<GateInstance>> {
    Ok(vec![
        inst(GateKind::H, &[a], &[])?,
        inst(GateKind::H, &[b], &[])?,
        inst(GateKind::Cx, &[a, b], &[])?,
        inst(GateKind::Rz, &[b], &[beta])?,
        inst(GateKind::Cx, &[a, b], &[])?,
        inst(GateKind::H, &[a], &[])?,
        inst(GateKind::H, &[b], &[])?,
    ])
}

/// exp(−iβ/2·YY) via Rx(±π/2)-conjugated ZZ rotation.
fn ryy(beta: f64, a: usize, b: usize) -> Result<Vec<GateInstance>> {
    let quarter = std::f64::consts::FRAC_PI_2;
    Ok(vec![
        inst(GateKind::Rx, &[a], &[quarter])?,
        inst(GateKind::Rx, &[b], &[quarter])?,
        inst(GateKind::Cx, &[a, b], &[])?,
        inst(GateKind::Rz, &[b], &[beta])?,
        inst(GateKind::Cx, &[a, b], &[])?,
        inst(GateKind::Rx, &[a], &[-quarter])?,
        inst(GateKind::Rx, &[b], &[-quarter])?,
    ])
}

/// ZYZ Euler angles: U ≅ Rz(φ)·Ry(θ)·Rz(λ) up to a global phase, θ ∈ [0, π].
fn zyz_angles(u: &ComplexMatrix) -> (f64, f64, f64) {
    let det = u[[0, 0]] * u[[1, 1]] - u[[0, 1]] * u[[1, 0]];
    let alpha = det.arg() / 2.0;
    let phase = num_complex::Complex64::from_polar(1.0, -alpha);
    let v00 = u[[0, 0]] * phase;
    let v10 = u[[1, 0]] * phase;
    let ct = v00.norm().min(1.0);
    let st = v10.norm().min(1.0);
    let theta = 2.0 * st.atan2(ct);
    if st < 1e-13 {
        (theta, -2.0 * v00.arg(), 0.0)
    } else if ct < 1e-13 {
        (theta, 2.0 * v10.arg(), 0.0)
    } else {
        let sum = -2.0 * v00.arg();
        let diff = 2.0 * v10.arg();
        (theta, (sum + diff) / 2.0, (sum - diff) / 2.0)
    }
}

fn normalize_angle(a: f64) -> f64 {
    let x = a.rem_euclid(2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        x - 2.0 * std::f64::consts::PI
    } else {
        x
    }
}

fn push_rz(out: &mut Circuit, q: usize, angle: f64) -> Result<()> {
    let a = normalize_angle(angle);
    if a.abs() > ANGLE_TOL {
        out.rz(q, a)?;
    }
    Ok(())
}

/// Lower an arbitrary single-qubit unitary into the chosen rotation basis.
/// For the π/2-pulse bases this is Rz(λ)·pulse·Rz(θ+π)·pulse·Rz(φ+π); for
/// the Rx basis, Rz(λ+π/2)·Rx(−θ)·Rz(φ−π/2). Instructions are emitted in
/// circuit order; near-zero rotations are dropped.
fn emit_single_qubit(
    u: &ComplexMatrix,
    q: usize,
    basis: OneQubitBasis,
    out: &mut Circuit,
) -> Result<()> {
    let (theta, phi, lam) = zyz_angles(u);
    if theta.abs() < ANGLE_TOL {
        return push_rz(out, q, phi + lam);
    }
    match basis {
        OneQubitBasis::SxRz | OneQubitBasis::GPi2Rz => {
            let pulse = |out: &mut Circuit| -> Result<()> {
                match basis {
                    OneQubitBasis::SxRz => out.add(GateKind::Sx, &[q], &[]),
                    OneQubitBasis::GPi2Rz => out.add(GateKind::GPi2, &[q], &[0.0]),
                    OneQubitBasis::RxRz => unreachable!(),
                }
            };
            push_rz(out, q, lam)?;
            pulse(out)?;
            push_rz(out, q, theta + std::f64::consts::PI)?;
            pulse(out)?;
            push_rz(out, q, phi + std::f64::consts::PI)?;
        }
        OneQubitBasis::RxRz => {
            push_rz(out, q, lam + std::f64::consts::FRAC_PI_2)?;
            let rx = normalize_angle(-theta);
            if rx.abs() > ANGLE_TOL {
                out.add(GateKind::Rx, &[q], &[rx])?;
            }
            push_rz(out, q, phi - std::f64::consts::FRAC_PI_2)?;
        }
    }
    Ok(())
}

/// Insert SWAPs so every two-qubit instruction acts on a coupling edge.
/// The output circuit is as wide as the device; SWAP gates appear verbatim
/// (a following decompose pass expands them for backends without native
/// SWAP).
pub fn route(c: &Circuit, graph: &CouplingGraph, seed: u64) -> Result<TranspileReport> {
    let n_log = c.num_qubits();
    let n_phys = graph.num_qubits();
    if n_log > n_phys {
        return Err(Error::invalid(format!(
            "circuit width {n_log} exceeds device size {n_phys}"
        )));
    }
    if let Some(g) = c.instructions().iter().find(|g| g.arity() > 2) {
        return Err(Error::invalid(format!(
            "route expects a decomposed circuit; found {}-qubit {}",
            g.arity(),
            g.kind
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log2phys: Vec<usize> = (0..n_log).collect();
    let mut phys2log: Vec<Option<usize>> = (0..n_phys).map(|p| (p < n_log).then_some(p)).collect();
    let mut touched = vec![false; n_phys];
    for t in touched.iter_mut().take(n_log) {
        *t = true;
    }
    let mut out = Circuit::new(n_phys);
    let mut swaps = 0usize;

    for g in c.instructions() {
        match g.arity() {
            1 => out.add(g.kind, &[log2phys[g.qubits[0]]], &g.params)?,
            2 => {
                let mut a = log2phys[g.qubits[0]];
                let b = log2phys[g.qubits[1]];
                if !graph.has_edge(a, b) {
                    let path = walk_shortest_path(graph, a, b, &touched, &mut rng);
                    for w in path.windows(2).take(path.len() - 2) {
                        let (u, v) = (w[0], w[1]);
                        out.add(GateKind::Swap, &[u, v], &[])?;
                        swaps += 1;
                        touched[v] = true;
                        let lu = phys2log[u];
                        let lv = phys2log[v];
                        phys2log[u] = lv;
                        phys2log[v] = lu;
                        if let Some(l) = lu {
                            log2phys[l] = v;
                        }
                        if let Some(l) = lv {
                            log2phys[l] = u;
                        }
                    }
                    a = log2phys[g.qubits[0]];
                    debug_assert!(graph.has_edge(a, b));
                }
                out.add(g.kind, &[a, b], &g.params)?;
            }
            _ => unreachable!("checked above"),
        }
    }

    Ok(TranspileReport {
        depth_before: c.depth(),
        depth_after: out.depth(),
        final_layout: Layout { map: log2phys },
        swaps_inserted: swaps,
        seed,
        output: out,
    })
}

/// BFS distances to `to`, then a downhill walk from `from`. Equal-distance
/// hops prefer already-touched qubits; remaining ties are broken by the RNG.
fn walk_shortest_path(
    graph: &CouplingGraph,
    from: usize,
    to: usize,
    touched: &[bool],
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let n = graph.num_qubits();
    let mut dist = vec![usize::MAX; n];
    dist[to] = 0;
    let mut queue = std::collections::VecDeque::from([to]);
    while let Some(q) = queue.pop_front() {
        for nb in graph.neighbors(q) {
            if dist[nb] == usize::MAX {
                dist[nb] = dist[q] + 1;
                queue.push_back(nb);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let next_dist = dist[cur] - 1;
        let candidates: Vec<usize> = graph
            .neighbors(cur)
            .into_iter()
            .filter(|&v| dist[v] == next_dist)
            .collect();
        let preferred: Vec<usize> = candidates.iter().copied().filter(|&v| touched[v]).collect();
        let pool = if preferred.is_empty() {
            &candidates
        } else {
            &preferred
        };
        let next = pool[rng.gen_range(0..pool.len())];
        path.push(next);
        cur = next;
    }
    path
}

/// Full pipeline: decompose to the native set, route on the coupling graph,
/// then expand the inserted SWAPs.
pub fn transpile(c: &Circuit, backend: &BackendSpec, seed: u64) -> Result<TranspileReport> {
    backend.validate()?;
    let lowered = decompose(c, &backend.native_gates)?;
    let routed = route(&lowered, &backend.graph, seed)?;
    let output = decompose(&routed.output, &backend.native_gates)?;
    Ok(TranspileReport {
        depth_before: c.depth(),
        depth_after: output.depth(),
        final_layout: routed.final_layout,
        swaps_inserted: routed.swaps_inserted,
        seed,
        output,
    })
}

/// A deterministic connected region of `count` physical qubits: a BFS ball
/// grown from a maximum-degree seed node, neighbors visited in ascending
/// order. Returned sorted.
pub fn simulation_region(graph: &CouplingGraph, count: usize) -> Result<Vec<usize>> {
    let n = graph.num_qubits();
    if count > n {
        return Err(Error::invalid(format!(
            "region of {count} qubits exceeds device size {n}"
        )));
    }
    let seed = (0..n)
        .max_by_key(|&v| (graph.neighbors(v).len(), std::cmp::Reverse(v)))
        .expect("non-empty graph");
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(count);
    let mut queue = std::collections::VecDeque::from([seed]);
    visited[seed] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        if order.len() == count {
            break;
        }
        for nb in graph.neighbors(v) {
            if !visited[nb] {
                visited[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    order.truncate(count);
    order.sort_unstable();
    Ok(order)
}

/// The same backend with its coupling graph restricted (and relabeled) to a
/// connected `count`-qubit region, so routed circuits never grow wider than
/// the simulator allows. Metrics and the gate set are untouched.
pub fn restrict_to_region(backend: &BackendSpec, count: usize) -> Result<BackendSpec> {
    let region = simulation_region(&backend.graph, count)?;
    let dense: std::collections::BTreeMap<usize, usize> = region
        .iter()
        .copied()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    let edges: Vec<(usize, usize)> = backend
        .graph
        .edges()
        .filter(|(a, b)| dense.contains_key(a) && dense.contains_key(b))
        .map(|(a, b)| (dense[&a], dense[&b]))
        .collect();
    let mut spec = backend.clone();
    spec.graph = CouplingGraph::new(region.len(), edges)?;
    Ok(spec)
}

/// Transpile for a simulation run: routing is confined to a connected
/// physical region exactly as wide as the circuit, so the compacted result
/// always fits the simulator.
pub fn transpile_for_simulation(
    c: &Circuit,
    backend: &BackendSpec,
    seed: u64,
) -> Result<TranspileReport> {
    let restricted = restrict_to_region(backend, c.num_qubits())?;
    transpile(c, &restricted, seed)
}

/// Renumber the physical qubits a routed circuit actually uses into a dense
/// 0..m range so the result is simulable. Returns the compact circuit and,
/// per logical qubit, its compact position.
pub fn compact_for_simulation(report: &TranspileReport) -> Result<(Circuit, Vec<usize>)> {
    let mut used: BTreeSet<usize> = BTreeSet::new();
    for g in report.output.instructions() {
        used.extend(g.qubits.iter().copied());
    }
    used.extend(report.final_layout.as_slice().iter().copied());
    let dense: std::collections::BTreeMap<usize, usize> = used
        .iter()
        .copied()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    let mut out = Circuit::new(used.len());
    for g in report.output.instructions() {
        let qubits: Vec<usize> = g.qubits.iter().map(|q| dense[q]).collect();
        out.add(g.kind, &qubits, &g.params)?;
    }
    let positions = report
        .final_layout
        .as_slice()
        .iter()
        .map(|p| dense[p])
        .collect();
    Ok((out, positions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_grover, build_qft};
    use crate::gates::{kind_matrix, mcz_matrix, unitary_of};
    use crate::hardware::{builtin, BUILTIN_NAMES};
    use crate::qmath::{embed_gate, identity, max_abs_diff};
    use rand::Rng;

    /// Compose the full unitary of a circuit by multiplying embedded gate
    /// matrices; the independent oracle for lowering correctness.
    fn circuit_unitary(c: &Circuit) -> ComplexMatrix {
        let n = c.num_qubits();
        let mut u = identity(1 << n);
        for g in c.instructions() {
            let m = unitary_of(&g.clone()).unwrap();
            let full = embed_gate(&m, &g.qubits, n).unwrap();
            u = full.dot(&u);
        }
        u
    }

    fn equal_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        let mut phase = None;
        let mut best = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            if y.norm() > best {
                best = y.norm();
                phase = Some(x / y);
            }
        }
        let Some(phase) = phase else { return false };
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        let scaled = b.mapv(|z| z * phase);
        max_abs_diff(a, &scaled) <= tol
    }

    fn native_only(c: &Circuit, target: &BTreeSet<GateKind>) -> bool {
        c.instructions().iter().all(|g| target.contains(&g.kind))
    }

    fn random_unitary(rng: &mut impl Rng) -> ComplexMatrix {
        // Rz(a)·Ry(b)·Rz(c) with a random global phase covers all of U(2)
        let rz1 = kind_matrix(GateKind::Rz, &[rng.gen_range(-6.0..6.0)]).unwrap();
        let ry = kind_matrix(GateKind::Ry, &[rng.gen_range(-6.0..6.0)]).unwrap();
        let rz2 = kind_matrix(GateKind::Rz, &[rng.gen_range(-6.0..6.0)]).unwrap();
        let phase = num_complex::Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0));
        rz1.dot(&ry).dot(&rz2).mapv(|z| z * phase)
    }

    #[test]
    fn native_circuit_passes_through_unchanged() {
        let kolkata = builtin("ibmq_kolkata").unwrap();
        let mut c = Circuit::new(3);
        c.x(0).unwrap();
        c.add(GateKind::Sx, &[1], &[]).unwrap();
        c.rz(2, 0.4).unwrap();
        c.cx(0, 1).unwrap();
        let lowered = decompose(&c, &kolkata.native_gates).unwrap();
        assert_eq!(lowered, c);
    }

    #[test]
    fn single_qubit_lowering_is_exact_for_every_basis() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let bases = [
            (OneQubitBasis::SxRz, vec![GateKind::Sx, GateKind::Rz]),
            (OneQubitBasis::RxRz, vec![GateKind::Rx, GateKind::Rz]),
            (OneQubitBasis::GPi2Rz, vec![GateKind::GPi2, GateKind::Rz]),
        ];
        for (basis, kinds) in bases {
            let target: BTreeSet<GateKind> = kinds.iter().copied().collect();
            for trial in 0..40 {
                let u = random_unitary(&mut rng);
                let mut out = Circuit::new(1);
                emit_single_qubit(&u, 0, basis, &mut out).unwrap();
                assert!(native_only(&out, &target));
                let rebuilt = circuit_unitary(&out);
                assert!(
                    equal_up_to_phase(&rebuilt, &u, 1e-9),
                    "basis {kinds:?} trial {trial}"
                );
            }
        }
    }

    #[test]
    fn fixed_gates_lower_exactly() {
        // H, X, Y and SX through each vendor basis
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let _ = &mut rng;
        for name in BUILTIN_NAMES {
            let backend = builtin(name).unwrap();
            for kind in [GateKind::H, GateKind::X, GateKind::Y, GateKind::Sx] {
                let mut c = Circuit::new(1);
                c.add(kind, &[0], &[]).unwrap();
                let lowered = decompose(&c, &backend.native_gates).unwrap();
                assert!(
                    native_only(&lowered, &backend.native_gates),
                    "{name} {kind}"
                );
                assert!(
                    equal_up_to_phase(&circuit_unitary(&lowered), &circuit_unitary(&c), 1e-9),
                    "{name} {kind}"
                );
            }
        }
    }

    #[test]
    fn cz_lowers_to_hadamard_conjugated_cx() {
        let kolkata = builtin("ibmq_kolkata").unwrap();
        let mut c = Circuit::new(2);
        c.add(GateKind::Cz, &[0, 1], &[]).unwrap();
        let lowered = decompose(&c, &kolkata.native_gates).unwrap();
        assert!(native_only(&lowered, &kolkata.native_gates));
        let cz = kind_matrix(GateKind::Cz, &[]).unwrap();
        assert!(equal_up_to_phase(&circuit_unitary(&lowered), &cz, 1e-9));
    }

    #[test]
    fn two_qubit_lowerings_match_matrices_on_all_backends() {
        for name in BUILTIN_NAMES {
            let backend = builtin(name).unwrap();
            let cases: Vec<(GateKind, Vec<f64>)> = vec![
                (GateKind::Cx, vec![]),
                (GateKind::Cz, vec![]),
                (GateKind::Cp, vec![0.9]),
                (GateKind::Swap, vec![]),
                (GateKind::Ms, vec![]),
                (GateKind::Xy, vec![1.3]),
            ];
            for (kind, params) in cases {
                let mut c = Circuit::new(2);
                c.add(kind, &[0, 1], &params).unwrap();
                let lowered = decompose(&c, &backend.native_gates).unwrap();
                assert!(
                    native_only(&lowered, &backend.native_gates),
                    "{name} {kind}"
                );
                assert!(
                    equal_up_to_phase(&circuit_unitary(&lowered), &circuit_unitary(&c), 1e-9),
                    "{name} {kind}"
                );
            }
        }
    }

    #[test]
    fn ccz_lowering_matches_diagonal_oracle() {
        let kolkata = builtin("ibmq_kolkata").unwrap();
        let mut c = Circuit::new(3);
        c.mcz(&[0, 1, 2]).unwrap();
        let lowered = decompose(&c, &kolkata.native_gates).unwrap();
        assert!(native_only(&lowered, &kolkata.native_gates));
        assert!(equal_up_to_phase(
            &circuit_unitary(&lowered),
            &mcz_matrix(3),
            1e-9
        ));
    }

    #[test]
    fn mcz_lowering_matches_oracle_up_to_five_qubits() {
        for n in 2..=5 {
            let target: BTreeSet<GateKind> = [
                GateKind::H,
                GateKind::X,
                GateKind::P,
                GateKind::Cp,
                GateKind::Cx,
                GateKind::Rz,
                GateKind::Sx,
            ]
            .into_iter()
            .collect();
            let mut c = Circuit::new(n);
            c.mcz(&(0..n).collect::<Vec<_>>()).unwrap();
            let lowered = decompose(&c, &target).unwrap();
            assert!(
                equal_up_to_phase(&circuit_unitary(&lowered), &mcz_matrix(n), 1e-8),
                "n={n}"
            );
        }
    }

    #[test]
    fn routing_leaves_edge_respecting_circuits_alone() {
        let graph = CouplingGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let mut c = Circuit::new(3);
        c.h(0).unwrap();
        c.cx(0, 1).unwrap();
        c.cx(2, 1).unwrap();
        let report = route(&c, &graph, 7).unwrap();
        assert_eq!(report.swaps_inserted, 0);
        assert_eq!(report.output, c);
        assert_eq!(report.final_layout, Layout::identity(3));
    }

    #[test]
    fn distance_two_needs_exactly_one_swap() {
        let graph = CouplingGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let mut c = Circuit::new(3);
        c.cx(0, 2).unwrap();
        let report = route(&c, &graph, 0).unwrap();
        assert_eq!(report.swaps_inserted, 1);
        // necessity: 0 and 2 are not adjacent, so zero swaps cannot work
        assert!(!graph.has_edge(0, 2));
        // sufficiency: every two-qubit gate in the output is on an edge
        for g in report.output.instructions() {
            if g.arity() == 2 {
                assert!(graph.has_edge(g.qubits[0], g.qubits[1]));
            }
        }
    }

    #[test]
    fn complete_graph_never_needs_swaps() {
        let graph = CouplingGraph::complete(5);
        let c = build_qft(5).unwrap();
        let report = route(&c, &graph, 3).unwrap();
        assert_eq!(report.swaps_inserted, 0);
    }

    #[test]
    fn routed_two_qubit_gates_always_sit_on_edges() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let kolkata = builtin("ibmq_kolkata").unwrap();
        for trial in 0..10 {
            let mut c = Circuit::new(6);
            for _ in 0..25 {
                let a = rng.gen_range(0..6);
                let b = (a + rng.gen_range(1..6)) % 6;
                c.cx(a, b).unwrap();
            }
            let report = transpile(&c, &kolkata, trial).unwrap();
            for g in report.output.instructions() {
                if g.arity() == 2 {
                    assert!(
                        kolkata.graph.has_edge(g.qubits[0], g.qubits[1]),
                        "trial {trial}: {:?} not on an edge",
                        g.qubits
                    );
                }
            }
        }
    }

    #[test]
    fn transpile_is_deterministic() {
        let kolkata = builtin("ibmq_kolkata").unwrap();
        let c = build_grover(4, "1010").unwrap();
        let a = transpile(&c, &kolkata, 42).unwrap();
        let b = transpile(&c, &kolkata, 42).unwrap();
        assert_eq!(a, b);
        // a different seed may legitimately differ, but must stay valid
        let c2 = transpile(&c, &kolkata, 43).unwrap();
        assert_eq!(c2.seed, 43);
    }

    #[test]
    fn full_mesh_needs_no_more_swaps_than_native() {
        let kolkata = builtin("ibmq_kolkata").unwrap();
        let c = build_qft(6).unwrap();
        let native = transpile(&c, &kolkata, 9).unwrap();
        let mesh = transpile(&c, &kolkata.full_mesh(), 9).unwrap();
        assert!(mesh.swaps_inserted <= native.swaps_inserted);
        assert_eq!(mesh.swaps_inserted, 0);
    }

    #[test]
    fn grover_transpilation_inflates_depth() {
        let kolkata = builtin("ibmq_kolkata").unwrap();
        let c = build_grover(3, "111").unwrap();
        let report = transpile(&c, &kolkata, 1).unwrap();
        assert!(report.depth_after > report.depth_before);
        assert_eq!(report.depth_before, c.depth());
    }

    #[test]
    fn routing_never_shrinks_the_decomposed_depth() {
        for name in ["ibmq_kolkata", "rigetti_aspen_m3"] {
            let backend = builtin(name).unwrap();
            for n in 4..=6 {
                let c = build_qft(n).unwrap();
                let report = transpile(&c, &backend, 3).unwrap();
                let unrouted = decompose(&c, &backend.native_gates).unwrap();
                if report.swaps_inserted > 0 {
                    assert!(
                        report.depth_after >= unrouted.depth(),
                        "{name} n={n}: routed depth {} below unrouted {}",
                        report.depth_after,
                        unrouted.depth()
                    );
                }
            }
        }
    }

    #[test]
    fn identity_circuit_stays_trivial() {
        let kolkata = builtin("ibmq_kolkata").unwrap();
        let c = Circuit::new(3);
        let report = transpile(&c, &kolkata, 5).unwrap();
        assert_eq!(report.swaps_inserted, 0);
        assert!(report.output.is_empty());
        let (compact, positions) = compact_for_simulation(&report).unwrap();
        assert_eq!(compact.num_qubits(), 3);
        assert_eq!(positions, vec![0, 1, 2]);
    }

    #[test]
    fn semantic_preservation_spot_check() {
        use crate::engine;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for name in BUILTIN_NAMES {
            let backend = builtin(name).unwrap();
            for trial in 0..5u64 {
                let n = 3 + (trial as usize % 2);
                let mut c = Circuit::new(n);
                for _ in 0..12 {
                    match rng.gen_range(0..4) {
                        0 => c.h(rng.gen_range(0..n)).unwrap(),
                        1 => c.ry(rng.gen_range(0..n), rng.gen_range(-3.0..3.0)).unwrap(),
                        2 => {
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
                let report = transpile(&c, &backend, trial).unwrap();
                let (compact, positions) = compact_for_simulation(&report).unwrap();
                let ideal = engine::simulate_pure(&c).unwrap();
                let embedded = ideal.embed(&positions, compact.num_qubits()).unwrap();
                let sim = engine::simulate(&compact, None).unwrap();
                let fidelity = engine::state_fidelity(&sim, &embedded).unwrap();
                assert!(
                    fidelity >= 1.0 - 1e-9,
                    "{name} trial {trial}: fidelity {fidelity}"
                );
            }
        }
    }

    #[test]
    fn decompose_rejects_non_universal_targets() {
        let mut c = Circuit::new(2);
        c.h(0).unwrap();
        let only_rz: BTreeSet<GateKind> = [GateKind::Rz, GateKind::Cx].into_iter().collect();
        assert!(decompose(&c, &only_rz).is_err());
        let no_entangler: BTreeSet<GateKind> = [GateKind::Rz, GateKind::Sx].into_iter().collect();
        assert!(decompose(&c, &no_entangler).is_err());
    }

    #[test]
    fn route_rejects_wide_or_undecomposed_circuits() {
        let graph = CouplingGraph::new(2, [(0, 1)]).unwrap();
        let c = Circuit::new(3);
        assert!(route(&c, &graph, 0).is_err());
        let mut c = Circuit::new(2);
        c.mcz(&[0, 1]).unwrap();
        let mut wide = Circuit::new(3);
        wide.mcz(&[0, 1, 2]).unwrap();
        let graph3 = CouplingGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(route(&wide, &graph3, 0).is_err());
        let _ = c;
    }

    #[test]
    fn simulation_region_is_connected_and_deterministic() {
        for name in BUILTIN_NAMES {
            let backend = builtin(name).unwrap();
            for count in [2usize, 7, 11] {
                let region = simulation_region(&backend.graph, count).unwrap();
                assert_eq!(region.len(), count, "{name} count={count}");
                assert_eq!(region, simulation_region(&backend.graph, count).unwrap());
                let restricted = restrict_to_region(&backend, count).unwrap();
                assert_eq!(restricted.graph.num_qubits(), count);
                assert_eq!(restricted.f2, backend.f2);
            }
        }
    }

    #[test]
    fn simulation_transpile_never_exceeds_circuit_width() {
        use crate::circuit::build_qft;
        for name in ["ibmq_kolkata", "rigetti_aspen_m3"] {
            let backend = builtin(name).unwrap();
            let c = build_qft(11).unwrap();
            let report = transpile_for_simulation(&c, &backend, 1).unwrap();
            let (compact, _) = compact_for_simulation(&report).unwrap();
            assert!(
                compact.num_qubits() <= 11,
                "{name}: {}",
                compact.num_qubits()
            );
        }
    }

    #[test]
    fn compact_keeps_waypoint_qubits() {
        // CX between ends of a path graph drags qubit 1 in as a waypoint
        let graph = CouplingGraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut c = Circuit::new(2);
        c.cx(0, 1).unwrap();
        let mut wide = Circuit::new(4);
        wide.cx(0, 3).unwrap();
        let report = route(&wide, &graph, 0).unwrap();
        let (compact, _) = compact_for_simulation(&report).unwrap();
        assert!(compact.num_qubits() >= 3);
        let _ = c;
    }
}
