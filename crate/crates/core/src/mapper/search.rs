//! Beam search over (execution set, mapping) states, and the random baseline.

use std::cmp::Ordering;
use std::collections::hash_map::{DefaultHasher, Entry};
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::initial::{gce_initial_mapping, random_mapping};
use super::route::{Route, SwapRouter};
use super::{CompiledCircuit, CompilerConfig, MapperError, Mapping};
use crate::circuit::{Circuit, DependencyDag, Gate, GateKind};
use crate::device::{DeviceModel, PathTable};

const NO_VAR: u16 = u16::MAX;

/// Work counters of one compilation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub initial_states: u64,
    pub levels: u64,
    /// Successor states generated.
    pub expansions: u64,
    /// Successors dropped as duplicates of another state.
    pub merged: u64,
    /// Unexecuted gates visited while scoring.
    pub score_visits: u64,
}

impl SearchStats {
    fn add(&mut self, o: &SearchStats) {
        self.expansions += o.expansions;
        self.merged += o.merged;
        self.score_visits += o.score_visits;
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Cx(u16, u16),
    Single(GateKind, u16),
    Measure(u16),
}

#[derive(Debug)]
struct Trace {
    prev: Option<Arc<Trace>>,
    gates: Vec<Gate>,
}

/// One node of the search: which gates ran, where every variable sits, and
/// the placed gates that got it there.
#[derive(Clone, Debug)]
pub struct SearchState {
    executed: Box<[u64]>,
    v2p: Box<[u16]>,
    /// Product of ESPs of emitted gates.
    gate_esp: f64,
    /// `gate_esp` times the readout ESP of retired measurements.
    esp: f64,
    score: f64,
    emitted: u32,
    origin: u32,
    trace: Option<Arc<Trace>>,
}

impl SearchState {
    pub fn is_executed(&self, gate: usize) -> bool {
        self.executed[gate / 64] >> (gate % 64) & 1 == 1
    }

    pub fn esp(&self) -> f64 {
        self.esp
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    /// Number of placed gates so far (pending measurements excluded).
    pub fn emitted_len(&self) -> usize {
        self.emitted as usize
    }

    pub fn phys(&self, var: usize) -> usize {
        self.v2p[var] as usize
    }

    /// Placed gates in execution order.
    pub fn emitted(&self) -> Vec<Gate> {
        let mut chunks = Vec::new();
        let mut node = self.trace.as_deref();
        while let Some(t) = node {
            chunks.push(&t.gates);
            node = t.prev.as_deref();
        }
        chunks.into_iter().rev().flatten().copied().collect()
    }
}

/// A successor described by how to rebuild it from its parent.
#[derive(Clone, Copy, Debug)]
struct Child {
    score: f64,
    esp: f64,
    hash: u64,
    parent: u32,
    gate: u32,
    route: u32,
    emitted: u32,
}

/// Higher score first, then higher ESP, fewer gates, and a fixed order on
/// the state itself.
fn child_order(a: &Child, b: &Child) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.esp.total_cmp(&a.esp))
        .then(a.emitted.cmp(&b.emitted))
        .then(a.hash.cmp(&b.hash))
        .then((a.parent, a.gate, a.route).cmp(&(b.parent, b.gate, b.route)))
}

fn state_hash(executed: &[u64], v2p: &[u16]) -> u64 {
    let mut h = DefaultHasher::new();
    executed.hash(&mut h);
    v2p.hash(&mut h);
    h.finish()
}

/// Per-circuit, per-device data shared by every search state.
pub struct Compiler<'a> {
    circuit: &'a Circuit,
    device: &'a DeviceModel,
    router: SwapRouter,
    ops: Vec<Op>,
    preds: Vec<Vec<u32>>,
    succs: Vec<Vec<u32>>,
    cx_gates: Vec<u32>,
    roots: Vec<u32>,
    /// (gate index, variable) of each measurement, in circuit order.
    measures: Vec<(u32, u16)>,
    single_esp: Vec<f64>,
    readout_esp: Vec<f64>,
    words: usize,
}

impl<'a> Compiler<'a> {
    pub fn new(circuit: &'a Circuit, device: &'a DeviceModel) -> Result<Compiler<'a>, MapperError> {
        if device.num_qubits() >= NO_VAR as usize {
            return Err(MapperError::DeviceTooLarge(device.num_qubits()));
        }
        if circuit.num_qubits() > device.num_qubits() {
            return Err(MapperError::TooManyVariables {
                vars: circuit.num_qubits(),
                qubits: device.num_qubits(),
            });
        }
        let pt = PathTable::compute(device);
        let router = SwapRouter::new(device, &pt);
        let dag = DependencyDag::build(circuit);
        let ops: Vec<Op> = circuit
            .gates()
            .iter()
            .map(|g| match g.kind() {
                GateKind::Cx => Op::Cx(g.q0() as u16, g.q1() as u16),
                GateKind::Measure => Op::Measure(g.q0() as u16),
                k => Op::Single(k, g.q0() as u16),
            })
            .collect();
        let n = ops.len();
        let conv = |v: &[usize]| v.iter().map(|&x| x as u32).collect::<Vec<u32>>();
        let preds: Vec<Vec<u32>> = (0..n).map(|g| conv(dag.predecessors(g))).collect();
        let succs: Vec<Vec<u32>> = (0..n).map(|g| conv(dag.successors(g))).collect();
        Ok(Compiler {
            circuit,
            device,
            router,
            cx_gates: (0..n as u32).filter(|&g| matches!(ops[g as usize], Op::Cx(..))).collect(),
            roots: (0..n as u32).filter(|&g| preds[g as usize].is_empty()).collect(),
            measures: ops
                .iter()
                .enumerate()
                .filter_map(|(g, op)| match op {
                    Op::Measure(v) => Some((g as u32, *v)),
                    _ => None,
                })
                .collect(),
            single_esp: device.qubits().iter().map(|q| 1.0 - q.single_error).collect(),
            readout_esp: device.qubits().iter().map(|q| 1.0 - q.readout_error).collect(),
            words: n.div_ceil(64).max(1),
            ops,
            preds,
            succs,
        })
    }

    pub fn router(&self) -> &SwapRouter {
        &self.router
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    fn is_set(bits: &[u64], g: u32) -> bool {
        bits[g as usize / 64] >> (g % 64) & 1 == 1
    }

    fn set(bits: &mut [u64], g: u32) {
        bits[g as usize / 64] |= 1 << (g % 64);
    }

    fn ready(&self, executed: &[u64], g: u32) -> bool {
        !Self::is_set(executed, g) && self.preds[g as usize].iter().all(|&p| Self::is_set(executed, p))
    }

    /// Runs every non-CNOT gate that becomes ready starting from `from`,
    /// returning the number of placed gates.
    fn flush(
        &self,
        executed: &mut [u64],
        v2p: &[u16],
        from: &[u32],
        gate_esp: &mut f64,
        mut out: Option<&mut Vec<Gate>>,
    ) -> u32 {
        let mut stack: Vec<u32> = from.iter().rev().copied().collect();
        let mut placed = 0;
        while let Some(g) = stack.pop() {
            if !self.ready(executed, g) {
                continue;
            }
            match self.ops[g as usize] {
                Op::Cx(..) => continue,
                Op::Single(kind, v) => {
                    let p = v2p[v as usize] as usize;
                    *gate_esp *= self.single_esp[p];
                    placed += 1;
                    if let Some(o) = out.as_deref_mut() {
                        o.push(Gate::single(kind, p));
                    }
                }
                Op::Measure(_) => {}
            }
            Self::set(executed, g);
            stack.extend(self.succs[g as usize].iter().rev());
        }
        placed
    }

    /// Applies `route` for CNOT `gate`, runs the gate and flushes what it
    /// unblocks. Updates the buffers in place; returns placed gate count.
    #[allow(clippy::too_many_arguments)]
    fn advance(
        &self,
        executed: &mut [u64],
        v2p: &mut [u16],
        p2v: &mut [u16],
        gate: u32,
        route: &Route,
        gate_esp: &mut f64,
        mut out: Option<&mut Vec<Gate>>,
    ) -> u32 {
        for &(a, b) in &route.swaps {
            let (va, vb) = (p2v[a], p2v[b]);
            p2v[a] = vb;
            p2v[b] = va;
            if va != NO_VAR {
                v2p[va as usize] = b as u16;
            }
            if vb != NO_VAR {
                v2p[vb as usize] = a as u16;
            }
            if let Some(o) = out.as_deref_mut() {
                o.extend([Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]);
            }
        }
        *gate_esp *= route.esp;
        if let Some(o) = out.as_deref_mut() {
            o.push(Gate::cx(route.edge.0, route.edge.1));
        }
        Self::set(executed, gate);
        let succ = &self.succs[gate as usize];
        3 * route.swaps.len() as u32 + 1 + self.flush(executed, v2p, succ, gate_esp, out)
    }

    fn esp_of(&self, executed: &[u64], v2p: &[u16], gate_esp: f64) -> f64 {
        let mut esp = gate_esp;
        for &(g, v) in &self.measures {
            if Self::is_set(executed, g) {
                esp *= self.readout_esp[v2p[v as usize] as usize];
            }
        }
        esp
    }

    fn score_of(&self, executed: &[u64], v2p: &[u16], esp: f64, visits: &mut u64) -> f64 {
        let mut score = esp;
        let n = self.ops.len();
        for (w, &word) in executed.iter().enumerate() {
            let mut pending = !word;
            if w == n / 64 {
                pending &= (1u64 << (n % 64)).wrapping_sub(1);
            } else if w > n / 64 {
                break;
            }
            while pending != 0 {
                let g = w * 64 + pending.trailing_zeros() as usize;
                pending &= pending - 1;
                *visits += 1;
                score *= match self.ops[g] {
                    Op::Cx(c, t) => self.router.best_esp(v2p[c as usize] as usize, v2p[t as usize] as usize),
                    Op::Single(_, v) => self.single_esp[v2p[v as usize] as usize],
                    Op::Measure(v) => self.readout_esp[v2p[v as usize] as usize],
                };
            }
        }
        score
    }

    /// Lookahead score: ESP so far times, for every gate still to run, the
    /// ESP of its best route (CNOTs) or of the gate itself under the current
    /// mapping.
    pub fn update_score(&self, s: &SearchState) -> f64 {
        self.score_of(&s.executed, &s.v2p, s.esp, &mut 0)
    }

    /// The state before any CNOT, with ready single-qubit gates run.
    pub fn initial_state(&self, mapping: &Mapping) -> Result<SearchState, MapperError> {
        self.initial_state_from(mapping, 0)
    }

    fn initial_state_from(&self, mapping: &Mapping, origin: u32) -> Result<SearchState, MapperError> {
        if mapping.num_vars() != self.circuit.num_qubits() || mapping.num_physical() != self.device.num_qubits() {
            return Err(MapperError::InvalidMapping(format!(
                "expected {} variables on {} qubits, got {} on {}",
                self.circuit.num_qubits(),
                self.device.num_qubits(),
                mapping.num_vars(),
                mapping.num_physical()
            )));
        }
        let v2p: Box<[u16]> = mapping.var_to_phys().iter().map(|&p| p as u16).collect();
        let mut executed = vec![0u64; self.words].into_boxed_slice();
        let mut gate_esp = 1.0;
        let mut gates = Vec::new();
        let emitted = self.flush(&mut executed, &v2p, &self.roots, &mut gate_esp, Some(&mut gates));
        let esp = self.esp_of(&executed, &v2p, gate_esp);
        let score = self.score_of(&executed, &v2p, esp, &mut 0);
        Ok(SearchState {
            executed,
            v2p,
            gate_esp,
            esp,
            score,
            emitted,
            origin,
            trace: Some(Arc::new(Trace { prev: None, gates })),
        })
    }

    fn p2v_of(&self, v2p: &[u16]) -> Vec<u16> {
        let mut p2v = vec![NO_VAR; self.device.num_qubits()];
        for (v, &p) in v2p.iter().enumerate() {
            p2v[p as usize] = v as u16;
        }
        p2v
    }

    fn ready_cx(&self, executed: &[u64]) -> Vec<u32> {
        self.cx_gates.iter().copied().filter(|&g| self.ready(executed, g)).collect()
    }

    fn route_for(&self, s: &SearchState, gate: u32, route: u32) -> &Route {
        let Op::Cx(c, t) = self.ops[gate as usize] else { unreachable!("only CNOTs branch") };
        &self.router.routes(s.v2p[c as usize] as usize, s.v2p[t as usize] as usize)[route as usize]
    }

    /// Successors of `s`: each ready CNOT under each of its routes, or only
    /// under its best route when `all_routes` is false.
    fn expand(&self, parent: u32, s: &SearchState, all_routes: bool, stats: &mut SearchStats) -> Vec<Child> {
        let p2v0 = self.p2v_of(&s.v2p);
        let mut executed = s.executed.clone();
        let mut v2p = s.v2p.clone();
        let mut p2v = p2v0.clone();
        let mut out = Vec::new();
        for g in self.ready_cx(&s.executed) {
            let Op::Cx(c, t) = self.ops[g as usize] else { unreachable!() };
            let (pc, pt) = (s.v2p[c as usize] as usize, s.v2p[t as usize] as usize);
            let routes = self.router.routes(pc, pt);
            let best = self.router.best_index(pc, pt);
            for (ri, r) in routes.iter().enumerate() {
                if !all_routes && ri != best {
                    continue;
                }
                executed.copy_from_slice(&s.executed);
                v2p.copy_from_slice(&s.v2p);
                p2v.copy_from_slice(&p2v0);
                let mut gate_esp = s.gate_esp;
                let placed = self.advance(&mut executed, &mut v2p, &mut p2v, g, r, &mut gate_esp, None);
                let esp = self.esp_of(&executed, &v2p, gate_esp);
                let score = self.score_of(&executed, &v2p, esp, &mut stats.score_visits);
                stats.expansions += 1;
                out.push(Child {
                    score,
                    esp,
                    hash: state_hash(&executed, &v2p),
                    parent,
                    gate: g,
                    route: ri as u32,
                    emitted: s.emitted + placed,
                });
            }
        }
        out
    }

    fn child_key(&self, states: &[SearchState], ch: &Child) -> (Box<[u64]>, Box<[u16]>) {
        let s = &states[ch.parent as usize];
        let mut executed = s.executed.clone();
        let mut v2p = s.v2p.clone();
        let mut p2v = self.p2v_of(&s.v2p);
        let mut esp = s.gate_esp;
        let r = self.route_for(s, ch.gate, ch.route);
        self.advance(&mut executed, &mut v2p, &mut p2v, ch.gate, r, &mut esp, None);
        (executed, v2p)
    }

    fn materialize(&self, states: &[SearchState], ch: &Child) -> SearchState {
        let s = &states[ch.parent as usize];
        let mut executed = s.executed.clone();
        let mut v2p = s.v2p.clone();
        let mut p2v = self.p2v_of(&s.v2p);
        let mut gate_esp = s.gate_esp;
        let mut gates = Vec::new();
        let r = self.route_for(s, ch.gate, ch.route);
        let placed = self.advance(&mut executed, &mut v2p, &mut p2v, ch.gate, r, &mut gate_esp, Some(&mut gates));
        let esp = self.esp_of(&executed, &v2p, gate_esp);
        let score = self.score_of(&executed, &v2p, esp, &mut 0);
        SearchState {
            executed,
            v2p,
            gate_esp,
            esp,
            score,
            emitted: s.emitted + placed,
            origin: s.origin,
            trace: Some(Arc::new(Trace {
                prev: s.trace.clone(),
                gates,
            })),
        }
    }

    fn initial_states(&self, mappings: &[Mapping]) -> Result<Vec<SearchState>, MapperError> {
        let mut seen: HashMap<Box<[u16]>, ()> = HashMap::new();
        let mut out = Vec::new();
        for (i, m) in mappings.iter().enumerate() {
            let s = self.initial_state_from(m, i as u32)?;
            if seen.insert(s.v2p.clone(), ()).is_none() {
                out.push(s);
            }
        }
        Ok(out)
    }

    fn finish(&self, s: &SearchState, initial: &[Mapping], stats: SearchStats) -> Result<CompiledCircuit, MapperError> {
        let mut gates = s.emitted();
        gates.extend(self.measures.iter().map(|&(_, v)| Gate::measure(s.v2p[v as usize] as usize)));
        let final_ = Mapping::new(s.v2p.iter().map(|&p| p as usize).collect(), self.device.num_qubits())?;
        Ok(CompiledCircuit::from_parts(self.device, gates, initial[s.origin as usize].clone(), final_)?.with_stats(stats))
    }

    /// Beam search from the given start mappings keeping `beam_width` states
    /// per depth; returns the highest-ESP complete state.
    pub fn run_from(&self, initial: &[Mapping], beam_width: usize) -> Result<CompiledCircuit, MapperError> {
        if beam_width == 0 {
            return Err(MapperError::InvalidConfig("beam width must be at least 1".into()));
        }
        if initial.is_empty() {
            return Err(MapperError::InvalidConfig("no initial mappings".into()));
        }
        let mut stats = SearchStats::default();
        let mut states = self.initial_states(initial)?;
        stats.initial_states = states.len() as u64;
        for _ in 0..self.cx_gates.len() {
            stats.levels += 1;
            let per_parent: Vec<(Vec<Child>, SearchStats)> = states
                .par_iter()
                .enumerate()
                .map(|(i, s)| {
                    let mut st = SearchStats::default();
                    let c = self.expand(i as u32, s, true, &mut st);
                    (c, st)
                })
                .collect();
            let total: usize = per_parent.iter().map(|(c, _)| c.len()).sum();
            let mut index: HashMap<u64, usize> = HashMap::with_capacity(total);
            let mut uniq: Vec<Child> = Vec::with_capacity(total);
            for (children, st) in per_parent {
                stats.add(&st);
                for ch in children {
                    match index.entry(ch.hash) {
                        Entry::Vacant(e) => {
                            e.insert(uniq.len());
                            uniq.push(ch);
                        }
                        Entry::Occupied(e) => {
                            let j = *e.get();
                            if self.child_key(&states, &uniq[j]) == self.child_key(&states, &ch) {
                                stats.merged += 1;
                                if child_order(&ch, &uniq[j]) == Ordering::Less {
                                    uniq[j] = ch;
                                }
                            } else {
                                uniq.push(ch);
                            }
                        }
                    }
                }
            }
            crate::select::top_k_by(&mut uniq, beam_width, child_order);
            states = uniq.par_iter().map(|ch| self.materialize(&states, ch)).collect();
        }
        let best = states
            .iter()
            .min_by(|a, b| {
                b.esp
                    .total_cmp(&a.esp)
                    .then(a.emitted.cmp(&b.emitted))
                    .then_with(|| (&a.executed, &a.v2p).cmp(&(&b.executed, &b.v2p)))
            })
            .expect("at least one state");
        self.finish(best, initial, stats)
    }

    /// Walk from one mapping taking, at every depth, a uniformly random
    /// ready CNOT executed along its best route.
    pub fn run_random(&self, mapping: &Mapping, rng: &mut impl Rng) -> Result<CompiledCircuit, MapperError> {
        let initial = std::slice::from_ref(mapping);
        let mut stats = SearchStats {
            initial_states: 1,
            ..Default::default()
        };
        let mut state = vec![self.initial_state_from(mapping, 0)?];
        for _ in 0..self.cx_gates.len() {
            stats.levels += 1;
            let children = self.expand(0, &state[0], false, &mut stats);
            let pick = children[rng.random_range(0..children.len())];
            state = vec![self.materialize(&state, &pick)];
        }
        self.finish(&state[0], initial, stats)
    }
}

/// Lookahead score of a state (see [`Compiler::update_score`]).
pub fn update_score(compiler: &Compiler<'_>, s: &SearchState) -> f64 {
    compiler.update_score(s)
}

/// Beam-search compilation: one greatest-connecting-edge start (if enabled)
/// plus `random_mappings` random starts, `beam_width` states per depth.
pub fn compile_beam(c: &Circuit, d: &DeviceModel, cfg: &CompilerConfig) -> Result<CompiledCircuit, MapperError> {
    cfg.validate()?;
    let compiler = Compiler::new(c, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut initial = Vec::with_capacity(cfg.random_mappings + 1);
    if cfg.use_gce {
        initial.push(gce_initial_mapping(c, d, &mut rng)?);
    }
    for _ in 0..cfg.random_mappings {
        initial.push(random_mapping(c, d, &mut rng)?);
    }
    compiler.run_from(&initial, cfg.beam_width)
}

/// Random-selection baseline: one random start, then a uniformly random
/// ready CNOT (best-routed) at every depth.
pub fn compile_random(c: &Circuit, d: &DeviceModel, seed: u64) -> Result<CompiledCircuit, MapperError> {
    let compiler = Compiler::new(c, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_mapping(c, d, &mut rng)?;
    compiler.run_random(&m, &mut rng)
}
