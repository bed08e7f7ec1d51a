//! Output distributions, noisy trajectories and KL divergence.
//!
//! Outcomes are integers whose bit `k` is the result of the `k`-th
//! measurement. Noise is injected per gate: with the gate's error rate, a
//! uniformly random non-identity Pauli on its operands (3 choices for one
//! qubit, 15 for two). Readout flips a measured bit with the readout rate.
//!
//! Simulation follows the variables rather than every device qubit. A
//! `cx a,b; cx b,a; cx a,b` block is an exact SWAP, so it is applied as a
//! relabeling and any Pauli raised inside it is pushed through the remaining
//! CNOTs of the block to act after it. Qubits that hold no variable only ever
//! see Paulis and SWAPs, so they stay in a basis state tracked as one bit,
//! and enter the state vector only if a real gate touches them.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::device::{DeviceError, DeviceModel};
use crate::mapper::{CompiledCircuit, MapperError, Mapping};
use crate::remote::RemoteCnotTemplate;
use crate::sim::{Pauli, StateVector};

/// Largest number of simultaneously simulated qubits.
pub const MAX_SIM_QUBITS: usize = 20;

/// Budget, in amplitudes, for cached noiseless prefix states.
const CHECKPOINT_BUDGET: usize = 1 << 22;

const NO_SLOT: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("simulation needs {qubits} qubits; the limit is {max}")]
    TooManyQubits { qubits: usize, max: usize },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("runs must be at least 1")]
    ZeroRuns,
    #[error("distributions cover different outcome spaces ({ideal} vs {empirical} bits)")]
    OutcomeSpaceMismatch { ideal: usize, empirical: usize },
    #[error("probabilities must be non-negative and sum to 1 (sum {0})")]
    NotNormalized(f64),
    #[error("gate {index} ({gate}) is not on a device coupler")]
    NotOnDevice { index: usize, gate: Gate },
    #[error("qubit {0} is not on the device")]
    UnknownQubit(usize),
    #[error("no circuits to evaluate")]
    EmptyExperiment,
    #[error(transparent)]
    Mapper(#[from] MapperError),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// Probability of each outcome over the measured bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    num_bits: usize,
    probs: Vec<f64>,
    counts: Option<Vec<u64>>,
    shots: u64,
}

impl Distribution {
    /// An exact distribution (shot count 0).
    pub fn from_probabilities(num_bits: usize, probs: Vec<f64>) -> Result<Distribution, EvalError> {
        let sum: f64 = probs.iter().sum();
        if probs.len() != 1 << num_bits {
            return Err(EvalError::OutcomeSpaceMismatch {
                ideal: num_bits,
                empirical: probs.len().trailing_zeros() as usize,
            });
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(EvalError::NotNormalized(sum));
        }
        Ok(Distribution {
            num_bits,
            probs,
            counts: None,
            shots: 0,
        })
    }

    /// An empirical distribution from outcome counts.
    pub fn from_counts(num_bits: usize, counts: Vec<u64>) -> Result<Distribution, EvalError> {
        if counts.len() != 1 << num_bits {
            return Err(EvalError::OutcomeSpaceMismatch {
                ideal: num_bits,
                empirical: counts.len().trailing_zeros() as usize,
            });
        }
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return Err(EvalError::ZeroShots);
        }
        Ok(Distribution {
            num_bits,
            probs: counts.iter().map(|&c| c as f64 / shots as f64).collect(),
            counts: Some(counts),
            shots,
        })
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn num_outcomes(&self) -> usize {
        self.probs.len()
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    /// Number of samples behind the distribution; 0 if exact.
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn total_variation(&self, other: &Distribution) -> f64 {
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Outcome as a bit string, last measurement leftmost.
    pub fn format_outcome(&self, outcome: usize) -> String {
        (0..self.num_bits).rev().map(|k| if outcome >> k & 1 == 1 { '1' } else { '0' }).collect()
    }

    /// `outcome,probability` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("outcome,probability\n");
        for (o, p) in self.probs.iter().enumerate() {
            let _ = writeln!(s, "{},{}", self.format_outcome(o), p);
        }
        s
    }
}

/// Which error classes are active, plus sampling parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NoiseConfig {
    /// Single-qubit gate errors.
    pub single: bool,
    /// CNOT errors.
    pub cx: bool,
    /// Readout errors.
    pub readout: bool,
    pub seed: u64,
    pub shots: u64,
}

impl NoiseConfig {
    pub fn all(seed: u64, shots: u64) -> NoiseConfig {
        NoiseConfig {
            single: true,
            cx: true,
            readout: true,
            seed,
            shots,
        }
    }

    pub fn noiseless(seed: u64, shots: u64) -> NoiseConfig {
        NoiseConfig {
            single: false,
            cx: false,
            readout: false,
            seed,
            shots,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    /// Three CNOTs forming an exact SWAP of two physical qubits.
    Swap(usize, usize),
    Gate(Gate),
}

/// Gates over physical qubits with a starting variable placement, prepared
/// for simulation.
#[derive(Clone, Debug)]
pub struct Program {
    num_physical: usize,
    init_v2p: Vec<usize>,
    ops: Vec<Op>,
    /// Index into the source gate list of each op's first gate.
    origin: Vec<usize>,
    measures: Vec<usize>,
    max_slots: usize,
}

impl Program {
    /// `gates` run on a register whose variable `v` starts on `mapping.phys(v)`
    /// and every other qubit starts in `|0>`.
    pub fn new(gates: &[Gate], mapping: &Mapping) -> Result<Program, EvalError> {
        let mut ops = Vec::new();
        let mut origin = Vec::new();
        let mut measures = Vec::new();
        let mut i = 0;
        while i < gates.len() {
            let g = gates[i];
            if g.kind() == GateKind::Measure {
                measures.push(g.q0());
                i += 1;
                continue;
            }
            if g.is_cx() && i + 2 < gates.len() && gates[i + 1] == Gate::cx(g.q1(), g.q0()) && gates[i + 2] == g {
                ops.push(Op::Swap(g.q0(), g.q1()));
                origin.push(i);
                i += 3;
                continue;
            }
            ops.push(Op::Gate(g));
            origin.push(i);
            i += 1;
        }
        let mut p = Program {
            num_physical: mapping.num_physical(),
            init_v2p: mapping.var_to_phys().to_vec(),
            ops,
            origin,
            measures,
            max_slots: 0,
        };
        let mut frame = Frame::new(&p);
        let mut max_slots = frame.sv.num_qubits();
        for op in &p.ops {
            frame.apply(op)?;
            max_slots = max_slots.max(frame.sv.num_qubits());
        }
        p.max_slots = max_slots;
        Ok(p)
    }

    pub fn from_circuit(c: &Circuit) -> Result<Program, EvalError> {
        Program::new(c.gates(), &Mapping::identity(c.num_qubits(), c.num_qubits())?)
    }

    pub fn from_compiled(c: &CompiledCircuit) -> Result<Program, EvalError> {
        Program::new(c.gates(), c.initial_mapping())
    }

    /// A remote-CNOT template on its path, all path qubits starting in
    /// `|0>`, measuring the control and target where they end up.
    pub fn from_template(t: &RemoteCnotTemplate, num_physical: usize) -> Result<Program, EvalError> {
        let mut gates = t.gates.clone();
        gates.extend([Gate::measure(t.final_control()), Gate::measure(t.final_target())]);
        Program::new(&gates, &Mapping::new(t.path.clone(), num_physical)?)
    }

    pub fn num_measured(&self) -> usize {
        self.measures.len()
    }

    /// Largest number of qubits held in the state vector at once.
    pub fn simulated_qubits(&self) -> usize {
        self.max_slots
    }

    /// Per-op error rates and per-measurement readout rates on `d`.
    fn rates(&self, d: &DeviceModel, nc: &NoiseConfig) -> Result<(Vec<f64>, Vec<f64>), EvalError> {
        let check = |q: usize| {
            if q < d.num_qubits() {
                Ok(())
            } else {
                Err(EvalError::UnknownQubit(q))
            }
        };
        let cx_rate = |a: usize, b: usize, i: usize, g: Gate| -> Result<f64, EvalError> {
            let e = d.edge_between(a, b).ok_or(EvalError::NotOnDevice { index: i, gate: g })?;
            Ok(if nc.cx { d.edge(e).cx_error } else { 0.0 })
        };
        let mut op_rates = Vec::with_capacity(self.ops.len());
        for (op, &i) in self.ops.iter().zip(&self.origin) {
            op_rates.push(match *op {
                Op::Swap(a, b) => cx_rate(a, b, i, Gate::cx(a, b))?,
                Op::Gate(g) if g.is_cx() => cx_rate(g.q0(), g.q1(), i, g)?,
                Op::Gate(g) => {
                    check(g.q0())?;
                    if nc.single {
                        d.qubit(g.q0()).single_error
                    } else {
                        0.0
                    }
                }
            });
        }
        let mut readout = Vec::with_capacity(self.measures.len());
        for &q in &self.measures {
            check(q)?;
            readout.push(if nc.readout { d.qubit(q).readout_error } else { 0.0 });
        }
        Ok((op_rates, readout))
    }
}

/// Simulation state: amplitudes over "slots" plus a basis bit for every
/// physical qubit not in the state vector.
#[derive(Clone, Debug)]
struct Frame {
    slot: Vec<usize>,
    free_bit: Vec<bool>,
    sv: StateVector,
}

impl Frame {
    fn new(p: &Program) -> Frame {
        let mut slot = vec![NO_SLOT; p.num_physical];
        for (v, &q) in p.init_v2p.iter().enumerate() {
            slot[q] = v;
        }
        Frame {
            slot,
            free_bit: vec![false; p.num_physical],
            sv: StateVector::zero(p.init_v2p.len()),
        }
    }

    fn slot_of(&mut self, q: usize) -> Result<usize, EvalError> {
        if self.slot[q] == NO_SLOT {
            let n = self.sv.num_qubits();
            if n >= MAX_SIM_QUBITS {
                return Err(EvalError::TooManyQubits {
                    qubits: n + 1,
                    max: MAX_SIM_QUBITS,
                });
            }
            self.sv.push_qubit(self.free_bit[q]);
            self.slot[q] = n;
        }
        Ok(self.slot[q])
    }

    fn apply(&mut self, op: &Op) -> Result<(), EvalError> {
        match *op {
            Op::Swap(a, b) => {
                self.slot.swap(a, b);
                self.free_bit.swap(a, b);
            }
            Op::Gate(g) => {
                let local = if g.is_cx() {
                    Gate::cx(self.slot_of(g.q0())?, self.slot_of(g.q1())?)
                } else {
                    Gate::single(g.kind(), self.slot_of(g.q0())?)
                };
                self.sv.apply(&local);
            }
        }
        Ok(())
    }

    /// Pauli `X^x Z^z` on physical qubit `q`, up to global phase.
    fn pauli(&mut self, q: usize, x: bool, z: bool) {
        match self.slot[q] {
            NO_SLOT => self.free_bit[q] ^= x,
            s => {
                if z {
                    self.sv.apply_pauli(s, Pauli::Z);
                }
                if x {
                    self.sv.apply_pauli(s, Pauli::X);
                }
            }
        }
    }

    /// Distribution of the measured qubits, measurement `k` on bit `k`.
    fn marginal(&self, measures: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << measures.len()];
        let fixed: usize = measures
            .iter()
            .enumerate()
            .filter(|&(_, &q)| self.slot[q] == NO_SLOT && self.free_bit[q])
            .map(|(k, _)| 1 << k)
            .sum();
        let slots: Vec<(usize, usize)> = measures
            .iter()
            .enumerate()
            .filter(|&(_, &q)| self.slot[q] != NO_SLOT)
            .map(|(k, &q)| (k, self.slot[q]))
            .collect();
        for (i, p) in self.sv.probabilities().into_iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let o = slots.iter().filter(|&&(_, s)| i >> s & 1 == 1).fold(fixed, |o, &(k, _)| o | 1 << k);
            out[o] += p;
        }
        out
    }
}

/// Pauli on two qubits as (x0, z0, x1, z1) bits, phases dropped.
type Pauli2 = [bool; 4];

fn pauli_bits(p: Pauli) -> (bool, bool) {
    match p {
        Pauli::I => (false, false),
        Pauli::X => (true, false),
        Pauli::Y => (true, true),
        Pauli::Z => (false, true),
    }
}

/// Conjugates a Pauli on (a, b) through CNOT with control `a` if
/// `a_controls`, else control `b`.
fn through_cx(p: Pauli2, a_controls: bool) -> Pauli2 {
    let [xa, za, xb, zb] = p;
    if a_controls {
        [xa, za ^ zb, xb ^ xa, zb]
    } else {
        [xa ^ xb, za, xb, zb ^ za]
    }
}

/// A drawn error: the op it follows and the Pauli on its two operand slots.
#[derive(Clone, Copy, Debug)]
struct Fault {
    op: usize,
    pauli: Pauli2,
}

/// Output of a sampling run.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleResult {
    pub distribution: Distribution,
    /// Shots in which no gate error and no readout flip occurred.
    pub error_free_shots: u64,
}

/// Exact noiseless distribution over the measured bits.
pub fn ideal_distribution(p: &Program) -> Result<Distribution, EvalError> {
    let mut frame = Frame::new(p);
    for op in &p.ops {
        frame.apply(op)?;
    }
    let probs = frame.marginal(&p.measures);
    let sum: f64 = probs.iter().sum();
    Distribution::from_probabilities(p.measures.len(), probs.into_iter().map(|x| x / sum).collect())
}

pub fn ideal_of_circuit(c: &Circuit) -> Result<Distribution, EvalError> {
    ideal_distribution(&Program::from_circuit(c)?)
}

pub fn ideal_of_compiled(c: &CompiledCircuit) -> Result<Distribution, EvalError> {
    ideal_distribution(&Program::from_compiled(c)?)
}

fn sample_index(cum: &[f64], u: f64) -> usize {
    let total = *cum.last().unwrap();
    let i = cum.partition_point(|&c| c <= u * total);
    if i < cum.len() {
        return i;
    }
    // Rounding put `u` past the end: take the last outcome with mass.
    (0..cum.len())
        .rev()
        .find(|&j| cum[j] > if j == 0 { 0.0 } else { cum[j - 1] })
        .unwrap_or(0)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

struct Sampler<'a> {
    p: &'a Program,
    op_rates: Vec<f64>,
    readout: Vec<f64>,
    ideal_cum: Vec<f64>,
    /// Noiseless frames: `(op index, frame before that op)`, ascending.
    checkpoints: Vec<(usize, Frame)>,
}

impl<'a> Sampler<'a> {
    fn new(p: &'a Program, d: &DeviceModel, nc: &NoiseConfig) -> Result<Sampler<'a>, EvalError> {
        let (op_rates, readout) = p.rates(d, nc)?;
        let per_frame = 1usize << p.max_slots;
        let stride = (p.ops.len() * per_frame).div_ceil(CHECKPOINT_BUDGET).max(1);
        let mut checkpoints = Vec::new();
        let mut frame = Frame::new(p);
        for (i, op) in p.ops.iter().enumerate() {
            if i % stride == 0 {
                checkpoints.push((i, frame.clone()));
            }
            frame.apply(op)?;
        }
        let ideal_cum = cumulative(&frame.marginal(&p.measures));
        Ok(Sampler {
            p,
            op_rates,
            readout,
            ideal_cum,
            checkpoints,
        })
    }

    /// One trajectory: (outcome, error free).
    fn shot(&self, seed: u64, shot: u64, faults: &mut Vec<Fault>) -> (usize, bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        faults.clear();
        let mut clean = true;
        for (i, (op, &rate)) in self.p.ops.iter().zip(&self.op_rates).enumerate() {
            if rate == 0.0 {
                continue;
            }
            match op {
                Op::Swap(..) => {
                    // CNOTs of the block: (a,b), (b,a), (a,b).
                    let mut acc: Pauli2 = [false; 4];
                    for k in 0..3 {
                        if rng.random::<f64>() < rate {
                            clean = false;
                            let idx = rng.random_range(1..16);
                            let (c, t) = (pauli_bits(Pauli::from_index(idx % 4)), pauli_bits(Pauli::from_index(idx / 4)));
                            // CNOT k has control a for k = 0, 2 and control b for k = 1.
                            let mut p: Pauli2 = if k == 1 { [t.0, t.1, c.0, c.1] } else { [c.0, c.1, t.0, t.1] };
                            for later in k + 1..3 {
                                p = through_cx(p, later != 1);
                            }
                            for j in 0..4 {
                                acc[j] ^= p[j];
                            }
                        }
                    }
                    if acc.iter().any(|&b| b) {
                        faults.push(Fault { op: i, pauli: acc });
                    }
                }
                Op::Gate(g) => {
                    if rng.random::<f64>() < rate {
                        clean = false;
                        let pauli = if g.is_cx() {
                            let idx = rng.random_range(1..16);
                            let (c, t) = (pauli_bits(Pauli::from_index(idx % 4)), pauli_bits(Pauli::from_index(idx / 4)));
                            [c.0, c.1, t.0, t.1]
                        } else {
                            let (x, z) = pauli_bits(Pauli::from_index(rng.random_range(1..4)));
                            [x, z, false, false]
                        };
                        faults.push(Fault { op: i, pauli });
                    }
                }
            }
        }
        let u = rng.random::<f64>();
        let mut outcome = if faults.is_empty() {
            sample_index(&self.ideal_cum, u)
        } else {
            let first = faults[0].op;
            let ci = self.checkpoints.partition_point(|(i, _)| *i <= first) - 1;
            let (start, ref base) = self.checkpoints[ci];
            let mut frame = base.clone();
            let mut next_fault = 0;
            for (i, op) in self.p.ops.iter().enumerate().skip(start) {
                frame.apply(op).expect("slot budget checked when the program was built");
                while next_fault < faults.len() && faults[next_fault].op == i {
                    let [x0, z0, x1, z1] = faults[next_fault].pauli;
                    let (a, b) = match *op {
                        Op::Swap(a, b) => (a, Some(b)),
                        Op::Gate(g) if g.is_cx() => (g.q0(), Some(g.q1())),
                        Op::Gate(g) => (g.q0(), None),
                    };
                    frame.pauli(a, x0, z0);
                    if let Some(b) = b {
                        frame.pauli(b, x1, z1);
                    }
                    next_fault += 1;
                }
            }
            sample_index(&cumulative(&frame.marginal(&self.p.measures)), u)
        };
        for (k, &r) in self.readout.iter().enumerate() {
            if r > 0.0 && rng.random::<f64>() < r {
                outcome ^= 1 << k;
                clean = false;
            }
        }
        (outcome, clean)
    }
}

/// Monte-Carlo sampling of `p` on `d` under the configured noise.
/// Shot `i` draws from its own stream of the seeded generator, so results
/// do not depend on how shots are spread over threads.
pub fn noisy_sample(p: &Program, d: &DeviceModel, nc: &NoiseConfig) -> Result<SampleResult, EvalError> {
    if nc.shots == 0 {
        return Err(EvalError::ZeroShots);
    }
    let sampler = Sampler::new(p, d, nc)?;
    let k = 1usize << p.measures.len();
    const CHUNK: u64 = 1024;
    let chunks = nc.shots.div_ceil(CHUNK);
    let partial: Vec<(Vec<u64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; k];
            let mut clean = 0;
            let mut faults = Vec::new();
            for shot in c * CHUNK..((c + 1) * CHUNK).min(nc.shots) {
                let (o, ok) = sampler.shot(nc.seed, shot, &mut faults);
                counts[o] += 1;
                clean += ok as u64;
            }
            (counts, clean)
        })
        .collect();
    let mut counts = vec![0u64; k];
    let mut error_free_shots = 0;
    for (c, e) in partial {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        error_free_shots += e;
    }
    Ok(SampleResult {
        distribution: Distribution::from_counts(p.measures.len(), counts)?,
        error_free_shots,
    })
}

/// Empirical distribution of a compiled circuit on its device.
pub fn noisy_sample_compiled(c: &CompiledCircuit, d: &DeviceModel, nc: &NoiseConfig) -> Result<Distribution, EvalError> {
    Ok(noisy_sample(&Program::from_compiled(c)?, d, nc)?.distribution)
}

/// Empirical-side smoothing for KL divergence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothing {
    None,
    /// Add `alpha` to every outcome count.
    Laplace(f64),
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Laplace(1.0)
    }
}

/// `sum_x P(x) ln(P(x) / Q(x))` in nats. Outcomes with `P(x) = 0` add
/// nothing. With counts available and Laplace smoothing, `Q(x)` is
/// `(count + alpha) / (shots + alpha K)`; without smoothing a zero `Q(x)`
/// under positive `P(x)` gives infinity.
pub fn kl_divergence(ideal: &Distribution, empirical: &Distribution, smoothing: Smoothing) -> Result<f64, EvalError> {
    if ideal.num_bits != empirical.num_bits {
        return Err(EvalError::OutcomeSpaceMismatch {
            ideal: ideal.num_bits,
            empirical: empirical.num_bits,
        });
    }
    let k = ideal.num_outcomes() as f64;
    let q = |x: usize| -> f64 {
        match (smoothing, &empirical.counts) {
            (Smoothing::Laplace(alpha), Some(c)) => (c[x] as f64 + alpha) / (empirical.shots as f64 + alpha * k),
            _ => empirical.probs[x],
        }
    };
    let mut kl = 0.0;
    for (x, &p) in ideal.probs.iter().enumerate() {
        if p > 0.0 {
            let qx = q(x);
            if qx <= 0.0 {
                return Ok(f64::INFINITY);
            }
            kl += p * (p / qx).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// Pearson correlation; `None` when undefined (fewer than two points or a
/// constant series).
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().all(|&x| x == xs[0]) || ys.iter().all(|&y| y == ys[0]) {
        return None;
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One compiled circuit entering an experiment.
#[derive(Clone, Debug)]
pub struct ExperimentInput {
    pub circuit_id: String,
    /// `beam` or `random`.
    pub compiler: String,
    pub compiled: CompiledCircuit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub circuit_id: String,
    pub compiler: String,
    pub esp: f64,
    pub kl_median: f64,
    pub kl_min: f64,
    pub kl_max: f64,
    pub shots: u64,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub records: Vec<ExperimentRecord>,
    /// Pearson correlation of ESP against median KL.
    pub correlation: Option<f64>,
}

impl ExperimentResult {
    /// Tab-separated records and a trailing `correlation` line.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.circuit_id, r.compiler, r.esp, r.kl_median, r.kl_min, r.kl_max
            );
        }
        match self.correlation {
            Some(c) => {
                let _ = writeln!(s, "correlation {c}");
            }
            None => s.push_str("correlation undefined\n"),
        }
        s
    }
}

/// Seed of run `run` of circuit `index` in an experiment seeded with `seed`.
pub fn run_seed(seed: u64, index: usize, run: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((index as u64) << 32) | run as u64);
    rng.random()
}

/// For every circuit, `runs` independent noisy samplings of `shots` each;
/// KL of each against the circuit's ideal distribution, summarized by
/// median, min and max, and correlated with ESP across circuits.
pub fn run_experiment(
    inputs: &[ExperimentInput],
    d: &DeviceModel,
    runs: usize,
    shots: u64,
    seed: u64,
) -> Result<ExperimentResult, EvalError> {
    if inputs.is_empty() {
        return Err(EvalError::EmptyExperiment);
    }
    if runs == 0 {
        return Err(EvalError::ZeroRuns);
    }
    if shots == 0 {
        return Err(EvalError::ZeroShots);
    }
    let mut records = Vec::with_capacity(inputs.len());
    for (i, input) in inputs.iter().enumerate() {
        let program = Program::from_compiled(&input.compiled)?;
        let ideal = ideal_distribution(&program)?;
        let mut kls = Vec::with_capacity(runs);
        for r in 0..runs {
            let nc = NoiseConfig::all(run_seed(seed, i, r), shots);
            let sample = noisy_sample(&program, d, &nc)?;
            kls.push(kl_divergence(&ideal, &sample.distribution, Smoothing::default())?);
        }
        records.push(ExperimentRecord {
            circuit_id: input.circuit_id.clone(),
            compiler: input.compiler.clone(),
            esp: input.compiled.esp(),
            kl_median: median(&kls),
            kl_min: kls.iter().cloned().fold(f64::INFINITY, f64::min),
            kl_max: kls.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            shots,
            runs,
        });
    }
    let esp: Vec<f64> = records.iter().map(|r| r.esp).collect();
    let kl: Vec<f64> = records.iter().map(|r| r.kl_median).collect();
    Ok(ExperimentResult {
        correlation: pearson(&esp, &kl),
        records,
    })
}
