#![allow(dead_code)]

use std::collections::HashMap;

use esp_router::circuit::{Circuit, Gate, GateKind};
use esp_router::device::{CouplingEdge, DeviceModel, PathTable, PhysQubit};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn device(n: usize, edges: &[(usize, usize, f64)], single: f64, readout: f64) -> DeviceModel {
    let qubits = (0..n)
        .map(|id| PhysQubit {
            id,
            single_error: single,
            readout_error: readout,
        })
        .collect();
    let edges = edges
        .iter()
        .map(|&(q0, q1, cx_error)| CouplingEdge { q0, q1, cx_error })
        .collect();
    DeviceModel::new("test", qubits, edges).unwrap()
}

/// Connected graph: random spanning tree plus each other pair with
/// probability `extra`, every rate drawn independently.
pub fn random_device<R: Rng>(rng: &mut R, n: usize, extra: f64) -> DeviceModel {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        let (a, b) = (order[i], order[j]);
        pairs.push((a.min(b), a.max(b)));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !pairs.contains(&(a, b)) && rng.random::<f64>() < extra {
                pairs.push((a, b));
            }
        }
    }
    let qubits = (0..n)
        .map(|id| PhysQubit {
            id,
            single_error: rng.random_range(0.0..0.01),
            readout_error: rng.random_range(0.0..0.05),
        })
        .collect();
    let edges = pairs
        .into_iter()
        .map(|(q0, q1)| CouplingEdge {
            q0,
            q1,
            cx_error: rng.random_range(0.005..0.2),
        })
        .collect();
    DeviceModel::new("random", qubits, edges).unwrap()
}

/// Random circuit: `cx` CNOTs and `singles` single-qubit gates in random
/// order, then a measure on each variable with probability one half.
pub fn random_circuit<R: Rng>(rng: &mut R, vars: usize, cx: usize, singles: usize) -> Circuit {
    let kinds = [GateKind::H, GateKind::X, GateKind::S, GateKind::Sdg, GateKind::T, GateKind::Tdg];
    let mut slots: Vec<bool> = std::iter::repeat_n(true, cx).chain(std::iter::repeat_n(false, singles)).collect();
    slots.shuffle(rng);
    let mut gates = Vec::new();
    for is_cx in slots {
        if is_cx && vars >= 2 {
            let a = rng.random_range(0..vars);
            let mut b = rng.random_range(0..vars - 1);
            if b >= a {
                b += 1;
            }
            gates.push(Gate::cx(a, b));
        } else {
            gates.push(Gate::single(kinds[rng.random_range(0..kinds.len())], rng.random_range(0..vars)));
        }
    }
    for v in 0..vars {
        if rng.random::<bool>() {
            gates.push(Gate::measure(v));
        }
    }
    Circuit::new(vars, gates).unwrap()
}

/// Every injective placement of `vars` variables on `n` qubits.
pub fn all_mappings(vars: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(vars: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == vars {
            out.push(cur.clone());
            return;
        }
        for q in 0..n {
            if !cur.contains(&q) {
                cur.push(q);
                rec(vars, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(vars, n, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive maximum ESP over every initial placement, every order of the
/// CNOTs allowed by the dependencies, and every way of bringing each CNOT's
/// operands together: pick a coupler and orientation, walk the control
/// there along its most reliable path, then walk the target to the other
/// end (unless that would move the control again), or split the direct
/// path between the operands at any edge. Single-qubit gates run as soon as
/// they are ready; readout is charged where each measured variable ends.
pub struct BruteForce<'a> {
    c: &'a Circuit,
    d: &'a DeviceModel,
    pt: PathTable,
    memo: HashMap<(u64, Vec<usize>), f64>,
}

impl<'a> BruteForce<'a> {
    pub fn new(c: &'a Circuit, d: &'a DeviceModel) -> Self {
        assert!(c.len() <= 64);
        BruteForce {
            c,
            d,
            pt: PathTable::compute(d),
            memo: HashMap::new(),
        }
    }

    fn ready(&self, done: u64, i: usize) -> bool {
        let g = &self.c.gates()[i];
        (0..i).all(|j| done >> j & 1 == 1 || !self.c.gates()[j].qubits().iter().any(|&q| g.acts_on(q)))
    }

    /// Runs every ready non-CNOT gate; returns the new set and its ESP factor.
    fn flush(&self, mut done: u64, v2p: &[usize]) -> (u64, f64) {
        let mut f = 1.0;
        loop {
            let mut moved = false;
            for (i, g) in self.c.gates().iter().enumerate() {
                if done >> i & 1 == 0 && !g.is_cx() && self.ready(done, i) {
                    done |= 1 << i;
                    if g.kind() != GateKind::Measure {
                        f *= 1.0 - self.d.qubit(v2p[g.q0()]).single_error;
                    }
                    moved = true;
                }
            }
            if !moved {
                return (done, f);
            }
        }
    }

    fn routes(&self, pc: usize, ptg: usize) -> Vec<(Vec<(usize, usize)>, (usize, usize))> {
        let mut out = Vec::new();
        for e in self.d.edges() {
            'orient: for (a, b) in [(e.q0, e.q1), (e.q1, e.q0)] {
                let mut swaps = Vec::new();
                let (mut c, mut t) = (pc, ptg);
                for w in self.pt.path(pc, a).windows(2) {
                    swaps.push((w[0], w[1]));
                    if t == w[1] {
                        t = w[0];
                    }
                    c = w[1];
                }
                for w in self.pt.path(t, b).to_vec().windows(2) {
                    if w[1] == c {
                        continue 'orient;
                    }
                    swaps.push((w[0], w[1]));
                }
                out.push((swaps, (a, b)));
            }
        }
        let p = self.pt.path(pc, ptg);
        for j in 0..p.len() - 1 {
            let mut swaps: Vec<(usize, usize)> = (0..j).map(|i| (p[i], p[i + 1])).collect();
            for i in (j + 1..p.len() - 1).rev() {
                swaps.push((p[i + 1], p[i]));
            }
            out.push((swaps, (p[j], p[j + 1])));
        }
        out
    }

    fn cx_esp(&self, a: usize, b: usize) -> f64 {
        1.0 - self.d.edge(self.d.edge_between(a, b).unwrap()).cx_error
    }

    fn best_from(&mut self, done: u64, v2p: Vec<usize>) -> f64 {
        let all = if self.c.len() == 64 { u64::MAX } else { (1u64 << self.c.len()) - 1 };
        if done == all {
            return self
                .c
                .gates()
                .iter()
                .filter(|g| g.kind() == GateKind::Measure)
                .map(|g| 1.0 - self.d.qubit(v2p[g.q0()]).readout_error)
                .product();
        }
        if let Some(&v) = self.memo.get(&(done, v2p.clone())) {
            return v;
        }
        let mut best: f64 = 0.0;
        for (i, g) in self.c.gates().iter().enumerate() {
            if done >> i & 1 == 1 || !g.is_cx() || !self.ready(done, i) {
                continue;
            }
            for (swaps, (a, b)) in self.routes(v2p[g.q0()], v2p[g.q1()]) {
                let mut m = v2p.clone();
                let mut f = 1.0;
                for (x, y) in swaps {
                    f *= self.cx_esp(x, y).powi(3);
                    for p in m.iter_mut() {
                        if *p == x {
                            *p = y;
                        } else if *p == y {
                            *p = x;
                        }
                    }
                }
                assert_eq!((m[g.q0()], m[g.q1()]), (a, b));
                f *= self.cx_esp(a, b);
                let (next, fl) = self.flush(done | 1 << i, &m);
                best = best.max(f * fl * self.best_from(next, m));
            }
        }
        self.memo.insert((done, v2p), best);
        best
    }

    /// Best ESP over everything the search space allows.
    pub fn optimum(&mut self) -> f64 {
        let mut best: f64 = 0.0;
        for m in all_mappings(self.c.num_qubits(), self.d.num_qubits()) {
            let (done, f) = self.flush(0, &m);
            best = best.max(f * self.best_from(done, m));
        }
        best
    }
}
