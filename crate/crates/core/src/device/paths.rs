//! All-pairs most-reliable SWAP paths.
//!
//! Moving a variable across an edge costs one SWAP with ESP `(1 - cx)^3`.
//! Maximizing a product of ESPs is minimizing the sum of `-ln(ESP)` weights,
//! so Floyd-Warshall on those weights yields the best movement path for
//! every pair. Ties (cost within `COST_TIE`) go to fewer hops, then to the
//! lexicographically smallest qubit sequence.

use super::DeviceModel;

/// Costs closer than this are treated as equal.
pub const COST_TIE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PathTable {
    n: usize,
    /// Qubit sequence from `u` to `v`, both endpoints included.
    paths: Vec<Vec<usize>>,
    /// Product of per-hop SWAP ESPs along the stored path.
    esp: Vec<f64>,
}

fn better(cost: f64, hops: usize, seq: &[usize], best_cost: f64, best_hops: usize, best: &[usize]) -> bool {
    if best_cost.is_infinite() {
        return cost.is_finite();
    }
    if cost < best_cost - COST_TIE {
        return true;
    }
    if cost > best_cost + COST_TIE {
        return false;
    }
    (hops, seq) < (best_hops, best)
}

impl PathTable {
    /// Runs Floyd-Warshall over `-ln(swap ESP)` edge weights.
    pub fn compute(d: &DeviceModel) -> PathTable {
        let n = d.num_qubits();
        let mut cost = vec![f64::INFINITY; n * n];
        let mut hops = vec![usize::MAX; n * n];
        let mut paths: Vec<Vec<usize>> = vec![Vec::new(); n * n];
        for u in 0..n {
            cost[u * n + u] = 0.0;
            hops[u * n + u] = 0;
            paths[u * n + u] = vec![u];
        }
        for e in d.edges() {
            let w = -e.swap_esp().ln();
            for (a, b) in [(e.q0, e.q1), (e.q1, e.q0)] {
                cost[a * n + b] = w;
                hops[a * n + b] = 1;
                paths[a * n + b] = vec![a, b];
            }
        }
        let mut cand = Vec::with_capacity(n);
        for k in 0..n {
            for i in 0..n {
                let cik = cost[i * n + k];
                if i == k || cik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let ckj = cost[k * n + j];
                    if j == i || j == k || ckj.is_infinite() {
                        continue;
                    }
                    let c = cik + ckj;
                    let h = hops[i * n + k] + hops[k * n + j];
                    let ij = i * n + j;
                    if c > cost[ij] + COST_TIE {
                        continue;
                    }
                    cand.clear();
                    cand.extend_from_slice(&paths[i * n + k]);
                    cand.extend_from_slice(&paths[k * n + j][1..]);
                    if better(c, h, &cand, cost[ij], hops[ij], &paths[ij]) {
                        cost[ij] = c;
                        hops[ij] = h;
                        paths[ij].clone_from(&cand);
                    }
                }
            }
        }
        // Make the table exactly symmetric: v->u is the reverse of u->v (u < v).
        for u in 0..n {
            for v in (u + 1)..n {
                let mut rev = paths[u * n + v].clone();
                rev.reverse();
                paths[v * n + u] = rev;
            }
        }
        let mut esp = vec![1.0; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                let p = path_esp(d, &paths[u * n + v]);
                esp[u * n + v] = p;
                esp[v * n + u] = p;
            }
        }
        PathTable { n, paths, esp }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Qubit sequence `u ..= v` of the best movement path.
    pub fn path(&self, u: usize, v: usize) -> &[usize] {
        &self.paths[u * self.n + v]
    }

    /// ESP of moving a variable from `u` to `v` along [`Self::path`].
    pub fn esp(&self, u: usize, v: usize) -> f64 {
        self.esp[u * self.n + v]
    }

    pub fn hops(&self, u: usize, v: usize) -> usize {
        self.path(u, v).len() - 1
    }
}

/// Product of SWAP ESPs along a qubit sequence. Factors are multiplied in
/// ascending order so a path and its reverse give bit-identical results.
pub fn path_esp(d: &DeviceModel, path: &[usize]) -> f64 {
    let mut f: Vec<f64> = path
        .windows(2)
        .map(|w| {
            let e = d.edge_between(w[0], w[1]).expect("path follows device edges");
            d.edge(e).swap_esp()
        })
        .collect();
    f.sort_by(f64::total_cmp);
    f.into_iter().product()
}
