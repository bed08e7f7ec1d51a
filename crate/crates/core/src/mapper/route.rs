//! SWAP routing for one CNOT: every way of bringing the two operands onto a
//! common coupler along most-reliable paths, and the best of them.

use super::Mapping;
use crate::circuit::Gate;
use crate::device::{DeviceModel, PathTable};

/// One way to execute a CNOT whose operands sit on a given qubit pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    /// SWAPs in execution order, as physical qubit pairs.
    pub swaps: Vec<(usize, usize)>,
    /// Where control and target sit when the CNOT runs.
    pub edge: (usize, usize),
    /// ESP of the SWAPs and the CNOT, multiplied in execution order.
    pub esp: f64,
}

/// The best route of one CNOT under a mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct BestSwap {
    pub swaps: Vec<(usize, usize)>,
    pub edge: (usize, usize),
    pub esp: f64,
}

/// All routes for every ordered pair of physical qubits, computed once.
#[derive(Clone, Debug)]
pub struct SwapRouter {
    n: usize,
    routes: Vec<Vec<Route>>,
    /// Index into `routes[pair]` of the best route.
    best: Vec<usize>,
    best_esp: Vec<f64>,
}

fn route_esp(d: &DeviceModel, swaps: &[(usize, usize)], edge: (usize, usize)) -> f64 {
    let mut esp = 1.0;
    for &(a, b) in swaps {
        esp *= d.edge(d.edge_between(a, b).expect("swap on a coupler")).swap_esp();
    }
    esp * d.edge(d.edge_between(edge.0, edge.1).expect("cnot on a coupler")).cx_esp()
}

/// Moves the control along `path(pc, a)`, then the target from wherever it
/// ended up along the path to `b`. `None` if the second leg would displace
/// the control.
fn meet_at(pt: &PathTable, pc: usize, ptg: usize, a: usize, b: usize) -> Option<Vec<(usize, usize)>> {
    let mut swaps = Vec::new();
    let (mut c, mut t) = (pc, ptg);
    for w in pt.path(pc, a).windows(2) {
        swaps.push((w[0], w[1]));
        if t == w[1] {
            t = w[0];
        }
        c = w[1];
    }
    for w in pt.path(t, b).windows(2) {
        if w[1] == c {
            return None;
        }
        swaps.push((w[0], w[1]));
    }
    Some(swaps)
}

impl SwapRouter {
    pub fn new(d: &DeviceModel, pt: &PathTable) -> SwapRouter {
        let n = d.num_qubits();
        let mut routes = vec![Vec::new(); n * n];
        let mut best = vec![0; n * n];
        let mut best_esp = vec![1.0; n * n];
        for pc in 0..n {
            for ptg in 0..n {
                if pc == ptg {
                    continue;
                }
                let mut list: Vec<Route> = Vec::new();
                let mut push = |swaps: Vec<(usize, usize)>, edge: (usize, usize)| {
                    if list.iter().all(|r| r.swaps != swaps) {
                        let esp = route_esp(d, &swaps, edge);
                        list.push(Route { swaps, edge, esp });
                    }
                };
                for e in d.edges() {
                    for (a, b) in [(e.q0, e.q1), (e.q1, e.q0)] {
                        if let Some(swaps) = meet_at(pt, pc, ptg, a, b) {
                            push(swaps, (a, b));
                        }
                    }
                }
                // Meeting points on the connecting path never interfere.
                let p = pt.path(pc, ptg);
                for j in 0..p.len() - 1 {
                    let mut swaps: Vec<(usize, usize)> = p[..=j].windows(2).map(|w| (w[0], w[1])).collect();
                    swaps.extend(p[j + 1..].windows(2).rev().map(|w| (w[1], w[0])));
                    push(swaps, (p[j], p[j + 1]));
                }
                let i = pc * n + ptg;
                let b = (0..list.len())
                    .reduce(|x, y| {
                        let (rx, ry) = (&list[x], &list[y]);
                        match ry.esp.total_cmp(&rx.esp) {
                            std::cmp::Ordering::Greater => y,
                            std::cmp::Ordering::Equal if ry.swaps.len() < rx.swaps.len() => y,
                            _ => x,
                        }
                    })
                    .expect("connected device has a route");
                best[i] = b;
                best_esp[i] = list[b].esp;
                routes[i] = list;
            }
        }
        SwapRouter {
            n,
            routes,
            best,
            best_esp,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Every distinct route for control on `pc`, target on `pt`.
    pub fn routes(&self, pc: usize, pt: usize) -> &[Route] {
        &self.routes[pc * self.n + pt]
    }

    pub fn best_route(&self, pc: usize, pt: usize) -> &Route {
        let i = pc * self.n + pt;
        &self.routes[i][self.best[i]]
    }

    pub fn best_index(&self, pc: usize, pt: usize) -> usize {
        self.best[pc * self.n + pt]
    }

    /// ESP of the best route (movement and CNOT).
    pub fn best_esp(&self, pc: usize, pt: usize) -> f64 {
        self.best_esp[pc * self.n + pt]
    }

    /// Best route for a gate under `mapping`; `None` for single-qubit gates.
    pub fn best_swap(&self, mapping: &Mapping, g: &Gate) -> Option<BestSwap> {
        if !g.is_cx() {
            return None;
        }
        let r = self.best_route(mapping.phys(g.q0()), mapping.phys(g.q1()));
        Some(BestSwap {
            swaps: r.swaps.clone(),
            edge: r.edge,
            esp: r.esp,
        })
    }
}

/// Best route for one gate without a prebuilt cache.
pub fn best_swap(pt: &PathTable, d: &DeviceModel, mapping: &Mapping, g: &Gate) -> Option<BestSwap> {
    SwapRouter::new(d, pt).best_swap(mapping, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::tests::uniform;

    fn apply(m: &Mapping, swaps: &[(usize, usize)]) -> Mapping {
        let mut m = m.clone();
        swaps.iter().for_each(|&(a, b)| m.swap_physical(a, b));
        m
    }

    #[test]
    fn adjacent_on_best_edge_needs_nothing() {
        let d = uniform(3, &[(0, 1, 0.01), (1, 2, 0.02)], 0.0, 0.0);
        let pt = PathTable::compute(&d);
        let m = Mapping::new(vec![0, 1], 3).unwrap();
        let b = best_swap(&pt, &d, &m, &Gate::cx(0, 1)).unwrap();
        assert!(b.swaps.is_empty());
        assert_eq!(b.edge, (0, 1));
        assert!((b.esp - 0.99).abs() < 1e-15);
        assert_eq!(best_swap(&pt, &d, &m, &Gate::h(0)), None);
    }

    #[test]
    fn three_qubit_path_uses_one_swap_next_to_middle() {
        let d = uniform(3, &[(0, 1, 0.02), (1, 2, 0.02)], 0.0, 0.0);
        let pt = PathTable::compute(&d);
        let m = Mapping::new(vec![0, 2], 3).unwrap();
        let b = best_swap(&pt, &d, &m, &Gate::cx(0, 1)).unwrap();
        assert_eq!(b.swaps.len(), 1);
        assert!(b.edge.0 == 1 || b.edge.1 == 1);
        let after = apply(&m, &b.swaps);
        assert_eq!((after.phys(0), after.phys(1)), b.edge);
        assert!((b.esp - 0.98f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn four_cycle_avoids_terrible_edge() {
        // Operands on 2 and 3 joined only by a bad coupler: moving one of
        // them two steps round the cycle beats using it.
        let d = uniform(4, &[(0, 1, 0.01), (1, 2, 0.01), (2, 3, 0.5), (3, 0, 0.01)], 0.0, 0.0);
        let pt = PathTable::compute(&d);
        let m = Mapping::new(vec![2, 3], 4).unwrap();
        let b = best_swap(&pt, &d, &m, &Gate::cx(0, 1)).unwrap();
        assert!(!b.swaps.is_empty());
        assert_ne!((b.edge.0.min(b.edge.1), b.edge.0.max(b.edge.1)), (2, 3));
        assert!(b.esp > 0.5);
    }

    #[test]
    fn every_route_lands_operands_on_its_edge() {
        let d = uniform(
            5,
            &[(0, 1, 0.01), (1, 2, 0.04), (2, 3, 0.02), (3, 4, 0.03), (4, 0, 0.05), (1, 3, 0.02)],
            0.0,
            0.0,
        );
        let pt = PathTable::compute(&d);
        let router = SwapRouter::new(&d, &pt);
        for pc in 0..5 {
            for ptg in 0..5 {
                if pc == ptg {
                    continue;
                }
                let m = Mapping::new(vec![pc, ptg], 5).unwrap();
                let routes = router.routes(pc, ptg);
                assert!(!routes.is_empty());
                for r in routes {
                    let after = apply(&m, &r.swaps);
                    assert_eq!((after.phys(0), after.phys(1)), r.edge);
                    assert!(d.are_adjacent(r.edge.0, r.edge.1));
                }
                let best = router.best_route(pc, ptg);
                assert!(routes.iter().all(|r| r.esp <= best.esp));
            }
        }
    }
}
