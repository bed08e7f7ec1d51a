//! Initial placements: greatest connecting edge, and uniform random.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{MapperError, Mapping};
use crate::circuit::Circuit;
use crate::device::DeviceModel;

fn check_fits(c: &Circuit, d: &DeviceModel) -> Result<(), MapperError> {
    if c.num_qubits() > d.num_qubits() {
        return Err(MapperError::TooManyVariables {
            vars: c.num_qubits(),
            qubits: d.num_qubits(),
        });
    }
    Ok(())
}

/// Interaction graph of a circuit: `((a, b), cnot count)` with `a < b`,
/// heaviest first, ties by the lower variable pair.
pub fn guest_graph(c: &Circuit) -> Vec<((usize, usize), usize)> {
    let mut w: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for g in c.gates().iter().filter(|g| g.is_cx()) {
        let (a, b) = (g.q0().min(g.q1()), g.q0().max(g.q1()));
        *w.entry((a, b)).or_default() += 1;
    }
    let mut edges: Vec<_> = w.into_iter().collect();
    edges.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    edges
}

/// Uniform injective placement of every variable.
pub fn random_mapping<R: Rng + ?Sized>(c: &Circuit, d: &DeviceModel, rng: &mut R) -> Result<Mapping, MapperError> {
    check_fits(c, d)?;
    let mut qubits: Vec<usize> = (0..d.num_qubits()).collect();
    qubits.shuffle(rng);
    qubits.truncate(c.num_qubits());
    Mapping::new(qubits, d.num_qubits())
}

/// Greatest-connecting-edge placement.
///
/// The heaviest interaction goes on the most reliable coupler. Then, while
/// possible, the heaviest interaction between a placed and an unplaced
/// variable puts the unplaced one on the most reliable free neighbor of its
/// partner. When no interaction crosses the placed set, the heaviest
/// remaining interaction starts again on the most reliable free coupler.
/// Variables left over go to random free qubits.
pub fn gce_initial_mapping<R: Rng + ?Sized>(c: &Circuit, d: &DeviceModel, rng: &mut R) -> Result<Mapping, MapperError> {
    check_fits(c, d)?;
    let n = d.num_qubits();
    let guest = guest_graph(c);
    let mut v2p: Vec<Option<usize>> = vec![None; c.num_qubits()];
    let mut used = vec![false; n];

    // Most reliable fully free coupler; ties by lower (q0, q1).
    let best_free_edge = |used: &[bool]| {
        d.edges()
            .iter()
            .filter(|e| !used[e.q0] && !used[e.q1])
            .map(|e| (e.cx_error, e.q0.min(e.q1), e.q0.max(e.q1)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))))
    };

    let mut remaining: Vec<(usize, usize)> = guest.iter().map(|&(e, _)| e).collect();
    loop {
        let crossing = remaining.iter().position(|&(a, b)| {
            let (placed, free) = match (v2p[a], v2p[b]) {
                (Some(p), None) => (p, b),
                (None, Some(p)) => (p, a),
                _ => return false,
            };
            let _ = free;
            d.neighbors(placed).iter().any(|&(q, _)| !used[q])
        });
        if let Some(i) = crossing {
            let (a, b) = remaining.remove(i);
            let (placed_phys, free_var) = match v2p[a] {
                Some(p) => (p, b),
                None => (v2p[b].unwrap(), a),
            };
            let (q, _) = d
                .neighbors(placed_phys)
                .iter()
                .filter(|&&(q, _)| !used[q])
                .map(|&(q, e)| (q, d.edge(e).cx_error))
                .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
                .expect("checked above");
            v2p[free_var] = Some(q);
            used[q] = true;
            continue;
        }
        // Interactions with both ends placed, or crossing ones whose placed end
        // has no free neighbor, are settled for good.
        remaining.retain(|&(a, b)| v2p[a].is_none() && v2p[b].is_none());
        let Some(&(a, b)) = remaining.first() else { break };
        let Some((_, q0, q1)) = best_free_edge(&used) else { break };
        remaining.remove(0);
        v2p[a] = Some(q0);
        v2p[b] = Some(q1);
        used[q0] = true;
        used[q1] = true;
    }

    let mut free: Vec<usize> = (0..n).filter(|&q| !used[q]).collect();
    for slot in v2p.iter_mut().filter(|s| s.is_none()) {
        let i = rng.random_range(0..free.len());
        *slot = Some(free.swap_remove(i));
    }
    Mapping::new(v2p.into_iter().map(Option::unwrap).collect(), n)
}
