use super::Circuit;

/// Gate precedence: gate `g` depends on `g'` iff `g'` is the latest earlier
/// gate sharing an operand with `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyDag {
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl DependencyDag {
    pub fn build(c: &Circuit) -> DependencyDag {
        let mut last: Vec<Option<usize>> = vec![None; c.num_qubits()];
        let mut preds = Vec::with_capacity(c.len());
        let mut succs = vec![Vec::new(); c.len()];
        for (idx, gate) in c.gates().iter().enumerate() {
            let mut p: Vec<usize> = Vec::with_capacity(2);
            for &q in gate.qubits() {
                if let Some(prev) = last[q] {
                    if !p.contains(&prev) {
                        p.push(prev);
                    }
                }
                last[q] = Some(idx);
            }
            p.sort_unstable();
            for &prev in &p {
                succs[prev].push(idx);
            }
            preds.push(p);
        }
        DependencyDag { preds, succs }
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn predecessors(&self, gate: usize) -> &[usize] {
        &self.preds[gate]
    }

    pub fn successors(&self, gate: usize) -> &[usize] {
        &self.succs[gate]
    }

    /// Number of unmet dependencies per gate before anything has executed.
    pub fn in_degrees(&self) -> Vec<u32> {
        self.preds.iter().map(|p| p.len() as u32).collect()
    }

    /// True if `order` is a permutation of all gates respecting every edge.
    pub fn is_topological_order(&self, order: &[usize]) -> bool {
        if order.len() != self.len() {
            return false;
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &g) in order.iter().enumerate() {
            if g >= self.len() || pos[g] != usize::MAX {
                return false;
            }
            pos[g] = i;
        }
        self.preds
            .iter()
            .enumerate()
            .all(|(g, ps)| ps.iter().all(|&p| pos[p] < pos[g]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn cx_waits_for_both_hadamards() {
        let c = Circuit::new(2, vec![Gate::h(0), Gate::h(1), Gate::cx(0, 1)]).unwrap();
        let dag = DependencyDag::build(&c);
        assert!(dag.predecessors(0).is_empty());
        assert!(dag.predecessors(1).is_empty());
        assert_eq!(dag.predecessors(2), &[0, 1]);
        assert_eq!(dag.successors(0), &[2]);
    }

    #[test]
    fn chain_through_shared_operands() {
        // g0 = CX(0,1), g1 = CX(1,2), g2 = CX(0,1):
        // g1 shares q1 with g0; g2's latest sharers are g0 (q0) and g1 (q1).
        let c = Circuit::new(3, vec![Gate::cx(0, 1), Gate::cx(1, 2), Gate::cx(0, 1)]).unwrap();
        let dag = DependencyDag::build(&c);
        assert_eq!(dag.predecessors(0), &[] as &[usize]);
        assert_eq!(dag.predecessors(1), &[0]);
        assert_eq!(dag.predecessors(2), &[0, 1]);
        assert!(dag.is_topological_order(&[0, 1, 2]));
        assert!(!dag.is_topological_order(&[1, 0, 2]));
    }

    #[test]
    fn empty_circuit_has_empty_dag() {
        let dag = DependencyDag::build(&Circuit::empty(3));
        assert!(dag.is_empty());
        assert!(dag.is_topological_order(&[]));
    }
}
