mod common;

use esp_router::circuit::{
    cuccaro_adder_with_inputs, emit_circuit, gen_cuccaro_adder, parse_circuit, toffoli, DependencyDag, ParseErrorKind,
};
use esp_router::evaluator::ideal_of_circuit;
use esp_router::sim::{unitary_of, unitary_of_gates, DEFAULT_MAX_QUBITS};
use esp_router::{Circuit, Gate, GateKind};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_circuit() -> impl Strategy<Value = Circuit> {
    (1usize..=6, 0u64..u64::MAX, 0usize..30).prop_map(|(vars, seed, len)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cx = if vars >= 2 { rng.random_range(0..=len) } else { 0 };
        common::random_circuit(&mut rng, vars, cx, len - cx)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn emit_then_parse_is_identity(c in arb_circuit()) {
        let back = parse_circuit(&emit_circuit(&c)).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn dag_is_acyclic_and_any_topological_order_keeps_the_unitary(c in arb_circuit(), seed in 0u64..1000) {
        let c = c.without_measures();
        let dag = DependencyDag::build(&c);
        // Kahn's algorithm with random tie-breaking.
        let mut indeg = dag.in_degrees();
        let mut ready: Vec<usize> = (0..c.len()).filter(|&i| indeg[i] == 0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = Vec::new();
        while !ready.is_empty() {
            let g = ready.swap_remove(rng.random_range(0..ready.len()));
            order.push(g);
            for &s in dag.successors(g) {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.push(s);
                }
            }
        }
        prop_assert_eq!(order.len(), c.len());
        prop_assert!(dag.is_topological_order(&order));
        let permuted: Vec<Gate> = order.iter().map(|&i| c.gates()[i]).collect();
        let a = unitary_of(&c, DEFAULT_MAX_QUBITS).unwrap();
        let b = unitary_of_gates(c.num_qubits(), &permuted, DEFAULT_MAX_QUBITS).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }
}

#[test]
fn parse_examples() {
    let c = parse_circuit("qreg q[3]; cx q[0],q[2];").unwrap();
    assert_eq!(c.num_qubits(), 3);
    assert_eq!(c.gates(), &[Gate::cx(0, 2)]);
    let c = parse_circuit("qreg q[1]; h q[0]; measure q[0];").unwrap();
    assert_eq!(c.gates(), &[Gate::h(0), Gate::measure(0)]);
    let e = parse_circuit("qreg q[2]; measure q[0]; h q[0];").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::GateAfterMeasure(0));
}

#[test]
fn parse_reports_positions() {
    let e = parse_circuit("qreg q[2];\nh q[0];\n  rx q[1];\n").unwrap_err();
    assert_eq!(e.line, 3);
    assert_eq!(e.column, 3);
    assert_eq!(e.kind, ParseErrorKind::UnknownGate("rx".into()));
    let e = parse_circuit("qreg q[2];\ncx q[0],q[2];").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::OperandOutOfRange { index: 2, size: 2 }));
}

#[test]
fn dependency_examples() {
    let c = Circuit::new(2, vec![Gate::h(0), Gate::h(1), Gate::cx(0, 1)]).unwrap();
    let dag = DependencyDag::build(&c);
    assert!(dag.predecessors(0).is_empty());
    assert!(dag.predecessors(1).is_empty());
    let mut p = dag.predecessors(2).to_vec();
    p.sort();
    assert_eq!(p, vec![0, 1]);

    let c = Circuit::new(3, vec![Gate::cx(0, 1), Gate::cx(1, 2), Gate::cx(0, 1)]).unwrap();
    let dag = DependencyDag::build(&c);
    assert_eq!(dag.predecessors(1), &[0]);
    // Latest earlier gate per shared operand: gate 0 on q0, gate 1 on q1.
    let mut p = dag.predecessors(2).to_vec();
    p.sort();
    assert_eq!(p, vec![0, 1]);
    assert!(!dag.is_topological_order(&[1, 0, 2]));

    assert!(DependencyDag::build(&Circuit::empty(2)).is_empty());
}

#[test]
fn adder_sizes() {
    for (n, total) in [(1, 45), (2, 82), (4, 156)] {
        let c = gen_cuccaro_adder(n).unwrap();
        assert_eq!(c.len(), total);
        assert_eq!(c.num_qubits(), 2 * n + 2);
        assert_eq!(c.measured_qubits().len(), n + 1);
    }
    assert!(gen_cuccaro_adder(0).is_err());
}

#[test]
fn toffoli_network_is_toffoli() {
    let u = unitary_of_gates(3, &toffoli(0, 1, 2), DEFAULT_MAX_QUBITS).unwrap();
    let g = toffoli(0, 1, 2);
    assert_eq!(g.iter().filter(|g| g.is_cx()).count(), 6);
    assert_eq!(g.iter().filter(|g| !g.is_cx()).count(), 9);
    for col in 0..8usize {
        let row = if col & 0b011 == 0b011 { col ^ 0b100 } else { col };
        for r in 0..8 {
            let want = if r == row { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            assert!((u.get(r, col) - want).norm() < 1e-10, "row {r} col {col}");
        }
    }
}

#[test]
fn four_bit_adder_adds_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..64 {
        let (a, b) = (rng.random_range(0..16u64), rng.random_range(0..16u64));
        let d = ideal_of_circuit(&cuccaro_adder_with_inputs(4, a, b).unwrap()).unwrap();
        assert!((d.probability((a + b) as usize) - 1.0).abs() < 1e-9, "{a} + {b}");
    }
}

#[test]
fn unitary_examples() {
    let x = unitary_of(&Circuit::new(1, vec![Gate::x(0)]).unwrap(), DEFAULT_MAX_QUBITS).unwrap();
    assert_eq!(x.get(0, 1), Complex64::new(1.0, 0.0));
    assert_eq!(x.get(1, 0), Complex64::new(1.0, 0.0));
    assert_eq!(x.get(0, 0), Complex64::new(0.0, 0.0));
    let hh = unitary_of(&Circuit::new(1, vec![Gate::h(0), Gate::h(0)]).unwrap(), DEFAULT_MAX_QUBITS).unwrap();
    assert!(hh.max_abs_diff(&esp_router::sim::Unitary::identity(1)) < 1e-12);
    assert!(unitary_of(&Circuit::new(1, vec![Gate::measure(0)]).unwrap(), DEFAULT_MAX_QUBITS).is_err());
    assert!(unitary_of(&Circuit::empty(13), DEFAULT_MAX_QUBITS).is_err());
    assert_eq!(GateKind::from_name("sdg"), Some(GateKind::Sdg));
}
