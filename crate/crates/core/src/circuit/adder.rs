//! Cuccaro ripple-carry adder, the compile-and-measure benchmark.
//!
//! Register layout for an `n`-bit adder (`2n + 2` qubits):
//! carry-in `c` at 0, then `b_i` at `1 + 2i` and `a_i` at `2 + 2i`
//! interleaved, carry-out `z` at `2n + 1`. After the adder `b_i` holds sum
//! bit `s_i` and `z` the final carry, so the measured bits `s_0..s_{n-1}, z`
//! read little-endian give `a + b`.

use super::{Circuit, CircuitError, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdderLayout {
    pub width: usize,
}

impl AdderLayout {
    pub fn num_qubits(&self) -> usize {
        2 * self.width + 2
    }
    pub fn carry_in(&self) -> usize {
        0
    }
    pub fn a(&self, i: usize) -> usize {
        2 + 2 * i
    }
    pub fn b(&self, i: usize) -> usize {
        1 + 2 * i
    }
    pub fn carry_out(&self) -> usize {
        2 * self.width + 1
    }
}

/// Toffoli as 6 CNOTs and 9 single-qubit gates (H/T/T†), controls `c1`, `c2`.
pub fn toffoli(c1: usize, c2: usize, target: usize) -> [Gate; 15] {
    [
        Gate::h(target),
        Gate::cx(c2, target),
        Gate::tdg(target),
        Gate::cx(c1, target),
        Gate::t(target),
        Gate::cx(c2, target),
        Gate::tdg(target),
        Gate::cx(c1, target),
        Gate::t(c2),
        Gate::t(target),
        Gate::h(target),
        Gate::cx(c1, c2),
        Gate::t(c1),
        Gate::tdg(c2),
        Gate::cx(c1, c2),
    ]
}

fn maj(gates: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    gates.push(Gate::cx(a, b));
    gates.push(Gate::cx(a, c));
    gates.extend(toffoli(c, b, a));
}

fn uma(gates: &mut Vec<Gate>, c: usize, b: usize, a: usize) {
    gates.extend(toffoli(c, b, a));
    gates.push(Gate::cx(a, c));
    gates.push(Gate::cx(c, b));
}

/// Fixed three-gate diagonal identity (T·T·S†) on each ancilla. It has no
/// effect on the computed function; it pins the testbench at `37n + 8` gates.
fn ancilla_preamble(gates: &mut Vec<Gate>, layout: &AdderLayout) {
    for q in [layout.carry_in(), layout.carry_out()] {
        gates.push(Gate::t(q));
        gates.push(Gate::t(q));
        gates.push(Gate::sdg(q));
    }
}

fn adder_body(gates: &mut Vec<Gate>, layout: &AdderLayout) {
    let n = layout.width;
    let prev = |i: usize| if i == 0 { layout.carry_in() } else { layout.a(i - 1) };
    for i in 0..n {
        maj(gates, prev(i), layout.b(i), layout.a(i));
    }
    gates.push(Gate::cx(layout.a(n - 1), layout.carry_out()));
    for i in (0..n).rev() {
        uma(gates, prev(i), layout.b(i), layout.a(i));
    }
    for i in 0..n {
        gates.push(Gate::measure(layout.b(i)));
    }
    gates.push(Gate::measure(layout.carry_out()));
}

/// The adder testbench: Hadamard on every `a`/`b` input, the adder, and
/// readout of the sum and carry-out.
pub fn gen_cuccaro_adder(n: usize) -> Result<Circuit, CircuitError> {
    if n < 1 {
        return Err(CircuitError::AdderWidth(n));
    }
    let layout = AdderLayout { width: n };
    let mut gates = Vec::with_capacity(37 * n + 8);
    ancilla_preamble(&mut gates, &layout);
    for i in 0..n {
        gates.push(Gate::h(layout.b(i)));
        gates.push(Gate::h(layout.a(i)));
    }
    adder_body(&mut gates, &layout);
    Circuit::new(layout.num_qubits(), gates)
}

/// Same adder with classical inputs loaded by X gates instead of Hadamards.
pub fn cuccaro_adder_with_inputs(n: usize, a: u64, b: u64) -> Result<Circuit, CircuitError> {
    if n < 1 {
        return Err(CircuitError::AdderWidth(n));
    }
    for value in [a, b] {
        if n < 64 && value >> n != 0 {
            return Err(CircuitError::AdderInput { value, width: n });
        }
    }
    let layout = AdderLayout { width: n };
    let mut gates = Vec::new();
    ancilla_preamble(&mut gates, &layout);
    for i in 0..n {
        if (b >> i) & 1 == 1 {
            gates.push(Gate::x(layout.b(i)));
        }
        if (a >> i) & 1 == 1 {
            gates.push(Gate::x(layout.a(i)));
        }
    }
    adder_body(&mut gates, &layout);
    Circuit::new(layout.num_qubits(), gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;

    #[test]
    fn toffoli_gate_census() {
        let t = toffoli(0, 1, 2);
        assert_eq!(t.iter().filter(|g| g.is_cx()).count(), 6);
        assert_eq!(t.iter().filter(|g| g.kind().is_single_qubit()).count(), 9);
    }

    #[test]
    fn adder_gate_counts() {
        for (n, expected) in [(1, 45), (2, 82), (4, 156)] {
            assert_eq!(gen_cuccaro_adder(n).unwrap().len(), expected, "n = {n}");
        }
    }

    #[test]
    fn adder_measures_sum_then_carry() {
        let c = gen_cuccaro_adder(2).unwrap();
        assert_eq!(c.num_qubits(), 6);
        assert_eq!(c.measured_qubits(), vec![1, 3, 5]);
        let hs: Vec<usize> = c
            .gates()
            .iter()
            .filter(|g| g.kind() == GateKind::H)
            .take(4)
            .map(|g| g.q0())
            .collect();
        assert_eq!(hs, vec![1, 2, 3, 4]);
    }

    #[test]
    fn rejects_zero_width() {
        assert_eq!(gen_cuccaro_adder(0), Err(CircuitError::AdderWidth(0)));
        assert!(cuccaro_adder_with_inputs(2, 4, 0).is_err());
    }
}
