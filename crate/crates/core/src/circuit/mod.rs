//! Gate-level circuits over a dense register of qubits.

mod adder;
mod dag;
mod qasm;

pub use adder::{cuccaro_adder_with_inputs, gen_cuccaro_adder, toffoli, AdderLayout};
pub use dag::DependencyDag;
pub use qasm::{emit_circuit, parse_circuit, ParseError, ParseErrorKind};

use std::fmt;

use serde::{Deserialize, Serialize};

/// The supported gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    S,
    Sdg,
    T,
    Tdg,
    /// Controlled NOT; operand 0 is the control, operand 1 the target.
    Cx,
    /// Terminal computational-basis readout.
    Measure,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::H,
        GateKind::X,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Cx,
        GateKind::Measure,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx => 2,
            _ => 1,
        }
    }

    /// True for the single-qubit unitaries (error class G).
    pub fn is_single_qubit(self) -> bool {
        !matches!(self, GateKind::Cx | GateKind::Measure)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Cx => "cx",
            GateKind::Measure => "measure",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate applied to one or two qubits.
///
/// The same type is used for logical gates (operands are program variables)
/// and placed gates (operands are physical qubits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    kind: GateKind,
    operands: [usize; 2],
}

impl Gate {
    /// Builds a gate, checking arity and operand distinctness.
    pub fn new(kind: GateKind, operands: &[usize]) -> Result<Gate, CircuitError> {
        if operands.len() != kind.arity() {
            return Err(CircuitError::Arity {
                kind,
                got: operands.len(),
            });
        }
        if kind == GateKind::Cx {
            if operands[0] == operands[1] {
                return Err(CircuitError::DuplicateOperand { qubit: operands[0] });
            }
            Ok(Gate::cx(operands[0], operands[1]))
        } else {
            Ok(Gate::single(kind, operands[0]))
        }
    }

    /// Single-operand gate (any kind except `Cx`).
    pub fn single(kind: GateKind, qubit: usize) -> Gate {
        debug_assert_eq!(kind.arity(), 1);
        Gate {
            kind,
            operands: [qubit, usize::MAX],
        }
    }

    pub fn cx(control: usize, target: usize) -> Gate {
        debug_assert_ne!(control, target);
        Gate {
            kind: GateKind::Cx,
            operands: [control, target],
        }
    }

    pub fn h(q: usize) -> Gate {
        Gate::single(GateKind::H, q)
    }
    pub fn x(q: usize) -> Gate {
        Gate::single(GateKind::X, q)
    }
    pub fn s(q: usize) -> Gate {
        Gate::single(GateKind::S, q)
    }
    pub fn sdg(q: usize) -> Gate {
        Gate::single(GateKind::Sdg, q)
    }
    pub fn t(q: usize) -> Gate {
        Gate::single(GateKind::T, q)
    }
    pub fn tdg(q: usize) -> Gate {
        Gate::single(GateKind::Tdg, q)
    }
    pub fn measure(q: usize) -> Gate {
        Gate::single(GateKind::Measure, q)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.operands[..self.kind.arity()]
    }

    /// First operand (the control for `Cx`).
    pub fn q0(&self) -> usize {
        self.operands[0]
    }

    /// Second operand; only meaningful for `Cx`.
    pub fn q1(&self) -> usize {
        debug_assert_eq!(self.kind, GateKind::Cx);
        self.operands[1]
    }

    pub fn is_cx(&self) -> bool {
        self.kind == GateKind::Cx
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.qubits().contains(&q)
    }

    /// Relabels the operands through `f`.
    pub fn remap(&self, mut f: impl FnMut(usize) -> usize) -> Gate {
        match self.kind {
            GateKind::Cx => Gate::cx(f(self.operands[0]), f(self.operands[1])),
            k => Gate::single(k, f(self.operands[0])),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::Cx => write!(f, "cx q[{}],q[{}]", self.operands[0], self.operands[1]),
            k => write!(f, "{} q[{}]", k, self.operands[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("{kind} takes {} operand(s), got {got}", kind.arity())]
    Arity { kind: GateKind, got: usize },
    #[error("gate operands must be distinct (qubit {qubit} repeated)")]
    DuplicateOperand { qubit: usize },
    #[error("gate {gate}: operand {qubit} out of range for a {num_qubits}-qubit register")]
    OperandOutOfRange {
        gate: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("gate {gate}: qubit {qubit} was already measured")]
    GateAfterMeasure { gate: usize, qubit: usize },
    #[error("adder input width must be at least 1, got {0}")]
    AdderWidth(usize),
    #[error("adder input {value} does not fit in {width} bit(s)")]
    AdderInput { value: u64, width: usize },
}

/// An ordered gate list over `num_qubits` logical variables.
///
/// Invariants: every operand is below `num_qubits` and no gate touches a
/// qubit after that qubit's `Measure`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Circuit, CircuitError> {
        let mut measured = vec![false; num_qubits];
        for (idx, gate) in gates.iter().enumerate() {
            check_gate(idx, gate, num_qubits, &mut measured)?;
        }
        Ok(Circuit { num_qubits, gates })
    }

    pub fn empty(num_qubits: usize) -> Circuit {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cx()).count()
    }

    pub fn has_measure(&self) -> bool {
        self.gates.iter().any(|g| g.kind() == GateKind::Measure)
    }

    /// Qubits read out by the circuit, in measurement order.
    pub fn measured_qubits(&self) -> Vec<usize> {
        self.gates
            .iter()
            .filter(|g| g.kind() == GateKind::Measure)
            .map(|g| g.q0())
            .collect()
    }

    /// The same circuit with every `Measure` removed.
    pub fn without_measures(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self
                .gates
                .iter()
                .copied()
                .filter(|g| g.kind() != GateKind::Measure)
                .collect(),
        }
    }
}

pub(crate) fn check_gate(
    idx: usize,
    gate: &Gate,
    num_qubits: usize,
    measured: &mut [bool],
) -> Result<(), CircuitError> {
    for &q in gate.qubits() {
        if q >= num_qubits {
            return Err(CircuitError::OperandOutOfRange {
                gate: idx,
                qubit: q,
                num_qubits,
            });
        }
        if measured[q] {
            return Err(CircuitError::GateAfterMeasure { gate: idx, qubit: q });
        }
    }
    if gate.kind() == GateKind::Measure {
        measured[gate.q0()] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_constructor_checks_arity_and_operands() {
        assert!(Gate::new(GateKind::Cx, &[0]).is_err());
        assert!(Gate::new(GateKind::H, &[0, 1]).is_err());
        assert_eq!(
            Gate::new(GateKind::Cx, &[2, 2]),
            Err(CircuitError::DuplicateOperand { qubit: 2 })
        );
        assert_eq!(Gate::new(GateKind::Cx, &[0, 2]).unwrap().qubits(), &[0, 2]);
    }

    #[test]
    fn circuit_rejects_out_of_range_and_gate_after_measure() {
        assert!(matches!(
            Circuit::new(2, vec![Gate::cx(0, 2)]),
            Err(CircuitError::OperandOutOfRange { qubit: 2, .. })
        ));
        assert_eq!(
            Circuit::new(2, vec![Gate::measure(0), Gate::h(0)]),
            Err(CircuitError::GateAfterMeasure { gate: 1, qubit: 0 })
        );
        assert!(Circuit::new(2, vec![Gate::measure(0), Gate::h(1), Gate::measure(1)]).is_ok());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in GateKind::ALL {
            assert_eq!(GateKind::from_name(k.name()), Some(k));
        }
        assert_eq!(GateKind::from_name("ccx"), None);
    }
}
