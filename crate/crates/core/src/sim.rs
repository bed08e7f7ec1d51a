//! Dense statevector simulation.
//!
//! Basis states are indexed little-endian: qubit `k` is bit `k` of the index.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind};

/// Default qubit cap for building full unitaries.
pub const DEFAULT_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{qubits} qubits exceeds the simulation limit of {max}")]
    TooManyQubits { qubits: usize, max: usize },
    #[error("circuit contains a measurement; unitary is undefined")]
    MeasurePresent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `[X, Y, Z]`, indexed 0..3.
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i]
    }

    /// Whether the Pauli flips a computational-basis bit.
    pub fn flips_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> StateVector {
        StateVector::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a unitary gate. `Measure` is ignored.
    pub fn apply(&mut self, gate: &Gate) {
        let q = gate.q0();
        match gate.kind() {
            GateKind::H => self.apply_h(q),
            GateKind::X => self.apply_x(q),
            GateKind::S => self.apply_phase(q, Complex64::new(0.0, 1.0)),
            GateKind::Sdg => self.apply_phase(q, Complex64::new(0.0, -1.0)),
            GateKind::T => self.apply_phase(q, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            GateKind::Tdg => {
                self.apply_phase(q, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4))
            }
            GateKind::Cx => self.apply_cx(q, gate.q1()),
            GateKind::Measure => {}
        }
    }

    /// Appends one qubit in basis state `bit` as the new highest qubit.
    pub fn push_qubit(&mut self, bit: bool) {
        let zero = Complex64::new(0.0, 0.0);
        let old = std::mem::take(&mut self.amps);
        self.amps = if bit {
            std::iter::repeat_n(zero, old.len()).chain(old).collect()
        } else {
            let len = old.len();
            old.into_iter().chain(std::iter::repeat_n(zero, len)).collect()
        };
        self.num_qubits += 1;
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.apply_x(q),
            Pauli::Z => self.apply_phase(q, Complex64::new(-1.0, 0.0)),
            Pauli::Y => {
                // Y = i X Z
                self.apply_phase(q, Complex64::new(-1.0, 0.0));
                self.apply_x(q);
                let i = Complex64::new(0.0, 1.0);
                self.amps.iter_mut().for_each(|a| *a *= i);
            }
        }
    }

    fn apply_h(&mut self, q: usize) {
        let bit = 1usize << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * s;
                self.amps[i | bit] = (a - b) * s;
            }
        }
    }

    fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    fn apply_phase(&mut self, q: usize, phase: Complex64) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= phase;
            }
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }
}

/// A state stored as its nonzero amplitudes, for wide registers whose
/// state stays concentrated on few basis states.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseState {
    amps: HashMap<u64, Complex64>,
}

impl SparseState {
    pub fn basis(index: u64) -> SparseState {
        SparseState {
            amps: HashMap::from([(index, Complex64::new(1.0, 0.0))]),
        }
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps.get(&index).copied().unwrap_or_default()
    }

    /// Nonzero entries, sorted by basis index.
    pub fn entries(&self) -> Vec<(u64, Complex64)> {
        let mut v: Vec<_> = self.amps.iter().map(|(&k, &a)| (k, a)).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    /// Applies a unitary gate on qubits below 64. `Measure` is ignored.
    pub fn apply(&mut self, gate: &Gate) {
        let q = gate.q0();
        let bit = 1u64 << q;
        let phase = |amps: &mut HashMap<u64, Complex64>, p: Complex64| {
            amps.iter_mut().filter(|(k, _)| *k & bit != 0).for_each(|(_, a)| *a *= p);
        };
        match gate.kind() {
            GateKind::Measure => {}
            GateKind::X => self.amps = self.amps.drain().map(|(k, a)| (k ^ bit, a)).collect(),
            GateKind::Cx => {
                let t = 1u64 << gate.q1();
                self.amps = self
                    .amps
                    .drain()
                    .map(|(k, a)| (if k & bit != 0 { k ^ t } else { k }, a))
                    .collect();
            }
            GateKind::S => phase(&mut self.amps, Complex64::new(0.0, 1.0)),
            GateKind::Sdg => phase(&mut self.amps, Complex64::new(0.0, -1.0)),
            GateKind::T => phase(&mut self.amps, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            GateKind::Tdg => phase(&mut self.amps, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut next: HashMap<u64, Complex64> = HashMap::with_capacity(self.amps.len() * 2);
                for (&k, &a) in &self.amps {
                    let low = k & !bit;
                    let sign = if k & bit != 0 { -1.0 } else { 1.0 };
                    *next.entry(low).or_default() += a * s;
                    *next.entry(low | bit).or_default() += a * s * sign;
                }
                next.retain(|_, a| a.norm_sqr() > 1e-30);
                self.amps = next;
            }
        }
    }
}

/// A `2^n x 2^n` unitary stored column by column: column `j` is `U|j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    num_qubits: usize,
    columns: Vec<Vec<Complex64>>,
}

impl Unitary {
    pub fn identity(num_qubits: usize) -> Unitary {
        Unitary {
            num_qubits,
            columns: (0..1usize << num_qubits)
                .map(|j| StateVector::basis(num_qubits, j).amps)
                .collect(),
        }
    }

    pub fn from_columns(num_qubits: usize, columns: Vec<Vec<Complex64>>) -> Unitary {
        assert_eq!(columns.len(), 1 << num_qubits);
        assert!(columns.iter().all(|c| c.len() == 1 << num_qubits));
        Unitary {
            num_qubits,
            columns,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Entry `<row|U|col>`.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.columns[col][row]
    }

    pub fn column(&self, col: usize) -> &[Complex64] {
        &self.columns[col]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Unitary) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.columns
            .iter()
            .zip(&other.columns)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

/// Exact unitary of a measurement-free gate sequence on `num_qubits` qubits.
pub fn unitary_of_gates(num_qubits: usize, gates: &[Gate], max_qubits: usize) -> Result<Unitary, SimError> {
    if num_qubits > max_qubits {
        return Err(SimError::TooManyQubits {
            qubits: num_qubits,
            max: max_qubits,
        });
    }
    if gates.iter().any(|g| g.kind() == GateKind::Measure) {
        return Err(SimError::MeasurePresent);
    }
    let columns = (0..1usize << num_qubits)
        .map(|j| {
            let mut sv = StateVector::basis(num_qubits, j);
            gates.iter().for_each(|g| sv.apply(g));
            sv.amps
        })
        .collect();
    Ok(Unitary {
        num_qubits,
        columns,
    })
}

/// Exact unitary of a circuit; fails on measurements or more than `max_qubits`.
pub fn unitary_of(c: &Circuit, max_qubits: usize) -> Result<Unitary, SimError> {
    unitary_of_gates(c.num_qubits(), c.gates(), max_qubits)
}
