//! Noise-aware mapping and routing.
//!
//! A compilation is a walk from "nothing executed" to "everything executed"
//! through states made of an execution set and a qubit mapping. Executing a
//! CNOT may first move its operands together with SWAPs; each such choice is
//! a separate successor. Beam search keeps the `B` best successors per depth
//! by a lookahead score, starting from a heuristic placement plus `M` random
//! ones. Single-qubit gates never need movement and run as soon as they are
//! ready. Measurements are retired when ready but emitted at the end of the
//! compiled circuit so later SWAPs may pass through measured variables.

mod initial;
mod route;
mod search;
mod verify;

pub use initial::{gce_initial_mapping, guest_graph, random_mapping};
pub use route::{best_swap, BestSwap, Route, SwapRouter};
pub use search::{compile_beam, compile_random, update_score, Compiler, SearchState, SearchStats};
pub use verify::{verify_compiled, VerifyOutcome};

use serde::{Deserialize, Serialize};

use crate::circuit::{emit_circuit, Circuit, CircuitError, Gate};
use crate::device::{DeviceError, DeviceModel};
use crate::sim::SimError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapperError {
    #[error("circuit has {vars} variables but the device has only {qubits} qubits")]
    TooManyVariables { vars: usize, qubits: usize },
    #[error("invalid compiler configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("compiled gate {index} ({gate}) is not on a device coupler")]
    NotAdjacent { index: usize, gate: Gate },
    #[error("device has {0} qubits; at most 65534 are supported")]
    DeviceTooLarge(usize),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// An injective placement of logical variables onto physical qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MappingRepr", into = "MappingRepr")]
pub struct Mapping {
    v2p: Vec<usize>,
    p2v: Vec<Option<usize>>,
}

#[derive(Serialize, Deserialize)]
struct MappingRepr {
    num_physical: usize,
    var_to_phys: Vec<usize>,
}

impl TryFrom<MappingRepr> for Mapping {
    type Error = MapperError;
    fn try_from(r: MappingRepr) -> Result<Mapping, MapperError> {
        Mapping::new(r.var_to_phys, r.num_physical)
    }
}

impl From<Mapping> for MappingRepr {
    fn from(m: Mapping) -> MappingRepr {
        MappingRepr {
            num_physical: m.p2v.len(),
            var_to_phys: m.v2p,
        }
    }
}

impl Mapping {
    pub fn new(var_to_phys: Vec<usize>, num_physical: usize) -> Result<Mapping, MapperError> {
        let mut p2v = vec![None; num_physical];
        for (v, &p) in var_to_phys.iter().enumerate() {
            if p >= num_physical {
                return Err(MapperError::InvalidMapping(format!(
                    "variable {v} placed on qubit {p} of a {num_physical}-qubit device"
                )));
            }
            if let Some(other) = p2v[p] {
                return Err(MapperError::InvalidMapping(format!(
                    "variables {other} and {v} share qubit {p}"
                )));
            }
            p2v[p] = Some(v);
        }
        Ok(Mapping { v2p: var_to_phys, p2v })
    }

    /// Variable `v` on physical qubit `v`.
    pub fn identity(num_vars: usize, num_physical: usize) -> Result<Mapping, MapperError> {
        Mapping::new((0..num_vars).collect(), num_physical)
    }

    pub fn num_vars(&self) -> usize {
        self.v2p.len()
    }

    pub fn num_physical(&self) -> usize {
        self.p2v.len()
    }

    pub fn phys(&self, var: usize) -> usize {
        self.v2p[var]
    }

    pub fn var(&self, phys: usize) -> Option<usize> {
        self.p2v[phys]
    }

    pub fn var_to_phys(&self) -> &[usize] {
        &self.v2p
    }

    /// Exchanges whatever sits on physical qubits `a` and `b`.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (va, vb) = (self.p2v[a], self.p2v[b]);
        self.p2v[a] = vb;
        self.p2v[b] = va;
        if let Some(v) = va {
            self.v2p[v] = b;
        }
        if let Some(v) = vb {
            self.v2p[v] = a;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilerConfig {
    /// States kept per search depth.
    pub beam_width: usize,
    /// Random initial mappings added to the start set.
    pub random_mappings: usize,
    pub seed: u64,
    /// Also start from the greatest-connecting-edge placement.
    pub use_gce: bool,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        CompilerConfig {
            beam_width: 10_000,
            random_mappings: 1_000,
            seed: 0,
            use_gce: true,
        }
    }
}

impl CompilerConfig {
    pub fn validate(&self) -> Result<(), MapperError> {
        if self.beam_width == 0 {
            return Err(MapperError::InvalidConfig("beam width must be at least 1".into()));
        }
        if !self.use_gce && self.random_mappings == 0 {
            return Err(MapperError::InvalidConfig(
                "no initial mappings: enable GCE or ask for random mappings".into(),
            ));
        }
        Ok(())
    }
}

/// A routed circuit over physical qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledCircuit {
    gates: Vec<Gate>,
    num_physical: usize,
    esp: f64,
    initial: Mapping,
    final_: Mapping,
    stats: SearchStats,
}

impl CompiledCircuit {
    /// Assembles a compiled circuit; `esp` is recomputed from the gates.
    pub fn from_parts(
        d: &DeviceModel,
        gates: Vec<Gate>,
        initial: Mapping,
        final_: Mapping,
    ) -> Result<CompiledCircuit, MapperError> {
        let n = d.num_qubits();
        if initial.num_physical() != n || final_.num_physical() != n {
            return Err(MapperError::InvalidMapping("mapping does not match the device size".into()));
        }
        if initial.num_vars() != final_.num_vars() {
            return Err(MapperError::InvalidMapping(
                "initial and final mappings cover different variable counts".into(),
            ));
        }
        Circuit::new(n, gates.clone())?;
        for (index, g) in gates.iter().enumerate() {
            if g.is_cx() && !d.are_adjacent(g.q0(), g.q1()) {
                return Err(MapperError::NotAdjacent { index, gate: *g });
            }
        }
        let esp = d.esp_circuit(&gates)?;
        Ok(CompiledCircuit {
            gates,
            num_physical: n,
            esp,
            initial,
            final_,
            stats: SearchStats::default(),
        })
    }

    pub(crate) fn with_stats(mut self, stats: SearchStats) -> CompiledCircuit {
        self.stats = stats;
        self
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    /// ESP of the placed gates on the device they were compiled for.
    pub fn esp(&self) -> f64 {
        self.esp
    }

    pub fn initial_mapping(&self) -> &Mapping {
        &self.initial
    }

    pub fn final_mapping(&self) -> &Mapping {
        &self.final_
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    /// The placed gates as a circuit over every device qubit.
    pub fn to_circuit(&self) -> Circuit {
        Circuit::new(self.num_physical, self.gates.clone()).expect("compiled gates are valid")
    }

    pub fn to_qasm(&self) -> String {
        emit_circuit(&self.to_circuit())
    }

    pub fn report(&self, config: Option<CompilerConfig>, seconds: f64) -> CompileReport {
        CompileReport {
            initial_mapping: self.initial.v2p.clone(),
            final_mapping: self.final_.v2p.clone(),
            num_physical: self.num_physical,
            esp: self.esp,
            gate_count: self.gates.len(),
            seed: config.map(|c| c.seed),
            config,
            seconds,
            expansions: self.stats.expansions,
        }
    }

    /// Rebuilds a compiled circuit from its text form and sidecar report.
    pub fn from_report(d: &DeviceModel, circuit: &Circuit, report: &CompileReport) -> Result<CompiledCircuit, MapperError> {
        if circuit.num_qubits() > d.num_qubits() {
            return Err(MapperError::TooManyVariables {
                vars: circuit.num_qubits(),
                qubits: d.num_qubits(),
            });
        }
        let initial = Mapping::new(report.initial_mapping.clone(), d.num_qubits())?;
        let final_ = Mapping::new(report.final_mapping.clone(), d.num_qubits())?;
        CompiledCircuit::from_parts(d, circuit.gates().to_vec(), initial, final_)
    }

    /// Fails on the first two-qubit gate that is not on a coupler of `d`.
    pub fn check_adjacency(&self, d: &DeviceModel) -> Result<(), MapperError> {
        for (index, g) in self.gates.iter().enumerate() {
            if g.is_cx() && !d.are_adjacent(g.q0(), g.q1()) {
                return Err(MapperError::NotAdjacent { index, gate: *g });
            }
        }
        Ok(())
    }
}

/// Sidecar written next to a compiled circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub initial_mapping: Vec<usize>,
    pub final_mapping: Vec<usize>,
    pub num_physical: usize,
    pub esp: f64,
    pub gate_count: usize,
    pub seed: Option<u64>,
    pub config: Option<CompilerConfig>,
    pub seconds: f64,
    pub expansions: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_rejects_collisions_and_range() {
        assert!(Mapping::new(vec![0, 0], 3).is_err());
        assert!(Mapping::new(vec![0, 3], 3).is_err());
        let m = Mapping::new(vec![2, 0], 3).unwrap();
        assert_eq!(m.var(2), Some(0));
        assert_eq!(m.var(1), None);
    }

    #[test]
    fn swap_moves_variables_and_holes() {
        let mut m = Mapping::new(vec![2, 0], 3).unwrap();
        m.swap_physical(2, 1);
        assert_eq!(m.var_to_phys(), &[1, 0]);
        assert_eq!(m.var(2), None);
        m.swap_physical(0, 1);
        assert_eq!(m.var_to_phys(), &[0, 1]);
    }

    #[test]
    fn mapping_json_round_trip() {
        let m = Mapping::new(vec![3, 1], 5).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<Mapping>(&text).unwrap(), m);
        assert!(serde_json::from_str::<Mapping>(r#"{"num_physical":2,"var_to_phys":[1,1]}"#).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(CompilerConfig::default().validate().is_ok());
        let zero_b = CompilerConfig {
            beam_width: 0,
            ..Default::default()
        };
        assert!(zero_b.validate().is_err());
        let nothing = CompilerConfig {
            use_gce: false,
            random_mappings: 0,
            ..Default::default()
        };
        assert!(nothing.validate().is_err());
    }
}
