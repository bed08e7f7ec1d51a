//! Device (host graph) model: qubits, couplers and their calibrated error
//! rates, plus the ESP arithmetic built on them.
//!
//! Error classes follow the usual three-way split: single-qubit gate error
//! per qubit, CNOT error per coupler, and readout (SPAM) error per qubit.
//! The ESP of an operation is `1 - error` for its class and location; the
//! ESP of a gate list is the product over its gates.

pub mod bundled;
pub mod paths;

pub use paths::PathTable;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("malformed device file: {0}")]
    Format(String),
    #[error("device has no qubits")]
    Empty,
    #[error("qubit ids must be exactly 0..{expected} (found {found})")]
    QubitIds { expected: usize, found: usize },
    #[error("edge ({q0}, {q1}) references an unknown qubit")]
    UnknownQubit { q0: usize, q1: usize },
    #[error("edge ({0}, {0}) is a self loop")]
    SelfLoop(usize),
    #[error("duplicate edge ({q0}, {q1})")]
    DuplicateEdge { q0: usize, q1: usize },
    #[error("{what} = {value} is outside [0, 1)")]
    ProbabilityOutOfRange { what: String, value: f64 },
    #[error("coupling graph is disconnected (qubit {0} unreachable from qubit 0)")]
    Disconnected(usize),
    #[error("no coupler between qubits {0} and {1}")]
    NoSuchEdge(usize, usize),
    #[error("qubit {0} is not on the device")]
    NoSuchQubit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysQubit {
    pub id: usize,
    pub single_error: f64,
    pub readout_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingEdge {
    pub q0: usize,
    pub q1: usize,
    pub cx_error: f64,
}

impl CouplingEdge {
    /// The endpoint opposite `q`.
    pub fn other(&self, q: usize) -> usize {
        if self.q0 == q {
            self.q1
        } else {
            self.q0
        }
    }

    /// ESP of the CNOT on this edge.
    pub fn cx_esp(&self) -> f64 {
        1.0 - self.cx_error
    }

    /// ESP of a SWAP, realized as three CNOTs on this edge.
    pub fn swap_esp(&self) -> f64 {
        let p = self.cx_esp();
        p * p * p
    }
}

#[derive(Serialize, Deserialize)]
struct DeviceFile {
    name: String,
    qubits: Vec<PhysQubit>,
    edges: Vec<CouplingEdge>,
}

/// A validated, connected coupling graph with error rates.
#[derive(Clone, Debug)]
pub struct DeviceModel {
    name: String,
    qubits: Vec<PhysQubit>,
    edges: Vec<CouplingEdge>,
    /// `neighbors[q]` = (neighbor, edge index), sorted by neighbor id.
    neighbors: Vec<Vec<(usize, usize)>>,
    edge_index: Vec<Option<usize>>,
}

fn check_probability(what: impl FnOnce() -> String, value: f64) -> Result<(), DeviceError> {
    if (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(DeviceError::ProbabilityOutOfRange {
            what: what(),
            value,
        })
    }
}

impl DeviceModel {
    pub fn new(
        name: impl Into<String>,
        mut qubits: Vec<PhysQubit>,
        edges: Vec<CouplingEdge>,
    ) -> Result<DeviceModel, DeviceError> {
        let n = qubits.len();
        if n == 0 {
            return Err(DeviceError::Empty);
        }
        qubits.sort_by_key(|q| q.id);
        for (i, q) in qubits.iter().enumerate() {
            if q.id != i {
                return Err(DeviceError::QubitIds {
                    expected: n,
                    found: q.id,
                });
            }
            check_probability(|| format!("qubit {i} single_error"), q.single_error)?;
            check_probability(|| format!("qubit {i} readout_error"), q.readout_error)?;
        }
        let mut edge_index = vec![None; n * n];
        let mut neighbors = vec![Vec::new(); n];
        for (idx, e) in edges.iter().enumerate() {
            if e.q0 >= n || e.q1 >= n {
                return Err(DeviceError::UnknownQubit { q0: e.q0, q1: e.q1 });
            }
            if e.q0 == e.q1 {
                return Err(DeviceError::SelfLoop(e.q0));
            }
            check_probability(|| format!("edge ({}, {}) cx_error", e.q0, e.q1), e.cx_error)?;
            if edge_index[e.q0 * n + e.q1].is_some() {
                return Err(DeviceError::DuplicateEdge { q0: e.q0, q1: e.q1 });
            }
            edge_index[e.q0 * n + e.q1] = Some(idx);
            edge_index[e.q1 * n + e.q0] = Some(idx);
            neighbors[e.q0].push((e.q1, idx));
            neighbors[e.q1].push((e.q0, idx));
        }
        neighbors.iter_mut().for_each(|v| v.sort_unstable());
        let device = DeviceModel {
            name: name.into(),
            qubits,
            edges,
            neighbors,
            edge_index,
        };
        let dist = device.hop_distances(0);
        if let Some(q) = dist.iter().position(|d| d.is_none()) {
            return Err(DeviceError::Disconnected(q));
        }
        Ok(device)
    }

    /// Parses and validates the JSON device format.
    pub fn from_json(text: &str) -> Result<DeviceModel, DeviceError> {
        let file: DeviceFile =
            serde_json::from_str(text).map_err(|e| DeviceError::Format(e.to_string()))?;
        DeviceModel::new(file.name, file.qubits, file.edges)
    }

    pub fn to_json(&self) -> String {
        let file = DeviceFile {
            name: self.name.clone(),
            qubits: self.qubits.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&file).expect("device serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[PhysQubit] {
        &self.qubits
    }

    pub fn qubit(&self, q: usize) -> &PhysQubit {
        &self.qubits[q]
    }

    pub fn edges(&self) -> &[CouplingEdge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &CouplingEdge {
        &self.edges[idx]
    }

    /// `(neighbor, edge index)` pairs, sorted by neighbor.
    pub fn neighbors(&self, q: usize) -> &[(usize, usize)] {
        &self.neighbors[q]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.num_qubits();
        if a >= n || b >= n {
            return None;
        }
        self.edge_index[a * n + b]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_between(a, b).is_some()
    }

    pub fn mean_cx_error(&self) -> f64 {
        self.edges.iter().map(|e| e.cx_error).sum::<f64>() / self.edges.len().max(1) as f64
    }

    pub fn mean_single_error(&self) -> f64 {
        self.qubits.iter().map(|q| q.single_error).sum::<f64>() / self.qubits.len() as f64
    }

    /// ESP of one gate at the given physical location.
    pub fn esp_gate(&self, kind: GateKind, phys: &[usize]) -> Result<f64, DeviceError> {
        for &q in phys {
            if q >= self.num_qubits() {
                return Err(DeviceError::NoSuchQubit(q));
            }
        }
        Ok(match kind {
            GateKind::Cx => {
                let e = self
                    .edge_between(phys[0], phys[1])
                    .ok_or(DeviceError::NoSuchEdge(phys[0], phys[1]))?;
                self.edges[e].cx_esp()
            }
            GateKind::Measure => 1.0 - self.qubits[phys[0]].readout_error,
            _ => 1.0 - self.qubits[phys[0]].single_error,
        })
    }

    /// Product of gate ESPs over a placed gate list, multiplied in list
    /// order. Readout error is charged once per measured qubit.
    pub fn esp_circuit(&self, placed: &[Gate]) -> Result<f64, DeviceError> {
        let mut measured = vec![false; self.num_qubits()];
        let mut esp = 1.0;
        for g in placed {
            if g.kind() == GateKind::Measure {
                let q = g.q0();
                if q < measured.len() && measured[q] {
                    continue;
                }
                if q < measured.len() {
                    measured[q] = true;
                }
            }
            esp *= self.esp_gate(g.kind(), g.qubits())?;
        }
        Ok(esp)
    }

    /// Unweighted hop distance from `q` to every qubit (`None` = unreachable).
    pub fn hop_distances(&self, q: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_qubits()];
        let mut queue = VecDeque::from([q]);
        dist[q] = Some(0);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(v, _) in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Maximum hop distance from `q` to any other qubit.
    pub fn eccentricity(&self, q: usize) -> usize {
        self.hop_distances(q).into_iter().flatten().max().unwrap_or(0)
    }
}

/// Reads a device from its JSON text.
pub fn load_device(text: &str) -> Result<DeviceModel, DeviceError> {
    DeviceModel::from_json(text)
}
