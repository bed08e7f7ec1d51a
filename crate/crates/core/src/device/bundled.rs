//! Bundled 20-qubit example devices.
//!
//! Two topologies (Tokyo and Poughkeepsie), each in two calibrations:
//! every element at the published mean error rate, and a seeded spread
//! whose per-element rates run from the published best to the published
//! worst value while keeping the published mean. Readout error is not part
//! of the published summary and is left at zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CouplingEdge, DeviceModel, PhysQubit};

pub const TOKYO: &str = include_str!("../../devices/tokyo.device");
pub const TOKYO_SPREAD: &str = include_str!("../../devices/tokyo-spread.device");
pub const POUGHKEEPSIE: &str = include_str!("../../devices/poughkeepsie.device");
pub const POUGHKEEPSIE_SPREAD: &str = include_str!("../../devices/poughkeepsie-spread.device");

/// Seed used for the shipped spread calibrations.
pub const SPREAD_SEED: u64 = 2019;

/// Summary statistics of one error class.
#[derive(Clone, Copy, Debug)]
pub struct RateSummary {
    pub mean: f64,
    pub best: f64,
    pub worst: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Calibration {
    pub cx: RateSummary,
    pub single: RateSummary,
}

pub const TOKYO_CALIBRATION: Calibration = Calibration {
    cx: RateSummary {
        mean: 2.84e-2,
        best: 1.47e-2,
        worst: 7.12e-2,
    },
    single: RateSummary {
        mean: 1.99e-3,
        best: 0.64e-3,
        worst: 6.09e-3,
    },
};

pub const POUGHKEEPSIE_CALIBRATION: Calibration = Calibration {
    cx: RateSummary {
        mean: 2.25e-2,
        best: 1.11e-2,
        worst: 6.11e-2,
    },
    single: RateSummary {
        mean: 1.07e-3,
        best: 0.52e-3,
        worst: 2.77e-3,
    },
};

/// Tokyo: a 4x5 grid with vertical links and crossed diagonals in
/// alternating plaquettes.
pub fn tokyo_edges() -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for row in 0..4 {
        for col in 0..4 {
            edges.push((5 * row + col, 5 * row + col + 1));
        }
    }
    for q in 0..15 {
        edges.push((q, q + 5));
    }
    for (a, b) in [
        (1, 7),
        (2, 6),
        (3, 9),
        (4, 8),
        (5, 11),
        (6, 10),
        (7, 13),
        (8, 12),
        (11, 17),
        (12, 16),
        (13, 19),
        (14, 18),
    ] {
        edges.push((a, b));
    }
    edges.sort_unstable();
    edges
}

/// Poughkeepsie: four rows of five linked by sparse vertical couplers.
pub fn poughkeepsie_edges() -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for row in 0..4 {
        for col in 0..4 {
            edges.push((5 * row + col, 5 * row + col + 1));
        }
    }
    edges.extend([(0, 5), (4, 9), (5, 10), (7, 12), (9, 14), (10, 15), (14, 19)]);
    edges.sort_unstable();
    edges
}

/// Every qubit and coupler at the mean rates.
pub fn means_device(name: &str, edges: &[(usize, usize)], cal: &Calibration) -> DeviceModel {
    let n = edges.iter().map(|&(a, b)| a.max(b)).max().map_or(0, |m| m + 1);
    let qubits = (0..n)
        .map(|id| PhysQubit {
            id,
            single_error: cal.single.mean,
            readout_error: 0.0,
        })
        .collect();
    let edges = edges
        .iter()
        .map(|&(q0, q1)| CouplingEdge {
            q0,
            q1,
            cx_error: cal.cx.mean,
        })
        .collect();
    DeviceModel::new(name, qubits, edges).expect("bundled topology is valid")
}

/// `count` rates with minimum `best`, maximum `worst` and mean `mean`.
///
/// Uniform draws are stretched to exactly [0, 1] and mapped through
/// `best + (worst - best) * u^gamma`, with `gamma` found by bisection.
fn spread_rates(count: usize, s: &RateSummary, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut u: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    u.iter_mut().for_each(|x| *x = (*x - lo) / (hi - lo));
    let rates = |gamma: f64| -> Vec<f64> {
        u.iter()
            .map(|&x| s.best + (s.worst - s.best) * x.powf(gamma))
            .collect()
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mut lo_g, mut hi_g) = (-12.0f64, 12.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo_g + hi_g);
        if mean(&rates(mid.exp())) > s.mean {
            lo_g = mid;
        } else {
            hi_g = mid;
        }
    }
    rates((0.5 * (lo_g + hi_g)).exp())
}

/// Seeded spread calibration over the given topology.
pub fn spread_device(name: &str, edges: &[(usize, usize)], cal: &Calibration, seed: u64) -> DeviceModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = edges.iter().map(|&(a, b)| a.max(b)).max().map_or(0, |m| m + 1);
    let cx = spread_rates(edges.len(), &cal.cx, &mut rng);
    let single = spread_rates(n, &cal.single, &mut rng);
    let qubits = (0..n)
        .map(|id| PhysQubit {
            id,
            single_error: single[id],
            readout_error: 0.0,
        })
        .collect();
    let edges = edges
        .iter()
        .zip(cx)
        .map(|(&(q0, q1), cx_error)| CouplingEdge { q0, q1, cx_error })
        .collect();
    DeviceModel::new(name, qubits, edges).expect("bundled topology is valid")
}

/// The four shipped devices as `(file name, device)`, regenerated.
pub fn regenerate() -> Vec<(&'static str, DeviceModel)> {
    vec![
        ("tokyo.device", means_device("tokyo", &tokyo_edges(), &TOKYO_CALIBRATION)),
        (
            "tokyo-spread.device",
            spread_device("tokyo-spread", &tokyo_edges(), &TOKYO_CALIBRATION, SPREAD_SEED),
        ),
        (
            "poughkeepsie.device",
            means_device("poughkeepsie", &poughkeepsie_edges(), &POUGHKEEPSIE_CALIBRATION),
        ),
        (
            "poughkeepsie-spread.device",
            spread_device(
                "poughkeepsie-spread",
                &poughkeepsie_edges(),
                &POUGHKEEPSIE_CALIBRATION,
                SPREAD_SEED,
            ),
        ),
    ]
}

pub fn tokyo() -> DeviceModel {
    DeviceModel::from_json(TOKYO).expect("bundled device parses")
}

pub fn tokyo_spread() -> DeviceModel {
    DeviceModel::from_json(TOKYO_SPREAD).expect("bundled device parses")
}

pub fn poughkeepsie() -> DeviceModel {
    DeviceModel::from_json(POUGHKEEPSIE).expect("bundled device parses")
}

pub fn poughkeepsie_spread() -> DeviceModel {
    DeviceModel::from_json(POUGHKEEPSIE_SPREAD).expect("bundled device parses")
}
