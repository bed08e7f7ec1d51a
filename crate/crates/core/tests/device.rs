mod common;

use esp_router::device::{bundled, load_device, DeviceError, PathTable};
use esp_router::{Gate, GateKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random placed gates on `d`, every CNOT on a coupler.
fn placed_gates(d: &esp_router::DeviceModel, seed: u64, len: usize) -> Vec<Gate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            if rng.random::<bool>() {
                let e = d.edges()[rng.random_range(0..d.edges().len())];
                if rng.random() {
                    Gate::cx(e.q0, e.q1)
                } else {
                    Gate::cx(e.q1, e.q0)
                }
            } else {
                Gate::h(rng.random_range(0..d.num_qubits()))
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn esp_is_multiplicative_bounded_and_monotone(seed in 0u64..10_000, len in 0usize..40, cut in 0usize..40) {
        let d = bundled::tokyo_spread();
        let g = placed_gates(&d, seed, len);
        let cut = cut.min(len);
        let whole = d.esp_circuit(&g).unwrap();
        let split = d.esp_circuit(&g[..cut]).unwrap() * d.esp_circuit(&g[cut..]).unwrap();
        prop_assert!((whole - split).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&whole));
        prop_assert_eq!(whole == 1.0, g.is_empty());
        let mut more = g.clone();
        more.push(Gate::x(0));
        prop_assert!(d.esp_circuit(&more).unwrap() <= whole);
    }
}

#[test]
fn readout_is_charged_once_per_qubit() {
    let d = common::device(2, &[(0, 1, 0.01)], 0.0, 0.05);
    assert!((d.esp_circuit(&[Gate::measure(0)]).unwrap() - 0.95).abs() < 1e-15);
    let both = d.esp_circuit(&[Gate::measure(0), Gate::measure(1)]).unwrap();
    assert!((both - 0.95 * 0.95).abs() < 1e-15);
}

#[test]
fn gate_esp_examples() {
    let d = common::device(3, &[(0, 1, 0.0284), (1, 2, 0.01)], 0.0, 0.05);
    assert!((d.esp_gate(GateKind::Cx, &[0, 1]).unwrap() - 0.9716).abs() < 1e-15);
    assert_eq!(d.esp_gate(GateKind::H, &[2]).unwrap(), 1.0);
    assert!((d.esp_gate(GateKind::Measure, &[1]).unwrap() - 0.95).abs() < 1e-15);
    assert!(matches!(d.esp_gate(GateKind::Cx, &[0, 2]), Err(DeviceError::NoSuchEdge(0, 2))));
    let two = d.esp_circuit(&[Gate::cx(0, 1), Gate::cx(1, 0)]).unwrap();
    assert!((two - 0.94400656).abs() < 1e-12);
    assert_eq!(d.esp_circuit(&[]).unwrap(), 1.0);
}

#[test]
fn bundled_devices_carry_published_means() {
    let tokyo = load_device(bundled::TOKYO).unwrap();
    assert_eq!(tokyo.num_qubits(), 20);
    assert!((tokyo.mean_cx_error() - 0.0284).abs() < 1e-12);
    let pk = load_device(bundled::POUGHKEEPSIE).unwrap();
    assert_eq!(pk.num_qubits(), 20);
    assert!((pk.mean_single_error() - 0.00107).abs() < 1e-12);
    for text in [bundled::TOKYO_SPREAD, bundled::POUGHKEEPSIE_SPREAD] {
        let d = load_device(text).unwrap();
        assert_eq!(d.num_qubits(), 20);
    }
}

#[test]
fn tokyo_eccentricities() {
    let d = bundled::tokyo();
    let ecc: Vec<usize> = (0..20).map(|q| d.eccentricity(q)).collect();
    assert_eq!(ecc.iter().max(), Some(&4));
    assert_eq!(ecc.iter().min(), Some(&3));
    assert_eq!(ecc[0], 4);
    assert_eq!(common::device(1, &[], 0.0, 0.0).eccentricity(0), 0);
    assert_eq!(common::device(3, &[(0, 1, 0.0), (1, 2, 0.0)], 0.0, 0.0).eccentricity(0), 2);
}

#[test]
fn malformed_devices_are_rejected() {
    let q = |n: usize| {
        (0..n)
            .map(|i| format!(r#"{{"id":{i},"single_error":0.0,"readout_error":0.0}}"#))
            .collect::<Vec<_>>()
            .join(",")
    };
    let disconnected = format!(r#"{{"name":"x","qubits":[{}],"edges":[{{"q0":0,"q1":1,"cx_error":0.1}}]}}"#, q(3));
    assert!(matches!(load_device(&disconnected), Err(DeviceError::Disconnected(2))));
    let dup = format!(
        r#"{{"name":"x","qubits":[{}],"edges":[{{"q0":0,"q1":1,"cx_error":0.1}},{{"q0":1,"q1":0,"cx_error":0.1}}]}}"#,
        q(2)
    );
    assert!(matches!(load_device(&dup), Err(DeviceError::DuplicateEdge { .. })));
    assert!(matches!(load_device("{"), Err(DeviceError::Format(_))));
}

#[test]
fn path_table_is_symmetric_and_consistent_on_tokyo() {
    let d = bundled::tokyo_spread();
    let pt = PathTable::compute(&d);
    for u in 0..20 {
        assert_eq!(pt.path(u, u), &[u]);
        assert_eq!(pt.esp(u, u), 1.0);
        for v in 0..20 {
            assert_eq!(pt.esp(u, v), pt.esp(v, u));
            let p = pt.path(u, v);
            assert_eq!((p[0], *p.last().unwrap()), (u, v));
            assert_eq!(pt.esp(u, v), esp_router::device::paths::path_esp(&d, p));
            if d.are_adjacent(u, v) {
                assert!(pt.hops(u, v) >= 1);
            }
        }
    }
}
