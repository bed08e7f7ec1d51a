//! Functional check of a compiled circuit against its source.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{CompiledCircuit, MapperError};
use crate::circuit::{Circuit, GateKind};
use crate::sim::{unitary_of, SimError, SparseState, DEFAULT_MAX_QUBITS};

/// Largest entrywise deviation accepted as equal.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOutcome {
    pub passed: bool,
    pub max_deviation: f64,
    /// First source basis input whose image differs, if any.
    pub first_failure: Option<usize>,
    pub message: Option<String>,
}

/// Checks that `out`, started with each source basis state placed by the
/// initial mapping (other qubits `|0>`), produces the source circuit's output
/// placed by the final mapping, and that it measures the same variables in
/// the same order. Measurements are stripped before simulation.
pub fn verify_compiled(src: &Circuit, out: &CompiledCircuit) -> Result<VerifyOutcome, MapperError> {
    let vars = src.num_qubits();
    if vars > DEFAULT_MAX_QUBITS {
        return Err(SimError::TooManyQubits {
            qubits: vars,
            max: DEFAULT_MAX_QUBITS,
        }
        .into());
    }
    if out.num_physical() > 64 {
        return Err(SimError::TooManyQubits {
            qubits: out.num_physical(),
            max: 64,
        }
        .into());
    }
    let (init, fin) = (out.initial_mapping(), out.final_mapping());
    if init.num_vars() != vars {
        return Err(MapperError::InvalidMapping(format!(
            "mapping covers {} variables, source has {vars}",
            init.num_vars()
        )));
    }
    let fail = |message: String| VerifyOutcome {
        passed: false,
        max_deviation: f64::INFINITY,
        first_failure: None,
        message: Some(message),
    };
    let want_measures: Vec<usize> = src.measured_qubits().iter().map(|&v| fin.phys(v)).collect();
    let got_measures: Vec<usize> = out.to_circuit().measured_qubits();
    if want_measures != got_measures {
        return Ok(fail(format!(
            "measures qubits {got_measures:?}, expected {want_measures:?}"
        )));
    }

    let u = unitary_of(&src.without_measures(), DEFAULT_MAX_QUBITS)?;
    let place = |x: usize, m: &super::Mapping| -> u64 {
        (0..vars).filter(|&v| x >> v & 1 == 1).map(|v| 1u64 << m.phys(v)).sum()
    };
    let gates: Vec<_> = out.gates().iter().filter(|g| g.kind() != GateKind::Measure).collect();
    let mut max_dev: f64 = 0.0;
    let mut first_failure = None;
    for x in 0..1usize << vars {
        let mut st = SparseState::basis(place(x, init));
        gates.iter().for_each(|g| st.apply(g));
        let mut expected: HashMap<u64, Complex64> = HashMap::new();
        for (y, a) in u.column(x).iter().enumerate() {
            if a.norm() > 0.0 {
                expected.insert(place(y, fin), *a);
            }
        }
        let mut dev: f64 = 0.0;
        for (k, a) in st.entries() {
            dev = dev.max((a - expected.get(&k).copied().unwrap_or_default()).norm());
        }
        for (&k, e) in &expected {
            dev = dev.max((st.amplitude(k) - e).norm());
        }
        if dev > VERIFY_TOLERANCE && first_failure.is_none() {
            first_failure = Some(x);
        }
        max_dev = max_dev.max(dev);
    }
    Ok(VerifyOutcome {
        passed: first_failure.is_none(),
        max_deviation: max_dev,
        first_failure,
        message: first_failure.map(|x| format!("output differs for source basis input {x}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::device::tests::uniform;
    use crate::mapper::{compile_beam, CompilerConfig, Mapping};

    #[test]
    fn source_against_itself_passes() {
        let src = Circuit::new(3, vec![Gate::h(0), Gate::cx(0, 1), Gate::t(1), Gate::cx(1, 2), Gate::measure(2)]).unwrap();
        let d = uniform(3, &[(0, 1, 0.01), (1, 2, 0.01)], 0.0, 0.0);
        let id = Mapping::identity(3, 3).unwrap();
        let out = CompiledCircuit::from_parts(&d, src.gates().to_vec(), id.clone(), id).unwrap();
        let r = verify_compiled(&src, &out).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn dropping_a_swap_is_caught() {
        let src = Circuit::new(3, vec![Gate::h(0), Gate::cx(0, 2), Gate::cx(2, 1), Gate::t(0)]).unwrap();
        let d = uniform(4, &[(0, 1, 0.01), (1, 2, 0.01), (2, 3, 0.01)], 0.0, 0.0);
        let m = Mapping::new(vec![0, 3, 1], 4).unwrap();
        let comp = crate::mapper::Compiler::new(&src, &d).unwrap();
        let out = comp.run_from(&[m], 100).unwrap();
        assert!(verify_compiled(&src, &out).unwrap().passed);
        let gates = out.gates();
        let swap_at = gates
            .windows(3)
            .position(|w| w[0].is_cx() && w[1] == Gate::cx(w[0].q1(), w[0].q0()) && w[2] == w[0])
            .expect("routing needed a swap");
        for drop in [swap_at, swap_at + 1] {
            let mut g = gates.to_vec();
            g.remove(drop);
            if drop == swap_at + 1 {
                g.remove(swap_at);
                g.remove(swap_at);
            }
            let broken = CompiledCircuit::from_parts(&d, g, out.initial_mapping().clone(), out.final_mapping().clone()).unwrap();
            let r = verify_compiled(&src, &broken).unwrap();
            assert!(!r.passed);
            assert!(r.first_failure.is_some());
        }
    }

    #[test]
    fn beam_output_for_adder_passes() {
        let src = crate::circuit::gen_cuccaro_adder(1).unwrap();
        let d = crate::device::bundled::tokyo();
        let out = compile_beam(
            &src,
            &d,
            &CompilerConfig {
                beam_width: 20,
                random_mappings: 5,
                seed: 2,
                use_gce: true,
            },
        )
        .unwrap();
        let r = verify_compiled(&src, &out).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn wrong_measure_order_fails() {
        let src = Circuit::new(2, vec![Gate::measure(0), Gate::measure(1)]).unwrap();
        let d = uniform(2, &[(0, 1, 0.01)], 0.0, 0.0);
        let id = Mapping::identity(2, 2).unwrap();
        let out = CompiledCircuit::from_parts(&d, vec![Gate::measure(1), Gate::measure(0)], id.clone(), id).unwrap();
        assert!(!verify_compiled(&src, &out).unwrap().passed);
    }
}
