//! Realizations of a CNOT between qubits that are not adjacent.
//!
//! Along a path `p0 - p1 - ... - pk` (control at `p0`, target at `pk`) three
//! families are generated:
//!
//! - bridge ladders (`B`, `D`): XOR the control through the intermediate
//!   qubits into the target and uncompute, leaving every other qubit intact;
//! - the ancilla form (`C`): the first half of the ladder only, correct when
//!   every intermediate qubit starts in `|0>`; one CNOT cheaper for two hops;
//! - SWAP relocations (`E`..`H` for two hops): move control and target to
//!   meet on one path edge, in either 3-CNOT SWAP orientation, then CNOT.
//!   These permute where variables live afterwards.
//!
//! For two hops this yields the seven named circuits `B`..`H`; longer paths
//! get generated names (`B3`, `C3`, `D3`, `M3.0a`, ...).

use crate::circuit::Gate;
use crate::device::{DeviceError, DeviceModel};
use crate::sim::StateVector;

/// Tolerance for template equivalence checks.
pub const VERIFY_TOLERANCE: f64 = 1e-10;

/// Largest hop count handled by path enumeration and verification.
pub const MAX_HOPS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RemoteError {
    #[error("max hops must be in 1..={MAX_HOPS}, got {0}")]
    InvalidHops(usize),
    #[error("path {0:?} does not follow device couplers")]
    PathNotInDevice(Vec<usize>),
    #[error("path needs at least two distinct qubits")]
    PathTooShort,
    #[error("no candidate realizations to choose from")]
    Empty,
    #[error("template {name} failed verification (max deviation {deviation:.3e})")]
    VerificationFailed { name: String, deviation: f64 },
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum EquivalenceDomain {
    /// Equivalent on every input state.
    Full,
    /// Equivalent when every intermediate path qubit starts in `|0>`.
    AncillaZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RemoteCnotTemplate {
    pub name: String,
    /// Physical qubits, control first and target last.
    pub path: Vec<usize>,
    /// Gates over the physical qubits of `path`.
    pub gates: Vec<Gate>,
    /// `relocation[i]` is the path slot holding, afterwards, the state that
    /// started at slot `i`. `None` means no movement.
    pub relocation: Option<Vec<usize>>,
    pub domain: EquivalenceDomain,
}

impl RemoteCnotTemplate {
    pub fn hop_count(&self) -> usize {
        self.path.len() - 1
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cx()).count()
    }

    /// Physical qubit holding the control's state once the template ran.
    pub fn final_control(&self) -> usize {
        self.path[self.relocation.as_ref().map_or(0, |r| r[0])]
    }

    /// Physical qubit holding the target's state once the template ran.
    pub fn final_target(&self) -> usize {
        let k = self.hop_count();
        self.path[self.relocation.as_ref().map_or(k, |r| r[k])]
    }
}

/// Half of a bridge ladder over slots `from..=k`: compute the parity of
/// slots `from..k` down the chain, XOR it into slot `k`, uncompute.
fn ladder_half(from: usize, k: usize) -> Vec<(usize, usize)> {
    let down: Vec<(usize, usize)> = (from..k - 1).map(|s| (s, s + 1)).collect();
    let mut out = down.clone();
    out.push((k - 1, k));
    out.extend(down.into_iter().rev());
    out
}

fn swap_cx(a: usize, b: usize, orientation_a: bool) -> [(usize, usize); 3] {
    if orientation_a {
        [(a, b), (b, a), (a, b)]
    } else {
        [(b, a), (a, b), (b, a)]
    }
}

/// Slot-level templates for a `k`-hop path: (name, cx list, relocation, domain).
fn slot_templates(k: usize) -> Vec<(String, Vec<(usize, usize)>, Option<Vec<usize>>, EquivalenceDomain)> {
    if k == 1 {
        return vec![("direct".into(), vec![(0, 1)], None, EquivalenceDomain::Full)];
    }
    let named = k == 2;
    let first = ladder_half(0, k);
    let second = ladder_half(1, k);
    let label = |base: &str| if named { base.to_string() } else { format!("{base}{k}") };
    let mut out = vec![
        (
            label("B"),
            [first.clone(), second.clone()].concat(),
            None,
            EquivalenceDomain::Full,
        ),
        (label("C"), first.clone(), None, EquivalenceDomain::AncillaZero),
        (label("D"), [second, first].concat(), None, EquivalenceDomain::Full),
    ];
    let two_hop_names = ["E", "F", "G", "H"];
    for meet in 0..k {
        for (o, orientation) in [true, false].into_iter().enumerate() {
            let mut cx = Vec::new();
            let mut contents: Vec<usize> = (0..=k).collect();
            for s in 0..meet {
                cx.extend(swap_cx(s, s + 1, orientation));
                contents.swap(s, s + 1);
            }
            for s in ((meet + 2)..=k).rev() {
                cx.extend(swap_cx(s - 1, s, orientation));
                contents.swap(s - 1, s);
            }
            cx.push((meet, meet + 1));
            let mut relocation = vec![0; k + 1];
            for (slot, &orig) in contents.iter().enumerate() {
                relocation[orig] = slot;
            }
            let name = if named {
                two_hop_names[2 * meet + o].to_string()
            } else {
                format!("M{k}.{meet}{}", if orientation { 'a' } else { 'b' })
            };
            out.push((name, cx, Some(relocation), EquivalenceDomain::Full));
        }
    }
    out
}

/// All templates for a path of physical qubits (no device check).
pub fn templates_for_path(path: &[usize]) -> Result<Vec<RemoteCnotTemplate>, RemoteError> {
    if path.len() < 2 {
        return Err(RemoteError::PathTooShort);
    }
    let k = path.len() - 1;
    Ok(slot_templates(k)
        .into_iter()
        .map(|(name, cx, relocation, domain)| RemoteCnotTemplate {
            name,
            path: path.to_vec(),
            gates: cx.into_iter().map(|(c, t)| Gate::cx(path[c], path[t])).collect(),
            relocation,
            domain,
        })
        .collect())
}

/// Simple paths from `u` to `v` with at most `max_hops` edges, ordered by
/// hop count then qubit sequence.
pub fn enumerate_paths(
    d: &DeviceModel,
    u: usize,
    v: usize,
    max_hops: usize,
) -> Result<Vec<Vec<usize>>, RemoteError> {
    if !(1..=MAX_HOPS).contains(&max_hops) {
        return Err(RemoteError::InvalidHops(max_hops));
    }
    for q in [u, v] {
        if q >= d.num_qubits() {
            return Err(DeviceError::NoSuchQubit(q).into());
        }
    }
    let mut out = Vec::new();
    if u == v {
        return Ok(out);
    }
    let mut stack = vec![u];
    fn dfs(d: &DeviceModel, v: usize, max_hops: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let here = *stack.last().unwrap();
        if here == v {
            out.push(stack.clone());
            return;
        }
        if stack.len() > max_hops {
            return;
        }
        for &(next, _) in d.neighbors(here) {
            if !stack.contains(&next) {
                stack.push(next);
                dfs(d, v, max_hops, stack, out);
                stack.pop();
            }
        }
    }
    dfs(d, v, max_hops, &mut stack, &mut out);
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub template: RemoteCnotTemplate,
    pub esp: f64,
}

/// Ranked realizations of one remote CNOT.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub control: usize,
    pub target: usize,
    /// Sorted by descending ESP, then name, then path.
    pub candidates: Vec<Candidate>,
}

fn rank(candidates: &mut [Candidate]) {
    candidates.sort_by(|a, b| {
        b.esp
            .total_cmp(&a.esp)
            .then_with(|| a.template.name.cmp(&b.template.name))
            .then_with(|| a.template.path.cmp(&b.template.path))
    });
}

/// Instantiates every template on `path` and scores it with the device ESP.
pub fn instantiate_candidates(d: &DeviceModel, path: &[usize]) -> Result<Vec<Candidate>, RemoteError> {
    if path.len() < 2 {
        return Err(RemoteError::PathTooShort);
    }
    if path.windows(2).any(|w| !d.are_adjacent(w[0], w[1])) {
        return Err(RemoteError::PathNotInDevice(path.to_vec()));
    }
    let mut out = templates_for_path(path)?
        .into_iter()
        .map(|template| {
            let esp = d.esp_circuit(&template.gates)?;
            Ok(Candidate { template, esp })
        })
        .collect::<Result<Vec<_>, RemoteError>>()?;
    rank(&mut out);
    Ok(out)
}

/// Candidates for a CNOT `control -> target`: the direct gate if the pair is
/// adjacent, otherwise every template on every path of up to `max_hops`.
pub fn candidate_set(
    d: &DeviceModel,
    control: usize,
    target: usize,
    max_hops: usize,
) -> Result<CandidateSet, RemoteError> {
    let paths = if d.are_adjacent(control, target) {
        if !(1..=MAX_HOPS).contains(&max_hops) {
            return Err(RemoteError::InvalidHops(max_hops));
        }
        vec![vec![control, target]]
    } else {
        enumerate_paths(d, control, target, max_hops)?
    };
    let mut candidates = Vec::new();
    for p in paths {
        candidates.extend(instantiate_candidates(d, &p)?);
    }
    rank(&mut candidates);
    Ok(CandidateSet {
        control,
        target,
        candidates,
    })
}

/// Highest-ESP candidate; ties go to the alphabetically first name.
pub fn select_best(cs: &CandidateSet) -> Result<&Candidate, RemoteError> {
    cs.candidates
        .iter()
        .reduce(|best, c| {
            match c.esp.total_cmp(&best.esp) {
                std::cmp::Ordering::Greater => c,
                std::cmp::Ordering::Equal if c.template.name < best.template.name => c,
                _ => best,
            }
        })
        .ok_or(RemoteError::Empty)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub name: String,
    pub domain: EquivalenceDomain,
    pub passed: bool,
    pub max_deviation: f64,
}

/// Checks a template against `CNOT(control -> target)` on its declared domain.
pub fn verify_template(t: &RemoteCnotTemplate) -> VerifyReport {
    verify_template_on(t, t.domain)
}

/// Checks a template against `CNOT(control -> target)`, followed by the
/// template's relocation, for every basis input in `domain`.
pub fn verify_template_on(t: &RemoteCnotTemplate, domain: EquivalenceDomain) -> VerifyReport {
    let k = t.hop_count();
    let slots = k + 1;
    let slot_of = |q: usize| t.path.iter().position(|&p| p == q);
    let mut local = Vec::with_capacity(t.gates.len());
    let mut ok_support = true;
    for g in &t.gates {
        match g.qubits().iter().map(|&q| slot_of(q)).collect::<Option<Vec<_>>>() {
            Some(s) if g.is_cx() => local.push(Gate::cx(s[0], s[1])),
            Some(s) => local.push(Gate::single(g.kind(), s[0])),
            None => ok_support = false,
        }
    }
    let mut deviation: f64 = if ok_support { 0.0 } else { f64::INFINITY };
    let middle_mask: usize = (1..k).map(|s| 1usize << s).sum();
    if ok_support && slots <= MAX_HOPS + 1 {
        for input in 0..1usize << slots {
            if domain == EquivalenceDomain::AncillaZero && input & middle_mask != 0 {
                continue;
            }
            let mut ideal = input;
            if input & 1 == 1 {
                ideal ^= 1 << k;
            }
            let expected = match &t.relocation {
                None => ideal,
                Some(r) => (0..slots)
                    .filter(|&s| ideal >> s & 1 == 1)
                    .map(|s| 1usize << r[s])
                    .sum(),
            };
            let mut sv = StateVector::basis(slots, input);
            local.iter().for_each(|g| sv.apply(g));
            for (idx, a) in sv.amplitudes().iter().enumerate() {
                let want = if idx == expected { 1.0 } else { 0.0 };
                deviation = deviation.max((a - num_complex::Complex64::new(want, 0.0)).norm());
            }
        }
    } else if slots > MAX_HOPS + 1 {
        deviation = f64::INFINITY;
    }
    VerifyReport {
        name: t.name.clone(),
        domain,
        passed: deviation <= VERIFY_TOLERANCE,
        max_deviation: deviation,
    }
}

/// Every shipped template family instantiated on the slot path `0..=k`
/// for `k` in `1..=MAX_HOPS`.
pub fn shipped_templates() -> Vec<RemoteCnotTemplate> {
    (1..=MAX_HOPS)
        .flat_map(|k| templates_for_path(&(0..=k).collect::<Vec<_>>()).unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::tests::uniform;

    fn by_name<'a>(ts: &'a [RemoteCnotTemplate], name: &str) -> &'a RemoteCnotTemplate {
        ts.iter().find(|t| t.name == name).unwrap()
    }

    #[test]
    fn two_hop_family_has_seven_members() {
        let ts = templates_for_path(&[0, 1, 2]).unwrap();
        let names: Vec<&str> = ts.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["B", "C", "D", "E", "F", "G", "H"]);
        assert_eq!(by_name(&ts, "B").cx_count(), 4);
        assert_eq!(by_name(&ts, "C").cx_count(), 3);
        assert_eq!(by_name(&ts, "D").cx_count(), 4);
        for n in ["E", "F", "G", "H"] {
            assert_eq!(by_name(&ts, n).cx_count(), 4);
        }
        assert_eq!(
            by_name(&ts, "B").gates,
            vec![Gate::cx(0, 1), Gate::cx(1, 2), Gate::cx(0, 1), Gate::cx(1, 2)]
        );
    }

    #[test]
    fn bridge_passes_full_domain() {
        let ts = templates_for_path(&[0, 1, 2]).unwrap();
        let r = verify_template(by_name(&ts, "B"));
        assert!(r.passed, "{r:?}");
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn ancilla_form_only_holds_with_zero_middle() {
        let ts = templates_for_path(&[0, 1, 2]).unwrap();
        let c = by_name(&ts, "C");
        assert!(verify_template_on(c, EquivalenceDomain::AncillaZero).passed);
        assert!(!verify_template_on(c, EquivalenceDomain::Full).passed);
    }

    #[test]
    fn identity_labelled_as_cnot_fails() {
        let fake = RemoteCnotTemplate {
            name: "identity".into(),
            path: vec![0, 1],
            gates: vec![],
            relocation: None,
            domain: EquivalenceDomain::Full,
        };
        let r = verify_template(&fake);
        assert!(!r.passed);
        assert!((r.max_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relocation_tracks_final_positions() {
        let ts = templates_for_path(&[5, 6, 7]).unwrap();
        let e = by_name(&ts, "E");
        assert_eq!((e.final_control(), e.final_target()), (5, 6));
        let g = by_name(&ts, "G");
        assert_eq!((g.final_control(), g.final_target()), (6, 7));
    }

    #[test]
    fn every_shipped_template_verifies() {
        for t in shipped_templates() {
            let r = verify_template(&t);
            assert!(r.passed, "{} on {:?}: {r:?}", t.name, t.path);
        }
    }

    #[test]
    fn paths_on_four_cycle() {
        let d = uniform(4, &[(0, 1, 0.01), (1, 2, 0.01), (2, 3, 0.01), (3, 0, 0.01)], 0.0, 0.0);
        assert_eq!(enumerate_paths(&d, 0, 1, 1).unwrap(), vec![vec![0, 1]]);
        assert_eq!(enumerate_paths(&d, 0, 2, 2).unwrap(), vec![vec![0, 1, 2], vec![0, 3, 2]]);
        assert_eq!(enumerate_paths(&d, 0, 2, 1).unwrap(), Vec::<Vec<usize>>::new());
        assert_eq!(enumerate_paths(&d, 0, 2, 5), Err(RemoteError::InvalidHops(5)));
    }

    #[test]
    fn balanced_edges_pick_ancilla_form() {
        let d = uniform(3, &[(0, 1, 0.03), (1, 2, 0.03)], 0.0, 0.0);
        let cs = candidate_set(&d, 0, 2, 2).unwrap();
        assert_eq!(cs.candidates.len(), 7);
        assert_eq!(select_best(&cs).unwrap().template.name, "C");
    }

    #[test]
    fn skewed_edges_prefer_relocation() {
        // B01 = 0.15, B12 = 0.01. Direct evaluation of every candidate:
        //   B, D: 0.85^2 * 0.99^2 = 0.70812225
        //   C:    0.85^2 * 0.99   = 0.71527500
        //   E, F: 0.99^3 * 0.85   = 0.82475415
        //   G, H: 0.85^3 * 0.99   = 0.60798375
        let d = uniform(3, &[(0, 1, 0.15), (1, 2, 0.01)], 0.0, 0.0);
        let cs = candidate_set(&d, 0, 2, 2).unwrap();
        let esp = |n: &str| cs.candidates.iter().find(|c| c.template.name == n).unwrap().esp;
        assert!((esp("B") - 0.70812225).abs() < 1e-12);
        assert!((esp("C") - 0.715275).abs() < 1e-12);
        assert!((esp("E") - 0.82475415).abs() < 1e-12);
        assert!((esp("G") - 0.60798375).abs() < 1e-12);
        let best = select_best(&cs).unwrap();
        assert_eq!(best.template.name, "E");
        assert!(best.esp > esp("C"));
    }

    #[test]
    fn adjacent_pair_has_single_direct_candidate() {
        let d = uniform(3, &[(0, 1, 0.03), (1, 2, 0.03)], 0.0, 0.0);
        let cs = candidate_set(&d, 1, 2, 4).unwrap();
        assert_eq!(cs.candidates.len(), 1);
        assert_eq!(cs.candidates[0].template.name, "direct");
        assert_eq!(select_best(&cs).unwrap().template.gates, vec![Gate::cx(1, 2)]);
    }

    #[test]
    fn select_best_breaks_ties_by_name_and_rejects_empty() {
        let d = uniform(3, &[(0, 1, 0.0), (1, 2, 0.0)], 0.0, 0.0);
        let cs = candidate_set(&d, 0, 2, 2).unwrap();
        assert_eq!(select_best(&cs).unwrap().template.name, "B");
        let empty = CandidateSet {
            control: 0,
            target: 2,
            candidates: vec![],
        };
        assert_eq!(select_best(&empty), Err(RemoteError::Empty));
    }

    #[test]
    fn path_must_exist() {
        let d = uniform(3, &[(0, 1, 0.03), (1, 2, 0.03)], 0.0, 0.0);
        assert!(matches!(
            instantiate_candidates(&d, &[0, 2]),
            Err(RemoteError::PathNotInDevice(_))
        ));
    }
}
