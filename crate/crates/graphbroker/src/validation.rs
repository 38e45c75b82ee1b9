//! Runtime self-check suite: oracle equivalences, protocol properties, and
//! statistical laws. Backs the CLI `validate` command; the heavier test
//! suites reuse the same checks.

use crate::graph::AdornedGraph;
use crate::pauli::{Axis, PauliString, Sign};
use crate::plan::plan_growth;
use crate::protocol::{Network, TransferFlavor};
use crate::rng::{ForcedOutcomes, SimRng};
use crate::sim::{run_trial, SimOptions};
use crate::statevector::{apply_gate_dense, dense_state, project_dense, stabilizes};
use crate::tableau::{Gate, InitialBasis, StabilizerTableau, TableauError};
use crate::timing::{
    exact_parallel_pair_rounds, threshold_ratio, ParallelMode, StrategyChoice, TimingProfile,
};

type Complex = num_complex::Complex64;

#[derive(Copy, Clone, Debug, Default)]
pub struct ValidationOptions {
    /// Negative-control hook: corrupt a recorded byproduct during the
    /// transfer-equivalence check, which must then fail.
    pub corrupt_byproducts: bool,
    /// Shrink the statistical sample sizes (used by smoke tests).
    pub quick: bool,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from(name: &'static str, r: Result<String, String>) -> Self {
        match r {
            Ok(detail) => CheckResult {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CheckResult {
                name,
                passed: false,
                detail,
            },
        }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Run every check; results come back in a fixed order.
pub fn run_validation(opts: &ValidationOptions) -> Vec<CheckResult> {
    let scale = if opts.quick { 10 } else { 1 };
    vec![
        CheckResult::from("gate-oracle-equivalence", check_gates_vs_oracle()),
        CheckResult::from(
            "random-circuit-oracle-coevolution",
            check_random_circuit_oracle(200 / scale),
        ),
        CheckResult::from(
            "tableau-invariants-fuzz",
            check_tableau_invariants(10_000 / scale),
        ),
        CheckResult::from(
            "projection-exclusivity",
            check_projection_exclusivity(2_000 / scale),
        ),
        CheckResult::from("graph-extraction-roundtrip", check_graph_roundtrip(500 / scale)),
        CheckResult::from(
            "transfer-equivalence",
            check_transfer_equivalence(opts.corrupt_byproducts),
        ),
        CheckResult::from("fusion-star-shape", check_fusion_star_shape()),
        CheckResult::from("client-insulation", check_client_insulation(400 / scale)),
        CheckResult::from("formula-threshold-identity", check_formula_threshold_identity()),
        CheckResult::from("plan-invariants-fuzz", check_plan_invariants(300 / scale)),
        CheckResult::from(
            "parallel-pair-closed-form",
            check_parallel_pair_formula(200_000 / scale as u64),
        ),
    ]
}

fn unit_profile() -> TimingProfile {
    crate::timing::preset("unit").expect("unit preset")
}

fn profile_with_p(p: f64) -> TimingProfile {
    TimingProfile { p, ..unit_profile() }
}

/// All sixteen two-qubit stabilizer product inputs {|0>,|1>,|+>,|->}^2,
/// built in both representations.
fn two_qubit_inputs() -> Vec<(StabilizerTableau, Vec<Complex>)> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            let mut t = StabilizerTableau::new_zero(2).expect("n=2");
            let mut v = dense_state(&t).expect("small");
            for (q, code) in [(0usize, a), (1usize, b)] {
                let gates: &[Gate] = match code {
                    0 => &[],
                    1 => &[Gate::X(q)],
                    2 => &[Gate::H(q)],
                    _ => &[Gate::X(q), Gate::H(q)],
                };
                for &g in gates {
                    t.apply_gate(g).expect("valid");
                    apply_gate_dense(&mut v, g);
                }
            }
            out.push((t, v));
        }
    }
    out
}

fn check_gates_vs_oracle() -> Result<String, String> {
    let gates = [
        Gate::H(0),
        Gate::H(1),
        Gate::S(0),
        Gate::S(1),
        Gate::X(0),
        Gate::Z(1),
        Gate::Cz(0, 1),
        Gate::Cnot(0, 1),
        Gate::Cnot(1, 0),
    ];
    let mut cases = 0;
    for gate in gates {
        for (mut t, mut v) in two_qubit_inputs() {
            t.apply_gate(gate).map_err(|e| e.to_string())?;
            apply_gate_dense(&mut v, gate);
            for g in t.generators() {
                if !stabilizes(&v, g) {
                    return Err(format!(
                        "gate {gate:?}: generator {g} does not stabilize the oracle state"
                    ));
                }
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} gate/input pairs agree with the oracle"))
}

pub(crate) fn random_pauli(rng: &mut SimRng, n: usize) -> PauliString {
    loop {
        let mut ops = Vec::new();
        for q in 0..n {
            match rng.gen_range(4) {
                0 => {}
                1 => ops.push((q, Axis::X)),
                2 => ops.push((q, Axis::Y)),
                _ => ops.push((q, Axis::Z)),
            }
        }
        if !ops.is_empty() {
            return PauliString::from_ops(n, &ops);
        }
    }
}

pub(crate) fn random_gate(rng: &mut SimRng, n: usize) -> Gate {
    let q = rng.gen_range(n as u64) as usize;
    match rng.gen_range(6) {
        0 => Gate::H(q),
        1 => Gate::S(q),
        2 => Gate::X(q),
        3 => Gate::Z(q),
        kind => {
            let mut r = rng.gen_range(n as u64 - 1) as usize;
            if r >= q {
                r += 1;
            }
            if kind == 4 {
                Gate::Cz(q, r)
            } else {
                Gate::Cnot(q, r)
            }
        }
    }
}

/// Random circuits with interleaved measurements, evolved in both
/// representations. The tableau decides determinism and outcome; the dense
/// side must agree on both and reproduce the post-state.
fn check_random_circuit_oracle(cases: usize) -> Result<String, String> {
    let mut rng = SimRng::new(0x07AC1E);
    for case in 0..cases {
        let n = 2 + (case % 5); // 2..=6 qubits
        let basis = if case % 2 == 0 {
            InitialBasis::AllZero
        } else {
            InitialBasis::AllPlus
        };
        let mut t = StabilizerTableau::new(n, basis).map_err(|e| e.to_string())?;
        let mut v = dense_state(&t).map_err(|e| e.to_string())?;
        for step in 0..24 {
            if step % 5 == 4 {
                let op = random_pauli(&mut rng, n);
                let peeked = t.peek_deterministic(&op).map_err(|e| e.to_string())?;
                let outcome = t.measure_pauli(&op, &mut rng).map_err(|e| e.to_string())?;
                match peeked {
                    Some(sign) => {
                        if !outcome.deterministic || outcome.sign != sign {
                            return Err(format!("case {case}: determinism mismatch on {op}"));
                        }
                        if project_dense(&v, &op, sign.flip()).is_ok() {
                            return Err(format!(
                                "case {case}: oracle admits the impossible outcome of {op}"
                            ));
                        }
                    }
                    None => {
                        if outcome.deterministic {
                            return Err(format!("case {case}: tableau lost randomness on {op}"));
                        }
                    }
                }
                v = project_dense(&v, &op, outcome.sign)
                    .map_err(|e| format!("case {case}: oracle rejected outcome: {e}"))?;
            } else {
                let g = random_gate(&mut rng, n);
                t.apply_gate(g).map_err(|e| e.to_string())?;
                apply_gate_dense(&mut v, g);
            }
            for g in t.generators() {
                if !stabilizes(&v, g) {
                    return Err(format!(
                        "case {case} step {step}: generator {g} does not stabilize the oracle"
                    ));
                }
            }
        }
        t.check_invariants().map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok(format!("{cases} random circuits co-evolved with the oracle"))
}

fn check_tableau_invariants(sequences: usize) -> Result<String, String> {
    let mut rng = SimRng::new(0xD0D0);
    for case in 0..sequences {
        let n = 1 + (case % 8);
        let mut t = StabilizerTableau::new_plus(n).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            match rng.gen_range(8) {
                k if k < 5 => {
                    let g = if n == 1 {
                        match rng.gen_range(4) {
                            0 => Gate::H(0),
                            1 => Gate::S(0),
                            2 => Gate::X(0),
                            _ => Gate::Z(0),
                        }
                    } else {
                        random_gate(&mut rng, n)
                    };
                    t.apply_gate(g).map_err(|e| e.to_string())?;
                }
                5 | 6 => {
                    let op = random_pauli(&mut rng, n);
                    t.measure_pauli(&op, &mut rng).map_err(|e| e.to_string())?;
                }
                _ => {
                    let op = random_pauli(&mut rng, n);
                    let desired = Sign::from_bit(rng.gen_bit());
                    match t.project_onto(&op, desired) {
                        Ok(()) | Err(TableauError::ImpossibleOutcome) => {}
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
            if let Err(e) = t.check_invariants() {
                return Err(format!("sequence {case}: {e}"));
            }
        }
    }
    Ok(format!("{sequences} random op sequences preserved the invariants"))
}

fn check_projection_exclusivity(cases: usize) -> Result<String, String> {
    let mut rng = SimRng::new(0xACE5);
    for case in 0..cases {
        let n = 1 + (case % 6);
        let mut t = StabilizerTableau::new_plus(n).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            if n > 1 {
                t.apply_gate(random_gate(&mut rng, n)).map_err(|e| e.to_string())?;
            }
        }
        let op = random_pauli(&mut rng, n);
        // Project onto whichever sign is reachable; the opposite sign must
        // then be impossible.
        let sign = t
            .peek_deterministic(&op)
            .map_err(|e| e.to_string())?
            .unwrap_or(Sign::Plus);
        t.project_onto(&op, sign).map_err(|e| e.to_string())?;
        match t.project_onto(&op, sign.flip()) {
            Err(TableauError::ImpossibleOutcome) => {}
            other => {
                return Err(format!(
                    "case {case}: projecting {op} onto both signs gave {other:?}"
                ))
            }
        }
    }
    Ok(format!("{cases} double projections rejected as impossible"))
}

fn check_graph_roundtrip(cases: usize) -> Result<String, String> {
    let mut rng = SimRng::new(0x06A9);
    for case in 0..cases {
        let n = 1 + (case % 7);
        // Identity-adorned graph: adjacency must round-trip exactly.
        let mut g = AdornedGraph::empty(n).map_err(|e| e.to_string())?;
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.4) {
                    g.add_edge(a, b).map_err(|e| e.to_string())?;
                }
            }
        }
        let extracted = g.to_tableau().extract_graph();
        if !extracted.same_adjacency(&g) || !extracted.byproducts_identity() {
            return Err(format!("case {case}: adjacency not recovered for {g:?}"));
        }
        // Arbitrary stabilizer state: extraction must reproduce the group.
        let mut t = StabilizerTableau::new_plus(n).map_err(|e| e.to_string())?;
        for _ in 0..24 {
            let g = if n > 1 {
                random_gate(&mut rng, n)
            } else {
                Gate::H(0)
            };
            t.apply_gate(g).map_err(|e| e.to_string())?;
        }
        let adorned = t.extract_graph();
        if !adorned.to_tableau().groups_equal(&t) {
            return Err(format!("case {case}: extraction changed the group"));
        }
    }
    Ok(format!("{cases} graph extraction round trips"))
}

fn corrected_client_group(net: &Network) -> Result<StabilizerTableau, String> {
    let mut group = net.client_group().map_err(|e| e.to_string())?;
    for v in 0..net.num_nodes() {
        group
            .apply_local(v, &net.node(v).byproduct.inverse())
            .map_err(|e| e.to_string())?;
    }
    Ok(group)
}

/// Exhaustive outcome branches of both transfer circuits on the edge (4
/// branches) and the star (16 branches): identical client groups after
/// byproducts, equal to the target graph state.
fn check_transfer_equivalence(corrupt: bool) -> Result<String, String> {
    let p1 = profile_with_p(1.0);
    let mut checked = 0;

    let edge_target = AdornedGraph::from_edges(2, &[(0, 1)]).map_err(|e| e.to_string())?;
    for branch in 0..4 {
        let mut groups = Vec::new();
        for flavor in [TransferFlavor::Naive, TransferFlavor::Optimized] {
            let mut net = Network::new(2).map_err(|e| e.to_string())?;
            let mut rng = SimRng::new(1);
            let built = net
                .build_bell(0, 1, &p1, &mut rng, None)
                .map_err(|e| e.to_string())?;
            let mut forced = ForcedOutcomes::branch(branch, 2);
            net.transfer(built.fragment, flavor, &p1, &mut forced)
                .map_err(|e| e.to_string())?;
            if !forced.fully_consumed() {
                return Err("edge transfer consumed fewer outcomes than expected".into());
            }
            if corrupt && flavor == TransferFlavor::Naive {
                net.corrupt_byproduct(0);
            }
            if !net.verify_clients(&edge_target) {
                return Err(format!(
                    "edge branch {branch} ({flavor:?}): clients do not match the target"
                ));
            }
            groups.push(corrected_client_group(&net)?);
            checked += 1;
        }
        if !groups[0].groups_equal(&groups[1]) {
            return Err(format!("edge branch {branch}: naive and optimized differ"));
        }
    }

    let star_target =
        AdornedGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).map_err(|e| e.to_string())?;
    for branch in 0..16 {
        let mut groups = Vec::new();
        for flavor in [TransferFlavor::Naive, TransferFlavor::Optimized] {
            let mut net = Network::new(4).map_err(|e| e.to_string())?;
            let mut rng = SimRng::new(1);
            let built = net
                .build_star4(0, [1, 2, 3], &p1, &mut rng, ParallelMode::Exact, None)
                .map_err(|e| e.to_string())?;
            let mut forced = ForcedOutcomes::branch(branch, 4);
            net.transfer(built.fragment, flavor, &p1, &mut forced)
                .map_err(|e| e.to_string())?;
            if !forced.fully_consumed() {
                return Err("star transfer consumed fewer outcomes than expected".into());
            }
            if !net.verify_clients(&star_target) {
                return Err(format!(
                    "star branch {branch} ({flavor:?}): clients do not match the target"
                ));
            }
            groups.push(corrected_client_group(&net)?);
            checked += 1;
        }
        if !groups[0].groups_equal(&groups[1]) {
            return Err(format!("star branch {branch}: naive and optimized differ"));
        }
    }
    Ok(format!("{checked} transfer branches equivalent and verified"))
}

/// Dense reference for the fusion: two edge states, odd-parity projection
/// on the inner brokers, then the same fix-up rotations.
fn fused_star_dense() -> Result<Vec<Complex>, String> {
    let t = StabilizerTableau::new_plus(4).map_err(|e| e.to_string())?;
    let mut v = dense_state(&t).map_err(|e| e.to_string())?;
    for g in [Gate::Cz(1, 0), Gate::Cz(2, 3)] {
        apply_gate_dense(&mut v, g);
    }
    let zz = PauliString::from_ops(4, &[(0, Axis::Z), (2, Axis::Z)]);
    v = project_dense(&v, &zz, Sign::Minus).map_err(|e| e.to_string())?;
    for g in [Gate::X(2), Gate::H(2), Gate::Z(3)] {
        apply_gate_dense(&mut v, g);
    }
    Ok(v)
}

/// The two-stage four-broker build ends in the exact star K_{1,3} state:
/// extraction returns the star adjacency and the dense fusion oracle
/// agrees.
fn check_fusion_star_shape() -> Result<String, String> {
    let p1 = profile_with_p(1.0);
    let mut net = Network::new(4).map_err(|e| e.to_string())?;
    let mut rng = SimRng::new(7);
    let built = net
        .build_star4(0, [1, 2, 3], &p1, &mut rng, ParallelMode::Exact, None)
        .map_err(|e| e.to_string())?;
    if !net
        .fragment_is_canonical(built.fragment)
        .map_err(|e| e.to_string())?
    {
        return Err("fused brokers do not hold the exact star graph state".into());
    }
    let brokers = net.broker_group(&[0, 1, 2, 3]).map_err(|e| e.to_string())?;
    let extracted = brokers.extract_graph();
    let star = AdornedGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).map_err(|e| e.to_string())?;
    if !extracted.same_adjacency(&star) {
        return Err(format!("extracted {extracted:?} is not the 3-node star"));
    }
    // The dense route fuses pair states (leaf0, center) = (qubits 1, 0) and
    // (leaf1, leaf2) = (qubits 2, 3) with the projection on (0, 2).
    let v = fused_star_dense()?;
    for g in brokers.generators() {
        if !stabilizes(&v, g) {
            return Err(format!("dense fusion oracle disagrees on {g}"));
        }
    }
    Ok("fusion yields the exact 3-node star, confirmed by the dense oracle".into())
}

/// Client group snapshots change only at client-mutating operations.
fn check_client_insulation(trials: usize) -> Result<String, String> {
    let profile = profile_with_p(0.1);
    let target =
        AdornedGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).map_err(|e| e.to_string())?;
    let opts = SimOptions {
        track_snapshots: true,
        ..SimOptions::default()
    };
    let mut transitions = 0u64;
    for (i, strategy) in (0..trials).zip(
        [
            StrategyChoice::SequentialBipartite,
            StrategyChoice::MultipartiteStar,
        ]
        .iter()
        .cycle(),
    ) {
        let plan = plan_growth(&target, *strategy);
        let trial =
            run_trial(&plan, &profile, 1_000 + i as u64, &opts).map_err(|e| e.to_string())?;
        let snaps = trial.network.snapshots().expect("tracking enabled");
        let mut last: Option<&[u8]> = None;
        for (mutating, bytes) in snaps {
            if let Some(prev) = last {
                if !mutating && prev != &bytes[..] {
                    return Err(format!("trial {i}: client group changed outside a transfer"));
                }
            }
            transitions += 1;
            last = Some(bytes);
        }
        if !trial.stats.verified {
            return Err(format!("trial {i}: final state failed verification"));
        }
    }
    Ok(format!(
        "{transitions} snapshots across {trials} trials changed only at transfers"
    ))
}

fn check_formula_threshold_identity() -> Result<String, String> {
    for pi in 1..=50 {
        let p = pi as f64 / 50.0;
        let t = threshold_ratio(p);
        for delta in [-2.0, -0.5, 0.5, 2.0] {
            let ratio = t + delta;
            if ratio < 0.0 {
                continue;
            }
            let profile = TimingProfile {
                tau_h: 1.0,
                tau_o: 1.0,
                tau_m: 0.0,
                tau_cnot: ratio,
                tau_rf: 0.0,
                p,
            };
            let star_wins = profile.expected_time_star() <= profile.expected_time_sequential();
            if star_wins != (delta > 0.0) {
                return Err(format!("identity breaks at p = {p}, ratio = {ratio}"));
            }
        }
    }
    let asymptotic = TimingProfile {
        tau_cnot: 1e6,
        ..unit_profile()
    };
    let ratio = asymptotic.expected_time_star() / asymptotic.expected_time_sequential();
    if (ratio - 1.0 / 3.0).abs() > 1e-3 {
        return Err(format!("asymptotic ratio {ratio} not within 1e-3 of 1/3"));
    }
    Ok("threshold inequality matches the closed forms on a 50-point grid".into())
}

fn check_plan_invariants(cases: usize) -> Result<String, String> {
    let mut rng = SimRng::new(0x9A17);
    for case in 0..cases {
        let n = 2 + rng.gen_range(11) as usize;
        let mut g = AdornedGraph::empty(n).map_err(|e| e.to_string())?;
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.3) {
                    g.add_edge(a, b).map_err(|e| e.to_string())?;
                }
            }
        }
        for strategy in [
            StrategyChoice::SequentialBipartite,
            StrategyChoice::MultipartiteStar,
        ] {
            let plan = plan_growth(&g, strategy);
            plan.validate(&g)
                .map_err(|e| format!("case {case} ({strategy:?}): {e}"))?;
        }
    }
    Ok(format!("{cases} random targets planned within the invariants"))
}

fn check_parallel_pair_formula(trials: u64) -> Result<String, String> {
    let p = 0.25;
    let mut rng = SimRng::new(0xFA7E);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let mut g = [0u64; 2];
        for slot in &mut g {
            let mut k = 1u64;
            while !rng.gen_bool(p) {
                k += 1;
            }
            *slot = k;
        }
        let m = g[0].max(g[1]) as f64;
        sum += m;
        sum_sq += m * m;
    }
    let n = trials as f64;
    let mean = sum / n;
    let stderr = ((sum_sq / n - mean * mean) / n).sqrt();
    let expected = exact_parallel_pair_rounds(p);
    if (mean - expected).abs() > 4.0 * stderr.max(1e-6) {
        return Err(format!(
            "sampled mean {mean} vs closed form {expected} (stderr {stderr})"
        ));
    }
    Ok(format!(
        "E[max rounds] sampled {mean:.4} vs closed form {expected:.4}"
    ))
}
