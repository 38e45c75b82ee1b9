//! Stabilizer engine checked operation by operation against the dense
//! state-vector oracle.

use graphbroker::pauli::{Axis, PauliString, Sign};
use graphbroker::rng::{ForcedOutcomes, SimRng};
use graphbroker::statevector::{
    apply_gate_dense, dense_state, overlap, project_dense, stabilizes, Complex64,
};
use graphbroker::tableau::{Gate, StabilizerTableau, TableauError};
use graphbroker::AdornedGraph;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn single(n: usize, q: usize, axis: Axis) -> PauliString {
    PauliString::single(n, q, axis)
}

#[test]
fn new_state_bases() {
    let plus = StabilizerTableau::new_plus(1).unwrap();
    assert_eq!(format!("{}", plus.generators()[0]), "+X");

    let zero = StabilizerTableau::new_zero(2).unwrap();
    assert_eq!(format!("{}", zero.generators()[0]), "+ZI");
    assert_eq!(format!("{}", zero.generators()[1]), "+IZ");

    assert_eq!(
        StabilizerTableau::new_plus(0).unwrap_err(),
        TableauError::EmptyRegister
    );
}

#[test]
fn new_plus_has_uniform_amplitudes() {
    let t = StabilizerTableau::new_plus(3).unwrap();
    let v = dense_state(&t).unwrap();
    let expected = 1.0 / 8.0f64.sqrt();
    for amp in v {
        assert!((amp.re - expected).abs() < 1e-12 && amp.im.abs() < 1e-12);
    }
}

#[test]
fn hadamard_maps_z_to_x() {
    let mut t = StabilizerTableau::new_zero(1).unwrap();
    t.apply_gate(Gate::H(0)).unwrap();
    assert_eq!(format!("{}", t.generators()[0]), "+X");
}

#[test]
fn cz_on_plus_plus_gives_graph_generators() {
    let mut t = StabilizerTableau::new_plus(2).unwrap();
    t.apply_gate(Gate::Cz(0, 1)).unwrap();
    let edge = AdornedGraph::from_edges(2, &[(0, 1)]).unwrap();
    assert!(t.groups_equal(&edge.to_tableau()));
}

#[test]
fn two_qubit_gate_rejects_duplicate_index() {
    let mut t = StabilizerTableau::new_plus(2).unwrap();
    assert_eq!(
        t.apply_gate(Gate::Cnot(1, 1)).unwrap_err(),
        TableauError::DuplicateQubit(1)
    );
    assert!(matches!(
        t.apply_gate(Gate::H(5)).unwrap_err(),
        TableauError::QubitOutOfRange { index: 5, n: 2 }
    ));
}

#[test]
fn measure_stabilized_operator_is_deterministic() {
    let mut t = StabilizerTableau::new_zero(1).unwrap();
    let mut rng = SimRng::new(3);
    let before = t.canonical_bytes();
    let outcome = t.measure_pauli(&single(1, 0, Axis::Z), &mut rng).unwrap();
    assert!(outcome.deterministic);
    assert_eq!(outcome.sign, Sign::Plus);
    assert_eq!(t.canonical_bytes(), before, "state unchanged");
}

#[test]
fn anticommuting_measurement_is_unbiased() {
    // X on |0> is a fair coin: 1e5 trials within 4 sigma of half.
    let mut rng = SimRng::new(17);
    let trials = 100_000;
    let mut minus = 0u64;
    for _ in 0..trials {
        let mut t = StabilizerTableau::new_zero(1).unwrap();
        let outcome = t.measure_pauli(&single(1, 0, Axis::X), &mut rng).unwrap();
        assert!(!outcome.deterministic);
        if outcome.sign == Sign::Minus {
            minus += 1;
        }
    }
    let sigma = (trials as f64 * 0.25).sqrt();
    assert!(
        ((minus as f64) - trials as f64 / 2.0).abs() < 4.0 * sigma,
        "minus = {minus}"
    );
}

/// Measuring X on the two interior vertices of a 4-chain leaves the end
/// qubits maximally entangled in every outcome branch.
#[test]
fn chain_interior_x_measurements_entangle_the_ends() {
    let chain = AdornedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    for branch in 0..4 {
        let mut t = chain.to_tableau();
        let mut forced = ForcedOutcomes::branch(branch, 2);
        let o1 = t.measure_pauli(&single(4, 1, Axis::X), &mut forced).unwrap();
        let o2 = t.measure_pauli(&single(4, 2, Axis::X), &mut forced).unwrap();
        assert!(!o1.deterministic && !o2.deterministic);
        assert!(forced.fully_consumed());

        // Ends unentangled from the measured middle, and with each other
        // through a rank-2 joint group with no local generators.
        let ends = t.restricted(&[0, 3]).unwrap();
        let v = dense_state(&ends).unwrap();
        // A maximally entangled 2-qubit state has reduced single-qubit
        // purity 1/2: no single-qubit Pauli stabilizes it.
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for q in 0..2 {
                assert!(
                    !stabilizes(&v, &single(2, q, axis)),
                    "branch {branch}: ends are not maximally entangled"
                );
                assert!(!stabilizes(&v, &single(2, q, axis).negated()));
            }
        }
    }
}

#[test]
fn project_onto_odd_parity_gives_triplet_bell() {
    let mut t = StabilizerTableau::new_plus(2).unwrap();
    let zz = PauliString::from_ops(2, &[(0, Axis::Z), (1, Axis::Z)]);
    t.project_onto(&zz, Sign::Minus).unwrap();

    let v = dense_state(&t).unwrap();
    let mut expected = vec![Complex64::ZERO; 4];
    expected[0b01] = SQRT_HALF.into();
    expected[0b10] = SQRT_HALF.into();
    assert!((overlap(&v, &expected) - 1.0).abs() < 1e-12);

    // Bell class: locally equivalent to the 2-vertex graph state.
    let g = t.extract_graph();
    assert!(g.has_edge(0, 1));
}

#[test]
fn project_onto_impossible_outcome_errors() {
    let mut t = StabilizerTableau::new_zero(1).unwrap();
    assert_eq!(
        t.project_onto(&single(1, 0, Axis::Z), Sign::Minus).unwrap_err(),
        TableauError::ImpossibleOutcome
    );
}

#[test]
fn fusing_two_bells_gives_star_class_state() {
    // Bell(0,1) x Bell(2,3) as |00>+|11> pairs, then odd parity on (1,2).
    let mut t = StabilizerTableau::new_zero(4).unwrap();
    let mut v = dense_state(&t).unwrap();
    for g in [
        Gate::H(0),
        Gate::Cnot(0, 1),
        Gate::H(2),
        Gate::Cnot(2, 3),
    ] {
        t.apply_gate(g).unwrap();
        apply_gate_dense(&mut v, g);
    }
    let zz = PauliString::from_ops(4, &[(1, Axis::Z), (2, Axis::Z)]);
    t.project_onto(&zz, Sign::Minus).unwrap();
    v = project_dense(&v, &zz, Sign::Minus).unwrap();

    // Oracle state (|0011> + |1100>)/sqrt(2); qubit 0 is the low bit.
    let mut expected = vec![Complex64::ZERO; 16];
    expected[0b1100] = SQRT_HALF.into();
    expected[0b0011] = SQRT_HALF.into();
    assert!((overlap(&v, &expected) - 1.0).abs() < 1e-12);
    for g in t.generators() {
        assert!(stabilizes(&v, g));
    }

    // Locally equivalent to the 4-vertex star.
    let g = t.extract_graph();
    let star_degrees = {
        let mut d: Vec<usize> = (0..4).map(|v| g.degree(v)).collect();
        d.sort_unstable();
        d
    };
    assert_eq!(star_degrees, vec![1, 1, 1, 3], "extracted {g:?}");
}

#[test]
fn extract_graph_on_bell_yields_edge_with_hadamard_byproduct() {
    let mut t = StabilizerTableau::new_zero(2).unwrap();
    t.apply_gate(Gate::H(0)).unwrap();
    t.apply_gate(Gate::Cnot(0, 1)).unwrap();
    let g = t.extract_graph();
    assert!(g.has_edge(0, 1));
    assert!(!g.byproducts_identity());
    // Round trip: the adorned tableau reproduces the Bell group exactly.
    assert!(g.to_tableau().groups_equal(&t));
}

#[test]
fn extract_graph_fixes_plain_graph_states() {
    let star = AdornedGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let extracted = star.to_tableau().extract_graph();
    assert!(extracted.same_adjacency(&star));
    assert!(extracted.byproducts_identity());
}

#[test]
fn graph_stabilizers_match_definitions() {
    let lone = AdornedGraph::empty(1).unwrap();
    assert_eq!(format!("{}", lone.to_tableau().generators()[0]), "+X");

    let edge = AdornedGraph::from_edges(2, &[(0, 1)]).unwrap();
    let t = edge.to_tableau();
    assert_eq!(format!("{}", t.generators()[0]), "+XZ");
    assert_eq!(format!("{}", t.generators()[1]), "+ZX");
}

#[test]
fn triangle_generators_equal_cz_circuit() {
    let triangle = AdornedGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let mut circuit = StabilizerTableau::new_plus(3).unwrap();
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        circuit.apply_gate(Gate::Cz(a, b)).unwrap();
    }
    assert!(triangle.to_tableau().groups_equal(&circuit));
}

#[test]
fn groups_equal_cases() {
    // {+XX, +ZZ} vs {+ZZ, +XX*ZZ}: same group.
    let n = 2;
    let xx = PauliString::from_ops(n, &[(0, Axis::X), (1, Axis::X)]);
    let zz = PauliString::from_ops(n, &[(0, Axis::Z), (1, Axis::Z)]);
    let a = tableau_from(&[xx.clone(), zz.clone()]);
    let b = tableau_from(&[zz.clone(), xx.mul(&zz)]);
    assert!(a.groups_equal(&b));

    // Sign flip breaks equality.
    let c = tableau_from(&[xx.clone(), zz.negated()]);
    assert!(!a.groups_equal(&c));
}

fn tableau_from(gens: &[PauliString]) -> StabilizerTableau {
    StabilizerTableau::from_stabilizers(gens.to_vec())
}

#[test]
fn groups_equal_fuzz_against_regenerated_presentations() {
    // Apply a random circuit to two different generator presentations of
    // the same state; groups stay equal through every step.
    let mut rng = SimRng::new(0x500);
    for case in 0..500 {
        let n = 2 + (case % 5);
        let mut a = StabilizerTableau::new_plus(n).unwrap();
        let mut b = scrambled_presentation(&a);
        for _ in 0..15 {
            let g = random_gate(&mut rng, n);
            a.apply_gate(g).unwrap();
            b.apply_gate(g).unwrap();
            assert!(a.groups_equal(&b));
        }
    }
}

/// Replace generators by products of themselves (an invertible GF(2) row
/// mix), preserving the group but not the presentation.
fn scrambled_presentation(t: &StabilizerTableau) -> StabilizerTableau {
    let gens = t.generators().to_vec();
    let mut mixed = gens.clone();
    // Lower-triangular mixing keeps the set independent.
    for i in 1..mixed.len() {
        for j in 0..i {
            if (i + j) % 2 == 0 {
                mixed[i] = mixed[i].mul(&gens[j]);
            }
        }
    }
    StabilizerTableau::from_stabilizers(mixed)
}

fn random_gate(rng: &mut SimRng, n: usize) -> Gate {
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

#[test]
fn state_vector_examples() {
    let plus = StabilizerTableau::new_plus(1).unwrap();
    let v = dense_state(&plus).unwrap();
    assert!((v[0].re - SQRT_HALF).abs() < 1e-12);
    assert!((v[1].re - SQRT_HALF).abs() < 1e-12);

    let mut bell = StabilizerTableau::new_zero(2).unwrap();
    bell.apply_gate(Gate::H(0)).unwrap();
    bell.apply_gate(Gate::Cnot(0, 1)).unwrap();
    let v = dense_state(&bell).unwrap();
    assert!((v[0b00].re - SQRT_HALF).abs() < 1e-12);
    assert!((v[0b11].re - SQRT_HALF).abs() < 1e-12);
    assert!(v[0b01].norm() < 1e-12 && v[0b10].norm() < 1e-12);
}

#[test]
fn state_vector_self_check_fuzz() {
    let mut rng = SimRng::new(0xFEED);
    for case in 0..200 {
        let n = 1 + (case % 6);
        let mut t = StabilizerTableau::new_plus(n).unwrap();
        for _ in 0..20 {
            let g = if n > 1 { random_gate(&mut rng, n) } else { Gate::S(0) };
            t.apply_gate(g).unwrap();
        }
        let v = dense_state(&t).unwrap();
        for g in t.generators() {
            assert!(stabilizes(&v, g), "case {case}: {g} fails to stabilize");
        }
    }
}

#[test]
fn state_vector_rejects_large_registers() {
    let t = StabilizerTableau::new_plus(17).unwrap();
    assert!(dense_state(&t).is_err());
}

#[test]
fn restricted_group_detects_entanglement() {
    let mut t = StabilizerTableau::new_zero(2).unwrap();
    t.apply_gate(Gate::H(0)).unwrap();
    t.apply_gate(Gate::Cnot(0, 1)).unwrap();
    assert!(matches!(
        t.restricted(&[0]),
        Err(TableauError::EntangledAcrossCut)
    ));
    // Separable register restricts fine.
    let sep = StabilizerTableau::new_plus(3).unwrap();
    let sub = sep.restricted(&[2, 0]).unwrap();
    assert_eq!(sub.num_qubits(), 2);
    assert!(sub.groups_equal(&StabilizerTableau::new_plus(2).unwrap()));
}

#[test]
fn rebuilt_destabilizers_support_measurement() {
    let mut t = StabilizerTableau::new_plus(4).unwrap();
    let mut rng = SimRng::new(5);
    for _ in 0..12 {
        t.apply_gate(random_gate(&mut rng, 4)).unwrap();
    }
    let mut sub = t.restricted(&[0, 1, 2, 3]).unwrap();
    assert!(!sub.has_destabilizers());
    sub.rebuild_destabilizers();
    sub.check_invariants().unwrap();
    sub.measure_pauli(&single(4, 0, Axis::Z), &mut rng).unwrap();
    sub.check_invariants().unwrap();
}
