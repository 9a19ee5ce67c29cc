mod common;

use common::{random_density, rng};
use polytomo::clopper_pearson::{uniform_allocation, EpsilonAllocation, ProtocolShape};
use polytomo::functionals::{interval, observable_mean};
use polytomo::operators::{embed_state, BasisSet};
use polytomo::polytope::{
    build_qpt_polytope, build_qst_polytope, HalfSpace, Measurement, Membership, Polyhedron,
    Provenance, QptDataset, QstDataset,
};
use polytomo::simulator::{
    depolarizing_channel, ghz_state, pauli_povms, run_qpt_experiment, run_qst_experiment,
    tetrahedron_inputs, MeasurementProtocol, SamplingMode, Seed,
};
use rand::seq::SliceRandom;

/// Polytope at confidence level 1 − ε, split evenly over effects.
fn qst_poly(data: &QstDataset, eps: f64) -> Polyhedron {
    let alloc = uniform_allocation(&data.shape(), 1.0 - eps).unwrap();
    build_qst_polytope(data, &alloc).unwrap()
}

fn qpt_poly(data: &QptDataset, eps: f64) -> Polyhedron {
    let alloc = uniform_allocation(&data.shape(), 1.0 - eps).unwrap();
    build_qpt_polytope(data, &alloc).unwrap()
}

#[test]
fn exact_frequency_data_contains_truth() {
    let mut r = rng(31);
    for n in 1..=2 {
        let proto = MeasurementProtocol::pauli_qst(n, 1000, None, false).unwrap();
        let basis = BasisSet::pauli(n).unwrap();
        for _ in 0..10 {
            let rho = random_density(&mut r, 1 << n);
            let data =
                run_qst_experiment(&rho, &proto, Seed(0), SamplingMode::ExactFrequencies).unwrap();
            let point = embed_state(&rho, &basis).unwrap();
            for eps in [0.5, 0.1, 1e-3] {
                assert!(qst_poly(&data, eps).contains(point.as_slice()).unwrap());
            }
        }
    }
}

#[test]
fn qpt_exact_frequency_data_contains_truth() {
    let proto = MeasurementProtocol::pauli_qpt(1, 1000, None, false).unwrap();
    let choi = depolarizing_channel(1, 0.1).unwrap();
    let data = run_qpt_experiment(&choi, &proto, Seed(0), SamplingMode::ExactFrequencies).unwrap();
    let truth = polytomo::harness::TrueObject::Channel(choi)
        .embedding()
        .unwrap();
    let poly = qpt_poly(&data, 0.5);
    assert_eq!(poly.ambient_dim(), 12);
    assert!(poly.contains(&truth).unwrap());
}

#[test]
fn shrinking_epsilon_loosens_every_constraint() {
    let proto = MeasurementProtocol::pauli_qst(2, 500, None, false).unwrap();
    let rho = ghz_state(2).unwrap();
    let data = run_qst_experiment(&rho, &proto, Seed(7), SamplingMode::Multinomial).unwrap();
    let basis = BasisSet::pauli(2).unwrap();
    let zz = basis.element(15).clone();
    let f = observable_mean(&zz, &basis).unwrap();
    let mut prev: Option<(Polyhedron, (f64, f64))> = None;
    for eps in [0.5, 0.1, 1e-2, 1e-4] {
        let poly = qst_poly(&data, eps);
        let ci = interval(&f, &poly).unwrap();
        if let Some((p, (lo, hi))) = &prev {
            for (a, b) in p.halfspaces().iter().zip(poly.halfspaces()) {
                assert_eq!(a.normal, b.normal);
                assert!(b.offset >= a.offset);
            }
            assert!(ci.lo <= lo + 1e-12 && ci.hi >= hi - 1e-12);
        }
        prev = Some((poly, (ci.lo, ci.hi)));
    }
}

#[test]
fn boundedness_verdicts() {
    let rho = ghz_state(1).unwrap();
    for n in 1..=2 {
        let proto = MeasurementProtocol::pauli_qst(n, 100, None, false).unwrap();
        let data = run_qst_experiment(
            &ghz_state(n).unwrap(),
            &proto,
            Seed(1),
            SamplingMode::Multinomial,
        )
        .unwrap();
        let poly = qst_poly(&data, 0.1);
        assert!(poly.is_bounded());
        assert!(poly.is_bounded_lp().unwrap());
    }

    let z_only = MeasurementProtocol::qst(vec![pauli_povms(1).unwrap()[2].clone()], 100).unwrap();
    let data = run_qst_experiment(&rho, &z_only, Seed(1), SamplingMode::Multinomial).unwrap();
    let poly = qst_poly(&data, 0.1);
    assert!(!poly.is_bounded());
    assert!(!poly.is_bounded_lp().unwrap());

    let choi = depolarizing_channel(1, 0.1).unwrap();
    let full = MeasurementProtocol::pauli_qpt(1, 100, None, false).unwrap();
    let data = run_qpt_experiment(&choi, &full, Seed(1), SamplingMode::Multinomial).unwrap();
    let poly = qpt_poly(&data, 0.1);
    assert_eq!(poly.halfspaces().len(), 24);
    assert_eq!(poly.normal_rank(), 12);
    assert!(poly.is_bounded());
    assert!(poly.is_bounded_lp().unwrap());

    let three = MeasurementProtocol::qpt(
        tetrahedron_inputs(1).unwrap()[..3].to_vec(),
        pauli_povms(1).unwrap(),
        100,
    )
    .unwrap();
    let data = run_qpt_experiment(&choi, &three, Seed(1), SamplingMode::Multinomial).unwrap();
    let poly = qpt_poly(&data, 0.1);
    assert_eq!(poly.normal_rank(), 9);
    assert!(!poly.is_bounded());
    assert!(!poly.is_bounded_lp().unwrap());
}

#[test]
fn boundedness_ignores_order_and_duplicates() {
    let mut r = rng(32);
    let proto = MeasurementProtocol::pauli_qst(2, 100, None, false).unwrap();
    let data = run_qst_experiment(
        &ghz_state(2).unwrap(),
        &proto,
        Seed(2),
        SamplingMode::Multinomial,
    )
    .unwrap();
    let poly = qst_poly(&data, 0.1);
    let mut hs: Vec<HalfSpace> = poly.halfspaces().to_vec();
    hs.extend_from_slice(&poly.halfspaces()[..5]);
    hs.shuffle(&mut r);
    let shuffled = Polyhedron::new(poly.ambient_dim(), hs, 0.5).unwrap();
    assert!(shuffled.is_bounded());

    let mut partial: Vec<HalfSpace> = poly.halfspaces()[..12].to_vec();
    partial.extend_from_slice(&poly.halfspaces()[..12]);
    partial.shuffle(&mut r);
    let partial = Polyhedron::new(poly.ambient_dim(), partial, 0.5).unwrap();
    assert!(!partial.is_bounded());
}

#[test]
fn membership_reports_provenance() {
    let proto = MeasurementProtocol::pauli_qst(1, 1000, None, false).unwrap();
    let data = run_qst_experiment(
        &ghz_state(1).unwrap(),
        &proto,
        Seed(3),
        SamplingMode::ExactFrequencies,
    )
    .unwrap();
    let poly = qst_poly(&data, 0.01);
    // the truth is |+⟩ at r = x; its antipode never fires the + outcome
    match poly.check(&[-1.0, 0.0, 0.0]).unwrap() {
        Membership::Outside {
            provenance, excess, ..
        } => {
            assert_eq!(provenance, Provenance::Qst { povm: 0, effect: 1 });
            assert!(excess > 0.0);
        }
        Membership::Inside => panic!("−x should be excluded"),
    }
    assert!(poly.check(&[1.0, 0.0, 0.0]).unwrap().is_inside());
}

#[test]
fn all_counts_in_one_outcome_is_vacuous() {
    let basis = BasisSet::pauli(1).unwrap();
    let z = pauli_povms(1).unwrap()[2].clone();
    let data = QstDataset::new(basis, vec![Measurement::new(z, vec![50, 0]).unwrap()]).unwrap();
    let poly = qst_poly(&data, 0.1);
    // outcome 0 saw every shot: its bound is Tr(ρE_0) ≤ 1, i.e. r_z ≤ 1
    let h = &poly.halfspaces()[0];
    assert!((h.offset - 0.5).abs() < 1e-15);
    assert!((h.normal[2] - 0.5).abs() < 1e-15);
}

#[test]
fn build_rejects_bad_inputs() {
    let basis = BasisSet::pauli(1).unwrap();
    let z = pauli_povms(1).unwrap()[2].clone();
    let zero = QstDataset::new(
        basis.clone(),
        vec![Measurement::new(z.clone(), vec![0, 0]).unwrap()],
    )
    .unwrap();
    let alloc = EpsilonAllocation::uniform(&zero.shape(), 0.1).unwrap();
    assert!(build_qst_polytope(&zero, &alloc).is_err());

    let data = QstDataset::new(basis, vec![Measurement::new(z, vec![3, 4]).unwrap()]).unwrap();
    let wrong = EpsilonAllocation::uniform(&ProtocolShape::qst(vec![2, 2]), 0.1).unwrap();
    assert!(build_qst_polytope(&data, &wrong).is_err());
    assert!(Polyhedron::new(2, vec![], 1.0).is_err());
}
