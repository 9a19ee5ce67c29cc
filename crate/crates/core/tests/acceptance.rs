//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p polytomo --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{
    max_abs_diff, random_bounded_polytope, random_channel, random_density, rng,
    vertex_enumeration_max,
};
use polytomo::clopper_pearson::{
    root_residual, solve_delta, uniform_allocation, EpsilonAllocation,
};
use polytomo::harness::{
    coverage_allowance, coverage_experiment, fidelity_sweep, CoverageReport, TrueObject,
};
use polytomo::linprog::{solve_constraints, LpStatus, Sense};
use polytomo::operators::{embed_choi, embed_input_state, embed_state, BasisSet, ChoiMatrix};
use polytomo::polytope::{build_qpt_polytope, build_qst_polytope};
use polytomo::simulator::{
    depolarizing_channel, ghz_state, pauli_povms, run_qpt_experiment, run_qst_experiment,
    tetrahedron_inputs, MeasurementProtocol, SamplingMode, Seed,
};
use rand::Rng;
use rand_distr::StandardNormal;

type Check = (&'static str, fn() -> Outcome);

const GRID: [f64; 5] = [0.5, 0.2, 0.1, 0.05, 0.01];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn coverage_lines(report: &CoverageReport) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, &eps) in report.epsilon_grid.iter().enumerate() {
        let allow = coverage_allowance(eps, report.trials);
        let f = report.f_fail[k];
        ok &= f <= allow;
        parts.push(format!("ε={eps}: {f:.4}≤{allow:.4}"));
    }
    (ok, parts.join(", "))
}

fn qst_coverage() -> (Outcome, Outcome) {
    let proto = MeasurementProtocol::pauli_qst(1, 10_000, None, false).unwrap();
    let truth = TrueObject::State(ghz_state(1).unwrap());
    let report = match coverage_experiment(
        &truth,
        &proto,
        &GRID,
        1000,
        Seed(20_240_101),
        SamplingMode::Multinomial,
    ) {
        Ok(r) => r,
        Err(e) => {
            let msg = format!("error: {e}");
            return (outcome(false, msg.clone()), outcome(false, msg));
        }
    };
    let (ok, detail) = coverage_lines(&report);
    let mut soft_ok = true;
    let mut soft = Vec::new();
    for (k, &eps) in GRID.iter().enumerate() {
        if eps >= 0.05 {
            let f = report.f_fail[k];
            soft_ok &= f <= 0.5 * eps;
            soft.push(format!("ε={eps}: {f:.4}≤{:.4}", 0.5 * eps));
        }
    }
    (outcome(ok, detail), outcome(soft_ok, soft.join(", ")))
}

fn qpt_coverage() -> Outcome {
    let proto = MeasurementProtocol::pauli_qpt(1, 10_000, None, false).unwrap();
    let truth = TrueObject::Channel(depolarizing_channel(1, 0.1).unwrap());
    match coverage_experiment(
        &truth,
        &proto,
        &GRID,
        300,
        Seed(20_240_102),
        SamplingMode::Multinomial,
    ) {
        Ok(report) => {
            let (ok, detail) = coverage_lines(&report);
            outcome(ok, detail)
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn fidelity_intervals() -> Outcome {
    let channel = depolarizing_channel(1, 0.1).unwrap();
    let target = ChoiMatrix::identity_channel(2);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, shots) in [1_000u64, 10_000, 100_000].into_iter().enumerate() {
        let proto = MeasurementProtocol::pauli_qpt(1, shots, None, false).unwrap();
        let sweep = match fidelity_sweep(
            &channel,
            &proto,
            &target,
            &[0.5],
            100,
            Seed(7000 + i as u64),
            SamplingMode::Multinomial,
        ) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("n={shots}: {e}")),
        };
        let contained = sweep.entries.iter().filter(|e| e.contains_truth).count();
        let above_one = sweep.entries.iter().filter(|e| e.hi > 1.0).count();
        let max_hi = sweep.entries.iter().map(|e| e.hi).fold(f64::MIN, f64::max);
        ok &= (sweep.true_value - 0.925).abs() < 1e-12
            && sweep.entries.len() == 100
            && contained == 100
            // hi is reported as computed; a clipped value would sit exactly at 1
            && sweep.entries.iter().all(|e| e.hi != 1.0);
        parts.push(format!(
            "n={shots}: {contained}/100 contain 0.925, {above_one} with hi>1 (max {max_hi:.4})"
        ));
    }
    outcome(ok, parts.join("; "))
}

fn delta_correctness() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    for eps in [0.5, 0.1, 0.01] {
        for shots in [10u64, 100, 1000] {
            let d = solve_delta(0, shots, eps).unwrap().delta.unwrap();
            worst_closed = worst_closed.max((d - (1.0 - eps.powf(1.0 / shots as f64))).abs());
        }
    }
    let mut worst_residual: f64 = 0.0;
    let mut points = 0;
    for shots in [10u64, 100, 1_000, 10_000, 100_000] {
        for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for eps in [0.1, 1e-3] {
                let n = (frac * shots as f64).round() as u64;
                let b = solve_delta(n, shots, eps).unwrap();
                worst_residual = worst_residual.max(root_residual(&b).unwrap().abs());
                points += 1;
            }
        }
    }
    outcome(
        worst_closed < 1e-12 && worst_residual < 1e-10 && points == 50,
        format!("closed-form error {worst_closed:.2e}, max residual {worst_residual:.2e} over {points} points"),
    )
}

fn qst_bounded(povm_indices: &[usize]) -> (bool, bool) {
    let all = pauli_povms(1).unwrap();
    let povms = povm_indices.iter().map(|&i| all[i].clone()).collect();
    let proto = MeasurementProtocol::qst(povms, 1000).unwrap();
    let data = run_qst_experiment(
        &ghz_state(1).unwrap(),
        &proto,
        Seed(1),
        SamplingMode::Multinomial,
    )
    .unwrap();
    let poly = build_qst_polytope(&data, &uniform_allocation(&data.shape(), 0.9).unwrap()).unwrap();
    (poly.is_bounded(), poly.is_bounded_lp().unwrap())
}

fn qpt_bounded(num_inputs: usize) -> (bool, bool) {
    let proto = MeasurementProtocol::qpt(
        tetrahedron_inputs(1).unwrap()[..num_inputs].to_vec(),
        pauli_povms(1).unwrap(),
        1000,
    )
    .unwrap();
    let choi = depolarizing_channel(1, 0.1).unwrap();
    let data = run_qpt_experiment(&choi, &proto, Seed(1), SamplingMode::Multinomial).unwrap();
    let poly = build_qpt_polytope(&data, &uniform_allocation(&data.shape(), 0.9).unwrap()).unwrap();
    (poly.is_bounded(), poly.is_bounded_lp().unwrap())
}

fn boundedness() -> Outcome {
    let cases = [
        ("Pauli x,y,z QST", qst_bounded(&[0, 1, 2]), true),
        ("x,y-only QST", qst_bounded(&[0, 1]), false),
        ("tetrahedron×Pauli QPT", qpt_bounded(4), true),
        ("3-input QPT", qpt_bounded(3), false),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, (rank, lp), expect) in cases {
        ok &= rank == expect && lp == expect;
        parts.push(format!(
            "{name}: {}",
            if rank { "bounded" } else { "unbounded" }
        ));
    }
    outcome(ok, parts.join(", "))
}

fn confidence_tightening() -> Outcome {
    let mut r = rng(77);
    let mut strict = 0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..100 {
        let povms = r.random_range(2..=9);
        let per: Vec<Vec<f64>> = (0..povms)
            .map(|_| {
                (0..r.random_range(2..=4))
                    .map(|_| r.random_range(1e-6..0.05))
                    .collect()
            })
            .collect();
        let alloc = EpsilonAllocation::qst(per).unwrap();
        let gap = alloc.confidence_level().unwrap() - alloc.legacy_confidence_level();
        min_gap = min_gap.min(gap);
        if gap > 0.0 {
            strict += 1;
        }
    }
    let mut worst_single: f64 = 0.0;
    for _ in 0..100 {
        let per = vec![(0..r.random_range(2..=6))
            .map(|_| r.random_range(1e-6..0.15))
            .collect()];
        let alloc = EpsilonAllocation::qst(per).unwrap();
        worst_single = worst_single
            .max((alloc.confidence_level().unwrap() - alloc.legacy_confidence_level()).abs());
    }
    outcome(
        strict == 100 && worst_single <= 1e-15,
        format!(
            "L≥2: {strict}/100 strict (min gap {min_gap:.2e}); L=1: max |diff| {worst_single:.1e}"
        ),
    )
}

fn lp_oracle() -> Outcome {
    let mut r = rng(88);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for case in 0..50 {
        let dim = 2 + case % 2;
        let hs = random_bounded_polytope(&mut r, dim, 8);
        let c: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
        let expect = vertex_enumeration_max(&hs, &c).unwrap();
        match solve_constraints(&c, &hs, Sense::Maximize) {
            Ok(sol) if sol.status == LpStatus::Optimal => {
                worst = worst.max((sol.value - expect).abs())
            }
            _ => bad += 1,
        }
    }
    outcome(
        bad == 0 && worst < 1e-8,
        format!("max |simplex − enumeration| {worst:.2e} over 50 polytopes"),
    )
}

fn choi_consistency() -> Outcome {
    let mut r = rng(99);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let d = if k % 2 == 0 { 2 } else { 4 };
        let basis = BasisSet::for_dim(d).unwrap();
        let choi = random_channel(&mut r, d, d);
        let rho = random_density(&mut r, d);
        let predicted = embed_choi(&choi, &basis, &basis)
            .unwrap()
            .act_on(&embed_input_state(&rho, &basis).unwrap())
            .unwrap();
        let actual = embed_state(&choi.apply(&rho).unwrap(), &basis).unwrap();
        worst = worst.max(max_abs_diff(&predicted, actual.as_slice()));
    }
    outcome(
        worst < 1e-9,
        format!("max componentwise error {worst:.2e} over 200 pairs"),
    )
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |name: &str, o: Outcome, secs: f64| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failures += 1;
        }
        println!("{tag}  {name} [{secs:.1}s]: {}", o.detail);
    };

    let t = Instant::now();
    let (cov, soft) = qst_coverage();
    let secs = t.elapsed().as_secs_f64();
    report("QST coverage, |+⟩, 10⁴ shots, 1000 trials", cov, secs);
    report("QST conservativeness, f_fail ≤ ε/2 for ε ≥ 0.05", soft, 0.0);

    let checks: [Check; 7] = [
        (
            "QPT coverage, depolarizing p=0.1, 10⁴ shots, 300 trials",
            qpt_coverage,
        ),
        (
            "fidelity intervals contain 0.925 at ε=0.5",
            fidelity_intervals,
        ),
        ("δ closed form and root residual", delta_correctness),
        ("boundedness verdicts", boundedness),
        (
            "product confidence level beats union bound",
            confidence_tightening,
        ),
        ("simplex matches vertex enumeration", lp_oracle),
        ("Choi embedding consistency", choi_consistency),
    ];
    for (name, check) in checks {
        let t = Instant::now();
        let o = check();
        report(name, o, t.elapsed().as_secs_f64());
    }

    if failures == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
