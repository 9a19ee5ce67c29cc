//! Monte-Carlo coverage and interval studies.
//!
//! Each trial simulates one dataset from `derive_seed(seed, trial)` and
//! evaluates it at every ε of the grid, so all grid points see the same
//! simulated data. Trials run in parallel on the rayon pool; results are
//! aggregated by trial index and do not depend on scheduling.

use crate::clopper_pearson::{uniform_allocation, EpsilonAllocation, ProtocolShape};
use crate::error::{Error, Result};
use crate::functionals::{interval, process_fidelity_to_unitary, AffineFunctional};
use crate::operators::{embed_choi, embed_state, BasisSet, ChoiMatrix, DensityMatrix};
use crate::polytope::{build_qpt_polytope, build_qst_polytope, Polyhedron};
use crate::simulator::{
    derive_seed, run_qpt_experiment, run_qst_experiment, MeasurementProtocol, SamplingMode, Seed,
    TomographyKind,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The object an experiment is simulated from.
#[derive(Debug, Clone, PartialEq)]
pub enum TrueObject {
    State(DensityMatrix),
    Channel(ChoiMatrix),
}

impl TrueObject {
    fn check_protocol(&self, protocol: &MeasurementProtocol) -> Result<()> {
        match (self, protocol.kind) {
            (TrueObject::State(_), TomographyKind::Qst)
            | (TrueObject::Channel(_), TomographyKind::Qpt) => Ok(()),
            _ => Err(Error::InvalidArgument(
                "true object kind does not match the protocol kind".into(),
            )),
        }
    }

    /// Coordinates in the polytope's ambient space.
    pub fn embedding(&self) -> Result<Vec<f64>> {
        match self {
            TrueObject::State(rho) => Ok(embed_state(rho, &BasisSet::for_dim(rho.dim())?)?.0),
            TrueObject::Channel(c) => Ok(embed_choi(
                c,
                &BasisSet::for_dim(c.d_in())?,
                &BasisSet::for_dim(c.d_out())?,
            )?
            .c()
            .to_vec()),
        }
    }
}

/// Protocol shape as seen by the polytope builders.
pub fn protocol_shape(protocol: &MeasurementProtocol) -> ProtocolShape {
    let sizes: Vec<usize> = protocol.povms.iter().map(|p| p.len()).collect();
    match protocol.kind {
        TomographyKind::Qst => ProtocolShape::qst(sizes),
        TomographyKind::Qpt => ProtocolShape::qpt(vec![sizes; protocol.inputs.len()]),
    }
}

/// Simulate one dataset and build its polytope for every allocation.
fn simulate_polytopes(
    truth: &TrueObject,
    protocol: &MeasurementProtocol,
    allocations: &[EpsilonAllocation],
    seed: Seed,
    mode: SamplingMode,
) -> Result<Vec<Polyhedron>> {
    match truth {
        TrueObject::State(rho) => {
            let data = run_qst_experiment(rho, protocol, seed, mode)?;
            allocations
                .iter()
                .map(|a| build_qst_polytope(&data, a))
                .collect()
        }
        TrueObject::Channel(choi) => {
            let data = run_qpt_experiment(choi, protocol, seed, mode)?;
            allocations
                .iter()
                .map(|a| build_qpt_polytope(&data, a))
                .collect()
        }
    }
}

fn allocations_for(shape: &ProtocolShape, grid: &[f64]) -> Result<Vec<EpsilonAllocation>> {
    grid.iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::InfeasibleAllocation(format!(
                    "grid value {eps} is outside (0, 1)"
                )));
            }
            uniform_allocation(shape, 1.0 - eps)
        })
        .collect()
}

/// ε + 3·sqrt(ε(1−ε)/trials): the nominal failure rate plus three binomial
/// standard deviations of Monte-Carlo noise.
pub fn coverage_allowance(epsilon: f64, trials: usize) -> f64 {
    epsilon + 3.0 * (epsilon * (1.0 - epsilon) / trials as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub epsilon_grid: Vec<f64>,
    pub f_fail: Vec<f64>,
    pub failures: Vec<usize>,
    pub trials: usize,
    pub protocol: String,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl CoverageReport {
    /// Grid points where f_fail exceeds [`coverage_allowance`].
    pub fn violations(&self) -> Vec<f64> {
        self.epsilon_grid
            .iter()
            .zip(&self.f_fail)
            .filter(|(&e, &f)| f > coverage_allowance(e, self.trials))
            .map(|(&e, _)| e)
            .collect()
    }
}

pub fn describe_protocol(protocol: &MeasurementProtocol) -> String {
    let dim = protocol.povms.first().map_or(0, |p| p.dim());
    match protocol.kind {
        TomographyKind::Qst => format!(
            "QST d={dim}, {} POVMs, {} shots per setting",
            protocol.povms.len(),
            protocol.shots_per_setting
        ),
        TomographyKind::Qpt => format!(
            "QPT d_in={} d_out={dim}, {} inputs x {} POVMs, {} shots per setting",
            protocol.inputs.first().map_or(0, |r| r.dim()),
            protocol.inputs.len(),
            protocol.povms.len(),
            protocol.shots_per_setting
        ),
    }
}

/// Fraction of simulated experiments whose polytope misses the true object,
/// for each ε = 1 − CL in the grid.
pub fn coverage_experiment(
    truth: &TrueObject,
    protocol: &MeasurementProtocol,
    epsilon_grid: &[f64],
    trials: usize,
    seed: Seed,
    mode: SamplingMode,
) -> Result<CoverageReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    truth.check_protocol(protocol)?;
    let allocations = allocations_for(&protocol_shape(protocol), epsilon_grid)?;
    let point = truth.embedding()?;
    let per_trial: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let polys = simulate_polytopes(
                truth,
                protocol,
                &allocations,
                Seed(derive_seed(seed.0, t as u64)),
                mode,
            )?;
            polys.iter().map(|p| Ok(!p.contains(&point)?)).collect()
        })
        .collect::<Result<_>>()?;
    let failures: Vec<usize> = (0..epsilon_grid.len())
        .map(|k| per_trial.iter().filter(|row| row[k]).count())
        .collect();
    Ok(CoverageReport {
        epsilon_grid: epsilon_grid.to_vec(),
        f_fail: failures.iter().map(|&f| f as f64 / trials as f64).collect(),
        failures,
        trials,
        protocol: describe_protocol(protocol),
        seed: seed.0,
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub trial: usize,
    pub lo: f64,
    pub hi: f64,
    pub contains_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSweep {
    pub label: String,
    pub true_value: f64,
    pub epsilon_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub entries: Vec<SweepEntry>,
    /// Per grid point: trials whose region admitted no point.
    pub empty_regions: Vec<usize>,
    /// Per grid point: trials where the functional was unbounded.
    pub unbounded: Vec<usize>,
}

impl IntervalSweep {
    /// Fraction of trials at grid index `k` whose interval misses the truth;
    /// empty regions count as misses.
    pub fn miss_fraction(&self, k: usize) -> f64 {
        let eps = self.epsilon_grid[k];
        let misses = self
            .entries
            .iter()
            .filter(|e| e.epsilon == eps && !e.contains_truth)
            .count()
            + self.empty_regions[k];
        misses as f64 / self.trials as f64
    }
}

enum TrialInterval {
    Interval(f64, f64),
    Empty,
    Unbounded,
}

/// Confidence intervals of `functional` over repeated simulated experiments.
pub fn interval_sweep(
    truth: &TrueObject,
    protocol: &MeasurementProtocol,
    functional: &AffineFunctional,
    epsilon_grid: &[f64],
    trials: usize,
    seed: Seed,
    mode: SamplingMode,
) -> Result<IntervalSweep> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    truth.check_protocol(protocol)?;
    let allocations = allocations_for(&protocol_shape(protocol), epsilon_grid)?;
    let true_value = functional.evaluate(&truth.embedding()?)?;
    let per_trial: Vec<Vec<TrialInterval>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let polys = simulate_polytopes(
                truth,
                protocol,
                &allocations,
                Seed(derive_seed(seed.0, t as u64)),
                mode,
            )?;
            polys
                .iter()
                .map(|p| match interval(functional, p) {
                    Ok(ci) => Ok(TrialInterval::Interval(ci.lo, ci.hi)),
                    Err(Error::EmptyRegion(_)) => Ok(TrialInterval::Empty),
                    Err(Error::Unbounded(_)) => Ok(TrialInterval::Unbounded),
                    Err(e) => Err(e),
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    let mut empty_regions = vec![0; epsilon_grid.len()];
    let mut unbounded = vec![0; epsilon_grid.len()];
    for (k, &epsilon) in epsilon_grid.iter().enumerate() {
        for (trial, row) in per_trial.iter().enumerate() {
            match row[k] {
                TrialInterval::Interval(lo, hi) => entries.push(SweepEntry {
                    epsilon,
                    trial,
                    lo,
                    hi,
                    contains_truth: lo <= true_value && true_value <= hi,
                }),
                TrialInterval::Empty => empty_regions[k] += 1,
                TrialInterval::Unbounded => unbounded[k] += 1,
            }
        }
    }
    Ok(IntervalSweep {
        label: functional.label.clone(),
        true_value,
        epsilon_grid: epsilon_grid.to_vec(),
        trials,
        seed: seed.0,
        entries,
        empty_regions,
        unbounded,
    })
}

/// Process-fidelity intervals against a unitary target.
pub fn fidelity_sweep(
    true_choi: &ChoiMatrix,
    protocol: &MeasurementProtocol,
    target_unitary: &ChoiMatrix,
    epsilon_grid: &[f64],
    trials: usize,
    seed: Seed,
    mode: SamplingMode,
) -> Result<IntervalSweep> {
    let functional = process_fidelity_to_unitary(
        target_unitary,
        &BasisSet::for_dim(true_choi.d_in())?,
        &BasisSet::for_dim(true_choi.d_out())?,
    )?;
    interval_sweep(
        &TrueObject::Channel(true_choi.clone()),
        protocol,
        &functional,
        epsilon_grid,
        trials,
        seed,
        mode,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{depolarizing_channel, ghz_state};

    #[test]
    fn exact_frequencies_never_fail() {
        let proto = MeasurementProtocol::pauli_qst(1, 1000, None, false).unwrap();
        let truth = TrueObject::State(ghz_state(1).unwrap());
        let r = coverage_experiment(
            &truth,
            &proto,
            &[0.5, 0.01],
            3,
            Seed(1),
            SamplingMode::ExactFrequencies,
        )
        .unwrap();
        assert_eq!(r.f_fail, vec![0.0, 0.0]);
        assert!(r.violations().is_empty());
    }

    #[test]
    fn deterministic_reports() {
        let proto = MeasurementProtocol::pauli_qst(1, 200, None, false).unwrap();
        let truth = TrueObject::State(ghz_state(1).unwrap());
        let a = coverage_experiment(
            &truth,
            &proto,
            &[0.5, 0.9],
            50,
            Seed(9),
            SamplingMode::Multinomial,
        )
        .unwrap();
        let b = coverage_experiment(
            &truth,
            &proto,
            &[0.5, 0.9],
            50,
            Seed(9),
            SamplingMode::Multinomial,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_arguments() {
        let proto = MeasurementProtocol::pauli_qst(1, 200, None, false).unwrap();
        let truth = TrueObject::State(ghz_state(1).unwrap());
        assert!(coverage_experiment(
            &truth,
            &proto,
            &[0.5],
            0,
            Seed(0),
            SamplingMode::Multinomial
        )
        .is_err());
        assert!(matches!(
            coverage_experiment(
                &truth,
                &proto,
                &[1.5],
                1,
                Seed(0),
                SamplingMode::Multinomial
            ),
            Err(Error::InfeasibleAllocation(_))
        ));
        let channel = TrueObject::Channel(depolarizing_channel(1, 0.1).unwrap());
        assert!(coverage_experiment(
            &channel,
            &proto,
            &[0.5],
            1,
            Seed(0),
            SamplingMode::Multinomial
        )
        .is_err());
    }

    #[test]
    fn exact_fidelity_sweep_has_margin() {
        let proto = MeasurementProtocol::pauli_qpt(1, 1000, None, false).unwrap();
        let sweep = fidelity_sweep(
            &depolarizing_channel(1, 0.1).unwrap(),
            &proto,
            &ChoiMatrix::identity_channel(2),
            &[0.5],
            2,
            Seed(4),
            SamplingMode::ExactFrequencies,
        )
        .unwrap();
        assert!((sweep.true_value - 0.925).abs() < 1e-12);
        assert_eq!(sweep.entries.len(), 2);
        for e in &sweep.entries {
            assert!(e.lo < 0.925 - 1e-3 && e.hi > 0.925 + 1e-3, "{e:?}");
        }
        assert_eq!(sweep.miss_fraction(0), 0.0);
    }
}
