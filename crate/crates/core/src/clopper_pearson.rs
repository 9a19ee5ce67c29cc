//! Per-effect Clopper-Pearson style bounds and confidence-level bookkeeping.
//!
//! For an effect observed `n` times out of `N` shots, the probability
//! Tr(ρE) is bounded above by n/N + δ where δ is the positive root of
//!
//! ```text
//! D(n/N ‖ n/N + δ) = −ln(ε)/N,   D(x‖y) = x ln(x/y) + (1−x) ln((1−x)/(1−y)).
//! ```
//!
//! The bound fails with probability at most ε.

use crate::error::{Error, Result};
use crate::operators::EffectEmbedding;
use crate::polytope::HalfSpace;

/// Solution of the KL root equation for one effect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBound {
    pub n: u64,
    pub shots: u64,
    pub epsilon: f64,
    /// `None` when n = N: the bound would exceed 1 and carries no information.
    pub delta: Option<f64>,
}

impl DeltaBound {
    pub fn is_vacuous(&self) -> bool {
        self.delta.is_none()
    }

    pub fn frequency(&self) -> f64 {
        self.n as f64 / self.shots as f64
    }

    /// n/N + δ, or 1 for a vacuous bound.
    pub fn upper_bound(&self) -> f64 {
        match self.delta {
            Some(d) => self.frequency() + d,
            None => 1.0,
        }
    }
}

/// Binary relative entropy D(x‖y) in nats, with 0·ln 0 = 0.
pub fn kl_bernoulli(x: f64, y: f64) -> f64 {
    kl_split(x, 1.0 - x, y, 1.0 - y)
}

// Complements are passed explicitly so that callers can compute 1−y without
// cancellation when y is close to 1.
fn kl_split(x: f64, one_minus_x: f64, y: f64, one_minus_y: f64) -> f64 {
    let head = if x > 0.0 { x * (x / y).ln() } else { 0.0 };
    let tail = if one_minus_x > 0.0 {
        one_minus_x * (one_minus_x / one_minus_y).ln()
    } else {
        0.0
    };
    head + tail
}

/// Solve D(n/N ‖ n/N + δ) = −ln(ε)/N for δ ∈ (0, 1 − n/N).
///
/// D is strictly increasing in δ on that interval and diverges at the right
/// end, so bisection always brackets the root. It runs until the bracket
/// can no longer be split in floating point.
pub fn solve_delta(n: u64, shots: u64, epsilon: f64) -> Result<DeltaBound> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("zero total shots".into()));
    }
    if n > shots {
        return Err(Error::InvalidArgument(format!(
            "outcome count {n} exceeds total shots {shots}"
        )));
    }
    let mut bound = DeltaBound {
        n,
        shots,
        epsilon,
        delta: None,
    };
    if n == shots {
        return Ok(bound);
    }
    let total = shots as f64;
    let target = -epsilon.ln() / total;
    if n == 0 {
        // D(0‖δ) = −ln(1−δ)  ⇒  δ = 1 − ε^{1/N}
        bound.delta = Some(-(epsilon.ln() / total).exp_m1());
        return Ok(bound);
    }
    let p = n as f64 / total;
    let q = (shots - n) as f64 / total;
    let (mut lo, mut hi) = (0.0_f64, q);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_split(p, q, p + mid, q - mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    bound.delta = Some(0.5 * (lo + hi));
    Ok(bound)
}

/// Residual D(p ‖ p + δ) + ln(ε)/N of a non-vacuous bound.
pub fn root_residual(bound: &DeltaBound) -> Option<f64> {
    let delta = bound.delta?;
    let total = bound.shots as f64;
    let p = bound.n as f64 / total;
    let q = (bound.shots - bound.n) as f64 / total;
    Some(kl_split(p, q, p + delta, q - delta) + bound.epsilon.ln() / total)
}

/// The constraint r·η(E) ≤ n/N + δ − η_0(E).
pub fn effect_halfspace(
    n: u64,
    shots: u64,
    effect: &EffectEmbedding,
    epsilon: f64,
) -> Result<HalfSpace> {
    let bound = solve_delta(n, shots, epsilon)?;
    Ok(HalfSpace::new(
        effect.eta.clone(),
        bound.upper_bound() - effect.eta0,
    ))
}

/// Number of effects in every POVM, grouped by input state.
///
/// State tomography uses a single group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolShape {
    pub groups: Vec<Vec<usize>>,
}

impl ProtocolShape {
    pub fn qst(effects_per_povm: Vec<usize>) -> Self {
        Self {
            groups: vec![effects_per_povm],
        }
    }

    pub fn qpt(effects_per_povm: Vec<Vec<usize>>) -> Self {
        Self {
            groups: effects_per_povm,
        }
    }

    pub fn num_povms(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn num_effects(&self) -> usize {
        self.groups.iter().flatten().sum()
    }
}

/// Per-effect failure probabilities ε, nested as [input][POVM][effect].
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonAllocation {
    values: Vec<Vec<Vec<f64>>>,
}

impl EpsilonAllocation {
    pub fn qst(per_povm: Vec<Vec<f64>>) -> Result<Self> {
        Self::qpt(vec![per_povm])
    }

    pub fn qpt(values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        for (i, group) in values.iter().enumerate() {
            for (j, povm) in group.iter().enumerate() {
                if let Some(bad) = povm.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                    return Err(Error::InvalidArgument(format!(
                        "epsilon {bad} at input {i}, POVM {j} is outside (0, 1)"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn uniform(shape: &ProtocolShape, epsilon: f64) -> Result<Self> {
        Self::qpt(
            shape
                .groups
                .iter()
                .map(|g| g.iter().map(|&p| vec![epsilon; p]).collect())
                .collect(),
        )
    }

    pub fn shape(&self) -> ProtocolShape {
        ProtocolShape {
            groups: self
                .values
                .iter()
                .map(|g| g.iter().map(Vec::len).collect())
                .collect(),
        }
    }

    pub fn values(&self) -> &[Vec<Vec<f64>>] {
        &self.values
    }

    pub fn povm(&self, input: usize, povm: usize) -> &[f64] {
        &self.values[input][povm]
    }

    /// ∏ over POVMs of (1 − Σ ε over that POVM's effects).
    pub fn confidence_level(&self) -> Result<f64> {
        let mut level = 1.0;
        for (i, group) in self.values.iter().enumerate() {
            for (j, povm) in group.iter().enumerate() {
                let sum: f64 = povm.iter().sum();
                if sum >= 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "epsilons of input {i}, POVM {j} sum to {sum} >= 1"
                    )));
                }
                level *= 1.0 - sum;
            }
        }
        Ok(level)
    }

    /// The looser union-bound level 1 − Σ ε over every effect.
    pub fn legacy_confidence_level(&self) -> f64 {
        1.0 - self.values.iter().flatten().flatten().sum::<f64>()
    }
}

pub fn confidence_level_qst(per_povm: &[Vec<f64>]) -> Result<f64> {
    EpsilonAllocation::qst(per_povm.to_vec())?.confidence_level()
}

pub fn confidence_level_qpt(values: &[Vec<Vec<f64>>]) -> Result<f64> {
    EpsilonAllocation::qpt(values.to_vec())?.confidence_level()
}

/// Equal ε for every effect: the largest one whose product confidence level
/// is at least `target` (bisection on the monotone product).
pub fn uniform_allocation(shape: &ProtocolShape, target: f64) -> Result<EpsilonAllocation> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InfeasibleAllocation(format!(
            "target confidence {target} is outside (0, 1)"
        )));
    }
    let sizes: Vec<usize> = shape.groups.iter().flatten().copied().collect();
    let largest = sizes.iter().copied().max().unwrap_or(0);
    if largest == 0 {
        return Err(Error::InfeasibleAllocation(
            "protocol has no effects to allocate".into(),
        ));
    }
    let level = |eps: f64| -> f64 { sizes.iter().map(|&p| 1.0 - p as f64 * eps).product::<f64>() };
    let (mut lo, mut hi) = (0.0_f64, 1.0 / largest as f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if level(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // lo keeps level ≥ target; confirm with the allocation's own summation,
    // which may round differently from p·ε
    let mut eps = lo;
    loop {
        if eps <= 0.0 {
            return Err(Error::InfeasibleAllocation(format!(
                "target confidence {target} requires epsilon <= 0"
            )));
        }
        let alloc = EpsilonAllocation::uniform(shape, eps)?;
        if alloc.confidence_level()? >= target {
            return Ok(alloc);
        }
        eps = eps.next_down();
    }
}
