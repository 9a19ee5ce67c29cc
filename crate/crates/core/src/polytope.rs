//! Confidence polyhedra in the real embedding space.
//!
//! A QST polytope lives in ℝ^{d²−1} (state coordinates r), a QPT polytope
//! in ℝ^{d_in²(d_out²−1)} (the flattened Choi coordinates c). Positivity
//! of the underlying operator is dropped, which only enlarges the region.

use crate::clopper_pearson::{effect_halfspace, EpsilonAllocation, ProtocolShape};
use crate::error::{Error, Result};
use crate::linprog::{self, LpStatus, Sense};
use crate::operators::{
    embed_effect, embed_input_state, BasisSet, DensityMatrix, InputStateEmbedding, Povm,
};
use nalgebra::DMatrix;
use std::fmt;

/// Absolute slack allowed when testing membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// The constraint normal·x ≤ offset.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// offset − normal·x; negative when violated.
    pub fn slack(&self, point: &[f64]) -> f64 {
        self.offset - crate::operators::dot_product(&self.normal, point)
    }
}

/// Which measurement record produced a half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Constraint(usize),
    Qst {
        povm: usize,
        effect: usize,
    },
    Qpt {
        input: usize,
        povm: usize,
        effect: usize,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Constraint(i) => write!(f, "constraint {i}"),
            Provenance::Qst { povm, effect } => write!(f, "POVM {povm}, effect {effect}"),
            Provenance::Qpt {
                input,
                povm,
                effect,
            } => write!(f, "input {input}, POVM {povm}, effect {effect}"),
        }
    }
}

/// Outcome of a membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Inside,
    Outside {
        index: usize,
        provenance: Provenance,
        /// normal·x − offset, strictly above [`MEMBERSHIP_TOL`].
        excess: f64,
    },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside)
    }
}

/// Intersection of half-spaces together with its confidence level.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    ambient_dim: usize,
    halfspaces: Vec<HalfSpace>,
    provenance: Vec<Provenance>,
    confidence_level: f64,
}

impl Polyhedron {
    pub fn new(
        ambient_dim: usize,
        halfspaces: Vec<HalfSpace>,
        confidence_level: f64,
    ) -> Result<Self> {
        let provenance = (0..halfspaces.len()).map(Provenance::Constraint).collect();
        Self::with_provenance(ambient_dim, halfspaces, provenance, confidence_level)
    }

    fn with_provenance(
        ambient_dim: usize,
        halfspaces: Vec<HalfSpace>,
        provenance: Vec<Provenance>,
        confidence_level: f64,
    ) -> Result<Self> {
        if let Some(h) = halfspaces.iter().find(|h| h.normal.len() != ambient_dim) {
            return Err(Error::DimensionMismatch {
                context: "half-space normal",
                expected: ambient_dim,
                found: h.normal.len(),
            });
        }
        if !(confidence_level > 0.0 && confidence_level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence level {confidence_level} is outside (0, 1)"
            )));
        }
        Ok(Self {
            ambient_dim,
            halfspaces,
            provenance,
            confidence_level,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn confidence_level(&self) -> f64 {
        self.confidence_level
    }

    /// Membership with the first violated constraint on failure.
    pub fn check(&self, point: &[f64]) -> Result<Membership> {
        if point.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                context: "membership point",
                expected: self.ambient_dim,
                found: point.len(),
            });
        }
        for (index, h) in self.halfspaces.iter().enumerate() {
            let slack = h.slack(point);
            if slack < -MEMBERSHIP_TOL {
                return Ok(Membership::Outside {
                    index,
                    provenance: self.provenance[index],
                    excess: -slack,
                });
            }
        }
        Ok(Membership::Inside)
    }

    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        Ok(self.check(point)?.is_inside())
    }

    /// Numerical rank of the matrix whose rows are the half-space normals.
    pub fn normal_rank(&self) -> usize {
        if self.halfspaces.is_empty() || self.ambient_dim == 0 {
            return 0;
        }
        let rows = self.halfspaces.len();
        let flat: Vec<f64> = self
            .halfspaces
            .iter()
            .flat_map(|h| h.normal.iter().copied())
            .collect();
        let a = DMatrix::from_row_slice(rows, self.ambient_dim, &flat);
        let sv = a.singular_values();
        let largest = sv.iter().copied().fold(0.0, f64::max);
        if largest == 0.0 {
            return 0;
        }
        let threshold = self.ambient_dim as f64 * largest * 1e-10;
        sv.iter().filter(|&&s| s > threshold).count()
    }

    /// Boundedness via full column rank of the normal matrix.
    ///
    /// For polyhedra assembled from complete POVMs every normal direction
    /// appears with both signs (the effect normals of one POVM sum to zero),
    /// so full rank is equivalent to boundedness. Use
    /// [`Polyhedron::is_bounded_lp`] for arbitrary constraint sets.
    pub fn is_bounded(&self) -> bool {
        self.normal_rank() == self.ambient_dim
    }

    /// Boundedness via linear programming on the recession cone
    /// {x : normal·x ≤ 0 for all half-spaces}: the cone is {0} iff no
    /// coordinate can be pushed off zero inside the unit box.
    pub fn is_bounded_lp(&self) -> Result<bool> {
        let m = self.ambient_dim;
        let mut cone: Vec<HalfSpace> = self
            .halfspaces
            .iter()
            .map(|h| HalfSpace::new(h.normal.clone(), 0.0))
            .collect();
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            cone.push(HalfSpace::new(e.clone(), 1.0));
            e[k] = -1.0;
            cone.push(HalfSpace::new(e, 1.0));
        }
        for k in 0..m {
            for sense in [Sense::Maximize, Sense::Minimize] {
                let mut objective = vec![0.0; m];
                objective[k] = 1.0;
                let sol = linprog::solve_constraints(&objective, &cone, sense)?;
                match sol.status {
                    LpStatus::Optimal if sol.value.abs() <= 1e-9 => {}
                    LpStatus::Optimal => return Ok(false),
                    other => {
                        return Err(Error::Numerical(format!(
                            "recession cone LP returned {other:?}"
                        )))
                    }
                }
            }
        }
        Ok(true)
    }
}

/// One POVM with its observed outcome counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub povm: Povm,
    pub counts: Vec<u64>,
}

impl Measurement {
    pub fn new(povm: Povm, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != povm.len() {
            return Err(Error::Shape(format!(
                "{} counts for a POVM with {} effects",
                counts.len(),
                povm.len()
            )));
        }
        Ok(Self { povm, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// State tomography record: POVMs and their counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QstDataset {
    basis: BasisSet,
    measurements: Vec<Measurement>,
}

impl QstDataset {
    pub fn new(basis: BasisSet, measurements: Vec<Measurement>) -> Result<Self> {
        for m in &measurements {
            if m.povm.dim() != basis.dim() {
                return Err(Error::DimensionMismatch {
                    context: "QST POVM",
                    expected: basis.dim(),
                    found: m.povm.dim(),
                });
            }
        }
        Ok(Self {
            basis,
            measurements,
        })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn shape(&self) -> ProtocolShape {
        ProtocolShape::qst(self.measurements.iter().map(|m| m.povm.len()).collect())
    }
}

/// Measurements performed on the channel output for one input state.
#[derive(Debug, Clone, PartialEq)]
pub struct QptSetting {
    pub input: DensityMatrix,
    pub measurements: Vec<Measurement>,
}

/// Process tomography record.
#[derive(Debug, Clone, PartialEq)]
pub struct QptDataset {
    basis_in: BasisSet,
    basis_out: BasisSet,
    settings: Vec<QptSetting>,
}

impl QptDataset {
    pub fn new(basis_in: BasisSet, basis_out: BasisSet, settings: Vec<QptSetting>) -> Result<Self> {
        for s in &settings {
            if s.input.dim() != basis_in.dim() {
                return Err(Error::DimensionMismatch {
                    context: "QPT input state",
                    expected: basis_in.dim(),
                    found: s.input.dim(),
                });
            }
            for m in &s.measurements {
                if m.povm.dim() != basis_out.dim() {
                    return Err(Error::DimensionMismatch {
                        context: "QPT output POVM",
                        expected: basis_out.dim(),
                        found: m.povm.dim(),
                    });
                }
            }
        }
        Ok(Self {
            basis_in,
            basis_out,
            settings,
        })
    }

    pub fn basis_in(&self) -> &BasisSet {
        &self.basis_in
    }

    pub fn basis_out(&self) -> &BasisSet {
        &self.basis_out
    }

    pub fn settings(&self) -> &[QptSetting] {
        &self.settings
    }

    pub fn shape(&self) -> ProtocolShape {
        ProtocolShape::qpt(
            self.settings
                .iter()
                .map(|s| s.measurements.iter().map(|m| m.povm.len()).collect())
                .collect(),
        )
    }

    /// d_in²·(d_out²−1).
    pub fn ambient_dim(&self) -> usize {
        self.basis_in.full_len() * (self.basis_out.full_len() - 1)
    }
}

fn check_shape(expected: &ProtocolShape, alloc: &EpsilonAllocation) -> Result<()> {
    let got = alloc.shape();
    if &got != expected {
        return Err(Error::Shape(format!(
            "allocation shape {:?} does not match protocol shape {:?}",
            got.groups, expected.groups
        )));
    }
    Ok(())
}

fn shots_of(m: &Measurement, label: impl Fn() -> String) -> Result<u64> {
    match m.total() {
        0 => Err(Error::InvalidArgument(format!(
            "zero total shots for {}",
            label()
        ))),
        n => Ok(n),
    }
}

fn check_zero_sum(normals: &[Vec<f64>], dim: usize, label: impl Fn() -> String) -> Result<()> {
    let Some(first) = normals.first() else {
        return Ok(());
    };
    let tol = 1e-10 * dim as f64;
    for k in 0..first.len() {
        let sum: f64 = normals.iter().map(|n| n[k]).sum();
        if sum.abs() > tol {
            return Err(Error::Numerical(format!(
                "effect normals of {} do not sum to zero (component {k}: {sum:e})",
                label()
            )));
        }
    }
    Ok(())
}

/// Intersection over all POVMs and effects of r·η(E) ≤ n/N + δ − η_0(E).
pub fn build_qst_polytope(data: &QstDataset, alloc: &EpsilonAllocation) -> Result<Polyhedron> {
    check_shape(&data.shape(), alloc)?;
    let basis = &data.basis;
    let dim = basis.sigmas().len();
    let mut halfspaces = Vec::new();
    let mut provenance = Vec::new();
    for (j, m) in data.measurements.iter().enumerate() {
        let shots = shots_of(m, || format!("POVM {j}"))?;
        let eps = alloc.povm(0, j);
        let mut normals = Vec::with_capacity(m.povm.len());
        for (k, (effect, &n)) in m.povm.effects().iter().zip(&m.counts).enumerate() {
            let emb = embed_effect(effect, basis)?;
            let h = effect_halfspace(n, shots, &emb, eps[k])?;
            normals.push(h.normal.clone());
            halfspaces.push(h);
            provenance.push(Provenance::Qst { povm: j, effect: k });
        }
        check_zero_sum(&normals, basis.dim(), || format!("POVM {j}"))?;
    }
    Polyhedron::with_provenance(dim, halfspaces, provenance, alloc.confidence_level()?)
}

/// Normal of the QPT constraint for one (input, effect) pair: η ⊗ r̄,
/// flattened with the output index most significant to match
/// [`ChoiEmbedding::c`](crate::operators::ChoiEmbedding::c).
pub fn qpt_normal(eta: &[f64], rbar: &InputStateEmbedding) -> Vec<f64> {
    eta.iter()
        .flat_map(|&e| rbar.as_slice().iter().map(move |&r| e * r))
        .collect()
}

/// Intersection over inputs, POVMs and effects of
/// c·(η(E) ⊗ r̄(ρ_in)) ≤ n/N + δ − η_0(E).
pub fn build_qpt_polytope(data: &QptDataset, alloc: &EpsilonAllocation) -> Result<Polyhedron> {
    check_shape(&data.shape(), alloc)?;
    let dim = data.ambient_dim();
    let mut halfspaces = Vec::new();
    let mut provenance = Vec::new();
    for (i, setting) in data.settings.iter().enumerate() {
        let rbar = embed_input_state(&setting.input, &data.basis_in)?;
        for (j, m) in setting.measurements.iter().enumerate() {
            let shots = shots_of(m, || format!("input {i}, POVM {j}"))?;
            let eps = alloc.povm(i, j);
            let mut normals = Vec::with_capacity(m.povm.len());
            for (k, (effect, &n)) in m.povm.effects().iter().zip(&m.counts).enumerate() {
                let emb = embed_effect(effect, &data.basis_out)?;
                let h = effect_halfspace(n, shots, &emb, eps[k])?;
                let normal = qpt_normal(&h.normal, &rbar);
                normals.push(normal.clone());
                halfspaces.push(HalfSpace::new(normal, h.offset));
                provenance.push(Provenance::Qpt {
                    input: i,
                    povm: j,
                    effect: k,
                });
            }
            check_zero_sum(&normals, data.basis_out.dim(), || {
                format!("input {i}, POVM {j}")
            })?;
        }
    }
    Polyhedron::with_provenance(dim, halfspaces, provenance, alloc.confidence_level()?)
}
