//! Finite-dimensional Hermitian operator algebra.
//!
//! All operators are dense complex matrices. Validation happens once, at
//! construction; afterwards the wrappers are immutable, so holding a
//! [`DensityMatrix`] or [`Povm`] means its invariants have been checked.

mod basis;
mod choi;
mod embedding;

pub use basis::BasisSet;
pub use choi::ChoiMatrix;
pub(crate) use embedding::{dot as dot_product, embed_hermitian_as_effect};
pub use embedding::{
    embed_choi, embed_effect, embed_input_state, embed_state, unembed_choi, unembed_state,
    ChoiEmbedding, EffectEmbedding, InputStateEmbedding, StateVectorEmbedding,
};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute entrywise tolerance for Hermiticity, trace and completeness checks.
pub const OPERATOR_TOL: f64 = 1e-10;

/// Tr(AB) for square matrices of equal size, without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Kronecker product with the left factor as the most significant index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn max_entry_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// A Hermitian operator on a `dim`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity within [`OPERATOR_TOL`] and stores the exactly
    /// Hermitian part `(A + A†)/2`.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let adj = mat.adjoint();
        let deviation = max_entry_deviation(&mat, &adj);
        if deviation > OPERATOR_TOL || mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotHermitian { deviation });
        }
        let mat = (&mat + &adj).scale(0.5);
        Ok(Self { mat })
    }

    pub fn from_real(mat: DMatrix<f64>) -> Result<Self> {
        Self::new(mat.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    /// |ψ⟩⟨ψ| for an arbitrary (not necessarily normalized) vector.
    pub fn outer(psi: &CVector) -> Self {
        Self {
            mat: psi * psi.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Re Tr(self · other); the imaginary part vanishes for Hermitian pairs.
    pub fn trace_with(&self, other: &HermitianOperator) -> f64 {
        trace_of_product(&self.mat, &other.mat).re
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose(),
        }
    }

    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self {
            mat: kron(&self.mat, &other.mat),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: self.mat.scale(factor),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_deviation_from(&self, other: &HermitianOperator) -> f64 {
        max_entry_deviation(&self.mat, &other.mat)
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > OPERATOR_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min_ev = op.eigenvalues()[0];
        if min_ev < -OPERATOR_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(mat)?)
    }

    /// Projector onto a normalized pure state.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDensity(format!(
                "state vector has norm {norm}, expected 1"
            )));
        }
        Self::new(HermitianOperator::outer(psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn purity(&self) -> f64 {
        self.op.trace_with(&self.op)
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            op: self.op.kron(&other.op),
        }
    }
}

/// Operator with spectrum in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: HermitianOperator,
}

impl Effect {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let ev = op.eigenvalues();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < -OPERATOR_TOL || hi > 1.0 + OPERATOR_TOL {
            return Err(Error::InvalidEffect(format!(
                "spectrum [{lo}, {hi}] not within [0, 1]"
            )));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(mat)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }
}

/// Ordered list of effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Effect>,
}

impl Povm {
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        if effects.len() < 2 {
            return Err(Error::InvalidPovm(format!(
                "need at least 2 effects, got {}",
                effects.len()
            )));
        }
        let dim = effects[0].dim();
        if let Some(bad) = effects.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "POVM effects",
                expected: dim,
                found: bad.dim(),
            });
        }
        let total = effects
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, e| acc + e.matrix());
        let deviation = max_entry_deviation(&total, &CMatrix::identity(dim, dim));
        if deviation > OPERATOR_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {deviation:e}"
            )));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }
}
