//! Real-vector coordinates of states, effects and Choi matrices in a
//! [`BasisSet`].

use super::{trace_of_product, BasisSet, ChoiMatrix, DensityMatrix, Effect, HermitianOperator};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// r_i = Tr(σ_i ρ), i = 1 … d²−1.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVectorEmbedding(pub Vec<f64>);

impl StateVectorEmbedding {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// η_i = Tr(σ_i E)/d and η_0 = Tr(E)/d, so that Tr(ρE) = r·η + η_0.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectEmbedding {
    pub eta: Vec<f64>,
    pub eta0: f64,
}

impl EffectEmbedding {
    /// r·η + η_0.
    pub fn probability(&self, r: &[f64]) -> f64 {
        dot(&self.eta, r) + self.eta0
    }
}

/// r̄_i = Tr(σ_i ρᵀ), i = 0 … d²−1; r̄_0 = 1 for every state.
#[derive(Debug, Clone, PartialEq)]
pub struct InputStateEmbedding(pub Vec<f64>);

impl InputStateEmbedding {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// The (d_out²−1) × d_in² real matrix C_ij = Tr(C σ^in_j ⊗ σ^out_i)/d_in,
/// stored row-major. Row r corresponds to σ^out_{r+1}; the identity row is
/// omitted because trace preservation fixes it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiEmbedding {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ChoiEmbedding {
    pub fn from_flat(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "Choi embedding",
                expected: rows * cols,
                found: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major flattening c, index (i−1)·d_in² + j.
    pub fn c(&self) -> &[f64] {
        &self.values
    }

    /// C_{i,j} with i = 1 … d_out²−1 and j = 0 … d_in²−1.
    pub fn entry(&self, out_index: usize, in_index: usize) -> f64 {
        assert!(out_index >= 1 && out_index <= self.rows && in_index < self.cols);
        self.values[(out_index - 1) * self.cols + in_index]
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.values)
    }

    /// C · r̄, the output-state embedding predicted for a given input.
    pub fn act_on(&self, rbar: &InputStateEmbedding) -> Result<Vec<f64>> {
        if rbar.0.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "Choi embedding action",
                expected: self.cols,
                found: rbar.0.len(),
            });
        }
        Ok(self
            .values
            .chunks(self.cols)
            .map(|row| dot(row, &rbar.0))
            .collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn traces_against(basis: &BasisSet, op: &HermitianOperator, skip_identity: bool) -> Vec<f64> {
    let start = usize::from(skip_identity);
    (start..basis.full_len())
        .map(|i| trace_of_product(basis.element(i).matrix(), op.matrix()).re)
        .collect()
}

pub fn embed_state(rho: &DensityMatrix, basis: &BasisSet) -> Result<StateVectorEmbedding> {
    basis.check_dim("state embedding", rho.dim())?;
    Ok(StateVectorEmbedding(traces_against(basis, rho.op(), true)))
}

pub fn embed_effect(effect: &Effect, basis: &BasisSet) -> Result<EffectEmbedding> {
    embed_hermitian_as_effect(effect.op(), basis)
}

/// Same coordinates as [`embed_effect`] for an arbitrary Hermitian operator
/// (observables use this).
pub(crate) fn embed_hermitian_as_effect(
    op: &HermitianOperator,
    basis: &BasisSet,
) -> Result<EffectEmbedding> {
    basis.check_dim("effect embedding", op.dim())?;
    let d = basis.dim() as f64;
    let eta = traces_against(basis, op, true)
        .into_iter()
        .map(|t| t / d)
        .collect();
    Ok(EffectEmbedding {
        eta,
        eta0: op.trace() / d,
    })
}

pub fn embed_input_state(rho: &DensityMatrix, basis: &BasisSet) -> Result<InputStateEmbedding> {
    basis.check_dim("input state embedding", rho.dim())?;
    Ok(InputStateEmbedding(traces_against(
        basis,
        &rho.op().transpose(),
        false,
    )))
}

pub fn embed_choi(
    choi: &ChoiMatrix,
    basis_in: &BasisSet,
    basis_out: &BasisSet,
) -> Result<ChoiEmbedding> {
    basis_in.check_dim("Choi embedding (input)", choi.d_in())?;
    basis_out.check_dim("Choi embedding (output)", choi.d_out())?;
    let rows = basis_out.full_len() - 1;
    let cols = basis_in.full_len();
    let d_in = choi.d_in() as f64;
    let mut values = Vec::with_capacity(rows * cols);
    for i in 1..=rows {
        for j in 0..cols {
            let product = basis_in
                .element(j)
                .matrix()
                .kronecker(basis_out.element(i).matrix());
            values.push(trace_of_product(choi.matrix(), &product).re / d_in);
        }
    }
    Ok(ChoiEmbedding { rows, cols, values })
}

/// ρ = (𝟙 + Σ r_i σ_i)/d. Positivity is not checked.
pub fn unembed_state(r: &[f64], basis: &BasisSet) -> Result<HermitianOperator> {
    if r.len() != basis.sigmas().len() {
        return Err(Error::DimensionMismatch {
            context: "state unembedding",
            expected: basis.sigmas().len(),
            found: r.len(),
        });
    }
    let d = basis.dim();
    let mut mat = super::CMatrix::identity(d, d);
    for (coef, sigma) in r.iter().zip(basis.sigmas()) {
        mat += sigma.matrix() * Complex64::new(*coef, 0.0);
    }
    HermitianOperator::new(mat.unscale(d as f64))
}

/// C = (𝟙 + Σ_ij C_ij σ^in_j ⊗ σ^out_i)/d_out. Positivity is not checked.
pub fn unembed_choi(
    embedding: &ChoiEmbedding,
    basis_in: &BasisSet,
    basis_out: &BasisSet,
) -> Result<HermitianOperator> {
    if embedding.rows != basis_out.full_len() - 1 || embedding.cols != basis_in.full_len() {
        return Err(Error::Shape(format!(
            "Choi embedding is {}x{}, bases need {}x{}",
            embedding.rows,
            embedding.cols,
            basis_out.full_len() - 1,
            basis_in.full_len()
        )));
    }
    let d = basis_in.dim() * basis_out.dim();
    let mut mat = super::CMatrix::identity(d, d);
    for i in 1..=embedding.rows {
        for j in 0..embedding.cols {
            let coef = embedding.entry(i, j);
            if coef == 0.0 {
                continue;
            }
            let product = basis_in
                .element(j)
                .matrix()
                .kronecker(basis_out.element(i).matrix());
            mat += product * Complex64::new(coef, 0.0);
        }
    }
    HermitianOperator::new(mat.unscale(basis_out.dim() as f64))
}
