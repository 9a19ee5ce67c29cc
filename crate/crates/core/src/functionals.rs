//! Affine functionals of states and Choi matrices, and confidence intervals
//! obtained by optimizing them over a confidence polytope.

use crate::error::{Error, Result};
use crate::linprog::{solve_constraints, LpStatus, Sense};
use crate::operators::{
    dot_product, embed_effect, embed_hermitian_as_effect, embed_input_state, trace_of_product,
    BasisSet, CVector, ChoiMatrix, DensityMatrix, Effect, HermitianOperator,
};
use crate::polytope::Polyhedron;
use serde::{Deserialize, Serialize};

/// φ(x) = coeffs·x + offset on an embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunctional {
    pub coeffs: Vec<f64>,
    pub offset: f64,
    pub label: String,
}

impl AffineFunctional {
    pub fn new(coeffs: Vec<f64>, offset: f64, label: impl Into<String>) -> Self {
        Self {
            coeffs,
            offset,
            label: label.into(),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(vec![0.0; dim], value, "constant")
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch {
                context: "functional evaluation",
                expected: self.coeffs.len(),
                found: point.len(),
            });
        }
        Ok(dot_product(&self.coeffs, point) + self.offset)
    }
}

/// [lo, hi] holding with probability at least `confidence_level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub confidence_level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity_to_pure(psi: &CVector, basis: &BasisSet) -> Result<AffineFunctional> {
    let projector = DensityMatrix::pure(psi)?;
    let emb = embed_hermitian_as_effect(projector.op(), basis)?;
    Ok(AffineFunctional::new(
        emb.eta,
        emb.eta0,
        "fidelity to pure state",
    ))
}

/// Tr(ρO).
pub fn observable_mean(
    observable: &HermitianOperator,
    basis: &BasisSet,
) -> Result<AffineFunctional> {
    let emb = embed_hermitian_as_effect(observable, basis)?;
    Ok(AffineFunctional::new(emb.eta, emb.eta0, "observable mean"))
}

/// Tr(ρE).
pub fn outcome_probability(effect: &Effect, basis: &BasisSet) -> Result<AffineFunctional> {
    let emb = embed_effect(effect, basis)?;
    Ok(AffineFunctional::new(
        emb.eta,
        emb.eta0,
        "outcome probability",
    ))
}

/// Tr(C·G) as an affine function of the Choi coordinates c.
///
/// Expanding C in {σ^in_j ⊗ σ^out_i} and using Tr_out C = 𝟙 for the
/// identity row gives coefficient Tr(G σ^in_j ⊗ σ^out_i)/d_out on c_ij and
/// constant Tr(G)/d_out.
pub fn choi_trace_functional(
    weight: &HermitianOperator,
    basis_in: &BasisSet,
    basis_out: &BasisSet,
    label: impl Into<String>,
) -> Result<AffineFunctional> {
    let d = basis_in.dim() * basis_out.dim();
    if weight.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "Choi functional weight",
            expected: d,
            found: weight.dim(),
        });
    }
    let d_out = basis_out.dim() as f64;
    let mut coeffs = Vec::with_capacity((basis_out.full_len() - 1) * basis_in.full_len());
    for i in 1..basis_out.full_len() {
        for j in 0..basis_in.full_len() {
            let product = basis_in
                .element(j)
                .matrix()
                .kronecker(basis_out.element(i).matrix());
            coeffs.push(trace_of_product(weight.matrix(), &product).re / d_out);
        }
    }
    Ok(AffineFunctional::new(coeffs, weight.trace() / d_out, label))
}

/// Tr(C·C_U)/d_in², the process fidelity with a unitary channel.
pub fn process_fidelity_to_unitary(
    target: &ChoiMatrix,
    basis_in: &BasisSet,
    basis_out: &BasisSet,
) -> Result<AffineFunctional> {
    let d_in = target.d_in() as f64;
    // a unitary Choi matrix is d_in times a rank-one projector
    let ev = target.op().eigenvalues();
    let top = ev[ev.len() - 1];
    let rest: f64 = ev[..ev.len() - 1].iter().map(|x| x.abs()).sum();
    if (top - d_in).abs() > 1e-8 || rest > 1e-8 {
        return Err(Error::InvalidChoi(
            "target is not the Choi matrix of a unitary channel".into(),
        ));
    }
    choi_trace_functional(
        &target.op().scale(1.0 / (d_in * d_in)),
        basis_in,
        basis_out,
        "process fidelity",
    )
}

/// Tr(O·Φ[ρ_in]) = Tr((ρ_inᵀ ⊗ O)·C).
pub fn output_observable(
    input: &DensityMatrix,
    observable: &HermitianOperator,
    basis_in: &BasisSet,
    basis_out: &BasisSet,
) -> Result<AffineFunctional> {
    let rbar = embed_input_state(input, basis_in)?;
    let emb = embed_hermitian_as_effect(observable, basis_out)?;
    Ok(AffineFunctional::new(
        crate::polytope::qpt_normal(&emb.eta, &rbar),
        emb.eta0,
        "output observable mean",
    ))
}

/// Tr(E·Φ[ρ_in]).
pub fn output_probability(
    input: &DensityMatrix,
    effect: &Effect,
    basis_in: &BasisSet,
    basis_out: &BasisSet,
) -> Result<AffineFunctional> {
    let mut f = output_observable(input, effect.op(), basis_in, basis_out)?;
    f.label = "output outcome probability".into();
    Ok(f)
}

/// Minimize and maximize the functional over the polytope.
///
/// The upper end may exceed the physical range because the polytope is a
/// relaxation; it is reported as computed.
pub fn interval(functional: &AffineFunctional, poly: &Polyhedron) -> Result<ConfidenceInterval> {
    if functional.coeffs.len() != poly.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "functional vs polytope",
            expected: poly.ambient_dim(),
            found: functional.coeffs.len(),
        });
    }
    if !poly.is_bounded() {
        return Err(Error::Unbounded(format!(
            "measurement normals have rank {} < {}; the protocol is not informationally complete",
            poly.normal_rank(),
            poly.ambient_dim()
        )));
    }
    let mut ends = [0.0; 2];
    for (slot, sense) in ends.iter_mut().zip([Sense::Minimize, Sense::Maximize]) {
        let sol = solve_constraints(&functional.coeffs, poly.halfspaces(), sense)?;
        match sol.status {
            LpStatus::Optimal => *slot = sol.value + functional.offset,
            LpStatus::Unbounded => {
                return Err(Error::Unbounded(
                    "functional is unbounded over the region; the protocol is not informationally complete".into(),
                ))
            }
            LpStatus::Infeasible => {
                return Err(Error::EmptyRegion(
                    "no point satisfies every measurement constraint".into(),
                ))
            }
        }
    }
    Ok(ConfidenceInterval {
        lo: ends[0],
        hi: ends[1],
        confidence_level: poly.confidence_level(),
    })
}
