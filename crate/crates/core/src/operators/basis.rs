use super::{CMatrix, HermitianOperator};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Orthogonal Hermitian basis {σ_0 = 𝟙, σ_1, …, σ_{d²−1}} with Tr(σ_i σ_j) = d·δ_ij.
///
/// Only the traceless elements are stored; index 0 always refers to the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    dim: usize,
    sigmas: Vec<HermitianOperator>,
    identity: HermitianOperator,
}

fn single_qubit_paulis() -> [CMatrix; 4] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

impl BasisSet {
    /// All non-identity N-qubit Pauli strings, lexicographic in (I, X, Y, Z)
    /// with the first qubit as the most significant letter.
    pub fn pauli(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument(
                "Pauli basis needs at least one qubit".into(),
            ));
        }
        let singles = single_qubit_paulis();
        let count = 4usize.pow(num_qubits as u32);
        let mut sigmas = Vec::with_capacity(count - 1);
        for index in 1..count {
            let mut mat = CMatrix::identity(1, 1);
            for q in (0..num_qubits).rev() {
                let letter = (index / 4usize.pow(q as u32)) % 4;
                mat = mat.kronecker(&singles[letter]);
            }
            sigmas.push(HermitianOperator { mat });
        }
        let dim = 1usize << num_qubits;
        Ok(Self {
            dim,
            sigmas,
            identity: HermitianOperator::identity(dim),
        })
    }

    /// Generalized Gell-Mann matrices rescaled so that Tr(σ_i σ_j) = d·δ_ij.
    ///
    /// Order: symmetric off-diagonal pairs, antisymmetric pairs (both over
    /// j < k, row-major), then the d−1 diagonal elements.
    pub fn gell_mann(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "Gell-Mann basis needs dimension >= 2, got {dim}"
            )));
        }
        let scale = (dim as f64 / 2.0).sqrt();
        let mut sigmas = Vec::with_capacity(dim * dim - 1);
        for j in 0..dim {
            for k in (j + 1)..dim {
                let mut m = CMatrix::zeros(dim, dim);
                m[(j, k)] = Complex64::new(scale, 0.0);
                m[(k, j)] = Complex64::new(scale, 0.0);
                sigmas.push(HermitianOperator { mat: m });
            }
        }
        for j in 0..dim {
            for k in (j + 1)..dim {
                let mut m = CMatrix::zeros(dim, dim);
                m[(j, k)] = Complex64::new(0.0, -scale);
                m[(k, j)] = Complex64::new(0.0, scale);
                sigmas.push(HermitianOperator { mat: m });
            }
        }
        for l in 1..dim {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt() * scale;
            let mut m = CMatrix::zeros(dim, dim);
            for j in 0..l {
                m[(j, j)] = Complex64::new(norm, 0.0);
            }
            m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
            sigmas.push(HermitianOperator { mat: m });
        }
        Ok(Self {
            dim,
            sigmas,
            identity: HermitianOperator::identity(dim),
        })
    }

    /// Pauli basis for powers of two, Gell-Mann otherwise.
    pub fn for_dim(dim: usize) -> Result<Self> {
        if dim >= 2 && dim.is_power_of_two() {
            Self::pauli(dim.trailing_zeros() as usize)
        } else {
            Self::gell_mann(dim)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The d²−1 traceless elements σ_1 … σ_{d²−1}.
    pub fn sigmas(&self) -> &[HermitianOperator] {
        &self.sigmas
    }

    /// σ_i including the identity at index 0.
    pub fn element(&self, index: usize) -> &HermitianOperator {
        if index == 0 {
            &self.identity
        } else {
            &self.sigmas[index - 1]
        }
    }

    /// Number of elements including the identity, d².
    pub fn full_len(&self) -> usize {
        self.sigmas.len() + 1
    }

    /// Largest deviation from Tr(σ_i σ_j) = d·δ_ij and Tr(σ_i) = 0 (i ≥ 1).
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.full_len();
        let d = self.dim as f64;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let target = if i == j { d } else { 0.0 };
                let got =
                    super::trace_of_product(self.element(i).matrix(), self.element(j).matrix());
                worst = worst.max((got - Complex64::new(target, 0.0)).norm());
            }
            if i > 0 {
                worst = worst.max(self.element(i).matrix().trace().norm());
            }
        }
        worst
    }

    pub(crate) fn check_dim(&self, context: &'static str, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }
}
