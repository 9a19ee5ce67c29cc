use super::{CMatrix, DensityMatrix, HermitianOperator, OPERATOR_TOL};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Choi state C = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|) of a channel, with the input factor
/// as the most significant tensor index.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    op: HermitianOperator,
}

impl ChoiMatrix {
    /// Validates positivity and Tr_out C = 𝟙_in within 1e-10.
    pub fn new(op: HermitianOperator, d_in: usize, d_out: usize) -> Result<Self> {
        if op.dim() != d_in * d_out {
            return Err(Error::DimensionMismatch {
                context: "Choi matrix",
                expected: d_in * d_out,
                found: op.dim(),
            });
        }
        let min_ev = op.eigenvalues()[0];
        if min_ev < -OPERATOR_TOL {
            return Err(Error::InvalidChoi(format!(
                "not positive semidefinite (eigenvalue {min_ev:e})"
            )));
        }
        let reduced = partial_trace_output(op.matrix(), d_in, d_out);
        let deviation = reduced
            .iter()
            .zip(CMatrix::identity(d_in, d_in).iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if deviation > OPERATOR_TOL {
            return Err(Error::InvalidChoi(format!(
                "partial trace over output differs from identity by {deviation:e}"
            )));
        }
        Ok(Self { d_in, d_out, op })
    }

    /// Builds the Choi matrix by applying `map` to every |i⟩⟨j|.
    pub fn from_map<F>(d_in: usize, d_out: usize, map: F) -> Result<Self>
    where
        F: Fn(&CMatrix) -> CMatrix,
    {
        let mut c = CMatrix::zeros(d_in * d_out, d_in * d_out);
        for i in 0..d_in {
            for j in 0..d_in {
                let mut unit = CMatrix::zeros(d_in, d_in);
                unit[(i, j)] = Complex64::new(1.0, 0.0);
                let image = map(&unit);
                if image.nrows() != d_out || image.ncols() != d_out {
                    return Err(Error::DimensionMismatch {
                        context: "channel output",
                        expected: d_out,
                        found: image.nrows(),
                    });
                }
                c.view_mut((i * d_out, j * d_out), (d_out, d_out))
                    .copy_from(&image);
            }
        }
        Self::new(HermitianOperator::new(c)?, d_in, d_out)
    }

    /// Channel ρ ↦ Σ_k K_k ρ K_k†.
    pub fn from_kraus(kraus: &[CMatrix], d_in: usize, d_out: usize) -> Result<Self> {
        for k in kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        Self::from_map(d_in, d_out, |rho| {
            kraus.iter().fold(CMatrix::zeros(d_out, d_out), |acc, k| {
                acc + k * rho * k.adjoint()
            })
        })
    }

    /// Choi matrix of ρ ↦ UρU†.
    pub fn unitary(u: &CMatrix) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::NotSquare {
                rows: u.nrows(),
                cols: u.ncols(),
            });
        }
        Self::from_kraus(std::slice::from_ref(u), u.ncols(), u.nrows())
    }

    pub fn identity_channel(dim: usize) -> Self {
        Self::unitary(&CMatrix::identity(dim, dim)).expect("identity channel is CPTP")
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    /// Φ[ρ] = Tr_in((ρᵀ ⊗ 𝟙_out) C).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.d_in {
            return Err(Error::DimensionMismatch {
                context: "channel input",
                expected: self.d_in,
                found: rho.dim(),
            });
        }
        let out = self.apply_raw(rho.matrix());
        DensityMatrix::new(HermitianOperator::new(out)?)
    }

    pub(crate) fn apply_raw(&self, rho: &CMatrix) -> CMatrix {
        let (d_in, d_out) = (self.d_in, self.d_out);
        let c = self.op.matrix();
        let mut out = CMatrix::zeros(d_out, d_out);
        for a in 0..d_in {
            for b in 0..d_in {
                let weight = rho[(b, a)];
                if weight == Complex64::new(0.0, 0.0) {
                    continue;
                }
                out += c.view((b * d_out, a * d_out), (d_out, d_out)) * weight;
            }
        }
        out
    }
}

/// Tr_out of an operator on in ⊗ out.
pub(crate) fn partial_trace_output(c: &CMatrix, d_in: usize, d_out: usize) -> CMatrix {
    CMatrix::from_fn(d_in, d_in, |a, b| {
        (0..d_out).map(|k| c[(a * d_out + k, b * d_out + k)]).sum()
    })
}
