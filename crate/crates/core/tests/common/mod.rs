//! Test-only generators and independent oracles.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use polytomo::operators::{CMatrix, ChoiMatrix, DensityMatrix, HermitianOperator};
use polytomo::polytope::HalfSpace;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Ginibre-distributed mixed state of full rank.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(m / tr).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, dim, dim);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5)).unwrap()
}

/// (A)^{-1/2} for a positive definite Hermitian A.
fn inverse_sqrt(a: &CMatrix) -> CMatrix {
    let eig = a.clone().symmetric_eigen();
    let d = eig.eigenvalues.map(|x| Complex64::new(1.0 / x.sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// Kraus operators of a random CPTP map from a random isometry.
///
/// The rank is raised to ⌈d_in/d_out⌉ when needed, since a smaller one
/// admits no isometry.
pub fn random_kraus(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize, rank: usize) -> Vec<CMatrix> {
    let rank = rank.max(d_in.div_ceil(d_out));
    let v = gaussian_matrix(rng, rank * d_out, d_in);
    let w = &v * inverse_sqrt(&(v.adjoint() * &v));
    (0..rank)
        .map(|k| w.rows(k * d_out, d_out).into_owned())
        .collect()
}

pub fn random_channel(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize) -> ChoiMatrix {
    let rank = rng.random_range(1..=3);
    ChoiMatrix::from_kraus(&random_kraus(rng, d_in, d_out, rank), d_in, d_out).unwrap()
}

/// Apply Kraus operators directly, as an oracle for Choi-based application.
pub fn apply_kraus(kraus: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let d = kraus[0].nrows();
    kraus
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint())
}

fn random_orthogonal(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// Random bounded polytope with at most `max_constraints` half-spaces.
///
/// The first dim+1 normals are a rotated, positively rescaled copy of
/// {e_1, …, e_d, −Σe_i}, which positively spans ℝ^d; with positive offsets
/// around a random centre the region is bounded and nonempty.
pub fn random_bounded_polytope(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_constraints: usize,
) -> Vec<HalfSpace> {
    let rot = random_orthogonal(rng, dim);
    let centre = DVector::from_fn(dim, |_, _| rng.random_range(-2.0..2.0));
    let mut normals: Vec<DVector<f64>> = (0..dim)
        .map(|i| {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            e
        })
        .collect();
    normals.push(DVector::from_element(dim, -1.0));
    let extra = rng.random_range(0..=(max_constraints - dim - 1));
    for _ in 0..extra {
        normals.push(DVector::from_fn(dim, |_, _| rng.sample(StandardNormal)));
    }
    normals
        .into_iter()
        .map(|n| {
            let n = &rot * n * rng.random_range(0.5..2.0);
            let offset = rng.random_range(0.2..2.0) + n.dot(&centre);
            HalfSpace::new(n.iter().copied().collect(), offset)
        })
        .collect()
}

/// Brute-force LP maximum: enumerate all vertices from dim-subsets of
/// constraints, keep the feasible ones, take the best objective value.
pub fn vertex_enumeration_max(constraints: &[HalfSpace], objective: &[f64]) -> Option<f64> {
    let dim = objective.len();
    let mut best: Option<f64> = None;
    let m = constraints.len();
    let mut subset: Vec<usize> = (0..dim).collect();
    loop {
        let a = DMatrix::from_fn(dim, dim, |r, c| constraints[subset[r]].normal[c]);
        let b = DVector::from_fn(dim, |r, _| constraints[subset[r]].offset);
        if let Some(x) = a.lu().solve(&b) {
            let x: Vec<f64> = x.iter().copied().collect();
            if x.iter().all(|v| v.is_finite()) && constraints.iter().all(|h| h.slack(&x) >= -1e-9) {
                let v: f64 = objective.iter().zip(&x).map(|(a, b)| a * b).sum();
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // next combination
        let mut i = dim;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < m - dim + i {
                subset[i] += 1;
                for j in (i + 1)..dim {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Axis-aligned bounding box from the enumerated vertices.
pub fn bounding_box(constraints: &[HalfSpace], dim: usize) -> Vec<(f64, f64)> {
    (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            let hi = vertex_enumeration_max(constraints, &e).unwrap();
            e[k] = -1.0;
            let lo = -vertex_enumeration_max(constraints, &e).unwrap();
            (lo, hi)
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
