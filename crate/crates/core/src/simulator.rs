//! Synthetic tomography experiments: GHZ states, depolarizing channels,
//! tetrahedral input states, Pauli readout POVMs and multinomial counts.
//!
//! Every (input, POVM) setting draws its counts from its own ChaCha8 stream
//! seeded by [`derive_seed`]`(seed, setting_index)`, so counts for a given
//! setting do not depend on how many other settings were simulated.

use crate::error::{Error, Result};
use crate::operators::{BasisSet, CMatrix, CVector, ChoiMatrix, DensityMatrix, Effect, Povm};
use crate::polytope::{Measurement, QptDataset, QptSetting, QstDataset};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Largest qubit counts simulated without an explicit override.
pub const MAX_QST_QUBITS: usize = 3;
pub const MAX_QPT_QUBITS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for stream `index` of an experiment seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    #[default]
    Multinomial,
    /// Counts are the Born probabilities times the shot number, rounded by
    /// largest remainder so they still sum to the shot number.
    ExactFrequencies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomographyKind {
    Qst,
    Qpt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementProtocol {
    pub kind: TomographyKind,
    /// Channel inputs; empty for state tomography.
    pub inputs: Vec<DensityMatrix>,
    pub povms: Vec<Povm>,
    pub shots_per_setting: u64,
}

impl MeasurementProtocol {
    pub fn qst(povms: Vec<Povm>, shots_per_setting: u64) -> Result<Self> {
        check_same_dim(&povms)?;
        Ok(Self {
            kind: TomographyKind::Qst,
            inputs: Vec::new(),
            povms,
            shots_per_setting,
        })
    }

    pub fn qpt(
        inputs: Vec<DensityMatrix>,
        povms: Vec<Povm>,
        shots_per_setting: u64,
    ) -> Result<Self> {
        check_same_dim(&povms)?;
        if let Some(first) = inputs.first() {
            if let Some(bad) = inputs.iter().find(|r| r.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    context: "QPT inputs",
                    expected: first.dim(),
                    found: bad.dim(),
                });
            }
        }
        Ok(Self {
            kind: TomographyKind::Qpt,
            inputs,
            povms,
            shots_per_setting,
        })
    }

    /// 3^N Pauli readouts on an N-qubit state.
    pub fn pauli_qst(
        num_qubits: usize,
        shots: u64,
        readout: Option<&ReadoutError>,
        allow_large: bool,
    ) -> Result<Self> {
        check_cap(num_qubits, MAX_QST_QUBITS, allow_large)?;
        Self::qst(pauli_povms_with_readout(num_qubits, readout)?, shots)
    }

    /// 4^N tetrahedral inputs × 3^N Pauli readouts on an N-qubit channel.
    pub fn pauli_qpt(
        num_qubits: usize,
        shots: u64,
        readout: Option<&ReadoutError>,
        allow_large: bool,
    ) -> Result<Self> {
        check_cap(num_qubits, MAX_QPT_QUBITS, allow_large)?;
        Self::qpt(
            tetrahedron_inputs(num_qubits)?,
            pauli_povms_with_readout(num_qubits, readout)?,
            shots,
        )
    }
}

fn check_cap(num_qubits: usize, cap: usize, allow_large: bool) -> Result<()> {
    if num_qubits > cap && !allow_large {
        return Err(Error::InvalidArgument(format!(
            "{num_qubits} qubits exceeds the default limit of {cap}; pass the override to proceed"
        )));
    }
    Ok(())
}

fn check_same_dim(povms: &[Povm]) -> Result<()> {
    if let Some(first) = povms.first() {
        if let Some(bad) = povms.iter().find(|p| p.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                context: "protocol POVMs",
                expected: first.dim(),
                found: bad.dim(),
            });
        }
    }
    Ok(())
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    Ok(())
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// (|0…0⟩ + |1…1⟩)/√2.
pub fn ghz_vector(num_qubits: usize) -> Result<CVector> {
    check_qubits(num_qubits)?;
    let d = 1usize << num_qubits;
    let mut psi = CVector::zeros(d);
    psi[0] = real(std::f64::consts::FRAC_1_SQRT_2);
    psi[d - 1] = real(std::f64::consts::FRAC_1_SQRT_2);
    Ok(psi)
}

pub fn ghz_state(num_qubits: usize) -> Result<DensityMatrix> {
    DensityMatrix::pure(&ghz_vector(num_qubits)?)
}

/// Choi matrix of ρ ↦ (1−p)ρ + p·Tr(ρ)·𝟙/2^N.
pub fn depolarizing_channel(num_qubits: usize, p: f64) -> Result<ChoiMatrix> {
    check_qubits(num_qubits)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing probability {p} is outside [0, 1]"
        )));
    }
    let d = 1usize << num_qubits;
    ChoiMatrix::from_map(d, d, |x| {
        let mixed = CMatrix::identity(d, d) * (x.trace() * (p / d as f64));
        x * real(1.0 - p) + mixed
    })
}

/// Bloch vectors of the four tetrahedral single-qubit states.
pub const TETRAHEDRON: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

fn qubit_from_bloch(b: [f64; 3]) -> DensityMatrix {
    let basis = BasisSet::pauli(1).expect("one qubit");
    let mut mat = CMatrix::identity(2, 2);
    for (k, &bk) in b.iter().enumerate() {
        mat += basis.element(k + 1).matrix() * real(bk);
    }
    DensityMatrix::from_matrix(mat.unscale(2.0)).expect("Bloch vector inside the ball")
}

/// All 4^N tensor products of tetrahedral states, first qubit most significant.
pub fn tetrahedron_inputs(num_qubits: usize) -> Result<Vec<DensityMatrix>> {
    check_qubits(num_qubits)?;
    let s = 1.0 / 3f64.sqrt();
    let singles: Vec<DensityMatrix> = TETRAHEDRON
        .iter()
        .map(|v| qubit_from_bloch([v[0] * s, v[1] * s, v[2] * s]))
        .collect();
    Ok(tensor_products(&singles, num_qubits, |a, b| a.kron(b)))
}

fn tensor_products<T: Clone>(singles: &[T], n: usize, kron: impl Fn(&T, &T) -> T) -> Vec<T> {
    let mut out: Vec<T> = singles.to_vec();
    for _ in 1..n {
        out = out
            .iter()
            .flat_map(|a| singles.iter().map(|b| kron(a, b)).collect::<Vec<_>>())
            .collect();
    }
    out
}

/// Per-qubit readout confusion matrix: `matrix[a][b]` is the probability of
/// reporting outcome `a` when the ideal outcome is `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    pub matrix: [[f64; 2]; 2],
}

impl ReadoutError {
    pub fn new(matrix: [[f64; 2]; 2]) -> Result<Self> {
        let [row0, row1] = matrix;
        for (b, (p0, p1)) in row0.into_iter().zip(row1).enumerate() {
            if (p0 + p1 - 1.0).abs() > 1e-12 || p0 < 0.0 || p1 < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "confusion matrix column {b} is not a probability vector"
                )));
            }
        }
        Ok(Self { matrix })
    }

    /// Symmetric bit flip with probability `p`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new([[1.0 - p, p], [p, 1.0 - p]])
    }
}

fn axis_projectors(axis: usize) -> [CMatrix; 2] {
    let basis = BasisSet::pauli(1).expect("one qubit");
    let id = CMatrix::identity(2, 2);
    let sigma = basis.element(axis + 1).matrix();
    [(&id + sigma).unscale(2.0), (&id - sigma).unscale(2.0)]
}

/// 3^N Pauli-axis POVMs with 2^N effects each; see [`pauli_povms_with_readout`].
pub fn pauli_povms(num_qubits: usize) -> Result<Vec<Povm>> {
    pauli_povms_with_readout(num_qubits, None)
}

/// POVMs for every axis string in {x, y, z}^N (first qubit most
/// significant). Effects are ordered lexicographically by outcome bit
/// string, bit 0 being the +1 eigenvalue. With a readout error each
/// single-qubit effect becomes Σ_b M[a][b]·P_b.
pub fn pauli_povms_with_readout(
    num_qubits: usize,
    readout: Option<&ReadoutError>,
) -> Result<Vec<Povm>> {
    check_qubits(num_qubits)?;
    let per_axis: Vec<Vec<CMatrix>> = (0..3)
        .map(|axis| {
            let [plus, minus] = axis_projectors(axis);
            match readout {
                None => vec![plus, minus],
                Some(r) => (0..2)
                    .map(|a| &plus * real(r.matrix[a][0]) + &minus * real(r.matrix[a][1]))
                    .collect(),
            }
        })
        .collect();
    let axis_strings = tensor_products(
        &(0..3).map(|a| vec![a]).collect::<Vec<_>>(),
        num_qubits,
        |a, b| [a.as_slice(), b.as_slice()].concat(),
    );
    axis_strings
        .iter()
        .map(|axes| {
            let factors: Vec<Vec<CMatrix>> = axes.iter().map(|&a| per_axis[a].clone()).collect();
            let mut effects: Vec<CMatrix> = factors[0].clone();
            for f in &factors[1..] {
                effects = effects
                    .iter()
                    .flat_map(|e| f.iter().map(move |g| e.kronecker(g)))
                    .collect();
            }
            let effects = effects
                .into_iter()
                .map(Effect::from_matrix)
                .collect::<Result<Vec<_>>>()?;
            Povm::new(effects)
        })
        .collect()
}

/// p_i = Tr(ρE_i), clipped at zero and renormalized.
pub fn born_distribution(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            context: "Born rule",
            expected: povm.dim(),
            found: rho.dim(),
        });
    }
    let mut probs: Vec<f64> = povm
        .effects()
        .iter()
        .map(|e| rho.op().trace_with(e.op()).max(0.0))
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// One multinomial draw of `shots` trials, as a chain of binomials.
pub fn sample_counts(dist: &[f64], shots: u64, seed: Seed) -> Result<Vec<u64>> {
    if dist.iter().any(|&p| p.is_nan() || p < 0.0) || (dist.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidArgument(
            "distribution must be nonnegative and sum to 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let mut counts = vec![0u64; dist.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (i, &p) in dist.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == dist.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::Numerical(format!("binomial parameters: {e}")))?
            .sample(&mut rng);
        counts[i] = draw;
        remaining -= draw;
        mass -= p;
    }
    Ok(counts)
}

/// Largest-remainder rounding of shots·p.
pub fn exact_counts(dist: &[f64], shots: u64) -> Vec<u64> {
    let scaled: Vec<f64> = dist.iter().map(|p| p * shots as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(shots.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

fn draw(dist: &[f64], shots: u64, seed: u64, mode: SamplingMode) -> Result<Vec<u64>> {
    match mode {
        SamplingMode::Multinomial => sample_counts(dist, shots, Seed(seed)),
        SamplingMode::ExactFrequencies => Ok(exact_counts(dist, shots)),
    }
}

pub fn run_qst_experiment(
    rho: &DensityMatrix,
    protocol: &MeasurementProtocol,
    seed: Seed,
    mode: SamplingMode,
) -> Result<QstDataset> {
    if protocol.kind != TomographyKind::Qst {
        return Err(Error::InvalidArgument(
            "protocol is not a QST protocol".into(),
        ));
    }
    let basis = BasisSet::for_dim(rho.dim())?;
    let measurements = protocol
        .povms
        .iter()
        .enumerate()
        .map(|(j, povm)| {
            let dist = born_distribution(rho, povm)?;
            let counts = draw(
                &dist,
                protocol.shots_per_setting,
                derive_seed(seed.0, j as u64),
                mode,
            )?;
            Measurement::new(povm.clone(), counts)
        })
        .collect::<Result<Vec<_>>>()?;
    QstDataset::new(basis, measurements)
}

pub fn run_qpt_experiment(
    choi: &ChoiMatrix,
    protocol: &MeasurementProtocol,
    seed: Seed,
    mode: SamplingMode,
) -> Result<QptDataset> {
    if protocol.kind != TomographyKind::Qpt {
        return Err(Error::InvalidArgument(
            "protocol is not a QPT protocol".into(),
        ));
    }
    let per_input = protocol.povms.len() as u64;
    let settings = protocol
        .inputs
        .iter()
        .enumerate()
        .map(|(i, input)| {
            let output = choi.apply(input)?;
            let measurements = protocol
                .povms
                .iter()
                .enumerate()
                .map(|(j, povm)| {
                    let dist = born_distribution(&output, povm)?;
                    let index = i as u64 * per_input + j as u64;
                    let counts = draw(
                        &dist,
                        protocol.shots_per_setting,
                        derive_seed(seed.0, index),
                        mode,
                    )?;
                    Measurement::new(povm.clone(), counts)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(QptSetting {
                input: input.clone(),
                measurements,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QptDataset::new(
        BasisSet::for_dim(choi.d_in())?,
        BasisSet::for_dim(choi.d_out())?,
        settings,
    )
}
