//! JSON file formats: datasets, experiment specs, functionals, candidates.

use std::path::Path;

use num_complex::Complex64;
use polytomo::clopper_pearson::EpsilonAllocation;
use polytomo::functionals::{self, AffineFunctional};
use polytomo::operators::{
    BasisSet, CMatrix, CVector, ChoiMatrix, DensityMatrix, Effect, HermitianOperator, Povm,
};
use polytomo::polytope::{Measurement, QptDataset, QptSetting, QstDataset};
use polytomo::simulator::{
    depolarizing_channel, ghz_state, MeasurementProtocol, ReadoutError, SamplingMode,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Row-major complex matrix, each entry a `[re, im]` pair.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_json(m: &MatrixJson, field: &str) -> Result<CMatrix, CliError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(CliError::Parse(format!(
            "{field}: matrix rows are empty or ragged"
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(m[i][j][0], m[i][j][1])
    }))
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn vector_from_json(v: &[[f64; 2]], field: &str) -> Result<CVector, CliError> {
    if v.is_empty() {
        return Err(CliError::Parse(format!("{field}: empty vector")));
    }
    Ok(CVector::from_iterator(
        v.len(),
        v.iter().map(|z| Complex64::new(z[0], z[1])),
    ))
}

fn with_field<T>(field: &str, r: polytomo::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Parse(format!("{field}: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

pub fn parse_json<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{source}: {e}")))
}

/// Inline JSON if the argument starts with `{`, otherwise a file path.
pub fn read_json_arg<T: DeserializeOwned>(arg: &str) -> Result<T, CliError> {
    if arg.trim_start().starts_with('{') {
        parse_json(arg, "inline JSON")
    } else {
        read_json(Path::new(arg))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Qst,
    Qpt,
}

/// Counts mirror the protocol: `[povm][effect]` for QST and
/// `[input][povm][effect]` for QPT, where every input is measured with the
/// same POVM list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_in: Option<usize>,
    pub dim_out: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<MatrixJson>,
    pub povms: Vec<Vec<MatrixJson>>,
    pub counts: serde_json::Value,
}

#[derive(Debug, Clone)]
pub enum Dataset {
    Qst(QstDataset),
    Qpt(QptDataset),
}

impl Dataset {
    pub fn kind(&self) -> Kind {
        match self {
            Dataset::Qst(_) => Kind::Qst,
            Dataset::Qpt(_) => Kind::Qpt,
        }
    }
}

impl DatasetFile {
    pub fn into_dataset(self) -> Result<Dataset, CliError> {
        if self.povms.is_empty() {
            return Err(CliError::Parse("povms: dataset has no measurements".into()));
        }
        let povms = self
            .povms
            .iter()
            .enumerate()
            .map(|(j, effects)| {
                let field = format!("povms[{j}]");
                let effects = effects
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let f = format!("{field}[{k}]");
                        with_field(&f, Effect::from_matrix(matrix_from_json(m, &f)?))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                with_field(&field, Povm::new(effects))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(p) = povms.iter().find(|p| p.dim() != self.dim_out) {
            return Err(CliError::Parse(format!(
                "povms: effect dimension {} differs from dim_out {}",
                p.dim(),
                self.dim_out
            )));
        }
        let basis_out = with_field("dim_out", BasisSet::for_dim(self.dim_out))?;
        match self.kind {
            Kind::Qst => {
                if !self.inputs.is_empty() {
                    return Err(CliError::Parse(
                        "inputs: not allowed for a qst dataset".into(),
                    ));
                }
                let counts: Vec<Vec<u64>> = serde_json::from_value(self.counts)
                    .map_err(|e| CliError::Parse(format!("counts: {e}")))?;
                let measurements = measurements(&povms, counts, "counts")?;
                Ok(Dataset::Qst(with_field(
                    "dataset",
                    QstDataset::new(basis_out, measurements),
                )?))
            }
            Kind::Qpt => {
                let dim_in = self
                    .dim_in
                    .ok_or_else(|| CliError::Parse("dim_in: required for a qpt dataset".into()))?;
                let basis_in = with_field("dim_in", BasisSet::for_dim(dim_in))?;
                let counts: Vec<Vec<Vec<u64>>> = serde_json::from_value(self.counts)
                    .map_err(|e| CliError::Parse(format!("counts: {e}")))?;
                if counts.len() != self.inputs.len() {
                    return Err(CliError::Parse(format!(
                        "counts: {} groups for {} inputs",
                        counts.len(),
                        self.inputs.len()
                    )));
                }
                let settings = self
                    .inputs
                    .iter()
                    .zip(counts)
                    .enumerate()
                    .map(|(i, (m, c))| {
                        let f = format!("inputs[{i}]");
                        let input =
                            with_field(&f, DensityMatrix::from_matrix(matrix_from_json(m, &f)?))?;
                        Ok(QptSetting {
                            input,
                            measurements: measurements(&povms, c, &format!("counts[{i}]"))?,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(Dataset::Qpt(with_field(
                    "dataset",
                    QptDataset::new(basis_in, basis_out, settings),
                )?))
            }
        }
    }

    /// Fails if the dataset uses per-input POVM lists that differ, which the
    /// file format cannot express.
    pub fn from_dataset(data: &Dataset) -> Result<Self, CliError> {
        let povm_json = |ms: &[Measurement]| -> Vec<Vec<MatrixJson>> {
            ms.iter()
                .map(|m| {
                    m.povm
                        .effects()
                        .iter()
                        .map(|e| matrix_to_json(e.matrix()))
                        .collect()
                })
                .collect()
        };
        let counts_of =
            |ms: &[Measurement]| -> Vec<Vec<u64>> { ms.iter().map(|m| m.counts.clone()).collect() };
        match data {
            Dataset::Qst(d) => Ok(Self {
                kind: Kind::Qst,
                dim_in: None,
                dim_out: d.basis().dim(),
                inputs: Vec::new(),
                povms: povm_json(d.measurements()),
                counts: serde_json::to_value(counts_of(d.measurements()))
                    .expect("integers serialize"),
            }),
            Dataset::Qpt(d) => {
                let first = d
                    .settings()
                    .first()
                    .ok_or_else(|| CliError::Other("dataset has no settings".into()))?;
                let shared: Vec<&Povm> = first.measurements.iter().map(|m| &m.povm).collect();
                for s in d.settings() {
                    let these: Vec<&Povm> = s.measurements.iter().map(|m| &m.povm).collect();
                    if these != shared {
                        return Err(CliError::Other(
                            "inputs are measured with different POVMs".into(),
                        ));
                    }
                }
                Ok(Self {
                    kind: Kind::Qpt,
                    dim_in: Some(d.basis_in().dim()),
                    dim_out: d.basis_out().dim(),
                    inputs: d
                        .settings()
                        .iter()
                        .map(|s| matrix_to_json(s.input.matrix()))
                        .collect(),
                    povms: povm_json(&first.measurements),
                    counts: serde_json::to_value(
                        d.settings()
                            .iter()
                            .map(|s| counts_of(&s.measurements))
                            .collect::<Vec<_>>(),
                    )
                    .expect("integers serialize"),
                })
            }
        }
    }
}

fn measurements(
    povms: &[Povm],
    counts: Vec<Vec<u64>>,
    field: &str,
) -> Result<Vec<Measurement>, CliError> {
    if counts.len() != povms.len() {
        return Err(CliError::Parse(format!(
            "{field}: {} entries for {} POVMs",
            counts.len(),
            povms.len()
        )));
    }
    povms
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(j, (p, c))| with_field(&format!("{field}[{j}]"), Measurement::new(p.clone(), c)))
        .collect()
}

/// Per-effect ε: `[povm][effect]` for QST, `[input][povm][effect]` for QPT.
pub fn read_epsilon_file(path: &Path, kind: Kind) -> Result<EpsilonAllocation, CliError> {
    let alloc = match kind {
        Kind::Qst => EpsilonAllocation::qst(read_json(path)?),
        Kind::Qpt => EpsilonAllocation::qpt(read_json(path)?),
    };
    with_field("epsilon file", alloc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    FidelityToPure {
        state: Vec<[f64; 2]>,
    },
    Observable {
        matrix: MatrixJson,
    },
    OutcomeProbability {
        effect: MatrixJson,
    },
    ProcessFidelity {
        unitary: MatrixJson,
    },
    OutputObservable {
        input: MatrixJson,
        observable: MatrixJson,
    },
    OutputProbability {
        input: MatrixJson,
        effect: MatrixJson,
    },
    Constant {
        value: f64,
    },
}

impl FunctionalSpec {
    fn kind(&self) -> Option<Kind> {
        match self {
            FunctionalSpec::FidelityToPure { .. }
            | FunctionalSpec::Observable { .. }
            | FunctionalSpec::OutcomeProbability { .. } => Some(Kind::Qst),
            FunctionalSpec::ProcessFidelity { .. }
            | FunctionalSpec::OutputObservable { .. }
            | FunctionalSpec::OutputProbability { .. } => Some(Kind::Qpt),
            FunctionalSpec::Constant { .. } => None,
        }
    }

    /// Build against the bases of a QST (`basis_in` = None) or QPT problem.
    pub fn build(
        &self,
        basis_in: Option<&BasisSet>,
        basis_out: &BasisSet,
    ) -> Result<AffineFunctional, CliError> {
        let kind = if basis_in.is_some() {
            Kind::Qpt
        } else {
            Kind::Qst
        };
        if let Some(k) = self.kind() {
            if k != kind {
                return Err(CliError::Parse(format!(
                    "functional: {k:?} functional used with a {kind:?} dataset"
                )));
            }
        }
        let f = "functional";
        let built = match (self, basis_in) {
            (FunctionalSpec::FidelityToPure { state }, _) => functionals::fidelity_to_pure(
                &vector_from_json(state, "functional.state")?,
                basis_out,
            ),
            (FunctionalSpec::Observable { matrix }, _) => functionals::observable_mean(
                &with_field(f, HermitianOperator::new(matrix_from_json(matrix, f)?))?,
                basis_out,
            ),
            (FunctionalSpec::OutcomeProbability { effect }, _) => functionals::outcome_probability(
                &with_field(f, Effect::from_matrix(matrix_from_json(effect, f)?))?,
                basis_out,
            ),
            (FunctionalSpec::ProcessFidelity { unitary }, Some(bin)) => {
                let target = with_field(f, ChoiMatrix::unitary(&matrix_from_json(unitary, f)?))?;
                functionals::process_fidelity_to_unitary(&target, bin, basis_out)
            }
            (FunctionalSpec::OutputObservable { input, observable }, Some(bin)) => {
                functionals::output_observable(
                    &with_field(f, DensityMatrix::from_matrix(matrix_from_json(input, f)?))?,
                    &with_field(f, HermitianOperator::new(matrix_from_json(observable, f)?))?,
                    bin,
                    basis_out,
                )
            }
            (FunctionalSpec::OutputProbability { input, effect }, Some(bin)) => {
                functionals::output_probability(
                    &with_field(f, DensityMatrix::from_matrix(matrix_from_json(input, f)?))?,
                    &with_field(f, Effect::from_matrix(matrix_from_json(effect, f)?))?,
                    bin,
                    basis_out,
                )
            }
            (FunctionalSpec::Constant { value }, bin) => {
                let dim = match bin {
                    Some(b) => (basis_out.full_len() - 1) * b.full_len(),
                    None => basis_out.full_len() - 1,
                };
                Ok(AffineFunctional::constant(dim, *value))
            }
            _ => unreachable!("kind checked above"),
        };
        with_field(f, built)
    }
}

/// A state (QST) or Choi matrix (QPT) to test for membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateFile {
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Ghz,
    Depolarizing,
    CustomState,
    CustomChannel,
}

fn default_qubits() -> usize {
    1
}

fn default_trials() -> usize {
    1000
}

fn default_grid() -> Vec<f64> {
    vec![0.5, 0.2, 0.1, 0.05, 0.01]
}

/// Simulated experiment: a true state or channel, measured with the Pauli
/// protocol (tetrahedron inputs for channels).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    #[serde(default = "default_qubits")]
    pub qubits: usize,
    pub shots: u64,
    /// Depolarizing strength.
    #[serde(default)]
    pub p: Option<f64>,
    /// Density matrix for `custom_state`.
    #[serde(default)]
    pub state: Option<MatrixJson>,
    /// Kraus operators for `custom_channel`.
    #[serde(default)]
    pub kraus: Option<Vec<MatrixJson>>,
    /// Symmetric bit-flip probability applied to every qubit's readout.
    #[serde(default)]
    pub readout_error: Option<f64>,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_grid")]
    pub epsilon_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Lift the default qubit caps.
    #[serde(default)]
    pub allow_large: bool,
}

pub enum Truth {
    State(DensityMatrix),
    Channel(ChoiMatrix),
}

impl ExperimentSpec {
    pub fn mode(&self, exact_flag: bool) -> SamplingMode {
        if self.exact || exact_flag {
            SamplingMode::ExactFrequencies
        } else {
            SamplingMode::Multinomial
        }
    }

    pub fn truth(&self) -> Result<Truth, CliError> {
        let f = "experiment";
        match self.experiment {
            ExperimentKind::Ghz => Ok(Truth::State(with_field(f, ghz_state(self.qubits))?)),
            ExperimentKind::Depolarizing => {
                let p = self.p.ok_or_else(|| {
                    CliError::Parse("p: required for a depolarizing experiment".into())
                })?;
                Ok(Truth::Channel(with_field(
                    "p",
                    depolarizing_channel(self.qubits, p),
                )?))
            }
            ExperimentKind::CustomState => {
                let m = self
                    .state
                    .as_ref()
                    .ok_or_else(|| CliError::Parse("state: required for custom_state".into()))?;
                let rho = with_field(
                    "state",
                    DensityMatrix::from_matrix(matrix_from_json(m, "state")?),
                )?;
                self.check_dim(rho.dim())?;
                Ok(Truth::State(rho))
            }
            ExperimentKind::CustomChannel => {
                let ks = self
                    .kraus
                    .as_ref()
                    .ok_or_else(|| CliError::Parse("kraus: required for custom_channel".into()))?;
                let ks = ks
                    .iter()
                    .enumerate()
                    .map(|(i, k)| matrix_from_json(k, &format!("kraus[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let d = 1usize << self.qubits;
                Ok(Truth::Channel(with_field(
                    "kraus",
                    ChoiMatrix::from_kraus(&ks, d, d),
                )?))
            }
        }
    }

    fn check_dim(&self, dim: usize) -> Result<(), CliError> {
        if dim != 1usize << self.qubits {
            return Err(CliError::Parse(format!(
                "state: dimension {dim} does not match {} qubits",
                self.qubits
            )));
        }
        Ok(())
    }

    pub fn protocol(&self, truth: &Truth) -> Result<MeasurementProtocol, CliError> {
        let readout = self
            .readout_error
            .map(|p| with_field("readout_error", ReadoutError::symmetric(p)))
            .transpose()?;
        let proto = match truth {
            Truth::State(_) => MeasurementProtocol::pauli_qst(
                self.qubits,
                self.shots,
                readout.as_ref(),
                self.allow_large,
            ),
            Truth::Channel(_) => MeasurementProtocol::pauli_qpt(
                self.qubits,
                self.shots,
                readout.as_ref(),
                self.allow_large,
            ),
        };
        with_field("experiment", proto)
    }
}
