//! Subcommands. Each returns the text to write; the binary decides where.

use std::path::Path;

use polytomo::clopper_pearson::{uniform_allocation, EpsilonAllocation};
use polytomo::functionals::interval as lp_interval;
use polytomo::harness::{self, TrueObject};
use polytomo::operators::{embed_choi, embed_state, BasisSet, ChoiMatrix, DensityMatrix};
use polytomo::polytope::{build_qpt_polytope, build_qst_polytope, Membership, Polyhedron};
use polytomo::simulator::{run_qpt_experiment, run_qst_experiment, Seed};
use serde::Serialize;

use crate::files::{
    matrix_from_json, read_epsilon_file, read_json, read_json_arg, CandidateFile, Dataset,
    DatasetFile, ExperimentSpec, FunctionalSpec, Truth,
};
use crate::CliError;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// How per-effect ε values are chosen.
#[derive(Debug, Clone, Default)]
pub struct AllocationArgs<'a> {
    pub confidence: Option<f64>,
    pub epsilon_file: Option<&'a Path>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalJson {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub constraint: usize,
    pub provenance: String,
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub bounded: bool,
    pub normal_rank: usize,
    pub ambient_dim: usize,
    pub constraints: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violated: Option<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultFile {
    pub confidence_level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<IntervalJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub membership: Option<bool>,
    pub diagnostics: Diagnostics,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result types serialize");
    s.push('\n');
    s
}

pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    read_json::<DatasetFile>(path)?.into_dataset()
}

fn allocation(data: &Dataset, args: &AllocationArgs) -> Result<EpsilonAllocation, CliError> {
    let shape = match data {
        Dataset::Qst(d) => d.shape(),
        Dataset::Qpt(d) => d.shape(),
    };
    match (args.confidence, args.epsilon_file) {
        (Some(_), Some(_)) => Err(CliError::Parse(
            "--confidence and --epsilon-file are mutually exclusive".into(),
        )),
        (_, Some(path)) => read_epsilon_file(path, data.kind()),
        (cl, None) => uniform_allocation(&shape, cl.unwrap_or(DEFAULT_CONFIDENCE))
            .map_err(|e| CliError::Parse(format!("--confidence: {e}"))),
    }
}

fn build(data: &Dataset, args: &AllocationArgs) -> Result<Polyhedron, CliError> {
    let alloc = allocation(data, args)?;
    let poly = match data {
        Dataset::Qst(d) => build_qst_polytope(d, &alloc),
        Dataset::Qpt(d) => build_qpt_polytope(d, &alloc),
    };
    poly.map_err(|e| CliError::Parse(e.to_string()))
}

fn diagnostics(poly: &Polyhedron) -> Diagnostics {
    Diagnostics {
        bounded: poly.is_bounded(),
        normal_rank: poly.normal_rank(),
        ambient_dim: poly.ambient_dim(),
        constraints: poly.halfspaces().len(),
        violated: None,
    }
}

fn bases(data: &Dataset) -> (Option<&BasisSet>, &BasisSet) {
    match data {
        Dataset::Qst(d) => (None, d.basis()),
        Dataset::Qpt(d) => (Some(d.basis_in()), d.basis_out()),
    }
}

pub fn interval(
    dataset: &Path,
    functional: &str,
    args: &AllocationArgs,
) -> Result<String, CliError> {
    let data = load_dataset(dataset)?;
    let spec: FunctionalSpec = read_json_arg(functional)?;
    let (bin, bout) = bases(&data);
    let f = spec.build(bin, bout)?;
    let poly = build(&data, args)?;
    let ci = lp_interval(&f, &poly)?;
    Ok(to_json(&ResultFile {
        confidence_level: ci.confidence_level,
        functional: Some(f.label.clone()),
        interval: Some(IntervalJson {
            lo: ci.lo,
            hi: ci.hi,
        }),
        membership: None,
        diagnostics: diagnostics(&poly),
    }))
}

pub fn check(dataset: &Path, candidate: &Path, args: &AllocationArgs) -> Result<String, CliError> {
    let data = load_dataset(dataset)?;
    let cand: CandidateFile = read_json(candidate)?;
    let m = matrix_from_json(&cand.matrix, "matrix")?;
    let point = match &data {
        Dataset::Qst(d) => {
            let rho = DensityMatrix::from_matrix(m)
                .map_err(|e| CliError::Parse(format!("matrix: {e}")))?;
            embed_state(&rho, d.basis())
                .map_err(|e| CliError::Parse(format!("matrix: {e}")))?
                .0
        }
        Dataset::Qpt(d) => {
            let op = polytomo::operators::HermitianOperator::new(m)
                .map_err(|e| CliError::Parse(format!("matrix: {e}")))?;
            let choi = ChoiMatrix::new(op, d.basis_in().dim(), d.basis_out().dim())
                .map_err(|e| CliError::Parse(format!("matrix: {e}")))?;
            embed_choi(&choi, d.basis_in(), d.basis_out())
                .map_err(|e| CliError::Parse(format!("matrix: {e}")))?
                .c()
                .to_vec()
        }
    };
    let poly = build(&data, args)?;
    let mut diag = diagnostics(&poly);
    let inside = match poly.check(&point)? {
        Membership::Inside => true,
        Membership::Outside {
            index,
            provenance,
            excess,
        } => {
            diag.violated = Some(Violation {
                constraint: index,
                provenance: provenance.to_string(),
                excess,
            });
            false
        }
    };
    Ok(to_json(&ResultFile {
        confidence_level: poly.confidence_level(),
        functional: None,
        interval: None,
        membership: Some(inside),
        diagnostics: diag,
    }))
}

/// Boundedness verdict for the dataset's protocol. An unbounded verdict is
/// a result here, not an error.
pub fn bounded(dataset: &Path, args: &AllocationArgs) -> Result<String, CliError> {
    let data = load_dataset(dataset)?;
    let poly = build(&data, args)?;
    Ok(to_json(&ResultFile {
        confidence_level: poly.confidence_level(),
        functional: None,
        interval: None,
        membership: None,
        diagnostics: diagnostics(&poly),
    }))
}

fn resolve_seed(spec: &ExperimentSpec, seed: Option<u64>) -> Seed {
    Seed(seed.or(spec.seed).unwrap_or(0))
}

pub fn simulate(spec: &Path, seed: Option<u64>, exact: bool) -> Result<String, CliError> {
    let spec: ExperimentSpec = read_json(spec)?;
    let truth = spec.truth()?;
    let protocol = spec.protocol(&truth)?;
    let seed = resolve_seed(&spec, seed);
    let mode = spec.mode(exact);
    let data = match &truth {
        Truth::State(rho) => Dataset::Qst(run_qst_experiment(rho, &protocol, seed, mode)?),
        Truth::Channel(c) => Dataset::Qpt(run_qpt_experiment(c, &protocol, seed, mode)?),
    };
    Ok(to_json(&DatasetFile::from_dataset(&data)?))
}

fn true_object(truth: Truth) -> TrueObject {
    match truth {
        Truth::State(rho) => TrueObject::State(rho),
        Truth::Channel(c) => TrueObject::Channel(c),
    }
}

fn csv_text<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Other(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))
}

#[derive(Serialize)]
struct CoverageRow {
    epsilon: f64,
    f_fail: f64,
    trials: usize,
}

pub fn coverage(
    spec: &Path,
    seed: Option<u64>,
    exact: bool,
    format: Format,
) -> Result<String, CliError> {
    let spec: ExperimentSpec = read_json(spec)?;
    let truth = spec.truth()?;
    let protocol = spec.protocol(&truth)?;
    let report = harness::coverage_experiment(
        &true_object(truth),
        &protocol,
        &spec.epsilon_grid,
        spec.trials,
        resolve_seed(&spec, seed),
        spec.mode(exact),
    )
    .map_err(|e| CliError::Parse(e.to_string()))?;
    match format {
        Format::Json => Ok(to_json(&report)),
        Format::Csv => csv_text(report.epsilon_grid.iter().zip(&report.f_fail).map(
            |(&epsilon, &f_fail)| CoverageRow {
                epsilon,
                f_fail,
                trials: report.trials,
            },
        )),
    }
}

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    lo: f64,
    hi: f64,
    contains_truth: bool,
}

pub fn sweep(
    spec: &Path,
    functional: &str,
    seed: Option<u64>,
    exact: bool,
    format: Format,
) -> Result<String, CliError> {
    let spec: ExperimentSpec = read_json(spec)?;
    let fspec: FunctionalSpec = read_json_arg(functional)?;
    let truth = spec.truth()?;
    let protocol = spec.protocol(&truth)?;
    let f = match &truth {
        Truth::State(rho) => fspec.build(None, &BasisSet::for_dim(rho.dim())?)?,
        Truth::Channel(c) => fspec.build(
            Some(&BasisSet::for_dim(c.d_in())?),
            &BasisSet::for_dim(c.d_out())?,
        )?,
    };
    let result = harness::interval_sweep(
        &true_object(truth),
        &protocol,
        &f,
        &spec.epsilon_grid,
        spec.trials,
        resolve_seed(&spec, seed),
        spec.mode(exact),
    )
    .map_err(|e| CliError::Parse(e.to_string()))?;
    match format {
        Format::Json => Ok(to_json(&result)),
        Format::Csv => csv_text(result.entries.iter().map(|e| SweepRow {
            epsilon: e.epsilon,
            lo: e.lo,
            hi: e.hi,
            contains_truth: e.contains_truth,
        })),
    }
}
