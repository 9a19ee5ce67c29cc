use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polytomo_cli::commands::{self, AllocationArgs, Format};
use polytomo_cli::CliError;

/// Confidence polytopes and intervals for quantum state and process tomography.
#[derive(Parser)]
#[command(name = "polytomo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Confidence {
    /// Target confidence level; ε is split evenly over effects.
    #[arg(long, conflicts_with = "epsilon_file")]
    confidence: Option<f64>,
    /// JSON file of per-effect ε values mirroring the count nesting.
    #[arg(long)]
    epsilon_file: Option<PathBuf>,
}

impl Confidence {
    fn allocation(&self) -> AllocationArgs<'_> {
        AllocationArgs {
            confidence: self.confidence,
            epsilon_file: self.epsilon_file.as_deref(),
        }
    }
}

#[derive(Args)]
struct Simulation {
    /// Overrides the seed in the spec (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Use rounded expected counts instead of sampling.
    #[arg(long)]
    exact_frequencies: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset from an experiment spec.
    Simulate {
        spec: PathBuf,
        #[command(flatten)]
        sim: Simulation,
    },
    /// Test whether a candidate state or Choi matrix lies in the polytope.
    Check {
        dataset: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        conf: Confidence,
    },
    /// Confidence interval of an affine functional.
    Interval {
        dataset: PathBuf,
        /// Functional as inline JSON or a path to a JSON file.
        #[arg(long)]
        functional: String,
        #[command(flatten)]
        conf: Confidence,
    },
    /// Monte-Carlo coverage of the polytope over an ε grid.
    Coverage {
        spec: PathBuf,
        #[command(flatten)]
        sim: Simulation,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Intervals of a functional over repeated simulated experiments.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        functional: String,
        #[command(flatten)]
        sim: Simulation,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Report whether the dataset's protocol gives a bounded polytope.
    Bounded {
        dataset: PathBuf,
        #[command(flatten)]
        conf: Confidence,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("POLYTOMO_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| CliError::Parse(format!("POLYTOMO_THREADS: not a number: {value}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let text = match &cli.command {
        Command::Simulate { spec, sim } => {
            commands::simulate(spec, sim.seed, sim.exact_frequencies)?
        }
        Command::Check {
            dataset,
            candidate,
            conf,
        } => commands::check(dataset, candidate, &conf.allocation())?,
        Command::Interval {
            dataset,
            functional,
            conf,
        } => commands::interval(dataset, functional, &conf.allocation())?,
        Command::Coverage { spec, sim, format } => {
            commands::coverage(spec, sim.seed, sim.exact_frequencies, (*format).into())?
        }
        Command::Sweep {
            spec,
            functional,
            sim,
            format,
        } => commands::sweep(
            spec,
            functional,
            sim.seed,
            sim.exact_frequencies,
            (*format).into(),
        )?,
        Command::Bounded { dataset, conf } => commands::bounded(dataset, &conf.allocation())?,
    };
    match &cli.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
