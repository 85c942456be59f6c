//! `spectralset`: numerical ranges, spectral-constant bounds and Crouzeix
//! ratio searches for complex matrices.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spectralset::ensembles::Ensemble;
use spectralset::{Error, Result};

use crate::commands::Source;
use crate::config::{CommonArgs, Format, OmegaArg, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "spectralset", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Boundary polylines and geometry of W(A) and, with --q, of Ω_q.
    Range {
        /// Matrix JSON file, `-` for stdin.
        matrix: PathBuf,
        #[arg(long = "q")]
        q_abs: Option<f64>,
        /// Directory for the CSV polylines and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Spectral-constant report for a matrix.
    Bounds {
        matrix: PathBuf,
        /// Domain Ω: wrange (default), qrange (needs --q) or disk:cx,cy,r.
        #[arg(long, default_value = "wrange")]
        omega: String,
        #[arg(long = "q")]
        q_abs: Option<f64>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Crouzeix-ratio search on Ω_q against the conjectured constant.
    Conjecture {
        /// Matrix JSON file; omit to sample from --ensemble.
        matrix: Option<PathBuf>,
        #[arg(long, conflicts_with = "matrix")]
        ensemble: Option<String>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Values of |q|, comma separated.
        #[arg(long = "q", value_delimiter = ',', default_values_t = [0.6, 0.8, 0.9, 1.0])]
        q_abs: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// JSON-lines file receiving one record per trial.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
    Verify {
        /// Criterion ids to run, comma separated; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// JSON-lines file receiving conjecture violations.
        #[arg(long)]
        findings: Option<PathBuf>,
        /// Also write the results as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Input(_) => 2,
        Error::NonSmoothBoundary { .. } => 3,
        _ => 4,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("SPECTRALSET_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::input(format!("SPECTRALSET_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::input(format!("cannot configure {threads} threads: {e}")))
}

fn read_matrix(path: &std::path::Path) -> Result<spectralset::Operator> {
    commands::read_matrix(path).map_err(|e| match e {
        Error::Io(io) => Error::input(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn execute(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Range { matrix, q_abs, out, format, common } => {
            let cfg = RunConfig { q_abs, out, format, ..RunConfig::from_common(&common)? };
            cfg.validate()?;
            let a = read_matrix(&matrix)?;
            print!("{}", commands::range(&a, &cfg)?);
        }
        Command::Bounds { matrix, omega, q_abs, out, common } => {
            let omega: OmegaArg = omega.parse()?;
            let cfg = RunConfig { q_abs, out, ..RunConfig::from_common(&common)? };
            cfg.validate()?;
            let a = read_matrix(&matrix)?;
            print!("{}", commands::bounds(&a, &cfg, omega.0)?);
        }
        Command::Conjecture { matrix, ensemble, n, trials, q_abs, degree, restarts, out, format, common } => {
            let cfg = RunConfig { degree, restarts, out, format, ..RunConfig::from_common(&common)? };
            cfg.validate()?;
            if q_abs.is_empty() {
                return Err(Error::input("--q needs at least one value"));
            }
            let source = match (matrix, ensemble) {
                (Some(p), _) => Source::Matrix(read_matrix(&p)?),
                (None, Some(name)) => {
                    if n == 0 || trials == 0 {
                        return Err(Error::input("--n and --trials must be at least 1"));
                    }
                    Source::Ensemble { kind: name.parse::<Ensemble>()?, n, trials }
                }
                (None, None) => return Err(Error::input("give a matrix file or --ensemble")),
            };
            let run = commands::conjecture(&source, &q_abs, &cfg)?;
            print!("{}", run.stdout);
            if let Some(e) = run.failed {
                eprintln!("error: some trials failed; first: {e}");
                return Ok(exit_code(&e));
            }
        }
        Command::Verify { only, degree, restarts, findings, out, common } => {
            let cfg = RunConfig { degree, restarts, out, ..RunConfig::from_common(&common)? };
            cfg.validate()?;
            if !commands::verify(&cfg, &only, findings.as_deref())? {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
