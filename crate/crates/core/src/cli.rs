//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on usage or validation errors (including
//! unreadable input), 3 when a mixing time does not converge, 1 on internal
//! numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{default_time_grid, verify_bounds, BoundReport, DEFAULT_EPS_GRID};
use crate::chain::{Chain, ChainSpec};
use crate::distances::{
    distance_curve, mixing_time_bracket, BracketPrecision, DistanceQuery, Metric, MixingBracket,
    Start, TimeMode,
};
use crate::error::{Error, Result};
use crate::family::{full_scan, FamilyFile, FamilyReport, ScanOptions};
use crate::report::{export_csv, read_json, to_json, write_json};
use crate::spectral::{beta_delta, eigen_summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cutoff-lab",
    version,
    about = "Mixing times and cutoff diagnostics for finite Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of I-K, spectral gap, and spectral sum of a reversible chain.
    Spectrum {
        #[command(flatten)]
        input: ChainInput,
        /// Also report β_δ for this holding probability.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Mixing time of one distance, optionally with its sampled profile.
    Analyze {
        #[command(flatten)]
        input: ChainInput,
        #[arg(long, value_enum, default_value_t = MetricArg::Tv)]
        metric: MetricArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Continuous)]
        mode: ModeArg,
        /// Holding probability of the lazy walk.
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// Uniformization tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Maximize over every start instead of the birth-death endpoints.
        #[arg(long)]
        exhaustive_start: bool,
        /// Times at which to sample the distance, comma separated.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Scan a chain family over its sizes.
    Family {
        /// Family description (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the file's "delta" (default 0.5).
        #[arg(long)]
        delta: Option<f64>,
        /// Overrides the file's "eps_grid" (default 0.05,0.1,0.25,0.5,0.75).
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
        /// ε of the continuous/lazy ratio column.
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// The pair ε < η of the window column.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.1, 0.9])]
        window: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Per-size table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Check the mixing-time inequalities on one chain.
    Verify {
        #[command(flatten)]
        input: ChainInput,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Default 0.05,0.1,0.2,0.4.
        #[arg(long, value_delimiter = ',')]
        eps_grid: Option<Vec<f64>>,
        /// Default: multiples of the spectral sum.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
struct ChainInput {
    /// Chain description (JSON).
    #[arg(long)]
    chain: PathBuf,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Tv,
    Sep,
    Dbar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Discrete,
    Lazy,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub size: usize,
    /// Full spectrum of `I - K`, ascending, starting with 0.
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
    pub spectral_sum: f64,
    pub product: f64,
    pub kernel_spectrum: Vec<f64>,
    pub period: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_delta: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub query: DistanceQuery,
    pub eps: f64,
    pub mixing_time: f64,
    pub bracket: MixingBracket,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<(f64, f64)>,
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        Error::Numerical(_) => EXIT_INTERNAL,
        _ => EXIT_INVALID,
    }
}

fn load_chain(path: &Path) -> Result<Chain> {
    Chain::from_spec(&read_json::<ChainSpec>(path)?)
}

fn emit<T: Serialize>(value: &T, output: &Output) -> Result<()> {
    match &output.out {
        Some(path) => write_json(value, path),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}

fn mode_of(mode: ModeArg, delta: f64) -> TimeMode {
    match mode {
        ModeArg::Discrete => TimeMode::Discrete,
        ModeArg::Lazy => TimeMode::Lazy { delta },
        ModeArg::Continuous => TimeMode::Continuous,
    }
}

fn metric_of(metric: MetricArg) -> Metric {
    match metric {
        MetricArg::Tv => Metric::Tv,
        MetricArg::Sep => Metric::Sep,
        MetricArg::Dbar => Metric::Dbar,
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Spectrum {
            input,
            delta,
            output,
        } => {
            let chain = load_chain(&input.chain)?;
            let summary = eigen_summary(&chain)?;
            let beta = delta
                .map(|d| beta_delta(&summary, d).map(|b| (d, b)))
                .transpose()?;
            let mut eigenvalues = vec![0.0];
            eigenvalues.extend(&summary.eigenvalues);
            let report = SpectrumReport {
                size: chain.size(),
                eigenvalues,
                gap: summary.gap,
                spectral_sum: summary.spectral_sum,
                product: summary.gap * summary.spectral_sum,
                kernel_spectrum: summary.kernel_spectrum,
                period: chain.period(),
                beta_delta: beta,
            };
            emit(&report, &output)
        }
        Command::Analyze {
            input,
            metric,
            mode,
            delta,
            eps,
            tol,
            exhaustive_start,
            times,
            output,
        } => {
            let chain = load_chain(&input.chain)?;
            let query = DistanceQuery::new(
                mode_of(mode, delta),
                metric_of(metric),
                Start::WorstCase {
                    exhaustive: exhaustive_start,
                },
            )?;
            let bracket =
                mixing_time_bracket(&chain, eps, &query, tol, BracketPrecision::default())?;
            let samples = if times.is_empty() {
                Vec::new()
            } else {
                distance_curve(&chain, &query, &times, tol)?.samples
            };
            let report = AnalyzeReport {
                query,
                eps,
                mixing_time: bracket.value(),
                bracket,
                samples,
            };
            emit(&report, &output)
        }
        Command::Family {
            spec,
            delta,
            eps_grid,
            eps,
            window,
            tol,
            csv,
            output,
        } => {
            let file: FamilyFile = read_json(&spec)?;
            let family = file.spec()?;
            let defaults = ScanOptions::default();
            let options = ScanOptions {
                delta: delta.or(file.delta).unwrap_or(defaults.delta),
                eps_grid: eps_grid.or(file.eps_grid).unwrap_or(defaults.eps_grid),
                ratio_eps: eps,
                window: (window[0], window[1]),
                tol,
            };
            let report: FamilyReport = full_scan(&family, &options)?;
            if let Some(path) = csv {
                export_csv(&report, &path)?;
            }
            emit(&report, &output)
        }
        Command::Verify {
            input,
            delta,
            eps_grid,
            times,
            output,
        } => {
            let chain = load_chain(&input.chain)?;
            let eps_grid = eps_grid.unwrap_or_else(|| DEFAULT_EPS_GRID.to_vec());
            let times = times.unwrap_or_else(|| default_time_grid(&chain));
            let report: BoundReport = verify_bounds(&chain, delta, &eps_grid, &times)?;
            emit(&report, &output)?;
            if report.pass {
                Ok(())
            } else {
                let worst = report.worst().expect("a failing report has entries");
                Err(Error::Numerical(format!(
                    "inequality {} fails at {} by {:e}",
                    worst.id, worst.point, -worst.margin
                )))
            }
        }
    }
}
