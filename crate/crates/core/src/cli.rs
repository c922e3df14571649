//! Command line front end: `simulate`, `spectrum`, `limit`, `sample`, `converge`.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 I/O failure,
//! 4 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::WalkConfig;
use crate::distribution::{position_distribution, rescale};
use crate::error::WalkError;
use crate::limit::{limit_measure, sample_limit, sample_measure, write_samples_csv, KGrid};
use crate::metrics::{convergence_against, omega_grid};
use crate::runconfig::RunConfig;
use crate::spectral::{k_path, write_spectrum_csv, SpectrumExportError, DEFAULT_GAP_TOL};
use crate::walk::Ensemble;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Coined quantum walk simulation and limit laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the momentum grid points per axis.
    #[arg(long = "k-grid")]
    pub k_grid: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the initial state and write the position distribution.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Overrides the step count.
        #[arg(long)]
        n: Option<u64>,
        /// Write lattice coordinates without dividing by n.
        #[arg(long)]
        raw: bool,
    },
    /// Bands and group velocities along a straight momentum path.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of points on the path, both ends included.
        #[arg(long = "k-points", default_value_t = 256)]
        k_points: usize,
        /// Path start, comma separated (default −π on every axis).
        #[arg(long = "k-from", value_delimiter = ',', allow_hyphen_values = true)]
        k_from: Option<Vec<f64>>,
        /// Path end, comma separated (default π on every axis).
        #[arg(long = "k-to", value_delimiter = ',', allow_hyphen_values = true)]
        k_to: Option<Vec<f64>>,
    },
    /// Quadrature limit measure.
    Limit {
        #[command(flatten)]
        common: Common,
    },
    /// Samples from the limit law.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Distances between rescaled distributions and the limit measure.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<u64>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("numerical failure: {0}")]
    Numerical(WalkError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Validation(vec![e.to_string()])
        }
    }
}

impl From<SpectrumExportError> for CliError {
    fn from(e: SpectrumExportError) -> Self {
        match e {
            SpectrumExportError::Io(e) => CliError::Io(e),
            SpectrumExportError::Walk(e) => e.into(),
        }
    }
}

struct Loaded {
    run: RunConfig,
    walk: WalkConfig,
    ensemble: Ensemble,
    seed: u64,
    k_grid: usize,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(&common.config)?;
    let run = RunConfig::from_json(&text).map_err(|e| CliError::Validation(vec![format!("malformed JSON: {e}")]))?;
    let (walk, ensemble) = run.build().map_err(CliError::Validation)?;
    let seed = common.seed.unwrap_or(run.seed);
    let k_grid = common.k_grid.unwrap_or_else(|| run.k_grid_or_default());
    if k_grid == 0 {
        return Err(CliError::Validation(vec!["k grid must be positive".into()]));
    }
    Ok(Loaded { run, walk, ensemble, seed, k_grid })
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn header(cmd: &str, l: &Loaded, extra: &str) -> String {
    format!("qwalk {cmd} config_hash={} seed={}{extra}", l.run.hash(), l.seed)
}

/// Runs one parsed command.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { common, n, raw } => {
            let l = load(common)?;
            let n = n.unwrap_or(l.run.n);
            let evolved = l.ensemble.evolve(&l.walk, n as usize)?;
            let mut dist = position_distribution(&evolved, &l.walk);
            if !raw && n > 0 {
                dist = rescale(&dist, n)?;
            }
            let scaling = if dist.is_rescaled() { "rescaled" } else { "raw" };
            let mut out = open_out(&common.out)?;
            dist.write_csv(&mut out, Some(&header("simulate", &l, &format!(" n={n} coords={scaling}"))))?;
            out.flush()?;
        }
        Command::Spectrum { common, k_points, k_from, k_to } => {
            let l = load(common)?;
            let d = l.walk.dim();
            let from = k_from.clone().unwrap_or_else(|| vec![-std::f64::consts::PI; d]);
            let to = k_to.clone().unwrap_or_else(|| vec![std::f64::consts::PI; d]);
            if from.len() != d || to.len() != d {
                return Err(CliError::Validation(vec![format!("k path endpoints need {d} coordinates")]));
            }
            let path = k_path(&from, &to, *k_points);
            let mut out = open_out(&common.out)?;
            let extra = format!(" k_points={k_points} gap_tol={DEFAULT_GAP_TOL:e}");
            write_spectrum_csv(&l.walk, &path, DEFAULT_GAP_TOL, &mut out, Some(&header("spectrum", &l, &extra)))?;
            out.flush()?;
        }
        Command::Limit { common } => {
            let l = load(common)?;
            let lm = limit_measure(&l.walk, &l.ensemble, &KGrid::new(l.walk.dim(), l.k_grid))?;
            let extra = format!(
                " grid={} raw_total={} excluded_points={}",
                l.k_grid,
                lm.raw_total(),
                lm.excluded_points()
            );
            let mut out = open_out(&common.out)?;
            lm.merged_exact().write_csv(&mut out, Some(&header("limit", &l, &extra)))?;
            out.flush()?;
        }
        Command::Sample { common, count } => {
            let l = load(common)?;
            let (samples, method) = if l.run.is_origin_mixed() {
                (sample_limit(&l.walk, *count, l.seed)?, "uniform_momentum_band".to_string())
            } else {
                let lm = limit_measure(&l.walk, &l.ensemble, &KGrid::new(l.walk.dim(), l.k_grid))?;
                (sample_measure(&lm, *count, l.seed)?, format!("inverse_cdf grid={}", l.k_grid))
            };
            let extra = format!(" count={count} rng=chacha20 method={method}");
            let mut out = open_out(&common.out)?;
            write_samples_csv(&samples, l.walk.dim(), &mut out, Some(&header("sample", &l, &extra)))?;
            out.flush()?;
        }
        Command::Converge { common, n_list } => {
            let l = load(common)?;
            let lm = limit_measure(&l.walk, &l.ensemble, &KGrid::new(l.walk.dim(), l.k_grid))?;
            let omegas = omega_grid(&l.run.omega_ranges());
            let report = convergence_against(&l.walk, &l.ensemble, n_list, &lm, &omegas)?;
            let extra = format!(" grid={} raw_total={}", l.k_grid, lm.raw_total());
            let mut out = open_out(&common.out)?;
            report.write_csv(&mut out, Some(&header("converge", &l, &extra)))?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("qwalk: {e}");
            e.exit_code()
        }
    }
}
