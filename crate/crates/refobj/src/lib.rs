//! Command-line driver for `refobj-core`.
//!
//! [`run_command`] parses an argument vector, runs one subcommand and
//! returns the process exit code: 0 on success, 1 when `verify` finds a
//! failing check, 2 for bad arguments, configs or I/O, and 3 when a
//! numerical method does not converge.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use refobj_core::disturbance::{lambda_constant, DisturbanceReport};
use refobj_core::encoding::EncodingSpec;
use refobj_core::likelihood::{average_error, overlap};
use refobj_core::oracle::{format_outcome, run_checks, MAX_SPINS};
use refobj_core::su2::HaarGrid;
use serde_json::json;

pub mod config;
pub mod output;
pub mod simulate;
pub mod svg;

use output::{csv_string, emit, fmt_f64, json_f64, json_string, write_file};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Numeric(refobj_core::Error),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
}

impl CliError {
    pub fn from_core(e: refobj_core::Error) -> Self {
        Self::Numeric(e)
    }

    pub fn exit_code(&self) -> i32 {
        use refobj_core::Error as E;
        match self {
            Self::Verification(_) => 1,
            Self::Config(_) | Self::Io(_) => 2,
            Self::Numeric(E::Domain(_) | E::Resolution { .. }) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "refobj",
    version,
    about = "Reference-frame transmission experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal encoding coefficients as `two_j,coefficient`.
    Coeffs {
        #[arg(long)]
        n_spins: usize,
        /// Recompute even-N coefficients from the exact Toeplitz matrix.
        #[arg(long)]
        exact_even: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Likelihood `p(θ)` on `grid` equally spaced points of `[0, π]`.
    Likelihood {
        #[arg(long)]
        n_spins: usize,
        #[arg(long)]
        grid: usize,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Mean alignment error against N.
    ErrorScaling {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Monte Carlo rounds for a config; writes records, manifest and timing.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's round count.
        #[arg(long)]
        rounds: Option<usize>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Disturbance constant and trace-distance bounds.
    Disturbance {
        #[arg(long)]
        k: usize,
        /// Also evaluate the finite-N fidelity.
        #[arg(long)]
        n_spins: Option<usize>,
        /// Relative tolerance for the constant.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Brute-force tensor-product checks.
    Verify {
        #[arg(long, default_value_t = MAX_SPINS)]
        max_spins: usize,
        /// Random group-element pairs per spin count.
        #[arg(long, default_value_t = 4)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs with the process's standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs with explicit output and diagnostic streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "refobj: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Coeffs {
            n_spins,
            exact_even,
            out: o,
        } => {
            let spec = if exact_even {
                EncodingSpec::exact(n_spins)
            } else {
                EncodingSpec::new(n_spins)
            }
            .map_err(CliError::from_core)?;
            let rows: Vec<Vec<String>> = spec
                .terms()
                .map(|(tj, a)| vec![tj.to_string(), fmt_f64(a)])
                .collect();
            emit(
                &csv_string(&["two_j", "coefficient"], &rows)?,
                o.out.as_deref(),
                out,
            )
        }
        Command::Likelihood {
            n_spins,
            grid,
            out: o,
            svg,
        } => {
            if grid < 2 {
                return Err(CliError::Config("--grid needs at least 2 points".into()));
            }
            let spec = EncodingSpec::new(n_spins).map_err(CliError::from_core)?;
            let pts: Vec<(f64, f64)> = (0..grid)
                .map(|i| {
                    let t = std::f64::consts::PI * i as f64 / (grid - 1) as f64;
                    (t, overlap(&spec, t).powi(2))
                })
                .collect();
            let rows: Vec<Vec<String>> = pts
                .iter()
                .map(|&(t, p)| vec![fmt_f64(t), fmt_f64(p)])
                .collect();
            emit(&csv_string(&["theta", "p"], &rows)?, o.out.as_deref(), out)?;
            if let Some(path) = svg {
                let title = format!("p(θ), N = {n_spins}");
                write_file(&path, &svg::line_plot(&title, "θ", "p", &pts))?;
            }
            Ok(())
        }
        Command::ErrorScaling {
            n_min,
            n_max,
            step,
            out: o,
            svg,
        } => {
            if n_min < 2 || n_max < n_min || step == 0 {
                return Err(CliError::Config(
                    "need 2 <= n-min <= n-max and step >= 1".into(),
                ));
            }
            let mut rows = Vec::new();
            let mut pts = Vec::new();
            for n in (n_min..=n_max).step_by(step) {
                let spec = EncodingSpec::new(n).map_err(CliError::from_core)?;
                let e =
                    average_error(&spec, &HaarGrid::for_spins(n)).map_err(CliError::from_core)?;
                let scaled = (n * n) as f64 * e;
                rows.push(vec![n.to_string(), fmt_f64(e), fmt_f64(scaled)]);
                pts.push((n as f64, scaled));
            }
            let header = ["n_spins", "avg_error", "n2_times_e"];
            emit(&csv_string(&header, &rows)?, o.out.as_deref(), out)?;
            if let Some(path) = svg {
                write_file(&path, &svg::line_plot("N² ⟨e⟩", "N", "N² ⟨e⟩", &pts))?;
            }
            Ok(())
        }
        Command::Simulate {
            config,
            rounds,
            seed,
            out: dir,
        } => {
            let mut cfg = config::RunConfig::from_path(&config)?;
            if let Some(r) = rounds {
                cfg.rounds = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let cfg = cfg.validated()?;
            let threads = simulate::threads_from_env()?;
            let res = simulate::simulate(&cfg, &dir, threads)?;
            let _ = writeln!(
                out,
                "wrote {} rounds to {} (config {})",
                cfg.rounds,
                dir.display(),
                res.config_hash
            );
            Ok(())
        }
        Command::Disturbance {
            k,
            n_spins,
            tol,
            out: o,
        } => {
            let lambda = lambda_constant(tol).map_err(CliError::from_core)?;
            let mut report = DisturbanceReport::new(k, lambda).map_err(CliError::from_core)?;
            if let Some(n) = n_spins {
                report = report
                    .with_finite_j(n, &HaarGrid::for_spins(n))
                    .map_err(CliError::from_core)?;
            }
            let finite_j = match report.finite_j {
                None => serde_json::Value::Null,
                Some(f) => json!({
                    "n_spins": f.n_spins,
                    "fidelity": json_f64(f.fidelity),
                    "lower": json_f64(f.lower),
                    "upper": json_f64(f.upper),
                }),
            };
            let v = json!({
                "lambda": json_f64(report.lambda),
                "k": report.k,
                "fidelity": json_f64(report.fidelity_limit),
                "lower": json_f64(report.lower_bound),
                "upper": json_f64(report.upper_bound),
                "finite_j": finite_j,
            });
            emit(&json_string(&v), o.out.as_deref(), out)
        }
        Command::Verify {
            max_spins,
            pairs,
            seed,
        } => {
            let checks = run_checks(max_spins, pairs, seed).map_err(CliError::from_core)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                let _ = writeln!(out, "{}", format_outcome(c));
            }
            let _ = writeln!(out, "{} checks, {} failed", checks.len(), failed);
            if failed > 0 {
                Err(CliError::Verification(failed))
            } else {
                Ok(())
            }
        }
    }
}
