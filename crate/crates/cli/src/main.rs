use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pcc_squeeze::experiments::{self, ValidationOptions, DEFAULT_SWEEP_POINTS};
use pcc_squeeze::params::{ConfigEntries, RunConfig};
use pcc_squeeze::{DispersionModel, Error, ErrorKind};

const EXIT_PARAMETER: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pcc-squeeze",
    version,
    about = "Spin-squeezing decay of atoms in photonic-crystal reservoirs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Population and squeezing on a time grid.
    Timeseries(Common),
    /// Asymptotic squeezing over a detuning range.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Lower end of the detuning range [default: -10 beta isotropic, -beta otherwise].
        #[arg(long, allow_hyphen_values = true)]
        delta_min: Option<f64>,
        /// Upper end of the detuning range [default: 10 beta isotropic, beta otherwise].
        #[arg(long, allow_hyphen_values = true)]
        delta_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SWEEP_POINTS)]
        points: usize,
    },
    /// Detuning at which the anisotropic bound state disappears.
    Transition {
        #[command(flatten)]
        common: Common,
        /// Detuning with a bound state [default: 0].
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        /// Detuning without one [default: 0.2 beta].
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
    },
    /// Run every agreement suite and print a JSON report.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a constant phase to the oracle kernel (fault injection).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        kernel_phase_error: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` entries; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    omega_c: Option<String>,
    #[arg(long)]
    n_atoms: Option<String>,
    /// Twisting angle; accepts a `pi` suffix such as `0.15pi`.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    n_steps: Option<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut entries = match &self.config {
            Some(path) => ConfigEntries::parse(&std::fs::read_to_string(path)?)?,
            None => ConfigEntries::default(),
        };
        let flags = [
            ("model", &self.model),
            ("delta", &self.delta),
            ("beta", &self.beta),
            ("omega_c", &self.omega_c),
            ("n_atoms", &self.n_atoms),
            ("theta", &self.theta),
            ("t_max", &self.t_max),
            ("n_steps", &self.n_steps),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                entries.set(key, v)?;
            }
        }
        entries.build()
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

enum Outcome {
    Done,
    ValidationFailed,
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Timeseries(common) => {
            let cfg = common.config()?;
            let rows = experiments::run_timeseries(&cfg.reservoir, &cfg.ensemble, &cfg.grid)?;
            let mut out = output(&common.out)?;
            experiments::write_timeseries_csv(&mut out, &rows)?;
            out.flush()?;
        }
        Command::Sweep {
            common,
            delta_min,
            delta_max,
            points,
        } => {
            let cfg = common.config()?;
            let beta = cfg.reservoir.beta();
            let span = if cfg.reservoir.model() == DispersionModel::Isotropic {
                10.0 * beta
            } else {
                beta
            };
            let range = (delta_min.unwrap_or(-span), delta_max.unwrap_or(span));
            let rows = experiments::run_sweep(&cfg.reservoir, range, points, &cfg.ensemble)?;
            let mut out = output(&common.out)?;
            experiments::write_sweep_csv(&mut out, &rows)?;
            out.flush()?;
        }
        Command::Transition { common, lo, hi } => {
            let cfg = common.config()?;
            let beta = cfg.reservoir.beta();
            let delta_star = experiments::locate_transition(
                &cfg.reservoir,
                (lo.unwrap_or(0.0), hi.unwrap_or(0.2 * beta)),
            )?;
            let mut out = output(&common.out)?;
            writeln!(out, "{delta_star}")?;
            out.flush()?;
        }
        Command::Validate {
            out,
            kernel_phase_error,
        } => {
            let report =
                experiments::run_validation_with(&ValidationOptions { kernel_phase_error });
            let mut w = output(&out)?;
            serde_json::to_writer_pretty(&mut w, &report).map_err(io::Error::from)?;
            writeln!(w)?;
            w.flush()?;
            for s in &report.suites {
                eprintln!(
                    "{} {}: max deviation {:e} (tolerance {:e})",
                    if s.passed { "PASS" } else { "FAIL" },
                    s.name,
                    s.max_deviation,
                    s.tolerance
                );
            }
            if !report.passed {
                return Ok(Outcome::ValidationFailed);
            }
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARAMETER)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Numerical => ExitCode::from(EXIT_NUMERICAL),
                ErrorKind::Parameter | ErrorKind::Io => ExitCode::from(EXIT_PARAMETER),
            }
        }
    }
}
