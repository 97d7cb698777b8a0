//! Command-line front end: configuration, figure commands and file output.

pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::CommandOutput;
pub use config::RunConfig;
pub use csv::CsvTable;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(crate::Error),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Library errors caused by bad input become configuration errors.
    pub fn from_input(e: crate::Error) -> Self {
        if e.is_numerical() {
            Self::Numerical(e)
        } else {
            Self::Config(e.to_string())
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        Self::from_input(e)
    }
}

const AFTER_HELP: &str = "\
Output columns (rho11 is the top-left matrix entry, i.e. the population of |1>;
the state |0> = (0,1)^T sits in rho22):
  fig1_avg.csv, fig1_single_<k>.csv   t,rho11,re_rho12,im_rho12
  fig1_fidelity.csv                   t,F,F_mean   (F of the mean state, mean of F)
  fig2_sigma.csv                      tau,integral,sigma_T<T>...
  fig2_inset.csv                      tau,P_g,mPg_T<T>...
  s1_elements.csv                     t,rho11,rho22,re_rho12,im_rho12
  s2_metrics.csv                      t,trace_distance,P_e
  ledger.csv                          t,W_stab,Delta_L,varsigma,xi,Delta_L_controlled
  tstar_sweep.csv                     t_star,P_e,coherence_mismatch,population_mismatch,delta_E_evol,delta_L_evol

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.";

#[derive(Debug, Parser)]
#[command(name = "oqb", version, about = "Open quantum battery stabilization simulator", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// key = value configuration file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long = "t-star", global = true)]
    pub t_star: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long = "t-fin", global = true)]
    pub t_fin: Option<f64>,
    /// Output directory (created if missing)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write an SVG chart next to every CSV
    #[arg(long, global = true)]
    pub svg: bool,
    /// Worker threads for ensembles (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.realizations {
            cfg.realizations = v;
        }
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.t_star {
            cfg.t_star = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.t_fin {
            cfg.t_fin = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ensemble-averaged state, single runs and fidelity
    Fig1,
    /// Zeno entropic cost against the measurement period
    Fig2 {
        /// Periods as start:step:stop or a comma list
        #[arg(long = "tau-grid", default_value = "0.02:0.01:0.3")]
        tau_grid: String,
        /// Zeno-phase durations, comma separated
        #[arg(long = "t-zeno", default_value = "0.4,1,2,3,4,5,6")]
        t_zeno: String,
        /// Count floor(T/tau) measurements instead of T/tau
        #[arg(long)]
        whole_count: bool,
    },
    /// Measurement-free evolution from |0><0|
    Uncontrolled,
    /// Work and loss ledgers with closed-form cross-checks
    Ledger,
    /// Initialization trade-offs against the first measurement time
    SweepTstar {
        /// Candidate times as start:step:stop or a comma list
        #[arg(long = "t-grid", default_value = "0:0.01:0.6")]
        t_grid: String,
    },
}

/// Parses `start:step:stop` (inclusive) or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("bad grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|k| start + k as f64 * step).collect()
        }
        [_] => text.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    let cfg = cli.overrides.resolve()?;
    let svg = cli.overrides.svg;
    match &cli.command {
        Command::Fig1 => commands::fig1(&cfg, svg),
        Command::Fig2 {
            tau_grid,
            t_zeno,
            whole_count,
        } => {
            let count = if *whole_count {
                crate::thermo::ZenoCount::Whole
            } else {
                crate::thermo::ZenoCount::Mean
            };
            commands::fig2(&cfg, &parse_grid(tau_grid)?, &parse_grid(t_zeno)?, count, svg)
        }
        Command::Uncontrolled => commands::uncontrolled(&cfg, svg),
        Command::Ledger => commands::ledger(&cfg, svg),
        Command::SweepTstar { t_grid } => commands::sweep_tstar(&cfg, &parse_grid(t_grid)?, svg),
    }
}

/// Six significant digits, switching to exponent form outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}
