//! Command-line surface.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qball_core::functionals::Method;

use crate::commands::{self, Run};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "qball", version, about = "Gauged Q-ball profile solver")]
pub struct Cli {
    /// Run configuration (TOML); may also be given positionally.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for `sweep`.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,
    /// Node count; overrides `grid.n`.
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Truncation radius in decay lengths; overrides `grid.rmax_sigma`.
    #[arg(long = "rmax-sigma", global = true)]
    pub rmax_sigma: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the admissibility predicates.
    Validate { config: Option<PathBuf> },
    /// Run the minimiser and check the solution.
    Solve { config: Option<PathBuf> },
    /// Run the shooting oracle and check the solution.
    Oracle { config: Option<PathBuf> },
    /// Run both solvers and tabulate their differences.
    Compare { config: Option<PathBuf> },
    /// Charge against `g_inf` over `sweep.g_inf`.
    Sweep { config: Option<PathBuf> },
    /// Re-run the clause checks on a stored profile.
    Verify { profile: PathBuf, config: Option<PathBuf> },
    /// Emit SVG figures from a run directory.
    Plot { run_dir: PathBuf },
}

impl Cli {
    fn config_path(&self, positional: &Option<PathBuf>) -> Result<PathBuf> {
        match (positional, &self.config) {
            (Some(a), Some(b)) if a != b => Err(CliError::Usage(format!(
                "config given twice: {} and {}",
                a.display(),
                b.display()
            ))),
            (Some(p), _) | (None, Some(p)) => Ok(p.clone()),
            (None, None) => Err(CliError::Usage("missing <config>".into())),
        }
    }

    fn load(&self, positional: &Option<PathBuf>) -> Result<RunConfig> {
        let path = self.config_path(positional)?;
        let mut cfg = RunConfig::load(&path)?;
        if let Some(n) = self.grid_n {
            cfg.grid.n = n;
        }
        if let Some(x) = self.rmax_sigma {
            cfg.grid.rmax_sigma = x;
        }
        cfg.check().map_err(|message| CliError::Config { path, message })?;
        Ok(cfg)
    }

    fn run_for(&self, positional: &Option<PathBuf>) -> Result<Run> {
        let config = self.load(positional)?;
        let out = self.out.clone().unwrap_or_else(|| config.output.dir.clone());
        Ok(Run {
            config,
            out,
            workers: self.workers.map(|k| k as usize),
        })
    }

    pub fn execute(&self, w: &mut dyn Write) -> Result<()> {
        match &self.command {
            Command::Validate { config } => commands::validate(&self.load(config)?, w),
            Command::Solve { config } => commands::solve(&self.run_for(config)?, Method::Minimizer, w),
            Command::Oracle { config } => commands::solve(&self.run_for(config)?, Method::Shooting, w),
            Command::Compare { config } => commands::compare(&self.run_for(config)?, w),
            Command::Sweep { config } => commands::sweep(&self.run_for(config)?, w),
            Command::Verify { profile, config } => {
                let cfg = self.load(config)?;
                commands::verify(profile, &cfg, self.out.as_deref(), w)
            }
            Command::Plot { run_dir } => {
                let out = self.out.clone().unwrap_or_else(|| run_dir.clone());
                commands::plot(run_dir, &out, w)
            }
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match cli.execute(out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
