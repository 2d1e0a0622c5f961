//! Command-line front end: configuration, run orchestration and output files.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_certify, cmd_run, convergence_study, linear_check, load_config, picard_study, simulate, CommandError,
    ConvergenceStudy, LinearCheck, PicardStudy, RunOutput, SpatialStudy, TemporalStudy,
};
pub use config::{parse_config, ConfigError, EosKind, InitialKind, RunConfig, TimeStep, Tolerances};

use crate::dynamics::PicardOptions;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CERTIFICATE_FAILURE: u8 = 1;
pub const EXIT_INPUT_ERROR: u8 = 2;
pub const EXIT_BLOW_UP: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "spinodal", version, about = "Viscous spinodal-decomposition simulator and energy certifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (for `certify`, the run directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides the random initial-data seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Overrides the tolerance of the command (certificate or linear check).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate and write energies.csv, snapshots.csv and report.txt.
    Run,
    /// Re-check both energy certificates from a run directory.
    Certify {
        /// Run directory; falls back to --out.
        dir: Option<PathBuf>,
    },
    /// Temporal and spatial self-convergence study.
    Converge,
    /// Picard iteration on the mild formulation.
    Picard {
        /// Time horizon T.
        #[arg(long, default_value_t = 0.01)]
        horizon: f64,
        /// Quadrature substeps on [0, T].
        #[arg(long, default_value_t = PicardOptions::default().substeps)]
        substeps: usize,
        #[arg(long, default_value_t = PicardOptions::default().max_iterations)]
        max_iterations: usize,
    },
    /// Single-mode linear benchmark against its closed form.
    LinearCheck,
}

fn report_error(e: &CommandError) -> u8 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> u8 {
    match execute_inner(cli) {
        Ok(code) => code,
        Err(e) => report_error(&e),
    }
}

fn execute_inner(cli: Cli) -> Result<u8, CommandError> {
    if let Command::Certify { dir } = &cli.command {
        let dir = dir
            .clone()
            .or(cli.out.clone())
            .ok_or_else(|| CommandError::Input("certify needs a run directory".into()))?;
        let (energy, rate) = cmd_certify(&dir, cli.tol)?;
        print!("{energy}\n{rate}");
        let pass = energy.certified() && rate.certified();
        println!("\noverall = {}", if pass { "PASS" } else { "FAIL" });
        return Ok(if pass { EXIT_PASS } else { EXIT_CERTIFICATE_FAILURE });
    }

    let (mut cfg, text) = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out {
        cfg.output_dir = Some(dir.clone());
    }
    let overridden = cli.seed.is_some() || cli.out.is_some() || cli.tol.is_some();

    match cli.command {
        Command::Run => {
            if let Some(tol) = cli.tol {
                cfg.tolerances.certificate = tol;
            }
            cfg.validate()?;
            let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            // keep the user's text verbatim unless flags changed the effective configuration
            let text = if overridden { cfg.serialize() } else { text };
            let out = cmd_run(&cfg, &text, &dir)?;
            println!("wrote {}", dir.display());
            println!("t_final = {}", out.trajectory.final_state.t);
            println!("snapshots = {}", out.trajectory.len());
            println!("mass_drift = {:e}", out.mass_drift);
            for rep in [&out.energy, &out.rate].into_iter().flatten() {
                println!("{}: {}", rep.estimate.name(), if rep.certified() { "PASS" } else { "FAIL" });
            }
            Ok(EXIT_PASS)
        }
        Command::Converge => {
            let study = convergence_study(&cfg)?;
            print!("{}", commands::convergence_table(&study));
            Ok(EXIT_PASS)
        }
        Command::Picard {
            horizon,
            substeps,
            max_iterations,
        } => {
            let options = PicardOptions {
                substeps,
                max_iterations,
                tol: cli.tol.unwrap_or(PicardOptions::default().tol),
            };
            let study = picard_study(&cfg, horizon, options)?;
            print!("{}", commands::picard_table(&study));
            Ok(EXIT_PASS)
        }
        Command::LinearCheck => {
            if let Some(tol) = cli.tol {
                cfg.tolerances.linear = tol;
            }
            cfg.validate()?;
            let check = linear_check(&cfg)?;
            print!("{}", commands::linear_table(&check));
            Ok(if check.pass() { EXIT_PASS } else { EXIT_CERTIFICATE_FAILURE })
        }
        Command::Certify { .. } => unreachable!("handled above"),
    }
}
