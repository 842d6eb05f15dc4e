//! Command-line driver: parses the run configuration, dispatches to a
//! subcommand and writes a manifest next to its outputs.
//!
//! Exit codes: 0 success, 2 an assumption fails, 3 a verification check
//! fails, 1 anything else.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use levycouple::contraction::KConvention;
use serde::Serialize;

use crate::commands::CommandOutcome;
use crate::config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_FEASIBILITY: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "levycouple",
    version,
    about = "Contraction constants and coupled simulation for Levy-driven SDEs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Base seed; overrides `[simulation] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the ensemble.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub k_convention: Option<KConventionArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Compute C_eps, C_delta, m, R0, R1, c1, K, a, c and the prefactors.
    Constants,
    /// Tabulate phi, Phi, g, f1 and f.
    BuildDistance,
    /// Run the coupled ensemble and summarize it.
    Simulate,
    /// Check the contraction and corollary envelopes on a simulated ensemble.
    Verify,
    /// Recompute the alpha = 3/2 step-profile example.
    ReproduceExample,
    /// Compare a brute-force kappa with the drift's profile.
    KappaOracle,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::BuildDistance => "build-distance",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::ReproduceExample => "reproduce-example",
            Command::KappaOracle => "kappa-oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KConventionArg {
    Proof,
    Statement,
}

impl From<KConventionArg> for KConvention {
    fn from(k: KConventionArg) -> Self {
        match k {
            KConventionArg::Proof => KConvention::Proof,
            KConventionArg::Statement => KConvention::Statement,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    config_path: Option<&'a Path>,
    seed: Option<u64>,
    threads: Option<usize>,
    status: &'a str,
    error: Option<String>,
    outputs: Vec<String>,
    config: Option<&'a RunConfig>,
}

/// Applies the command-line overrides to the file configuration.
pub fn resolve(cli: &Cli) -> Result<Option<RunConfig>> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.simulation.threads = Some(t);
    }
    if let Some(k) = cli.k_convention {
        cfg.distance.k_convention = k.into();
    }
    Ok(Some(cfg))
}

fn dispatch(cli: &Cli, cfg: Option<&RunConfig>, dir: &Path) -> Result<CommandOutcome> {
    let need = || cfg.context("this subcommand needs --config");
    match cli.command {
        Command::Constants => commands::constants(need()?, dir),
        Command::BuildDistance => commands::build_distance(need()?, dir),
        Command::Simulate => commands::simulate(need()?, dir),
        Command::Verify => commands::verify(need()?, dir),
        Command::ReproduceExample => {
            let k = cli
                .k_convention
                .map(Into::into)
                .or(cfg.map(|c| c.distance.k_convention));
            commands::reproduce_example(dir, k)
        }
        Command::KappaOracle => commands::kappa_oracle(need()?, dir),
    }
}

/// Exit code for an error: 2 when an assumption fails, 1 otherwise.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    let feasibility = err
        .chain()
        .filter_map(|e| e.downcast_ref::<levycouple::Error>())
        .any(|e| e.assumption().is_some());
    if feasibility {
        EXIT_FEASIBILITY
    } else {
        EXIT_OTHER
    }
}

/// Runs one subcommand and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_OTHER;
        }
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().map(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("levycouple-out"));
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return EXIT_OTHER;
    }
    let result = dispatch(cli, cfg.as_ref(), &dir);
    let (code, status, error, files) = match &result {
        Ok(o) if o.verified == Some(false) => (EXIT_VERIFICATION, "verification-failed", None, o.files.clone()),
        Ok(o) => (EXIT_OK, "ok", None, o.files.clone()),
        Err(e) => {
            let code = exit_code_for(e);
            let status = if code == EXIT_FEASIBILITY {
                "infeasible"
            } else {
                "error"
            };
            (code, status, Some(format!("{e:#}")), Vec::new())
        }
    };
    let manifest = Manifest {
        subcommand: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        config_path: cli.config.as_deref(),
        seed: cfg.as_ref().map(|c| c.simulation.seed),
        threads: cfg.as_ref().and_then(|c| c.simulation.threads),
        status,
        error: error.clone(),
        outputs: files
            .iter()
            .filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        config: cfg.as_ref(),
    };
    let written = serde_json::to_string_pretty(&manifest)
        .map_err(anyhow::Error::from)
        .and_then(|t| fs::write(dir.join("manifest.json"), t + "\n").map_err(Into::into));
    if let Err(e) = written {
        eprintln!("error: cannot write manifest: {e:#}");
    }
    if let Some(msg) = error {
        eprintln!("error: {msg}");
    } else if code == EXIT_VERIFICATION {
        eprintln!("verification failed; see {}", dir.display());
    }
    code
}
