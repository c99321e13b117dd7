use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use hpo::config::{default_out_dir, RunConfig, KEYS};
use hpo::run::{exit_code, run_command, Command, RunOptions};
use hpo::Result;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Solve the obstacle problem and check the variational inequality.
    Solve,
    /// Solve the penalized problems and check the sandwich estimate.
    Penalize,
    /// Solve and check the two-sided dual estimate.
    LsCheck,
    /// Sweep ε and fit the gradient convergence rate.
    EpsSweep,
    /// Randomized pointwise inequality suite.
    Lemmas,
    /// Refinement study of the discrete operator.
    Consistency,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Penalize => Command::Penalize,
            Cmd::LsCheck => Command::LsCheck,
            Cmd::EpsSweep => Command::EpsSweep,
            Cmd::Lemmas => Command::Lemmas,
            Cmd::Consistency => Command::Consistency,
        }
    }
}

/// Obstacle problems for the horizontal p-Laplacian on the Heisenberg group.
///
/// Exit status is 0 when every check passes, 1 when a check fails or a solve
/// does not converge, and 2 for configuration errors.
#[derive(Debug, Parser)]
#[command(version, after_help = keys_help())]
struct Cli {
    command: Cmd,
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Random trials per lemma.
    #[arg(long)]
    trials: Option<usize>,
    /// Perturb the solution before the dual-estimate check (ls-check only).
    #[arg(long)]
    negative_control: bool,
    /// Extra `key=value` override; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn keys_help() -> String {
    let mut s = String::from("Configuration keys:\n");
    for (key, default, meaning) in KEYS {
        s.push_str(&format!("  {key:<14} {meaning} [default: {default}]\n"));
    }
    s
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    let mut pairs = Vec::new();
    for kv in &cli.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(hpo::Error::ConfigValue {
                key: kv.clone(),
                reason: "expected KEY=VALUE".into(),
            });
        };
        pairs.push((k.trim(), v.trim()));
    }
    cfg.apply(&pairs)?;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        let opts = RunOptions {
            out: cli.out.clone().unwrap_or_else(default_out_dir),
            negative_control: cli.negative_control,
        };
        run_command(cli.command.into(), &cfg, &opts)
    });
    match &result {
        Ok(outcome) => {
            for r in &outcome.reports {
                println!("{}", r.summary());
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
