//! Command dispatch: builds problems from a [`RunConfig`], runs the requested
//! study and writes its artifacts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operator::EnergyParams;
use crate::report::{emit_report, Manifest, Report};
use crate::solver::{solve_obstacle, vi_residual_check, ObstacleProblem, SolveOptions, SolverResult};
use crate::verify::consistency::{consistency_study, standard_presets};
use crate::verify::lemmas::{lemma_suite, stability};
use crate::verify::ls::{default_tolerance, ls_check, negative_control};
use crate::verify::rates::eps_sweep;
use crate::verify::sandwich::sandwich_sweep;

/// Random directions probed by the variational-inequality check after a solve.
pub const VI_TRIALS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Penalize,
    LsCheck,
    EpsSweep,
    Lemmas,
    Consistency,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Solve,
        Command::Penalize,
        Command::LsCheck,
        Command::EpsSweep,
        Command::Lemmas,
        Command::Consistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Penalize => "penalize",
            Command::LsCheck => "ls-check",
            Command::EpsSweep => "eps-sweep",
            Command::Lemmas => "lemmas",
            Command::Consistency => "consistency",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::param("command", format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Replace the solution by a perturbed one before the dual-estimate check.
    pub negative_control: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub reports: Vec<Report>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(Report::pass)
    }
}

/// Exit status: 0 on pass, 1 when a check fails or a solve does not
/// converge, 2 for configuration and usage errors.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.pass() => 0,
        Ok(_) => 1,
        Err(e) if is_usage_error(e) => 2,
        Err(_) => 1,
    }
}

pub fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config { .. }
            | Error::ConfigValue { .. }
            | Error::InvalidParameter { .. }
            | Error::UnknownPreset(_)
            | Error::PresetArity { .. }
            | Error::DegenerateBox
            | Error::UndersizedResolution(_)
            | Error::InfeasibleDatum { .. }
            | Error::Io { .. }
    )
}

pub fn build_problem(cfg: &RunConfig) -> Result<ObstacleProblem> {
    let grid = Grid::new(cfg.box_lower, cfg.box_upper, cfg.resolution)?;
    ObstacleProblem::new(
        grid,
        cfg.psi,
        cfg.u_star,
        EnergyParams::new(cfg.p, cfg.eps)?,
        SolveOptions {
            tol: cfg.tol,
            ..SolveOptions::default()
        },
    )
}

pub fn run_command(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    cfg.validate()?;
    let out = &opts.out;
    let mut notes = Vec::new();
    let reports = match cmd {
        Command::Solve => {
            let prob = build_problem(cfg)?;
            let res = solve_obstacle(&prob)?;
            write_solution(&prob, &res, out, "solution.csv")?;
            notes.push(convergence_note(&res));
            let mut vi = vi_residual_check(&res, &prob, VI_TRIALS, cfg.seed)?;
            vi.pass &= res.converged;
            vec![Report::Vi(vi)]
        }
        Command::Penalize => {
            let prob = build_problem(cfg)?;
            let (obstacle, runs) = sandwich_sweep(&prob, &cfg.eta_list, 1e-4)?;
            write_solution(&prob, &obstacle, out, "solution.csv")?;
            for (k, (pen, _)) in runs.iter().enumerate() {
                pen.u.write_csv(&prob.grid, &out.join(format!("penalized_{k}.csv")))?;
            }
            vec![Report::Sandwich(runs.into_iter().map(|(_, r)| r).collect())]
        }
        Command::LsCheck => {
            let prob = build_problem(cfg)?;
            let mut res = solve_obstacle(&prob)?;
            notes.push(convergence_note(&res));
            if opts.negative_control {
                res = negative_control(&res, &prob, cfg.control_depth)?;
                notes.push(format!("negative control, depth {}", cfg.control_depth));
            }
            write_solution(&prob, &res, out, "solution.csv")?;
            let tol = cfg.verify_tol.unwrap_or_else(|| default_tolerance(&prob));
            vec![Report::Ls(ls_check(&res, &prob, tol)?)]
        }
        Command::EpsSweep => {
            let prob = build_problem(cfg)?;
            vec![Report::Rates(eps_sweep(&prob, &cfg.eps_list, cfg.radius)?)]
        }
        Command::Lemmas => {
            let base = lemma_suite(cfg.seed, cfg.trials)?;
            let doubled = lemma_suite(cfg.seed, 2 * cfg.trials)?;
            let stability = stability(&base, &doubled);
            vec![Report::Lemmas {
                reports: base,
                stability,
            }]
        }
        Command::Consistency => vec![Report::Consistency(consistency_study(
            &standard_presets(),
            cfg.box_lower,
            cfg.box_upper,
            &cfg.resolutions,
        )?)],
    };
    let manifest = Manifest {
        command: cmd.name().to_string(),
        seed: cfg.seed,
        config: cfg.emit(),
        notes,
    };
    let mut files = solution_files(cmd, cfg, out);
    files.extend(emit_report(&reports, &manifest, out)?);
    Ok(Outcome { reports, files })
}

fn convergence_note(res: &SolverResult) -> String {
    format!(
        "solver: {} after {} iterations, residual {:e}",
        if res.converged { "converged" } else { "stopped" },
        res.iterations,
        res.residual
    )
}

fn write_solution(prob: &ObstacleProblem, res: &SolverResult, dir: &Path, name: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    res.u.write_csv(&prob.grid, &dir.join(name))?;
    res.write_history_csv(&dir.join("history.csv"))
}

fn solution_files(cmd: Command, cfg: &RunConfig, dir: &Path) -> Vec<PathBuf> {
    let mut v = Vec::new();
    if matches!(cmd, Command::Solve | Command::Penalize | Command::LsCheck) {
        v.push(dir.join("solution.csv"));
        v.push(dir.join("history.csv"));
    }
    if cmd == Command::Penalize {
        v.extend((0..cfg.eta_list.len()).map(|k| dir.join(format!("penalized_{k}.csv"))));
    }
    v
}
