//! Two-sided comparison between the obstacle solution `ū` and the penalized
//! solution `u_η`: `u_η ≤ ψ`, `u_η ≤ ū ≤ u_η + η`.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::solver::{solve_obstacle, solve_penalized, ObstacleProblem, SolverResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub eta: f64,
    pub tol: f64,
    /// `max (u_η − ψ)`.
    pub above_obstacle: f64,
    /// `max (u_η − ū)`.
    pub above_solution: f64,
    /// `max (ū − u_η − η)`.
    pub below_shifted: f64,
    /// `sup |u_η − ū|`.
    pub sup_gap: f64,
    /// `min ū` and the barrier `μ` it must stay above.
    pub min_solution: f64,
    pub barrier: f64,
    /// `‖u_η‖_∞` and the a priori bound `2 + ‖ψ‖_∞ + ‖u_star‖_∞`.
    pub penalized_sup: f64,
    pub sup_bound: f64,
}

impl SandwichReport {
    pub const CSV_HEADER: &'static str = "eta,tol,above_obstacle,above_solution,below_shifted,sup_gap,min_solution,barrier,penalized_sup,sup_bound,pass";

    pub fn pass(&self) -> bool {
        self.above_obstacle <= self.tol
            && self.above_solution <= self.tol
            && self.below_shifted <= self.tol
            && self.sup_gap <= self.eta + self.tol
            && self.min_solution >= self.barrier - 1e-8
            && self.penalized_sup <= self.sup_bound
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.eta,
            self.tol,
            self.above_obstacle,
            self.above_solution,
            self.below_shifted,
            self.sup_gap,
            self.min_solution,
            self.barrier,
            self.penalized_sup,
            self.sup_bound,
            self.pass()
        )
    }
}

pub fn sandwich_check(
    obstacle: &SolverResult,
    penalized: &SolverResult,
    prob: &ObstacleProblem,
    eta: f64,
    tol: f64,
) -> Result<SandwichReport> {
    let n = prob.grid.len();
    if obstacle.u.len() != n || penalized.u.len() != n {
        return Err(Error::GridMismatch);
    }
    for r in [obstacle, penalized] {
        if !r.converged {
            return Err(Error::NotConverged {
                iterations: r.iterations,
                residual: r.residual,
            });
        }
    }
    let ub = obstacle.u.values();
    let ue = penalized.u.values();
    let psi = prob.psi.values();
    let mut report = SandwichReport {
        eta,
        tol,
        above_obstacle: f64::NEG_INFINITY,
        above_solution: f64::NEG_INFINITY,
        below_shifted: f64::NEG_INFINITY,
        sup_gap: 0.0,
        min_solution: obstacle.u.min(),
        barrier: prob.lower_barrier(),
        penalized_sup: penalized.u.sup_norm(),
        sup_bound: 2.0 + prob.psi.sup_norm() + prob.u_star.sup_norm(),
    };
    for i in 0..n {
        report.above_obstacle = report.above_obstacle.max(ue[i] - psi[i]);
        report.above_solution = report.above_solution.max(ue[i] - ub[i]);
        report.below_shifted = report.below_shifted.max(ub[i] - ue[i] - eta);
        report.sup_gap = report.sup_gap.max((ue[i] - ub[i]).abs());
    }
    Ok(report)
}

/// Solves the obstacle problem once and the penalized problem for every `η`,
/// using the obstacle solution's boundary trace for the latter.
pub fn sandwich_sweep(
    prob: &ObstacleProblem,
    etas: &[f64],
    tol: f64,
) -> Result<(SolverResult, Vec<(SolverResult, SandwichReport)>)> {
    let obstacle = solve_obstacle(prob)?;
    let boundary: &ScalarField = &obstacle.u;
    let mut out = Vec::with_capacity(etas.len());
    for &eta in etas {
        let pen = solve_penalized(prob, eta, boundary)?;
        let report = sandwich_check(&obstacle, &pen, prob, eta, tol)?;
        out.push((pen, report));
    }
    Ok((obstacle, out))
}
