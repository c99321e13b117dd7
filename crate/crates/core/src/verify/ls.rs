//! Two-sided dual estimate `0 ≤ A(ū) ≤ (A ψ)⁺` on the measured interior.

use crate::error::{Error, Result};
use crate::grid::{Mask, ScalarField};
use crate::operator::{discrete_obstacle_operator_bound, obstacle_operator_bound};
use crate::solver::{ObstacleProblem, SolverResult};

/// Distance from the faces, in lattice steps, below which operator values
/// are not measured.
pub const MEASURE_LAYERS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct LsReport {
    pub measured: usize,
    pub min_operator: f64,
    /// `max (A(ū) − (A ψ)⁺)` over measured nodes.
    pub max_excess: f64,
    /// Same excess against the discrete operator of the sampled obstacle.
    pub max_excess_discrete: f64,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub tol: f64,
    pub active_nodes: usize,
    pub interior_nodes: usize,
}

impl LsReport {
    pub fn pass(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0
    }

    pub fn active_fraction(&self) -> f64 {
        self.active_nodes as f64 / self.interior_nodes.max(1) as f64
    }

    pub const CSV_HEADER: &'static str = "measured,min_operator,max_excess,max_excess_discrete,lower_violations,upper_violations,tol,active_nodes,interior_nodes,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{},{:e},{},{},{}",
            self.measured,
            self.min_operator,
            self.max_excess,
            self.max_excess_discrete,
            self.lower_violations,
            self.upper_violations,
            self.tol,
            self.active_nodes,
            self.interior_nodes,
            self.pass()
        )
    }
}

/// Default pass bar: multiplier noise scales with the solver tolerance, which
/// is already expressed in operator units.
pub fn default_tolerance(prob: &ObstacleProblem) -> f64 {
    (10.0 * prob.options.tol).max(1e-6)
}

pub fn ls_check(result: &SolverResult, prob: &ObstacleProblem, tol: f64) -> Result<LsReport> {
    if !result.converged {
        return Err(Error::NotConverged {
            iterations: result.iterations,
            residual: result.residual,
        });
    }
    let grid = &prob.grid;
    let a_u = result.operator_values(grid);
    let bound = obstacle_operator_bound(&prob.psi_fn, grid, prob.params);
    let discrete = discrete_obstacle_operator_bound(&prob.psi_fn, grid, prob.params);
    let measured = grid.inner_mask(MEASURE_LAYERS);
    Ok(tally(&a_u, &bound, &discrete, &measured, result, prob, tol))
}

fn tally(
    a_u: &ScalarField,
    bound: &ScalarField,
    discrete: &ScalarField,
    measured: &Mask,
    result: &SolverResult,
    prob: &ObstacleProblem,
    tol: f64,
) -> LsReport {
    let mut report = LsReport {
        measured: 0,
        min_operator: f64::INFINITY,
        max_excess: f64::NEG_INFINITY,
        max_excess_discrete: f64::NEG_INFINITY,
        lower_violations: 0,
        upper_violations: 0,
        tol,
        active_nodes: result.active.count(),
        interior_nodes: prob.grid.interior_mask().count(),
    };
    for i in measured.iter_true() {
        let a = a_u.values()[i];
        let excess = a - bound.values()[i];
        report.measured += 1;
        report.min_operator = report.min_operator.min(a);
        report.max_excess = report.max_excess.max(excess);
        report.max_excess_discrete = report.max_excess_discrete.max(a - discrete.values()[i]);
        if a < -tol {
            report.lower_violations += 1;
        }
        if excess > tol {
            report.upper_violations += 1;
        }
    }
    report
}

/// Pushes the solution down by `depth · bump` around the deepest contact
/// node; the result is no longer a constrained minimizer and must fail
/// [`ls_check`].
pub fn negative_control(
    result: &SolverResult,
    prob: &ObstacleProblem,
    depth: f64,
) -> Result<SolverResult> {
    let grid = &prob.grid;
    let measured = grid.inner_mask(MEASURE_LAYERS);
    let centre = result
        .active
        .and(&measured)
        .iter_true()
        .max_by(|&a, &b| {
            // Deepest in the contact set: farthest from any non-contact node,
            // approximated by the most negative obstacle value.
            prob.psi.values()[b].total_cmp(&prob.psi.values()[a])
        })
        .ok_or(Error::EmptyMask)?;
    let c = grid.point(centre);
    let h = grid.spacing();
    let radius = 3.0 * h[0].max(h[1]).max(h[2]);
    let u = ScalarField::from_fn(grid, |i, p| {
        let r2 = ((p.x - c.x).powi(2) + (p.y - c.y).powi(2) + (p.t - c.t).powi(2))
            / (radius * radius);
        let bump = if r2 < 1.0 { (1.0 - r2).powi(2) } else { 0.0 };
        result.u.values()[i] - depth * bump
    });
    SolverResult::from_field(prob, u)
}
