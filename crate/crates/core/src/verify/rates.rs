//! Convergence of `∇_H ū_ε` to `∇_H ū_0` on a Folland–Korányi ball as `ε ↘ 0`.

use crate::error::{Error, Result};
use crate::grid::{ball_average, fk_ball_mask, lp_norm_p, Mask};
use crate::heisenberg::{Point, HOMOGENEOUS_DIMENSION};
use crate::operator::{horizontal_gradient, EnergyParams};
use crate::solver::{solve_obstacle, ObstacleProblem, SolverResult};

use super::least_squares_slope;

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub p: f64,
    pub radius: f64,
    pub eps: Vec<f64>,
    /// `∫_{B_R} |∇_H ū_0 − ∇_H ū_ε|^p` per ε.
    pub values: Vec<f64>,
    /// Solver tolerance of every solve in the sweep.
    pub tol: f64,
    /// Values below this are solver noise and left out of the fit.
    pub noise_floor: f64,
    pub fitted: usize,
    /// `NaN` when fewer than two values clear the noise floor.
    pub slope: f64,
    pub exponent: f64,
    /// `(1 + (|∇_H ū_0|^p)_R)^power`.
    pub prefactor: f64,
    pub power: f64,
    /// `value / (prefactor · ε^exponent · R^Q)` per ε.
    pub constants: Vec<f64>,
}

impl RateReport {
    pub const CSV_HEADER: &'static str = "p,radius,eps,value,norm,constant,exponent,slope,prefactor,noise_floor";

    /// `(∫ |·|^p)^{1/p}` per ε.
    pub fn norms(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.powf(1.0 / self.p)).collect()
    }

    /// Fitted slope reaches 90% of the theoretical exponent and values do not
    /// grow as ε shrinks (5% slack). At `p = 2` the minimizers coincide, so
    /// every gradient-difference norm must instead sit below `10 τ`.
    pub fn pass(&self) -> bool {
        if self.p == 2.0 {
            return self.norms().iter().all(|&n| n <= 10.0 * self.tol);
        }
        self.slope >= 0.9 * self.exponent && self.is_monotone(0.05)
    }

    /// Values may not grow as ε shrinks, up to `rel` slack.
    pub fn is_monotone(&self, rel: f64) -> bool {
        self.values
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + rel) || w[1] <= self.noise_floor)
    }

    pub fn csv_rows(&self) -> Vec<String> {
        let norms = self.norms();
        (0..self.eps.len())
            .map(|k| {
                format!(
                    "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                    self.p,
                    self.radius,
                    self.eps[k],
                    self.values[k],
                    norms[k],
                    self.constants[k],
                    self.exponent,
                    self.slope,
                    self.prefactor,
                    self.noise_floor
                )
            })
            .collect()
    }
}

/// Rate exponent of ε and power of the ball prefactor.
pub fn theoretical_rate(p: f64) -> (f64, f64) {
    if p < 2.0 {
        ((p / 2.0).powi(2), 1.0 - p / 2.0)
    } else {
        (1.0, 1.0 - 1.0 / p)
    }
}

/// Solves the template at `ε = 0` and at every listed ε (strictly decreasing,
/// spanning at least three decades), then fits `log value` against `log ε`.
pub fn eps_sweep(template: &ObstacleProblem, eps: &[f64], radius: f64) -> Result<RateReport> {
    validate_eps_list(eps)?;
    let grid = &template.grid;
    let ball = fk_ball_mask(grid, Point::ORIGIN, radius);
    if ball.count() == 0 {
        return Err(Error::EmptyMask);
    }
    if !ball.is_subset_of(&grid.inner_mask(super::ls::MEASURE_LAYERS)) {
        return Err(Error::param("radius", "ball must lie inside the measured interior"));
    }
    let p = template.params.p();
    let base = solve_converged(&template.with_params(EnergyParams::new(p, 0.0)?))?;
    let g0 = horizontal_gradient(grid, &base.u)?;

    let mut values = Vec::with_capacity(eps.len());
    for &e in eps {
        let r = solve_converged(&template.with_params(EnergyParams::new(p, e)?))?;
        let diff = horizontal_gradient(grid, &r.u)?.sub(&g0).magnitude(grid);
        values.push(lp_norm_p(grid, diff.values(), p, &ball)?);
    }

    let (exponent, power) = theoretical_rate(p);
    let mean = ball_average(&g0.magnitude(grid).map(|m| m.powf(p)), &ball)?;
    let prefactor = (1.0 + mean).powf(power);
    let scale = radius.powf(HOMOGENEOUS_DIMENSION);
    let noise_floor = noise_floor(template, &ball);
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(&values)
        .filter(|&(_, &v)| v > noise_floor)
        .map(|(&e, &v)| (e.ln(), v.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        least_squares_slope(&pts).0
    } else {
        f64::NAN
    };
    let constants = eps
        .iter()
        .zip(&values)
        .map(|(&e, &v)| v / (prefactor * e.powf(exponent) * scale))
        .collect();
    Ok(RateReport {
        p,
        radius,
        eps: eps.to_vec(),
        values,
        tol: template.options.tol,
        noise_floor,
        fitted: pts.len(),
        slope,
        exponent,
        prefactor,
        power,
        constants,
    })
}

pub fn validate_eps_list(eps: &[f64]) -> Result<()> {
    if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::param("eps", "sweep values must be positive and finite"));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("eps", "sweep list must be strictly decreasing"));
    }
    if eps.len() < 2 || eps[0] / eps[eps.len() - 1] < 1e3 * (1.0 - 1e-12) {
        return Err(Error::param("eps", "sweep list must span at least three decades"));
    }
    Ok(())
}

/// Gradient error of a solve stopped at tolerance `τ` is taken as `10 τ`
/// per node, integrated over the ball.
fn noise_floor(prob: &ObstacleProblem, ball: &Mask) -> f64 {
    let p = prob.params.p();
    (10.0 * prob.options.tol).powf(p) * ball.count() as f64 * prob.grid.cell_weight()
}

fn solve_converged(prob: &ObstacleProblem) -> Result<SolverResult> {
    let r = solve_obstacle(prob)?;
    if !r.converged {
        return Err(Error::NotConverged {
            iterations: r.iterations,
            residual: r.residual,
        });
    }
    Ok(r)
}
