//! Refinement study of the discrete operator against the exact one.

use crate::error::Result;
use crate::grid::{sample, Grid, ScalarField};
use crate::heisenberg::{AnalyticFunction, Point};
use crate::operator::{operator_a, EnergyParams};

use super::least_squares_slope;
use super::ls::MEASURE_LAYERS;

/// Errors at or below this level are rounding, not truncation.
pub const EXACT_LEVEL: f64 = 1e-9;
pub const MIN_SLOPE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub preset: AnalyticFunction,
    pub resolutions: Vec<usize>,
    pub spacing: Vec<f64>,
    /// Max over measured nodes of `|A_h u − A u|`.
    pub errors: Vec<f64>,
    /// `NaN` when every error is at rounding level.
    pub slope: f64,
}

impl ConsistencyRow {
    /// Exact at every level, or converging at order ≥ [`MIN_SLOPE`].
    pub fn exact(&self) -> bool {
        self.errors.iter().all(|&e| e <= EXACT_LEVEL)
    }

    pub fn pass(&self) -> bool {
        self.exact() || self.slope >= MIN_SLOPE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    /// Max over interior nodes and resolutions of `|Δ_H t|`.
    pub vertical_residual: f64,
}

impl ConsistencyReport {
    pub const CSV_HEADER: &'static str = "preset,resolution,spacing,max_error,slope,pass";
    pub const VERTICAL_TOL: f64 = 1e-10;

    pub fn pass(&self) -> bool {
        self.rows.iter().all(ConsistencyRow::pass) && self.vertical_residual <= Self::VERTICAL_TOL
    }

    pub fn csv_rows(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            for k in 0..r.resolutions.len() {
                out.push(format!(
                    "{},{},{:e},{:e},{:e},{}",
                    r.preset.id(),
                    r.resolutions[k],
                    r.spacing[k],
                    r.errors[k],
                    r.slope,
                    r.pass()
                ));
            }
        }
        out.push(format!(
            "coordinate-t,all,,{:e},,{}",
            self.vertical_residual,
            self.vertical_residual <= Self::VERTICAL_TOL
        ));
        out
    }
}

/// Runs each preset through the `p = 2` operator on the box at every
/// resolution (nodes per axis).
pub fn consistency_study(
    presets: &[AnalyticFunction],
    lower: Point,
    upper: Point,
    resolutions: &[usize],
) -> Result<ConsistencyReport> {
    let params = EnergyParams::new(2.0, 0.0)?;
    let grids = resolutions
        .iter()
        .map(|&n| Grid::new(lower, upper, [n; 3]))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &preset in presets {
        let mut errors = Vec::new();
        let mut spacing = Vec::new();
        for grid in &grids {
            errors.push(operator_error(
                grid,
                |q| preset.eval(q),
                |q| preset.operator_value(q, 0.0, 2.0),
            )?);
            spacing.push(max_spacing(grid));
        }
        let slope = fitted_order(&spacing, &errors);
        rows.push(ConsistencyRow {
            preset,
            resolutions: resolutions.to_vec(),
            spacing,
            errors,
            slope,
        });
    }
    let mut vertical_residual = 0.0f64;
    for grid in &grids {
        let a = operator_a(grid, &sample(&AnalyticFunction::CoordinateT, grid), params)?;
        for i in grid.interior_mask().iter_true() {
            vertical_residual = vertical_residual.max(a.values()[i].abs());
        }
    }
    Ok(ConsistencyReport {
        rows,
        vertical_residual,
    })
}

/// Max over measured nodes of `|A_h u − exact|` for the `p = 2` operator.
pub fn operator_error(
    grid: &Grid,
    u: impl Fn(Point) -> f64,
    exact: impl Fn(Point) -> f64,
) -> Result<f64> {
    let field = ScalarField::from_fn(grid, |_, q| u(q));
    let a = operator_a(grid, &field, EnergyParams::new(2.0, 0.0)?)?;
    Ok(grid
        .inner_mask(MEASURE_LAYERS)
        .iter_true()
        .map(|i| (a.values()[i] - exact(grid.point(i))).abs())
        .fold(0.0, f64::max))
}

pub fn max_spacing(grid: &Grid) -> f64 {
    grid.spacing().into_iter().fold(0.0, f64::max)
}

/// Log-log slope of error against spacing over the levels above rounding;
/// `NaN` when fewer than two remain.
pub fn fitted_order(spacing: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = spacing
        .iter()
        .zip(errors)
        .filter(|&(_, &e)| e > EXACT_LEVEL)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() >= 2 {
        least_squares_slope(&pts).0
    } else {
        f64::NAN
    }
}

/// Presets of the standard study. The stencil reproduces both exactly, as it
/// does every quadratic.
pub fn standard_presets() -> [AnalyticFunction; 2] {
    [
        AnalyticFunction::HorizontalParaboloid { a: 0.0, b: 1.0 },
        AnalyticFunction::FullParaboloid { a: 0.0, b: 1.0 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_study() {
        let r = consistency_study(
            &standard_presets(),
            Point::new(-1.0, -1.0, -1.0),
            Point::new(1.0, 1.0, 1.0),
            &[9, 17, 33],
        )
        .unwrap();
        assert!(r.rows.iter().all(ConsistencyRow::exact), "{r:?}");
        assert!(r.vertical_residual <= 1e-10);
        assert!(r.pass());
    }

    #[test]
    fn smooth_function_converges() {
        // u = sin(x + t): X u = (1 + 2y) cos(x + t), Y u = −2x cos(x + t),
        // so Δ_H u = −sin(x + t) ((1 + 2y)² + 4x²).
        let mut spacing = Vec::new();
        let mut errors = Vec::new();
        for n in [9, 17, 33] {
            let g = Grid::cube(1.0, n).unwrap();
            let exact = |q: Point| -(q.x + q.t).sin() * ((1.0 + 2.0 * q.y).powi(2) + 4.0 * q.x * q.x);
            errors.push(operator_error(&g, |q| (q.x + q.t).sin(), exact).unwrap());
            spacing.push(max_spacing(&g));
        }
        let slope = fitted_order(&spacing, &errors);
        assert!(slope >= MIN_SLOPE, "{slope} {errors:?}");
    }
}
