//! Numerical checks of the dual estimate, the penalization sandwich, the
//! ε-rates and the pointwise inequality suite.

/// Least-squares slope and intercept of `y` against `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub mod consistency;
pub mod lemmas;
pub mod ls;
pub mod quadrature;
pub mod rates;
pub mod sandwich;
