//! Browser bindings: a small obstacle solve, a penalization profile and the
//! Folland–Korányi ball, each returned as flat arrays for canvas drawing.

use hpo::grid::fk_ball_mask;
use hpo::solver::{solve_obstacle, solve_penalized};
use hpo::{AnalyticFunction, EnergyParams, Grid, ObstacleProblem, Point, Result, ScalarField, SolveOptions};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request. p < 2 with ε = 0 still takes a few
/// seconds at this size.
pub const MAX_NODES: usize = 17;

fn valley(n: usize, p: f64, eps: f64, depth: f64) -> Result<ObstacleProblem> {
    if n > MAX_NODES {
        return Err(hpo::Error::InvalidParameter {
            name: "n",
            reason: format!("at most {MAX_NODES} nodes per axis"),
        });
    }
    ObstacleProblem::new(
        Grid::cube(1.0, n)?,
        AnalyticFunction::Valley { a: depth, b: 2.0 },
        AnalyticFunction::Constant(0.0),
        EnergyParams::new(p, eps)?,
        SolveOptions {
            tol: 1e-6,
            ..SolveOptions::default()
        },
    )
}

/// Values on the `t = 0` plane, row-major in `(y, x)`.
fn mid_plane(grid: &Grid, f: &ScalarField) -> Vec<f64> {
    let [nx, ny, nt] = grid.dims();
    let it = nt / 2;
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            out.push(f.values()[grid.index(ix, iy, it)]);
        }
    }
    out
}

/// Values along the `x` axis (`y = t = 0`).
fn x_axis(grid: &Grid, f: &ScalarField) -> Vec<f64> {
    let [nx, ny, nt] = grid.dims();
    (0..nx).map(|ix| f.values()[grid.index(ix, ny / 2, nt / 2)]).collect()
}

/// Solves the valley problem on an `n³` grid and returns the `t = 0` plane
/// as `[u..., ψ...]` (each `n²` values).
pub fn obstacle_plane(n: usize, p: f64, eps: f64, depth: f64) -> Result<Vec<f64>> {
    let prob = valley(n, p, eps, depth)?;
    let res = solve_obstacle(&prob)?;
    let mut out = mid_plane(&prob.grid, &res.u);
    out.extend(mid_plane(&prob.grid, &prob.psi));
    Ok(out)
}

/// Obstacle solution, penalized solution and obstacle along the `x` axis,
/// concatenated as `[ū..., u_η..., ψ...]`.
pub fn penalty_profile(n: usize, eta: f64, depth: f64) -> Result<Vec<f64>> {
    let prob = valley(n, 2.0, 0.0, depth)?;
    let exact = solve_obstacle(&prob)?;
    let pen = solve_penalized(&prob, eta, &exact.u)?;
    let mut out = x_axis(&prob.grid, &exact.u);
    out.extend(x_axis(&prob.grid, &pen.u));
    out.extend(x_axis(&prob.grid, &prob.psi));
    Ok(out)
}

/// Ball `B(0, radius)` on the `y = 0` plane of an `n³` grid over `[-1, 1]³`,
/// row-major in `(t, x)`, 1 inside.
pub fn ball_plane(n: usize, radius: f64) -> Result<Vec<u8>> {
    let grid = Grid::cube(1.0, n)?;
    let mask = fk_ball_mask(&grid, Point::ORIGIN, radius);
    let [nx, ny, nt] = grid.dims();
    let mut out = Vec::with_capacity(nx * nt);
    for it in 0..nt {
        for ix in 0..nx {
            out.push(u8::from(mask.get(grid.index(ix, ny / 2, it))));
        }
    }
    Ok(out)
}

fn js(e: hpo::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen(js_name = obstaclePlane)]
pub fn obstacle_plane_js(n: usize, p: f64, eps: f64, depth: f64) -> std::result::Result<Vec<f64>, JsValue> {
    obstacle_plane(n, p, eps, depth).map_err(js)
}

#[wasm_bindgen(js_name = penaltyProfile)]
pub fn penalty_profile_js(n: usize, eta: f64, depth: f64) -> std::result::Result<Vec<f64>, JsValue> {
    penalty_profile(n, eta, depth).map_err(js)
}

#[wasm_bindgen(js_name = ballPlane)]
pub fn ball_plane_js(n: usize, radius: f64) -> std::result::Result<Vec<u8>, JsValue> {
    ball_plane(n, radius).map_err(js)
}
