//! Minimization of the discrete energy below an obstacle, and of its
//! penalized companion.
//!
//! Both solvers run gradient descent with a spectral (Barzilai–Borwein) trial
//! step and monotone Armijo backtracking along the projection arc. Line-search
//! decisions use [`energy_change`], which resolves energy decreases far below
//! the rounding level of the energy itself.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{sample, Grid, Mask, ScalarField};
use crate::heisenberg::AnalyticFunction;
use crate::operator::{
    energy, energy_change, energy_gradient, obstacle_operator_bound, EnergyParams, PenaltyParams,
};

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Trial step used at the start of each backtracking search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    /// Barzilai–Borwein step from the previous iterate pair.
    Spectral,
    /// Twice the previously accepted step.
    Expanding,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once the sup-norm of the projected gradient, divided by the cell
    /// weight (i.e. measured in operator units), drops to this value.
    pub tol: f64,
    pub max_iter: usize,
    pub step: StepPolicy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 200_000,
            step: StepPolicy::Spectral,
        }
    }
}

/// Grid, obstacle, boundary datum, energy parameters and solver settings.
#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    pub grid: Grid,
    pub psi: ScalarField,
    pub psi_fn: AnalyticFunction,
    pub u_star: ScalarField,
    pub u_star_fn: AnalyticFunction,
    pub params: EnergyParams,
    pub options: SolveOptions,
}

impl ObstacleProblem {
    pub fn new(
        grid: Grid,
        psi_fn: AnalyticFunction,
        u_star_fn: AnalyticFunction,
        params: EnergyParams,
        options: SolveOptions,
    ) -> Result<Self> {
        let psi = sample(&psi_fn, &grid);
        let u_star = sample(&u_star_fn, &grid);
        if psi.values().iter().chain(u_star.values()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("obstacle or boundary datum"));
        }
        let count = grid
            .boundary_mask()
            .iter_true()
            .filter(|&i| u_star.values()[i] > psi.values()[i])
            .count();
        if count > 0 {
            return Err(Error::InfeasibleDatum { count });
        }
        if !(options.tol > 0.0) {
            return Err(Error::param("tol", "solver tolerance must be positive"));
        }
        Ok(ObstacleProblem {
            grid,
            psi,
            psi_fn,
            u_star,
            u_star_fn,
            params,
            options,
        })
    }

    pub fn with_params(&self, params: EnergyParams) -> Self {
        ObstacleProblem {
            params,
            ..self.clone()
        }
    }

    /// `−1 + min(min ψ, min u_star)` over the closed box.
    pub fn lower_barrier(&self) -> f64 {
        -1.0 + self.psi.min().min(self.u_star.min())
    }

    /// Reporting threshold for the contact set, `1e-8 (1 + ‖ψ‖_∞)`.
    pub fn active_tolerance(&self) -> f64 {
        1e-8 * (1.0 + self.psi.sup_norm())
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub u: ScalarField,
    /// `λ = −∇E(u)` on interior nodes.
    pub multiplier: ScalarField,
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub step_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// Nodes with `ψ − u ≤ τ_active`.
    pub active: Mask,
}

impl SolverResult {
    /// Rebuilds multiplier and contact set for an arbitrary field, as if it
    /// had come out of a converged solve.
    pub fn from_field(prob: &ObstacleProblem, u: ScalarField) -> Result<Self> {
        let g = energy_gradient(&prob.grid, &u, prob.params)?;
        let e = energy(&prob.grid, &u, prob.params, None)? / prob.params.p();
        Ok(SolverResult {
            multiplier: g.map(|v| -v),
            active: active_set(prob, &u),
            u,
            energy_history: vec![e],
            residual_history: vec![0.0],
            step_history: vec![0.0],
            iterations: 0,
            converged: true,
            residual: 0.0,
        })
    }

    /// `A(u) = λ / w`.
    pub fn operator_values(&self, grid: &Grid) -> ScalarField {
        let w = grid.cell_weight();
        self.multiplier.map(|v| v / w)
    }

    /// `iter,energy,grad_norm,step`.
    pub fn write_history_csv_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "iter,energy,grad_norm,step")?;
        for (k, ((e, r), s)) in self
            .energy_history
            .iter()
            .zip(&self.residual_history)
            .zip(&self.step_history)
            .enumerate()
        {
            writeln!(out, "{k},{e:e},{r:e},{s:e}")?;
        }
        Ok(())
    }

    pub fn write_history_csv(&self, path: &Path) -> Result<()> {
        let mut file =
            std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        self.write_history_csv_to(&mut file)
            .and_then(|_| file.flush())
            .map_err(|e| Error::io(path, e))
    }
}

fn active_set(prob: &ObstacleProblem, u: &ScalarField) -> Mask {
    let tol = prob.active_tolerance();
    Mask::from_fn(&prob.grid, |i| {
        !prob.grid.is_boundary(i) && prob.psi.values()[i] - u.values()[i] <= tol
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `p = 2, ε = 1` extension of the boundary values of `datum` into the box,
/// by conjugate gradients on the interior unknowns.
fn quadratic_extension(grid: &Grid, datum: &ScalarField) -> Result<ScalarField> {
    let prm = EnergyParams::new(2.0, 1.0)?;
    let mut u = datum.clone();
    let mut r = energy_gradient(grid, &u, prm)?.map(|v| -v);
    let mut d = r.clone();
    let mut rr = dot(r.values(), r.values());
    let r0 = rr.sqrt();
    if r0 == 0.0 {
        return Ok(u);
    }
    // Only a starting guess: a loose relative tolerance suffices.
    for _ in 0..2000 {
        if rr.sqrt() <= 1e-8 * r0 {
            break;
        }
        let kd = energy_gradient(grid, &d, prm)?;
        let dkd = dot(d.values(), kd.values());
        if !(dkd > 0.0) {
            break;
        }
        let alpha = rr / dkd;
        for i in 0..u.len() {
            u.values[i] += alpha * d.values[i];
            r.values[i] -= alpha * kd.values[i];
        }
        let rr_new = dot(r.values(), r.values());
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..d.len() {
            d.values[i] = r.values[i] + beta * d.values[i];
        }
    }
    Ok(u)
}

/// Smooth objective plus optional upper bound, shared by both solvers.
struct Objective<'a> {
    grid: &'a Grid,
    params: EnergyParams,
    penalty: Option<&'a PenaltyParams>,
    upper: Option<&'a ScalarField>,
}

impl Objective<'_> {
    fn value(&self, u: &ScalarField) -> Result<f64> {
        let mut e = energy(self.grid, u, self.params, None)? / self.params.p();
        if let Some(pen) = self.penalty {
            e += pen.value_and_accumulate(self.grid, u, None);
        }
        Ok(e)
    }

    fn gradient(&self, u: &ScalarField) -> Result<ScalarField> {
        let mut g = energy_gradient(self.grid, u, self.params)?;
        if let Some(pen) = self.penalty {
            pen.value_and_accumulate(self.grid, u, Some(g.values_mut()));
        }
        Ok(g)
    }

    fn change(&self, u: &ScalarField, d: &ScalarField) -> Result<f64> {
        let mut de = energy_change(self.grid, u, d, self.params)?;
        if let Some(pen) = self.penalty {
            de += penalty_change(self.grid, pen, u, d);
        }
        Ok(de)
    }

    /// Sup-norm of the projected gradient in operator units.
    fn residual(&self, u: &ScalarField, g: &ScalarField) -> f64 {
        let w = self.grid.cell_weight();
        let mut worst = 0.0f64;
        for i in 0..u.len() {
            let gi = g.values[i];
            let pg = match self.upper {
                Some(psi) if u.values[i] >= psi.values[i] => gi.max(0.0),
                _ => gi,
            };
            worst = worst.max(pg.abs());
        }
        worst / w
    }

    fn project(&self, u: &mut ScalarField) {
        if let Some(psi) = self.upper {
            for (v, &b) in u.values.iter_mut().zip(&psi.values) {
                if *v > b {
                    *v = b;
                }
            }
        }
    }
}

fn penalty_change(grid: &Grid, pen: &PenaltyParams, u: &ScalarField, d: &ScalarField) -> f64 {
    let w = grid.cell_weight();
    let eta = pen.eta();
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let di = d.values[i];
        if di == 0.0 || grid.is_boundary(i) {
            continue;
        }
        let h = pen.h().values[i];
        if h == 0.0 {
            continue;
        }
        acc += h * ramp_increment(u.values[i], di, pen.psi().values[i], eta);
    }
    acc * w
}

/// `Φ(r + δ) − Φ(r)` for the ramp antiderivative, evaluated piecewise without
/// cancellation when both ends share a piece.
fn ramp_increment(r: f64, delta: f64, psi: f64, eta: f64) -> f64 {
    let start = psi - eta;
    let piece = |s: f64| {
        if s <= start {
            0
        } else if s < psi {
            1
        } else {
            2
        }
    };
    let (a, b) = (r, r + delta);
    match (piece(a), piece(b)) {
        (0, 0) => 0.0,
        (1, 1) => delta * ((a - start) + (b - start)) / (2.0 * eta),
        (2, 2) => delta,
        _ => {
            let phi = |s: f64| match piece(s) {
                0 => 0.0,
                1 => (s - start) * (s - start) / (2.0 * eta),
                _ => 0.5 * eta + (s - psi),
            };
            phi(b) - phi(a)
        }
    }
}

fn descend(obj: &Objective<'_>, mut u: ScalarField, options: SolveOptions) -> Result<DescentOutcome> {
    obj.project(&mut u);
    let mut g = obj.gradient(&u)?;
    let mut e = obj.value(&u)?;
    let mut energy_history = vec![e];
    let mut residual = obj.residual(&u, &g);
    let mut residual_history = vec![residual];
    let mut step_history = vec![0.0];

    // Initial trial step: a unit move in the sup-norm.
    let gmax = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut alpha = if gmax > 0.0 { 1.0 / gmax } else { 1.0 };
    let mut converged = residual <= options.tol;
    let mut iterations = 0;
    let mut trial = u.clone();
    let mut d = ScalarField::zeros(obj.grid);

    while !converged && iterations < options.max_iter {
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..u.len() {
                trial.values[i] = u.values[i] - step * g.values[i];
            }
            obj.project(&mut trial);
            for i in 0..u.len() {
                d.values[i] = trial.values[i] - u.values[i];
            }
            let slope = dot(g.values(), d.values());
            if slope >= 0.0 {
                break;
            }
            let de = obj.change(&u, &d)?;
            if de <= ARMIJO_C * slope {
                accepted = Some(de);
                break;
            }
            step *= SHRINK;
        }
        let Some(de) = accepted else {
            break;
        };
        std::mem::swap(&mut u, &mut trial);
        let g_new = obj.gradient(&u)?;
        let sy: f64 = d
            .values
            .iter()
            .zip(g_new.values.iter().zip(&g.values))
            .map(|(s, (a, b))| s * (a - b))
            .sum();
        let ss = dot(d.values(), d.values());
        alpha = match options.step {
            StepPolicy::Spectral if sy > 0.0 => (ss / sy).clamp(1e-30, 1e30),
            _ => 2.0 * step,
        };
        g = g_new;
        e += de;
        iterations += 1;
        residual = obj.residual(&u, &g);
        energy_history.push(e);
        residual_history.push(residual);
        step_history.push(step);
        converged = residual <= options.tol;
    }

    Ok(DescentOutcome {
        u,
        gradient: g,
        energy_history,
        residual_history,
        step_history,
        iterations,
        converged,
        residual,
    })
}

struct DescentOutcome {
    u: ScalarField,
    gradient: ScalarField,
    energy_history: Vec<f64>,
    residual_history: Vec<f64>,
    step_history: Vec<f64>,
    iterations: usize,
    converged: bool,
    residual: f64,
}

fn initial_iterate(grid: &Grid, boundary: &ScalarField, psi: &ScalarField) -> Result<ScalarField> {
    let mut u = quadratic_extension(grid, boundary)?.zip_map(psi, f64::min);
    for i in grid.boundary_mask().iter_true() {
        u.values[i] = boundary.values[i];
    }
    Ok(u)
}

fn finish(prob: &ObstacleProblem, out: DescentOutcome) -> SolverResult {
    let mut multiplier = out.gradient.map(|v| -v);
    for i in prob.grid.boundary_mask().iter_true() {
        multiplier.values[i] = 0.0;
    }
    SolverResult {
        active: active_set(prob, &out.u),
        u: out.u,
        multiplier,
        energy_history: out.energy_history,
        residual_history: out.residual_history,
        step_history: out.step_history,
        iterations: out.iterations,
        converged: out.converged,
        residual: out.residual,
    }
}

/// Minimizes `E = (1/p)·energy` over `{u ≤ ψ, u = u_star on the boundary}`.
///
/// Exhausting the iteration budget is not an error: the best iterate comes
/// back with `converged = false`.
pub fn solve_obstacle(prob: &ObstacleProblem) -> Result<SolverResult> {
    let init = initial_iterate(&prob.grid, &prob.u_star, &prob.psi)?;
    let obj = Objective {
        grid: &prob.grid,
        params: prob.params,
        penalty: None,
        upper: Some(&prob.psi),
    };
    let out = descend(&obj, init, prob.options)?;
    Ok(finish(prob, out))
}

/// Minimizes `(1/p)·energy + Σ F_η(u) w` with boundary values taken from
/// `boundary`, without any constraint. The bound field is the exact
/// `(A ψ)⁺` of the obstacle preset.
pub fn solve_penalized(
    prob: &ObstacleProblem,
    eta: f64,
    boundary: &ScalarField,
) -> Result<SolverResult> {
    if boundary.len() != prob.grid.len() {
        return Err(Error::FieldSize {
            expected: prob.grid.len(),
            got: boundary.len(),
        });
    }
    let h = obstacle_operator_bound(&prob.psi_fn, &prob.grid, prob.params);
    let penalty = PenaltyParams::new(eta, h, prob.psi.clone())?;
    solve_with_penalty(prob, &penalty, boundary)
}

pub fn solve_with_penalty(
    prob: &ObstacleProblem,
    penalty: &PenaltyParams,
    boundary: &ScalarField,
) -> Result<SolverResult> {
    let init = initial_iterate(&prob.grid, boundary, &prob.psi)?;
    let obj = Objective {
        grid: &prob.grid,
        params: prob.params,
        penalty: Some(penalty),
        upper: None,
    };
    let out = descend(&obj, init, prob.options)?;
    Ok(finish(prob, out))
}

/// Outcome of probing the variational inequality along random feasible
/// directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ViReport {
    pub trials: usize,
    pub skipped: usize,
    /// `min ⟨∇E(u), v − u⟩ / (w Σ|v − u|)` over the trials.
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Checks `⟨∇E(u), v − u⟩ ≥ 0` for random admissible `v`: Gaussian
/// perturbations of `u`, clipped to the obstacle and pinned to the datum.
pub fn vi_residual_check(
    result: &SolverResult,
    prob: &ObstacleProblem,
    trials: usize,
    seed: u64,
) -> Result<ViReport> {
    let grid = &prob.grid;
    let w = grid.cell_weight();
    let g = energy_gradient(grid, &result.u, prob.params)?;
    let scale = 0.1 * (1.0 + result.u.sup_norm());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut skipped = 0;
    for _ in 0..trials {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..grid.len() {
            let z: f64 = StandardNormal.sample(&mut rng);
            if grid.is_boundary(i) {
                continue;
            }
            let v = (result.u.values[i] + scale * z).min(prob.psi.values[i]);
            let d = v - result.u.values[i];
            num += g.values[i] * d;
            den += d.abs();
        }
        if den == 0.0 {
            skipped += 1;
            continue;
        }
        worst = worst.min(num / (w * den));
    }
    let threshold = -10.0 * prob.options.tol;
    Ok(ViReport {
        trials,
        skipped,
        worst,
        threshold,
        pass: worst >= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(
        n: usize,
        psi: AnalyticFunction,
        u_star: AnalyticFunction,
        p: f64,
        eps: f64,
        tol: f64,
    ) -> ObstacleProblem {
        ObstacleProblem::new(
            Grid::cube(1.0, n).unwrap(),
            psi,
            u_star,
            EnergyParams::new(p, eps).unwrap(),
            SolveOptions {
                tol,
                ..SolveOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn infeasible_datum_is_rejected() {
        let err = ObstacleProblem::new(
            Grid::cube(1.0, 5).unwrap(),
            AnalyticFunction::Constant(0.0),
            AnalyticFunction::Constant(1.0),
            EnergyParams::new(2.0, 0.0).unwrap(),
            SolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleDatum { count: 98 }));
    }

    #[test]
    fn constant_datum_gives_constant_solution() {
        let prob = problem(
            9,
            AnalyticFunction::Constant(1e6),
            AnalyticFunction::Constant(0.7),
            3.0,
            0.1,
            1e-10,
        );
        let res = solve_obstacle(&prob).unwrap();
        assert!(res.converged);
        assert!(res.u.values().iter().all(|&v| (v - 0.7).abs() < 1e-12));
        assert!(res.multiplier.values().iter().all(|&v| v.abs() < 1e-12));
        assert_eq!(res.active.count(), 0);
    }

    #[test]
    fn horizontal_coordinate_is_harmonic() {
        let prob = problem(
            9,
            AnalyticFunction::Constant(1e6),
            AnalyticFunction::CoordinateX,
            2.0,
            0.0,
            1e-9,
        );
        let res = solve_obstacle(&prob).unwrap();
        assert!(res.converged);
        for i in 0..prob.grid.len() {
            assert!((res.u.values()[i] - prob.grid.point(i).x).abs() < 1e-8);
        }
    }

    /// Cyclic coordinate descent with exact 1-D minimization, run to
    /// stagnation: an oracle independent of the gradient machinery.
    fn coordinate_descent(prob: &ObstacleProblem) -> ScalarField {
        let grid = &prob.grid;
        let mut u = prob.u_star.zip_map(&prob.psi, f64::min);
        for i in grid.boundary_mask().iter_true() {
            u.values_mut()[i] = prob.u_star.values()[i];
        }
        let interior: Vec<usize> = grid.interior_mask().iter_true().collect();
        let e = |u: &ScalarField| energy(grid, u, prob.params, None).unwrap();
        for _sweep in 0..4000 {
            let mut moved = 0.0f64;
            for &i in &interior {
                // For p = 2 the energy is quadratic in u_i: fit it exactly
                // from three evaluations.
                let base = u.values()[i];
                let f0 = e(&u);
                u.values_mut()[i] = base + 1.0;
                let f1 = e(&u);
                u.values_mut()[i] = base - 1.0;
                let fm = e(&u);
                let a = 0.5 * (f1 + fm - 2.0 * f0);
                let b = 0.5 * (f1 - fm);
                let step = if a > 0.0 { -b / (2.0 * a) } else { 0.0 };
                let new = (base + step).min(prob.psi.values()[i]);
                u.values_mut()[i] = new;
                moved = moved.max((new - base).abs());
            }
            if moved < 1e-13 {
                break;
            }
        }
        u
    }

    #[test]
    fn valley_contact_matches_coordinate_descent_oracle() {
        let prob = problem(
            9,
            AnalyticFunction::Valley { a: 0.5, b: 2.0 },
            AnalyticFunction::Constant(0.0),
            2.0,
            0.0,
            1e-9,
        );
        let res = solve_obstacle(&prob).unwrap();
        assert!(res.converged);
        let oracle = coordinate_descent(&prob);
        for i in 0..prob.grid.len() {
            assert!(
                (res.u.values()[i] - oracle.values()[i]).abs() < 1e-7,
                "node {i}: {} vs {}",
                res.u.values()[i],
                oracle.values()[i]
            );
        }
        let centre = prob.grid.index(4, 4, 4);
        assert!(res.active.get(centre));
        let w = prob.grid.cell_weight();
        for i in res.active.iter_true() {
            assert!(res.multiplier.values()[i] >= -10.0 * prob.options.tol * w);
        }
        let vi = vi_residual_check(&res, &prob, 200, 1).unwrap();
        assert!(vi.pass, "{vi:?}");
    }

    #[test]
    fn iterates_stay_feasible_and_energy_decreases() {
        let prob = problem(
            9,
            AnalyticFunction::Valley { a: 0.5, b: 2.0 },
            AnalyticFunction::CoordinateX,
            3.0,
            0.1,
            1e-8,
        );
        let res = solve_obstacle(&prob).unwrap();
        assert!(res.converged);
        for win in res.energy_history.windows(2) {
            assert!(win[1] <= win[0] + 1e-12);
        }
        for i in 0..prob.grid.len() {
            assert!(res.u.values()[i] <= prob.psi.values()[i] + 1e-14);
        }
        for i in prob.grid.boundary_mask().iter_true() {
            assert_eq!(res.u.values()[i], prob.u_star.values()[i]);
        }
        let direct = energy(&prob.grid, &res.u, prob.params, None).unwrap() / 3.0;
        let tracked = *res.energy_history.last().unwrap();
        assert!((direct - tracked).abs() < 1e-9 * direct.abs());
        assert!(res.u.min() >= prob.lower_barrier() - prob.options.tol);
    }

    #[test]
    fn budget_exhaustion_returns_best_iterate() {
        let mut prob = problem(
            9,
            AnalyticFunction::Valley { a: 0.5, b: 2.0 },
            AnalyticFunction::Constant(0.0),
            2.0,
            0.0,
            1e-12,
        );
        prob.options.max_iter = 3;
        let res = solve_obstacle(&prob).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 3);
        assert_eq!(res.energy_history.len(), 4);
    }

    #[test]
    fn zero_bound_penalty_reduces_to_unconstrained_problem() {
        // (A t)⁺ = 0 for p = 2, so the penalty vanishes identically.
        let prob = problem(
            9,
            AnalyticFunction::CoordinateT,
            AnalyticFunction::Valley { a: 3.0, b: 0.5 },
            2.0,
            0.0,
            1e-9,
        );
        let free = problem(
            9,
            AnalyticFunction::Constant(1e6),
            AnalyticFunction::Valley { a: 3.0, b: 0.5 },
            2.0,
            0.0,
            1e-9,
        );
        let reference = solve_obstacle(&free).unwrap();
        let pen = solve_penalized(&prob, 0.1, &prob.u_star).unwrap();
        assert!(pen.converged);
        for i in 0..prob.grid.len() {
            assert!((pen.u.values()[i] - reference.u.values()[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn ramp_increment_matches_direct_difference() {
        let phi = |s: f64, psi: f64, eta: f64| {
            if s <= psi - eta {
                0.0
            } else if s < psi {
                (s - psi + eta).powi(2) / (2.0 * eta)
            } else {
                0.5 * eta + s - psi
            }
        };
        for &(r, d) in &[(-1.0, 0.1), (0.25, 0.1), (0.25, -0.5), (0.6, 0.2), (0.1, 1.0)] {
            let (psi, eta) = (0.5, 0.3);
            let got = ramp_increment(r, d, psi, eta);
            assert!((got - (phi(r + d, psi, eta) - phi(r, psi, eta))).abs() < 1e-14);
        }
    }

    #[test]
    fn history_csv_layout() {
        let prob = problem(
            5,
            AnalyticFunction::Constant(1e6),
            AnalyticFunction::CoordinateT,
            2.0,
            0.0,
            1e-8,
        );
        let res = solve_obstacle(&prob).unwrap();
        let mut buf = Vec::new();
        res.write_history_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,energy,grad_norm,step\n0,"));
        assert_eq!(text.lines().count(), res.energy_history.len() + 1);
    }
}
