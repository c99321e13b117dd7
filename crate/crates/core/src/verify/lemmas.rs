//! Randomized checks of the pointwise and integral inequalities used in the
//! rate estimates.
//!
//! Every inequality is cast as `ratio ≤ C`. Lemmas that only assert the
//! existence of `C` get a pinned constant: the maximum of the ratio over a
//! structured input grid, doubled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::quadrature::adaptive_simpson;

pub const EPS_RANGE: (f64, f64) = (1e-6, 1e2);
pub const DIMENSIONS: [usize; 2] = [2, 4];
/// Exponents sampled for inequalities stated on `[2, ∞)`.
pub const P_DEGENERATE: [f64; 4] = [2.0, 2.5, 3.0, 4.0];
/// Exponents sampled for inequalities stated on `(1, 2]`.
pub const P_SINGULAR: [f64; 4] = [1.25, 1.5, 1.75, 2.0];
pub const P_INTERPOLATION: [f64; 5] = [1.25, 1.5, 1.75, 2.0, 3.0];
const MAX_DIM: usize = 4;
const QUAD_TOL: f64 = 1e-10;
/// Relative slack for inequalities that are sharp and evaluated in floating
/// point (equality cases of Hölder, of the constant 1/2 as `q → 0`, ...).
const ROUNDING_SLACK: f64 = 1e-12;
const QUADRATURE_SLACK: f64 = 1e-9;
/// Relative agreement required between the closed-form and central-difference
/// derivatives in the interpolation check.
const DERIVATIVE_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `|A−B|^p ≤ C (|A|^{p−2}A − |B|^{p−2}B)·(A−B)`.
    StrongMonotonicity,
    /// `||A|^{p−2}A − |B|^{p−2}B| ≤ C |A−B| (|A|^{p−2} + |B|^{p−2})`.
    FluxLipschitz,
    /// `((ε+|a|²)^{p/2−1} − |a|^{p−2})|a| ≤ C ε (ε+|a|²)^{(p−2)/2}`.
    RegularizationGap,
    /// Derivative along `h(t) = ta + (1−t)b` bounded below by the weighted
    /// `|a−b|²`.
    InterpolationDerivative,
    /// `(ε+|a|²+|b|²)^{p/2} ≤ C[(ε+|a|²+|b|²)^{p/2−1}|b−a|² + (ε+|a|²)^{p/2}]`.
    SplitPower,
    /// `∫₀¹ (1−t)^κ / Ψ(ε+|h(t)|²) dt ≥ 1 / (2 Ψ(ε+|a|²+|b|²))`.
    MonotoneIntegrand,
    /// Weighted Hölder bound for `∫|f−g|^p`, `p ≤ 2`.
    WeightedHolder,
    /// `|(ε+θ)^{p/2} − θ^{p/2}| ≤ C ε^{p/2}`, `p ≤ 2`.
    PowerShift,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::StrongMonotonicity,
        Lemma::FluxLipschitz,
        Lemma::RegularizationGap,
        Lemma::InterpolationDerivative,
        Lemma::SplitPower,
        Lemma::MonotoneIntegrand,
        Lemma::WeightedHolder,
        Lemma::PowerShift,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Lemma::StrongMonotonicity => "Fu1",
            Lemma::FluxLipschitz => "Fu2",
            Lemma::RegularizationGap => "FuC",
            Lemma::InterpolationDerivative => "sim-h",
            Lemma::SplitPower => "from-10-to-11",
            Lemma::MonotoneIntegrand => "AT679",
            Lemma::WeightedHolder => "19pL",
            Lemma::PowerShift => "7bis0",
        }
    }

    pub fn from_code(code: &str) -> Option<Lemma> {
        Lemma::ALL.into_iter().find(|l| l.code() == code)
    }

    fn tag(self) -> u64 {
        Lemma::ALL.iter().position(|&l| l == self).unwrap() as u64 + 1
    }

    /// Exponents at which the lemma is exercised; `None` means `p` is drawn
    /// uniformly from `(1, 2]` per trial or does not enter.
    pub fn exponents(self) -> Option<&'static [f64]> {
        match self {
            Lemma::StrongMonotonicity | Lemma::FluxLipschitz | Lemma::RegularizationGap => {
                Some(&P_DEGENERATE)
            }
            Lemma::InterpolationDerivative => Some(&P_INTERPOLATION),
            Lemma::SplitPower => Some(&P_SINGULAR),
            Lemma::MonotoneIntegrand | Lemma::WeightedHolder | Lemma::PowerShift => None,
        }
    }

    fn slack(self) -> f64 {
        match self {
            Lemma::MonotoneIntegrand => QUADRATURE_SLACK,
            Lemma::WeightedHolder | Lemma::PowerShift => ROUNDING_SLACK,
            _ => 0.0,
        }
    }
}

/// Where a pinned constant comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantSource {
    /// Stated explicitly in the lemma.
    Explicit,
    /// Maximum of `|(1+τ)^{p/2} − τ^{p/2}|` over `τ ≥ 0`.
    Maximization,
    /// Twice the structured-grid maximum of the ratio, at least 1.
    DoubledGridSearch { grid_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinnedConstant {
    pub dim: usize,
    /// `None` when the constant does not depend on `p`.
    pub p: Option<f64>,
    pub value: f64,
    pub source: ConstantSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub trials: usize,
    /// `max ratio / constant` over all trials; at most `1 + slack` on pass.
    pub worst_margin: f64,
    /// Constant of the cell that attained the worst margin.
    pub constant: f64,
    pub constants: Vec<PinnedConstant>,
    pub violations: usize,
    /// Largest relative disagreement between closed-form and finite-difference
    /// derivatives; only set for the interpolation check.
    pub derivative_mismatch: Option<f64>,
}

impl LemmaReport {
    pub const CSV_HEADER: &'static str = "lemma,id,trials,worst_margin,constant,pass";

    pub fn pass(&self) -> bool {
        self.violations == 0
            && self.worst_margin.is_finite()
            && self
                .derivative_mismatch
                .is_none_or(|m| m <= DERIVATIVE_AGREEMENT)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{}",
            self.lemma.code(),
            self.lemma.tag(),
            self.trials,
            self.worst_margin,
            self.constant,
            self.pass()
        )
    }
}

/// Runs every lemma with `trials` random inputs.
pub fn lemma_suite(seed: u64, trials: usize) -> Result<Vec<LemmaReport>> {
    Lemma::ALL.iter().map(|&l| run_lemma(l, seed, trials)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub lemma: Lemma,
    pub base: f64,
    pub doubled: f64,
}

impl Stability {
    /// Worst margins agree within a factor of two.
    pub fn stable(&self) -> bool {
        if self.base == 0.0 && self.doubled == 0.0 {
            return true;
        }
        let r = self.doubled / self.base;
        r.is_finite() && (0.5..=2.0).contains(&r)
    }
}

/// Compares worst margins at `trials` and `2·trials`. Trial `k` draws the
/// same input in both runs, so the larger run extends the smaller one.
pub fn stability(base: &[LemmaReport], doubled: &[LemmaReport]) -> Vec<Stability> {
    base.iter()
        .zip(doubled)
        .map(|(a, b)| Stability {
            lemma: a.lemma,
            base: a.worst_margin,
            doubled: b.worst_margin,
        })
        .collect()
}

pub fn run_lemma(lemma: Lemma, seed: u64, trials: usize) -> Result<LemmaReport> {
    let constants = pinned_constants(lemma)?;
    let mut worst = 0.0f64;
    let mut worst_constant = constants[0].value;
    let mut violations = 0;
    let mut mismatch: Option<f64> = None;
    let bar = 1.0 + lemma.slack();
    for k in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, lemma, k as u64));
        let cell = rng.random_range(0..constants.len());
        let c = constants[cell];
        let outcome = sample_trial(lemma, c, &mut rng)?;
        if let Some(m) = outcome.derivative_mismatch {
            mismatch = Some(mismatch.unwrap_or(0.0).max(m));
        }
        let margin = outcome.ratio / c.value;
        if !(margin <= bar) {
            violations += 1;
        }
        if !(margin <= worst) {
            worst = margin;
            worst_constant = c.value;
        }
    }
    Ok(LemmaReport {
        lemma,
        trials,
        worst_margin: worst,
        constant: worst_constant,
        constants,
        violations,
        derivative_mismatch: mismatch,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn trial_seed(seed: u64, lemma: Lemma, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ lemma.tag()) ^ trial)
}

/// One constant per `(N, p)` cell of the lemma.
pub fn pinned_constants(lemma: Lemma) -> Result<Vec<PinnedConstant>> {
    let mut out = Vec::new();
    match lemma.exponents() {
        Some(ps) => {
            for &dim in &DIMENSIONS {
                for &p in ps {
                    let grid_max = grid_maximum(lemma, dim, p);
                    if !grid_max.is_finite() {
                        return Err(Error::param(
                            "constant",
                            format!("no oracle constant for {} at N={dim}, p={p}", lemma.code()),
                        ));
                    }
                    out.push(PinnedConstant {
                        dim,
                        p: Some(p),
                        value: (2.0 * grid_max).max(1.0),
                        source: ConstantSource::DoubledGridSearch { grid_max },
                    });
                }
            }
        }
        None => {
            let (value, source) = match lemma {
                Lemma::PowerShift => {
                    // p is drawn from (1, 2]; take the largest oracle value.
                    let c = (1..=20)
                        .map(|k| power_shift_constant(1.0 + 0.05 * k as f64))
                        .fold(0.0, f64::max);
                    (c, ConstantSource::Maximization)
                }
                _ => (1.0, ConstantSource::Explicit),
            };
            for &dim in &DIMENSIONS {
                out.push(PinnedConstant {
                    dim,
                    p: None,
                    value,
                    source,
                });
            }
        }
    }
    Ok(out)
}

/// `max_{τ ≥ 0} |(1+τ)^{p/2} − τ^{p/2}|` on a log grid plus `τ = 0`, for
/// `p ≤ 2`. At `p = 2` the function is identically 1; for smaller `p` it
/// decreases from 1, so the search at the endpoint covers the whole range.
pub fn power_shift_constant(p: f64) -> f64 {
    let f = |tau: f64| ((1.0 + tau).powf(0.5 * p) - tau.powf(0.5 * p)).abs();
    let mut best = f(0.0);
    for k in 0..=400 {
        let tau = 10f64.powf(-12.0 + 24.0 * k as f64 / 400.0);
        best = best.max(f(tau));
    }
    best
}

// ---------------------------------------------------------------------------
// Ratios. Each returns `lhs / rhs` for an inequality `lhs ≤ C·rhs`, with the
// convention `0/0 = 0` for the equality cases.

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn quotient(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn weighted(v: &[f64], p: f64) -> [f64; MAX_DIM] {
    let n = norm2(v).sqrt();
    let k = if n == 0.0 { 0.0 } else { n.powf(p - 2.0) };
    let mut out = [0.0; MAX_DIM];
    for (o, x) in out.iter_mut().zip(v) {
        *o = k * x;
    }
    out
}

pub fn strong_monotonicity_ratio(a: &[f64], b: &[f64], p: f64) -> f64 {
    let wa = weighted(a, p);
    let wb = weighted(b, p);
    let mut diff2 = 0.0;
    let mut dot = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        diff2 += d * d;
        dot += (wa[i] - wb[i]) * d;
    }
    quotient(diff2.powf(0.5 * p), dot)
}

pub fn flux_lipschitz_ratio(a: &[f64], b: &[f64], p: f64) -> f64 {
    let wa = weighted(a, p);
    let wb = weighted(b, p);
    let mut lhs = 0.0;
    let mut diff2 = 0.0;
    for i in 0..a.len() {
        lhs += (wa[i] - wb[i]).powi(2);
        diff2 += (a[i] - b[i]).powi(2);
    }
    let pow = |v: &[f64]| {
        let n = norm2(v).sqrt();
        if n == 0.0 && p == 2.0 {
            1.0
        } else {
            n.powf(p - 2.0)
        }
    };
    quotient(lhs.sqrt(), diff2.sqrt() * (pow(a) + pow(b)))
}

/// Depends on `a` only through `|a|`.
pub fn regularization_gap_ratio(a_norm: f64, eps: f64, p: f64) -> f64 {
    let s = eps + a_norm * a_norm;
    let gap = if a_norm == 0.0 {
        0.0
    } else {
        s.powf(0.5 * p - 1.0) - a_norm.powf(p - 2.0)
    };
    quotient(gap * a_norm, eps * s.powf(0.5 * (p - 2.0)))
}

/// `φ(t) = (ε+|h|²)^{p/2−1} h·(a−b)`.
fn interpolation_phi(a: &[f64], b: &[f64], t: f64, eps: f64, p: f64) -> f64 {
    let mut h2 = 0.0;
    let mut hd = 0.0;
    for i in 0..a.len() {
        let h = t * a[i] + (1.0 - t) * b[i];
        h2 += h * h;
        hd += h * (a[i] - b[i]);
    }
    (eps + h2).powf(0.5 * p - 1.0) * hd
}

/// `φ'(t) = (ε+|h|²)^{p/2−2} [(ε+|h|²)|d|² + (p−2)(h·d)²]` with `d = a − b`.
pub fn interpolation_derivative(a: &[f64], b: &[f64], t: f64, eps: f64, p: f64) -> f64 {
    let (s, d2, hd) = interpolation_terms(a, b, t, eps);
    s.powf(0.5 * p - 2.0) * (s * d2 + (p - 2.0) * hd * hd)
}

fn interpolation_terms(a: &[f64], b: &[f64], t: f64, eps: f64) -> (f64, f64, f64) {
    let mut h2 = 0.0;
    let mut d2 = 0.0;
    let mut hd = 0.0;
    for i in 0..a.len() {
        let h = t * a[i] + (1.0 - t) * b[i];
        let d = a[i] - b[i];
        h2 += h * h;
        d2 += d * d;
        hd += h * d;
    }
    (eps + h2, d2, hd)
}

/// `(ε+|h|²)^{p/2−1}|a−b|² / φ'(t)`, computed after cancelling the common
/// power so it stays finite for every input.
pub fn interpolation_ratio(a: &[f64], b: &[f64], t: f64, eps: f64, p: f64) -> f64 {
    let (s, d2, hd) = interpolation_terms(a, b, t, eps);
    quotient(s * d2, s * d2 + (p - 2.0) * hd * hd)
}

/// Relative gap between `φ'(t)` and a central difference of `φ`.
pub fn interpolation_fd_mismatch(a: &[f64], b: &[f64], t: f64, eps: f64, p: f64) -> f64 {
    let (s, d2, _) = interpolation_terms(a, b, t, eps);
    if d2 == 0.0 {
        return 0.0;
    }
    // φ varies on the scale √s / |d| in t.
    let step = 1e-4 * (s / d2).sqrt();
    let fd = (interpolation_phi(a, b, t + step, eps, p) - interpolation_phi(a, b, t - step, eps, p))
        / (2.0 * step);
    let exact = interpolation_derivative(a, b, t, eps, p);
    (fd - exact).abs() / exact.abs()
}

pub fn split_power_ratio(a: &[f64], b: &[f64], eps: f64, p: f64) -> f64 {
    let a2 = norm2(a);
    let s = eps + a2 + norm2(b);
    let diff2: f64 = a.iter().zip(b).map(|(x, y)| (y - x).powi(2)).sum();
    s.powf(0.5 * p) / (s.powf(0.5 * p - 1.0) * diff2 + (eps + a2).powf(0.5 * p))
}

/// `(1 / (2Ψ(S))) / ∫₀¹ (1−t)^κ / Ψ(ε+|h(t)|²) dt` for `Ψ(x) = x^q`.
pub fn monotone_integrand_ratio(
    a: &[f64],
    b: &[f64],
    eps: f64,
    kappa: i32,
    q: f64,
) -> Result<f64> {
    let psi = |x: f64| x.powf(q);
    let rhs = 0.5 / psi(eps + norm2(a) + norm2(b));
    let integrand = |t: f64| {
        let mut h2 = 0.0;
        for i in 0..a.len() {
            let h = t * a[i] + (1.0 - t) * b[i];
            h2 += h * h;
        }
        (1.0 - t).powi(kappa) / psi(eps + h2)
    };
    let lhs = adaptive_simpson(integrand, 0.0, 1.0, QUAD_TOL * rhs)?;
    Ok(rhs / lhs)
}

/// `∫|f−g|^p / ([∫ S^{p/2−1}|f−g|²]^{p/2} [∫ S^{p/2}]^{(2−p)/2})` with
/// `S = ε+|f|²+|g|²` and the integrals taken against the weights.
pub fn weighted_holder_ratio(f: &[Vec<f64>], g: &[Vec<f64>], w: &[f64], eps: f64, p: f64) -> f64 {
    let mut lhs = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for k in 0..w.len() {
        let d2: f64 = f[k].iter().zip(&g[k]).map(|(x, y)| (x - y).powi(2)).sum();
        let s = eps + norm2(&f[k]) + norm2(&g[k]);
        lhs += w[k] * d2.powf(0.5 * p);
        first += w[k] * s.powf(0.5 * p - 1.0) * d2;
        second += w[k] * s.powf(0.5 * p);
    }
    quotient(lhs, first.powf(0.5 * p) * second.powf(0.5 * (2.0 - p)))
}

pub fn power_shift_ratio(eps: f64, theta: f64, p: f64) -> f64 {
    ((eps + theta).powf(0.5 * p) - theta.powf(0.5 * p)).abs() / eps.powf(0.5 * p)
}

// ---------------------------------------------------------------------------
// Structured search.

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64))
        .collect()
}

fn angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| std::f64::consts::PI * k as f64 / (n - 1) as f64).collect()
}

/// Embeds `(x, y)` into the first two coordinates of `R^dim`.
fn planar(dim: usize, x: f64, y: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = x;
    v[1] = y;
    v
}

/// Maximum of the lemma's ratio over a structured input grid. The ratios are
/// rotation invariant, so two vectors can be placed in a coordinate plane;
/// they are also invariant under `(a, b, ε) ↦ (λa, λb, λ²ε)`, so `a` is
/// fixed to `e₁` (or `0`) and ε runs over a wide log range.
fn grid_maximum(lemma: Lemma, dim: usize, p: f64) -> f64 {
    let radii: Vec<f64> = std::iter::once(0.0).chain(log_points(-4.0, 4.0, 65)).collect();
    let phis = angles(37);
    let wide_eps = log_points(-12.0, 12.0, 49);
    let mut best = 0.0f64;
    let mut consider = |r: f64| best = best.max(r);
    match lemma {
        Lemma::StrongMonotonicity | Lemma::FluxLipschitz => {
            let a = planar(dim, 1.0, 0.0);
            for &r in &radii {
                for &phi in &phis {
                    let b = planar(dim, r * phi.cos(), r * phi.sin());
                    consider(if lemma == Lemma::StrongMonotonicity {
                        strong_monotonicity_ratio(&a, &b, p)
                    } else {
                        flux_lipschitz_ratio(&a, &b, p)
                    });
                }
            }
        }
        Lemma::RegularizationGap => {
            // Not scale invariant in ε alone: cover the sampled ε range,
            // endpoints included, against a wide range of |a|.
            let (lo, hi) = EPS_RANGE;
            let eps = log_points(lo.log10(), hi.log10(), 81);
            let norms: Vec<f64> =
                std::iter::once(0.0).chain(log_points(-6.0, 3.0, 361)).collect();
            for &e in &eps {
                for &n in &norms {
                    consider(regularization_gap_ratio(n, e, p));
                }
            }
        }
        Lemma::InterpolationDerivative => {
            let ts: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
            for a0 in [0.0, 1.0] {
                let a = planar(dim, a0, 0.0);
                for &r in &radii {
                    for &phi in &phis {
                        let b = planar(dim, r * phi.cos(), r * phi.sin());
                        for &t in &ts {
                            for &e in &wide_eps {
                                consider(interpolation_ratio(&a, &b, t, e, p));
                            }
                        }
                    }
                }
            }
        }
        Lemma::SplitPower => {
            for a0 in [0.0, 1.0] {
                let a = planar(dim, a0, 0.0);
                for &r in &radii {
                    for &phi in &phis {
                        let b = planar(dim, r * phi.cos(), r * phi.sin());
                        for &e in &wide_eps {
                            consider(split_power_ratio(&a, &b, e, p));
                        }
                    }
                }
            }
        }
        _ => unreachable!("lemma has an explicit constant"),
    }
    best
}

// ---------------------------------------------------------------------------
// Random trials.

struct TrialOutcome {
    ratio: f64,
    derivative_mismatch: Option<f64>,
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

fn normal_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform on `(1, 2]`.
fn singular_p(rng: &mut ChaCha8Rng) -> f64 {
    2.0 - rng.random::<f64>()
}

fn sample_trial(lemma: Lemma, cell: PinnedConstant, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let dim = cell.dim;
    let p = cell.p.unwrap_or(f64::NAN);
    let plain = |ratio| TrialOutcome {
        ratio,
        derivative_mismatch: None,
    };
    Ok(match lemma {
        Lemma::StrongMonotonicity => {
            let (a, b) = (normal_vec(rng, dim), normal_vec(rng, dim));
            plain(strong_monotonicity_ratio(&a, &b, p))
        }
        Lemma::FluxLipschitz => {
            let (a, b) = (normal_vec(rng, dim), normal_vec(rng, dim));
            plain(flux_lipschitz_ratio(&a, &b, p))
        }
        Lemma::RegularizationGap => {
            let a = normal_vec(rng, dim);
            let eps = log_uniform(rng, EPS_RANGE);
            plain(regularization_gap_ratio(norm2(&a).sqrt(), eps, p))
        }
        Lemma::InterpolationDerivative => {
            let (a, b) = (normal_vec(rng, dim), normal_vec(rng, dim));
            let t = rng.random::<f64>();
            let eps = log_uniform(rng, EPS_RANGE);
            TrialOutcome {
                ratio: interpolation_ratio(&a, &b, t, eps, p),
                derivative_mismatch: Some(interpolation_fd_mismatch(&a, &b, t, eps, p)),
            }
        }
        Lemma::SplitPower => {
            let (a, b) = (normal_vec(rng, dim), normal_vec(rng, dim));
            let eps = log_uniform(rng, EPS_RANGE);
            plain(split_power_ratio(&a, &b, eps, p))
        }
        Lemma::MonotoneIntegrand => {
            let (a, b) = (normal_vec(rng, dim), normal_vec(rng, dim));
            let eps = log_uniform(rng, EPS_RANGE);
            let kappa = rng.random_range(0..=1);
            let q = rng.random::<f64>();
            plain(monotone_integrand_ratio(&a, &b, eps, kappa, q)?)
        }
        Lemma::WeightedHolder => {
            let points = rng.random_range(1..=16);
            let p = singular_p(rng);
            let eps = log_uniform(rng, EPS_RANGE);
            let f: Vec<Vec<f64>> = (0..points).map(|_| normal_vec(rng, dim)).collect();
            let g: Vec<Vec<f64>> = (0..points).map(|_| normal_vec(rng, dim)).collect();
            let w: Vec<f64> = (0..points).map(|_| 1.0 - rng.random::<f64>()).collect();
            plain(weighted_holder_ratio(&f, &g, &w, eps, p))
        }
        Lemma::PowerShift => {
            let p = singular_p(rng);
            let eps = log_uniform(rng, EPS_RANGE);
            let theta = log_uniform(rng, EPS_RANGE);
            plain(power_shift_ratio(eps, theta, p))
        }
    })
}
