//! Continuum geometry of the first Heisenberg group.
//!
//! Points are `(x, y, t)` with the group law
//! `(x1, y1, t1) ∘ (x2, y2, t2) = (x1 + x2, y1 + y2, t1 + t2 + 2 (x2 y1 - x1 y2))`
//! and left-invariant horizontal fields `X = ∂x + 2y ∂t`, `Y = ∂y - 2x ∂t`.
//! Obstacles and boundary data are closed-form [`AnalyticFunction`] presets so
//! that their horizontal derivatives, and the quasilinear operator applied to
//! them, are known exactly.

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Floor substituted for a vanishing regularization inside the flux factor
/// `(ε + |g|²)^{p/2 - 1}` when `p < 2`.
pub const EPS_FLOOR: f64 = 1e-12;

/// Homogeneous dimension of the first Heisenberg group.
pub const HOMOGENEOUS_DIMENSION: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Point {
    pub const ORIGIN: Point = Point {
        x: 0.0,
        y: 0.0,
        t: 0.0,
    };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        Point { x, y, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.t]
    }

    /// Group inverse; the law is antisymmetric in the vertical correction so
    /// this is plain negation.
    pub fn inverse(&self) -> Point {
        Point::new(-self.x, -self.y, -self.t)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

pub fn group_mul(p1: Point, p2: Point) -> Point {
    Point {
        x: p1.x + p2.x,
        y: p1.y + p2.y,
        t: p1.t + p2.t + 2.0 * (p2.x * p1.y - p1.x * p2.y),
    }
}

impl Mul for Point {
    type Output = Point;

    fn mul(self, rhs: Point) -> Point {
        group_mul(self, rhs)
    }
}

/// Folland–Korányi gauge `((x² + y²)² + t²)^{1/4}`.
pub fn fk_norm(p: Point) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    (r2 * r2 + p.t * p.t).sqrt().sqrt()
}

/// Anisotropic dilation `(λx, λy, λ²t)`.
pub fn dilate(p: Point, lambda: f64) -> Result<Point> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveDilation(lambda));
    }
    Ok(Point::new(lambda * p.x, lambda * p.y, lambda * lambda * p.t))
}

/// Value, horizontal gradient `(Xf, Yf)` and horizontal Hessian of a preset
/// at one point.
///
/// `hess[i][j]` is the `i`-th field applied to the `j`-th gradient component,
/// so `hess[0][1] = X(Yf)` and `hess[1][0] = Y(Xf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizontalJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl HorizontalJet {
    /// `(XY - YX) f`.
    pub fn commutator(&self) -> f64 {
        self.hess[0][1] - self.hess[1][0]
    }

    /// Exact value of `div_H((ε + |∇_H f|²)^{p/2 - 1} ∇_H f)`.
    ///
    /// Expanding the divergence gives
    /// `s^{p/2-1} (tr H + (p - 2) gᵀ H g / s)` with `s = ε + |g|²`, where the
    /// quadratic form uses `X` on the first gradient slot and `Y` on the second.
    pub fn quasilinear_operator(&self, eps: f64, p: f64) -> f64 {
        let [g1, g2] = self.grad;
        let h = &self.hess;
        let trace = h[0][0] + h[1][1];
        let quad = g1 * g1 * h[0][0] + g1 * g2 * (h[0][1] + h[1][0]) + g2 * g2 * h[1][1];
        let grad2 = g1 * g1 + g2 * g2;
        let eps = if eps == 0.0 && p < 2.0 { EPS_FLOOR } else { eps };
        let s = eps + grad2;
        if s == 0.0 {
            // ε = 0 and a critical point with p ≥ 2.
            return if p == 2.0 { trace } else { 0.0 };
        }
        s.powf(0.5 * p - 1.0) * (trace + (p - 2.0) * quad / s)
    }
}

/// Closed-form presets used for obstacles and boundary data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticFunction {
    /// `c`
    Constant(f64),
    /// `x`
    CoordinateX,
    /// `t`
    CoordinateT,
    /// `a + b (x² + y²)`
    HorizontalParaboloid { a: f64, b: f64 },
    /// `a + b (x² + y² + t²)`
    FullParaboloid { a: f64, b: f64 },
    /// `-a + b (x² + y² + t²)`
    Valley { a: f64, b: f64 },
    /// `c x + b (x² + y² + t²)`
    TiltedParaboloid { c: f64, b: f64 },
}

impl AnalyticFunction {
    pub const IDS: [&'static str; 7] = [
        "constant",
        "coordinate-x",
        "coordinate-t",
        "horizontal-paraboloid",
        "full-paraboloid",
        "valley",
        "tilted-paraboloid",
    ];

    /// Builds a preset from its textual id and parameter list.
    pub fn from_id(id: &str, params: &[f64]) -> Result<Self> {
        let arity = |preset: &'static str, expected: usize| {
            if params.len() == expected {
                Ok(())
            } else {
                Err(Error::PresetArity {
                    preset,
                    expected,
                    got: params.len(),
                })
            }
        };
        if let Some(bad) = params.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("preset parameter", format!("{bad} is not finite")));
        }
        let f = match id {
            "constant" => {
                arity("constant", 1)?;
                AnalyticFunction::Constant(params[0])
            }
            "coordinate-x" => {
                arity("coordinate-x", 0)?;
                AnalyticFunction::CoordinateX
            }
            "coordinate-t" => {
                arity("coordinate-t", 0)?;
                AnalyticFunction::CoordinateT
            }
            "horizontal-paraboloid" => {
                arity("horizontal-paraboloid", 2)?;
                AnalyticFunction::HorizontalParaboloid {
                    a: params[0],
                    b: params[1],
                }
            }
            "full-paraboloid" => {
                arity("full-paraboloid", 2)?;
                AnalyticFunction::FullParaboloid {
                    a: params[0],
                    b: params[1],
                }
            }
            "valley" => {
                arity("valley", 2)?;
                AnalyticFunction::Valley {
                    a: params[0],
                    b: params[1],
                }
            }
            "tilted-paraboloid" => {
                arity("tilted-paraboloid", 2)?;
                AnalyticFunction::TiltedParaboloid {
                    c: params[0],
                    b: params[1],
                }
            }
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        Ok(f)
    }

    pub fn id(&self) -> &'static str {
        match self {
            AnalyticFunction::Constant(_) => "constant",
            AnalyticFunction::CoordinateX => "coordinate-x",
            AnalyticFunction::CoordinateT => "coordinate-t",
            AnalyticFunction::HorizontalParaboloid { .. } => "horizontal-paraboloid",
            AnalyticFunction::FullParaboloid { .. } => "full-paraboloid",
            AnalyticFunction::Valley { .. } => "valley",
            AnalyticFunction::TiltedParaboloid { .. } => "tilted-paraboloid",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            AnalyticFunction::Constant(c) => vec![c],
            AnalyticFunction::CoordinateX | AnalyticFunction::CoordinateT => vec![],
            AnalyticFunction::HorizontalParaboloid { a, b }
            | AnalyticFunction::FullParaboloid { a, b }
            | AnalyticFunction::Valley { a, b } => vec![a, b],
            AnalyticFunction::TiltedParaboloid { c, b } => vec![c, b],
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let Point { x, y, t } = p;
        match *self {
            AnalyticFunction::Constant(c) => c,
            AnalyticFunction::CoordinateX => x,
            AnalyticFunction::CoordinateT => t,
            AnalyticFunction::HorizontalParaboloid { a, b } => a + b * (x * x + y * y),
            AnalyticFunction::FullParaboloid { a, b } => a + b * (x * x + y * y + t * t),
            AnalyticFunction::Valley { a, b } => -a + b * (x * x + y * y + t * t),
            AnalyticFunction::TiltedParaboloid { c, b } => c * x + b * (x * x + y * y + t * t),
        }
    }

    /// Hand-derived horizontal derivatives.
    pub fn jet(&self, p: Point) -> HorizontalJet {
        let Point { x, y, t } = p;
        let value = self.eval(p);
        // x² + y² + t² contributes X = 2(x + 2yt), Y = 2(y - 2xt) and
        // XX = 2(1 + 4y²), YX = 2(2t - 4xy), XY = 2(-2t - 4xy), YY = 2(1 + 4x²).
        let full = |b: f64| {
            (
                [2.0 * b * (x + 2.0 * y * t), 2.0 * b * (y - 2.0 * x * t)],
                [
                    [2.0 * b * (1.0 + 4.0 * y * y), 2.0 * b * (-2.0 * t - 4.0 * x * y)],
                    [2.0 * b * (2.0 * t - 4.0 * x * y), 2.0 * b * (1.0 + 4.0 * x * x)],
                ],
            )
        };
        let (grad, hess) = match *self {
            AnalyticFunction::Constant(_) => ([0.0, 0.0], [[0.0; 2]; 2]),
            AnalyticFunction::CoordinateX => ([1.0, 0.0], [[0.0; 2]; 2]),
            AnalyticFunction::CoordinateT => ([2.0 * y, -2.0 * x], [[0.0, -2.0], [2.0, 0.0]]),
            AnalyticFunction::HorizontalParaboloid { b, .. } => (
                [2.0 * b * x, 2.0 * b * y],
                [[2.0 * b, 0.0], [0.0, 2.0 * b]],
            ),
            AnalyticFunction::FullParaboloid { b, .. } | AnalyticFunction::Valley { b, .. } => {
                full(b)
            }
            AnalyticFunction::TiltedParaboloid { c, b } => {
                let (mut g, h) = full(b);
                g[0] += c;
                (g, h)
            }
        };
        HorizontalJet { value, grad, hess }
    }

    pub fn horizontal_gradient(&self, p: Point) -> [f64; 2] {
        self.jet(p).grad
    }

    /// Exact `div_H((ε + |∇_H f|²)^{p/2 - 1} ∇_H f)` at `p`.
    pub fn operator_value(&self, point: Point, eps: f64, p: f64) -> f64 {
        self.jet(point).quasilinear_operator(eps, p)
    }

    pub fn sup_abs_over_box(&self, lower: Point, upper: Point) -> f64 {
        // Every preset is a polynomial of degree ≤ 2 in each coordinate with a
        // separable convex part, so the extremes over a box sit at corners or
        // at the stationary point; checking both covers all presets.
        let mut best = 0.0f64;
        let xs = [lower.x, upper.x, 0.0f64.clamp(lower.x, upper.x)];
        let ys = [lower.y, upper.y, 0.0f64.clamp(lower.y, upper.y)];
        let ts = [lower.t, upper.t, 0.0f64.clamp(lower.t, upper.t)];
        let mut xs = xs.to_vec();
        if let AnalyticFunction::TiltedParaboloid { c, b } = *self {
            if b != 0.0 {
                xs.push((-c / (2.0 * b)).clamp(lower.x, upper.x));
            }
        }
        for &x in &xs {
            for &y in &ys {
                for &t in &ts {
                    best = best.max(self.eval(Point::new(x, y, t)).abs());
                }
            }
        }
        best
    }
}

impl fmt::Display for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            write!(f, "{}", self.id())
        } else {
            let list: Vec<String> = params.iter().map(|v| v.to_string()).collect();
            write!(f, "{}({})", self.id(), list.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> Point {
        Point::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    #[test]
    fn group_law_examples() {
        let q = Point::new(0.3, -1.2, 2.5);
        assert_eq!(group_mul(Point::ORIGIN, q), q);
        assert_eq!(
            group_mul(Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)),
            Point::new(1.0, 1.0, -2.0)
        );
        assert_eq!(q * q.inverse(), Point::ORIGIN);
    }

    #[test]
    fn group_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let a = random_point(&mut rng, 3.0);
            let b = random_point(&mut rng, 3.0);
            let c = random_point(&mut rng, 3.0);
            let l = (a * b) * c;
            let r = a * (b * c);
            for (u, v) in l.as_array().iter().zip(r.as_array()) {
                assert!((u - v).abs() <= 1e-12, "{l} vs {r}");
            }
            assert_eq!(a * Point::ORIGIN, a);
            assert_eq!(Point::ORIGIN * a, a);
            assert_eq!(a * a.inverse(), Point::ORIGIN);
            assert_eq!(a.inverse() * a, Point::ORIGIN);
        }
    }

    #[test]
    fn fk_norm_examples() {
        assert_eq!(fk_norm(Point::ORIGIN), 0.0);
        assert_eq!(fk_norm(Point::new(1.0, 0.0, 0.0)), 1.0);
        assert_eq!(fk_norm(Point::new(0.0, 0.0, 4.0)), 2.0);
    }

    #[test]
    fn fk_norm_is_homogeneous_under_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = random_point(&mut rng, 2.0);
            let lambda = rng.random_range(0.01..10.0);
            let lhs = fk_norm(dilate(p, lambda).unwrap());
            let rhs = lambda * fk_norm(p);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(
            dilate(Point::new(1.0, 1.0, 1.0), 1.0).unwrap(),
            Point::new(1.0, 1.0, 1.0)
        );
        assert_eq!(
            dilate(Point::new(1.0, 0.0, 0.0), 2.0).unwrap(),
            Point::new(2.0, 0.0, 0.0)
        );
        assert_eq!(
            dilate(Point::new(0.0, 0.0, 3.0), 2.0).unwrap(),
            Point::new(0.0, 0.0, 12.0)
        );
        assert!(matches!(
            dilate(Point::ORIGIN, 0.0),
            Err(Error::NonPositiveDilation(_))
        ));
        assert!(dilate(Point::ORIGIN, -1.0).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(AnalyticFunction::CoordinateT.eval(Point::new(1.0, 2.0, 3.0)), 3.0);
        let hp = AnalyticFunction::HorizontalParaboloid { a: 0.0, b: 1.0 };
        assert_eq!(hp.eval(Point::new(1.0, 1.0, 5.0)), 2.0);
        let v = AnalyticFunction::Valley { a: 1.0, b: 2.0 };
        assert_eq!(v.eval(Point::ORIGIN), -1.0);
    }

    #[test]
    fn from_id_round_trips_and_rejects_unknown() {
        let presets = [
            AnalyticFunction::Constant(5.0),
            AnalyticFunction::CoordinateX,
            AnalyticFunction::CoordinateT,
            AnalyticFunction::HorizontalParaboloid { a: 0.5, b: 1.0 },
            AnalyticFunction::FullParaboloid { a: 0.0, b: 2.0 },
            AnalyticFunction::Valley { a: 0.5, b: 2.0 },
            AnalyticFunction::TiltedParaboloid { c: 2.0, b: 0.5 },
        ];
        for f in presets {
            assert_eq!(AnalyticFunction::from_id(f.id(), &f.params()).unwrap(), f);
        }
        assert!(matches!(
            AnalyticFunction::from_id("sombrero", &[]),
            Err(Error::UnknownPreset(_))
        ));
        assert!(matches!(
            AnalyticFunction::from_id("valley", &[1.0]),
            Err(Error::PresetArity { .. })
        ));
    }

    #[test]
    fn exact_operator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q = random_point(&mut rng, 1.0);
            let eps = rng.random_range(0.0..2.0);
            let jet = AnalyticFunction::CoordinateT.jet(q);
            assert_eq!(jet.grad, [2.0 * q.y, -2.0 * q.x]);
            assert_eq!(jet.quasilinear_operator(eps, 2.0), 0.0);
            let hp = AnalyticFunction::HorizontalParaboloid { a: 0.3, b: 1.0 };
            assert_eq!(hp.operator_value(q, eps, 2.0), 4.0);
            let c = AnalyticFunction::Constant(1.5).jet(q);
            assert_eq!(c.grad, [0.0, 0.0]);
            assert_eq!(c.quasilinear_operator(eps, 3.0), 0.0);
            let v = AnalyticFunction::Valley { a: 1.0, b: 2.0 };
            let expect = 2.0 * (4.0 + 8.0 * (q.x * q.x + q.y * q.y));
            assert!((v.operator_value(q, eps, 2.0) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn commutator_on_vertical_coordinate() {
        let jet = AnalyticFunction::CoordinateT.jet(Point::new(0.2, -0.7, 1.1));
        assert_eq!(jet.commutator(), -4.0);
    }

    const PRESETS: [AnalyticFunction; 7] = [
        AnalyticFunction::Constant(-0.75),
        AnalyticFunction::CoordinateX,
        AnalyticFunction::CoordinateT,
        AnalyticFunction::HorizontalParaboloid { a: 0.2, b: 1.3 },
        AnalyticFunction::FullParaboloid { a: -0.1, b: 0.7 },
        AnalyticFunction::Valley { a: 0.5, b: 2.0 },
        AnalyticFunction::TiltedParaboloid { c: 1.5, b: 0.5 },
    ];

    // Derivative along a left-invariant field by central differences of the
    // composed map s ↦ f(q ∘ s e).
    fn field_derivative<F: Fn(Point) -> f64>(f: F, q: Point, dir: Point, h: f64) -> f64 {
        let fwd = q * Point::new(h * dir.x, h * dir.y, 0.0);
        let bwd = q * Point::new(-h * dir.x, -h * dir.y, 0.0);
        (f(fwd) - f(bwd)) / (2.0 * h)
    }

    const EX: Point = Point::new(1.0, 0.0, 0.0);
    const EY: Point = Point::new(0.0, 1.0, 0.0);

    #[test]
    fn jets_match_finite_differences_along_the_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for f in PRESETS {
            for _ in 0..1000 {
                let q = random_point(&mut rng, 1.0);
                let jet = f.jet(q);
                for (k, dir) in [EX, EY].into_iter().enumerate() {
                    let errs: Vec<f64> = [1e-2, 1e-3]
                        .iter()
                        .map(|&h| (field_derivative(|z| f.eval(z), q, dir, h) - jet.grad[k]).abs())
                        .collect();
                    // Second-order scheme on polynomials of degree ≤ 2 along the
                    // flow lines of the fields: both errors are roundoff-sized or
                    // shrink by ~100 between the two steps.
                    assert!(
                        errs[1] < 1e-8 || errs[0] / errs[1] > 50.0,
                        "{f} at {q}: {errs:?}"
                    );
                }
                // Second derivatives: differentiate the exact gradient along each field.
                for (i, dir) in [EX, EY].into_iter().enumerate() {
                    for j in 0..2 {
                        let fd = field_derivative(|z| f.jet(z).grad[j], q, dir, 1e-4);
                        assert!(
                            (fd - jet.hess[i][j]).abs() < 1e-6,
                            "{f} hess[{i}][{j}] at {q}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn quasilinear_operator_matches_divergence_of_flux() {
        // div_H Φ = X Φ₁ + Y Φ₂ with Φ the flux of the exact gradient,
        // differentiated numerically along the fields.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for f in PRESETS {
            for &(eps, p) in &[(0.1, 1.5), (1.0, 2.0), (0.5, 3.0), (0.0, 4.0)] {
                for _ in 0..50 {
                    let q = random_point(&mut rng, 1.0);
                    let flux = |z: Point, k: usize| {
                        let g = f.horizontal_gradient(z);
                        let s = eps + g[0] * g[0] + g[1] * g[1];
                        if s == 0.0 {
                            0.0
                        } else {
                            s.powf(0.5 * p - 1.0) * g[k]
                        }
                    };
                    let h = 1e-5;
                    let fd = field_derivative(|z| flux(z, 0), q, EX, h)
                        + field_derivative(|z| flux(z, 1), q, EY, h);
                    let exact = f.operator_value(q, eps, p);
                    assert!(
                        (fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()),
                        "{f} eps={eps} p={p} at {q}: fd {fd} exact {exact}"
                    );
                }
            }
        }
    }
}
