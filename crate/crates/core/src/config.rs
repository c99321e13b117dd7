//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment, lists are comma separated. Unknown
//! and repeated keys are errors. Every key is optional; see [`KEYS`] for the
//! defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::heisenberg::{AnalyticFunction, Point};

/// `(key, default, meaning)` for every accepted key.
pub const KEYS: [(&str, &str, &str); 19] = [
    ("psi", "valley", "obstacle preset"),
    ("psi_params", "0.5, 2", "obstacle preset parameters"),
    ("u_star", "constant", "boundary datum preset"),
    ("u_star_params", "0", "boundary datum preset parameters"),
    ("box_lower", "-1, -1, -1", "lower box corner (x, y, t)"),
    ("box_upper", "1, 1, 1", "upper box corner (x, y, t)"),
    ("resolution", "33", "nodes per axis: one value or three"),
    ("p", "2", "energy exponent, p > 1"),
    ("eps", "0", "regularization, eps >= 0"),
    ("eps_list", "0.1, 0.01, 0.001, 0.0001", "sweep values, strictly decreasing"),
    ("eta", "0.1", "penalization width, 0 < eta < 1"),
    ("eta_list", "0.1, 0.05", "penalization widths, strictly decreasing"),
    ("radius", "0.5", "Folland-Koranyi ball radius for the sweep"),
    ("resolutions", "17, 33, 65", "refinement levels for the consistency study"),
    ("seed", "42", "seed for every random draw"),
    ("trials", "100000", "random trials per lemma"),
    ("tol", "1e-8", "solver tolerance in operator units"),
    ("verify_tol", "auto", "dual-estimate tolerance; auto = max(1e-6, 10 tol)"),
    ("control_depth", "0.1", "depth of the negative-control bump"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub psi: AnalyticFunction,
    pub u_star: AnalyticFunction,
    pub box_lower: Point,
    pub box_upper: Point,
    pub resolution: [usize; 3],
    pub p: f64,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub eta: f64,
    pub eta_list: Vec<f64>,
    pub radius: f64,
    pub resolutions: Vec<usize>,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub verify_tol: Option<f64>,
    pub control_depth: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            psi: AnalyticFunction::Valley { a: 0.5, b: 2.0 },
            u_star: AnalyticFunction::Constant(0.0),
            box_lower: Point::new(-1.0, -1.0, -1.0),
            box_upper: Point::new(1.0, 1.0, 1.0),
            resolution: [33; 3],
            p: 2.0,
            eps: 0.0,
            eps_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
            eta: 0.1,
            eta_list: vec![0.1, 0.05],
            radius: 0.5,
            resolutions: vec![17, 33, 65],
            seed: 42,
            trials: 100_000,
            tol: 1e-8,
            verify_tol: None,
            control_depth: 0.1,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses config text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut pairs = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |reason: String| Error::Config {
                path: origin.to_string(),
                line: k + 1,
                reason,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(at(format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(&(known, _, _)) = KEYS.iter().find(|(name, _, _)| *name == key) else {
                return Err(at(format!("unknown key `{key}`")));
            };
            if seen.contains(&known) {
                return Err(at(format!("key `{key}` given twice")));
            }
            seen.push(known);
            pairs.push((known, value));
        }
        cfg.apply(&pairs)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `(key, value)` pairs in order. A preset and its parameters are
    /// resolved together, so `psi` may change arity when `psi_params` is also
    /// given.
    pub fn apply(&mut self, pairs: &[(&str, &str)]) -> Result<()> {
        let mut psi = (None, None);
        let mut u_star = (None, None);
        for &(key, value) in pairs {
            match key {
                "psi" => psi.0 = Some(value.to_string()),
                "psi_params" => psi.1 = Some(parse_list(key, value)?),
                "u_star" => u_star.0 = Some(value.to_string()),
                "u_star_params" => u_star.1 = Some(parse_list(key, value)?),
                _ => self.set(key, value)?,
            }
        }
        self.psi = resolve_preset("psi", psi, &self.psi)?;
        self.u_star = resolve_preset("u_star", u_star, &self.u_star)?;
        Ok(())
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "psi" => self.psi = AnalyticFunction::from_id(value, &self.psi.params())
                .map_err(|e| value_error(key, e.to_string()))?,
            "psi_params" => {
                self.psi = AnalyticFunction::from_id(self.psi.id(), &parse_list(key, value)?)
                    .map_err(|e| value_error(key, e.to_string()))?
            }
            "u_star" => self.u_star = AnalyticFunction::from_id(value, &self.u_star.params())
                .map_err(|e| value_error(key, e.to_string()))?,
            "u_star_params" => {
                self.u_star =
                    AnalyticFunction::from_id(self.u_star.id(), &parse_list(key, value)?)
                        .map_err(|e| value_error(key, e.to_string()))?
            }
            "box_lower" => self.box_lower = parse_point(key, value)?,
            "box_upper" => self.box_upper = parse_point(key, value)?,
            "resolution" => {
                let v = parse_counts(key, value)?;
                self.resolution = match v.as_slice() {
                    [n] => [*n; 3],
                    [a, b, c] => [*a, *b, *c],
                    _ => return Err(value_error(key, "expected one or three values")),
                };
            }
            "p" => self.p = parse_f64(key, value)?,
            "eps" => self.eps = parse_f64(key, value)?,
            "eps_list" => self.eps_list = parse_list(key, value)?,
            "eta" => self.eta = parse_f64(key, value)?,
            "eta_list" => self.eta_list = parse_list(key, value)?,
            "radius" => self.radius = parse_f64(key, value)?,
            "resolutions" => self.resolutions = parse_counts(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| value_error(key, format!("expected an unsigned integer, got `{value}`")))?
            }
            "trials" => self.trials = parse_count(key, value)?,
            "tol" => self.tol = parse_f64(key, value)?,
            "verify_tol" => {
                self.verify_tol = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "control_depth" => self.control_depth = parse_f64(key, value)?,
            _ => return Err(value_error(key, "unknown key")),
        }
        Ok(())
    }

    /// Checks every numeric range; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(value_error("p", format!("p must lie in (1, ∞), got {}", self.p)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(value_error("eps", format!("ε must be ≥ 0, got {}", self.eps)));
        }
        decreasing_positive("eps_list", &self.eps_list, f64::INFINITY)?;
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(value_error("eta", format!("η must lie in (0, 1), got {}", self.eta)));
        }
        decreasing_positive("eta_list", &self.eta_list, 1.0)?;
        let lo = self.box_lower.as_array();
        let hi = self.box_upper.as_array();
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(value_error("box_upper", "upper corner must exceed lower corner on every axis"));
        }
        if self.resolution.iter().any(|&n| n < 3) {
            return Err(value_error("resolution", "every axis needs at least 3 nodes"));
        }
        if self.resolutions.len() < 2
            || self.resolutions[0] < 3
            || self.resolutions.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(value_error(
                "resolutions",
                "need at least two strictly increasing values, each ≥ 3",
            ));
        }
        for (key, v) in [("radius", self.radius), ("tol", self.tol), ("control_depth", self.control_depth)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(value_error(key, format!("must be positive, got {v}")));
            }
        }
        if let Some(v) = self.verify_tol {
            if !(v > 0.0 && v.is_finite()) {
                return Err(value_error("verify_tol", format!("must be positive, got {v}")));
            }
        }
        if self.trials == 0 {
            return Err(value_error("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Canonical text form; `parse(emit(cfg)) == cfg`.
    pub fn emit(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let point = |p: Point| list(&p.as_array());
        let counts = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("psi", self.psi.id().to_string());
        put("psi_params", list(&self.psi.params()));
        put("u_star", self.u_star.id().to_string());
        put("u_star_params", list(&self.u_star.params()));
        put("box_lower", point(self.box_lower));
        put("box_upper", point(self.box_upper));
        put("resolution", counts(&self.resolution));
        put("p", self.p.to_string());
        put("eps", self.eps.to_string());
        put("eps_list", list(&self.eps_list));
        put("eta", self.eta.to_string());
        put("eta_list", list(&self.eta_list));
        put("radius", self.radius.to_string());
        put("resolutions", counts(&self.resolutions));
        put("seed", self.seed.to_string());
        put("trials", self.trials.to_string());
        put("tol", self.tol.to_string());
        put("verify_tol", self.verify_tol.map_or("auto".to_string(), |v| v.to_string()));
        put("control_depth", self.control_depth.to_string());
        out
    }
}

/// Where run artifacts go when neither the flag nor the caller says otherwise.
fn resolve_preset(
    key: &str,
    (id, params): (Option<String>, Option<Vec<f64>>),
    current: &AnalyticFunction,
) -> Result<AnalyticFunction> {
    let id = id.unwrap_or_else(|| current.id().to_string());
    let params = params.unwrap_or_else(|| {
        // Switching preset without parameters only works for nullary ones.
        if id == current.id() {
            current.params()
        } else {
            Vec::new()
        }
    });
    AnalyticFunction::from_id(&id, &params).map_err(|e| value_error(key, e.to_string()))
}

pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn value_error(key: &str, reason: impl Into<String>) -> Error {
    Error::ConfigValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| value_error(key, format!("expected a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(value_error(key, format!("expected a finite number, got `{value}`")));
    }
    Ok(v)
}

/// Accepts `100000` as well as `1e5`.
fn parse_count(key: &str, value: &str) -> Result<usize> {
    if let Ok(n) = value.parse::<usize>() {
        return Ok(n);
    }
    let v = parse_f64(key, value)?;
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(value_error(key, format!("expected a nonnegative integer, got `{value}`")))
    }
}

fn split(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    split(value).map(|s| parse_f64(key, s)).collect()
}

fn parse_counts(key: &str, value: &str) -> Result<Vec<usize>> {
    split(value).map(|s| parse_count(key, s)).collect()
}

fn parse_point(key: &str, value: &str) -> Result<Point> {
    match parse_list(key, value)?.as_slice() {
        [x, y, t] => Ok(Point::new(*x, *y, *t)),
        _ => Err(value_error(key, "expected three values")),
    }
}

fn decreasing_positive(key: &str, v: &[f64], upper: f64) -> Result<()> {
    if v.is_empty() {
        return Err(value_error(key, "list is empty"));
    }
    if v.iter().any(|&x| !(x > 0.0 && x < upper)) {
        return Err(value_error(key, format!("values must lie in (0, {upper})")));
    }
    if v.windows(2).any(|w| w[1] >= w[0]) {
        return Err(value_error(key, "values must be strictly decreasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = RunConfig::parse("# nothing\n\n", "t").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.tol, 1e-8);
        assert_eq!(cfg.verify_tol, None);
    }

    #[test]
    fn defaults_table_matches_default_config() {
        let text: String = KEYS.iter().map(|(k, d, _)| format!("{k} = {d}\n")).collect();
        assert_eq!(RunConfig::parse(&text, "t").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            psi: AnalyticFunction::HorizontalParaboloid { a: 0.1, b: 1.0 / 3.0 },
            u_star: AnalyticFunction::CoordinateX,
            resolution: [9, 11, 13],
            p: 1.5,
            eps: 0.1 + 0.2,
            verify_tol: Some(3e-6),
            seed: u64::MAX,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&cfg.emit(), "t").unwrap(), cfg);
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.emit(), "t").unwrap(), d);
    }

    #[test]
    fn p_below_one_names_the_constraint() {
        let err = RunConfig::parse("p = 0.5", "t").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::ConfigValue { ref key, .. } if key == "p"));
        assert!(msg.contains("(1, ∞)"), "{msg}");
    }

    #[test]
    fn eps_list_must_decrease() {
        let err = RunConfig::parse("eps_list = 1e-2, 1e-1, 1e-3", "t").unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref key, .. } if key == "eps_list"));
    }

    #[test]
    fn strictness() {
        let e = RunConfig::parse("p = 2\nq = 3\n", "cfg").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }), "{e}");
        assert!(RunConfig::parse("p = 2\np = 3", "cfg").is_err());
        assert!(RunConfig::parse("p 2", "cfg").is_err());
        assert!(RunConfig::parse("p = two", "cfg").is_err());
        assert!(RunConfig::parse("psi = nope", "cfg").is_err());
        assert!(RunConfig::parse("psi_params = 1", "cfg").is_err());
        assert!(RunConfig::parse("resolution = 2", "cfg").is_err());
    }

    #[test]
    fn presets_and_counts() {
        let cfg = RunConfig::parse(
            "psi = constant\npsi_params = 5\nu_star = coordinate-x\ntrials = 1e5\nresolution = 9, 9, 17",
            "t",
        )
        .unwrap();
        assert_eq!(cfg.psi, AnalyticFunction::Constant(5.0));
        assert_eq!(cfg.u_star, AnalyticFunction::CoordinateX);
        assert_eq!(cfg.trials, 100_000);
        assert_eq!(cfg.resolution, [9, 9, 17]);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = RunConfig::from_file(Path::new("/nonexistent/run.conf")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/run.conf"));
    }

    #[test]
    fn overrides_switch_preset_arity() {
        let mut cfg = RunConfig::default();
        cfg.apply(&[("psi", "constant"), ("psi_params", "3"), ("p", "3")]).unwrap();
        assert_eq!(cfg.psi, AnalyticFunction::Constant(3.0));
        assert_eq!(cfg.p, 3.0);
        cfg.apply(&[("psi", "coordinate-x")]).unwrap();
        assert_eq!(cfg.psi, AnalyticFunction::CoordinateX);
        assert!(cfg.apply(&[("psi", "valley")]).is_err());
        assert!(cfg.apply(&[("nope", "1")]).is_err());
    }
}
