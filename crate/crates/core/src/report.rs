//! CSV and manifest emission with fixed file names and byte-stable content.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::ViReport;
use crate::verify::consistency::ConsistencyReport;
use crate::verify::lemmas::{ConstantSource, LemmaReport, Stability};
use crate::verify::ls::LsReport;
use crate::verify::rates::RateReport;
use crate::verify::sandwich::SandwichReport;

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone)]
pub enum Report {
    Vi(ViReport),
    Ls(LsReport),
    Sandwich(Vec<SandwichReport>),
    Rates(RateReport),
    Lemmas {
        reports: Vec<LemmaReport>,
        stability: Vec<Stability>,
    },
    Consistency(ConsistencyReport),
}

impl Report {
    pub fn file_name(&self) -> &'static str {
        match self {
            Report::Vi(_) => "vi_report.csv",
            Report::Ls(_) => "ls_report.csv",
            Report::Sandwich(_) => "sandwich_report.csv",
            Report::Rates(_) => "rate_report.csv",
            Report::Lemmas { .. } => "lemma_report.csv",
            Report::Consistency(_) => "consistency_report.csv",
        }
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        let mut line = |s: &str| {
            out.push_str(s);
            out.push('\n');
        };
        match self {
            Report::Vi(r) => {
                line("trials,skipped,worst,threshold,pass");
                line(&format!(
                    "{},{},{:e},{:e},{}",
                    r.trials, r.skipped, r.worst, r.threshold, r.pass
                ));
            }
            Report::Ls(r) => {
                line(LsReport::CSV_HEADER);
                line(&r.csv_row());
            }
            Report::Sandwich(rows) => {
                line(SandwichReport::CSV_HEADER);
                rows.iter().for_each(|r| line(&r.csv_row()));
            }
            Report::Rates(r) => {
                line(RateReport::CSV_HEADER);
                r.csv_rows().iter().for_each(|s| line(s));
            }
            Report::Lemmas { reports, .. } => {
                line(LemmaReport::CSV_HEADER);
                reports.iter().for_each(|r| line(&r.csv_row()));
            }
            Report::Consistency(r) => {
                line(ConsistencyReport::CSV_HEADER);
                r.csv_rows().iter().for_each(|s| line(s));
            }
        }
        out
    }

    /// Companion files beyond the main CSV.
    fn extra_files(&self) -> Vec<(&'static str, String)> {
        let Report::Lemmas { reports, stability } = self else {
            return Vec::new();
        };
        let mut constants = String::from("lemma,dim,p,constant,source,grid_max\n");
        for r in reports {
            for c in &r.constants {
                let (source, grid_max) = match c.source {
                    ConstantSource::Explicit => ("explicit", String::new()),
                    ConstantSource::Maximization => ("maximization", String::new()),
                    ConstantSource::DoubledGridSearch { grid_max } => {
                        ("doubled-grid-search", format!("{grid_max:e}"))
                    }
                };
                let p = c.p.map_or(String::new(), |p| p.to_string());
                let _ = writeln!(
                    constants,
                    "{},{},{},{:e},{},{}",
                    r.lemma.code(),
                    c.dim,
                    p,
                    c.value,
                    source,
                    grid_max
                );
            }
        }
        let mut stab = String::from("lemma,worst_margin,worst_margin_doubled,stable\n");
        for s in stability {
            let _ = writeln!(
                stab,
                "{},{:e},{:e},{}",
                s.lemma.code(),
                s.base,
                s.doubled,
                s.stable()
            );
        }
        vec![("lemma_constants.csv", constants), ("lemma_stability.csv", stab)]
    }

    pub fn pass(&self) -> bool {
        match self {
            Report::Vi(r) => r.pass,
            Report::Ls(r) => r.pass(),
            Report::Sandwich(rows) => rows.iter().all(SandwichReport::pass),
            Report::Rates(r) => r.pass(),
            Report::Lemmas { reports, stability } => {
                reports.iter().all(LemmaReport::pass) && stability.iter().all(Stability::stable)
            }
            Report::Consistency(r) => r.pass(),
        }
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        let detail = match self {
            Report::Vi(r) => format!("variational inequality: worst {:.3e} (bar {:.1e})", r.worst, r.threshold),
            Report::Ls(r) => format!(
                "dual estimate: min A(u) {:.3e}, max excess {:.3e}, violations {}/{} (tol {:.1e}), active {:.2}%",
                r.min_operator,
                r.max_excess,
                r.lower_violations,
                r.upper_violations,
                r.tol,
                100.0 * r.active_fraction()
            ),
            Report::Sandwich(rows) => {
                let gaps: Vec<String> = rows
                    .iter()
                    .map(|r| format!("η={} gap {:.3e}", r.eta, r.sup_gap))
                    .collect();
                format!("penalization sandwich: {}", gaps.join(", "))
            }
            Report::Rates(r) => format!(
                "ε-sweep p={}: slope {:.3} (exponent {:.4}), fitted {} of {}",
                r.p,
                r.slope,
                r.exponent,
                r.fitted,
                r.eps.len()
            ),
            Report::Lemmas { reports, .. } => {
                let bad: Vec<&str> = reports.iter().filter(|r| !r.pass()).map(|r| r.lemma.code()).collect();
                format!("inequality suite: {} lemmas, failing {:?}", reports.len(), bad)
            }
            Report::Consistency(r) => format!(
                "consistency: {} preset(s), |Δ_H t| ≤ {:.1e}",
                r.rows.len(),
                r.vertical_residual
            ),
        };
        format!("{verdict} {detail}")
    }
}

/// Run identity written next to the reports.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config: String,
    pub notes: Vec<String>,
}

/// Writes every report plus `manifest.txt` into `dir` and returns the paths
/// in write order.
pub fn emit_report(reports: &[Report], manifest: &Manifest, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for r in reports {
        write(r.file_name(), &r.csv())?;
        for (name, body) in r.extra_files() {
            write(name, &body)?;
        }
    }
    let mut text = String::new();
    let _ = writeln!(text, "command = {}", manifest.command);
    let _ = writeln!(text, "version = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "seed = {}", manifest.seed);
    for r in reports {
        let _ = writeln!(text, "report = {} {}", r.file_name(), if r.pass() { "pass" } else { "fail" });
    }
    for n in &manifest.notes {
        let _ = writeln!(text, "note = {n}");
    }
    let _ = writeln!(text, "\n[config]");
    text.push_str(&manifest.config);
    write(MANIFEST, &text)?;
    Ok(written)
}
