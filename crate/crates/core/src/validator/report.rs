use std::fmt;

use serde::Serialize;

/// One named pass/fail record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            note: None,
        }
    }

    /// Passes when `measured >= tolerance`.
    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            passed: measured >= tolerance,
            measured,
            tolerance,
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            tolerance: f64::NAN,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Residual norms, accuracy slope and the list of checks of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub title: String,
    /// (η, sup-norm residual) pairs.
    pub per_eta_residual: Vec<(f64, f64)>,
    /// Present only when the fit quality reaches the r² threshold.
    pub slope: Option<f64>,
    pub slope_r2: Option<f64>,
    /// Residuals all below round-off: the expansion is exact.
    pub exact: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(title: impl Into<String>) -> Self {
        ValidationReport {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One-line machine-readable summary.
    pub fn summary_json(&self) -> String {
        let failed: Vec<&str> = self.failures().map(|c| c.name.as_str()).collect();
        serde_json::json!({
            "title": self.title,
            "passed": self.all_passed(),
            "checks": self.checks.len(),
            "failed": failed,
            "slope": self.slope,
            "slope_r2": self.slope_r2,
            "exact": self.exact,
        })
        .to_string()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {} ==", self.title)?;
        if !self.per_eta_residual.is_empty() {
            writeln!(f, "residual per eta:")?;
            for (eta, r) in &self.per_eta_residual {
                writeln!(f, "  eta = {eta:<8} sup|R| = {r:.6e}")?;
            }
        }
        if self.exact {
            writeln!(f, "expansion is exact (all residuals at round-off)")?;
        }
        match (self.slope, self.slope_r2) {
            (Some(s), Some(r2)) => writeln!(f, "slope = {s:.4}  r^2 = {r2:.5}")?,
            (None, Some(r2)) => writeln!(f, "slope not reported: r^2 = {r2:.5} below threshold")?,
            _ => {}
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "[{status}] {:<34} measured {:.3e}  tolerance {:.3e}", c.name, c.measured, c.tolerance)?;
            if let Some(n) = &c.note {
                write!(f, "  ({n})")?;
            }
            writeln!(f)?;
        }
        let n_fail = self.failures().count();
        if n_fail == 0 {
            write!(f, "all {} checks passed", self.checks.len())
        } else {
            write!(f, "{n_fail} of {} checks FAILED", self.checks.len())
        }
    }
}
