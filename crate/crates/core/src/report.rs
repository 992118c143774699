//! CSV curve files and the JSON run report.

use serde::Serialize;
use serde_json::Value;

use crate::growth::{GrowthCurve, Verdict};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header of every curve CSV.
pub const CURVE_COLUMNS: &str = "r,h,M,logM,second_difference";

/// One row per radius. `h` and `second` may be absent (empty cells).
///
/// Numbers use the shortest round-trip decimal form, so identical inputs
/// give byte-identical files.
pub fn curve_csv(curve: &GrowthCurve, h: Option<&[f64]>, second: Option<&[Option<f64>]>) -> String {
    let mut out = String::with_capacity(64 * (curve.len() + 1));
    out.push_str(CURVE_COLUMNS);
    out.push('\n');
    for (i, (&r, &lm)) in curve.radii.iter().zip(&curve.log_values).enumerate() {
        let hv = h.map(|h| h[i].to_string()).unwrap_or_default();
        let sd = second.and_then(|s| s[i]).map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{r},{hv},{},{lm},{sd}\n", lm.exp()));
    }
    out
}

/// Two-column `r,value` samples of a function.
pub fn samples_csv(value_name: &str, samples: &[(f64, f64)]) -> String {
    let mut out = format!("r,{value_name}\n");
    for (r, v) in samples {
        out.push_str(&format!("{r},{v}\n"));
    }
    out
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// What the mathematics reported.
    pub verdict: Verdict,
    pub expect_violation: bool,
    /// Whether the check counts as passed once `expect_violation` is applied.
    pub passed: bool,
    pub tolerance: Option<f64>,
    /// Worst-case witness and residual summaries.
    pub detail: Value,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, verdict: Verdict, tolerance: Option<f64>, detail: Value) -> Self {
        Self {
            name: name.into(),
            verdict,
            expect_violation: false,
            passed: verdict.passed(),
            tolerance,
            detail,
        }
    }

    /// Build from a boolean outcome.
    pub fn from_bool(name: impl Into<String>, ok: bool, tolerance: Option<f64>, detail: Value) -> Self {
        let verdict = if ok { Verdict::Pass } else { Verdict::Violation };
        Self::new(name, verdict, tolerance, detail)
    }

    /// Invert the pass/fail meaning: a violation is the desired outcome.
    pub fn expecting_violation(mut self, expect: bool) -> Self {
        self.expect_violation = expect;
        self.passed = self.verdict.passed() != expect;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub results: Value,
    pub passed: bool,
    pub elapsed_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, config: Value, seed: u64) -> Self {
        Self {
            version: VERSION,
            command: command.into(),
            config,
            seed,
            checks: Vec::new(),
            results: Value::Null,
            passed: true,
            elapsed_ms: None,
        }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = CheckResult>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width summary, one line per check.
    pub fn summary_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:<9}  {:<8}  result\n", "check", "verdict", "expected");
        for c in &self.checks {
            let verdict = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Violation => "violation",
            };
            let expected = if c.expect_violation { "violation" } else { "pass" };
            let result = if c.passed { "ok" } else { "FAIL" };
            out.push_str(&format!("{:<width$}  {verdict:<9}  {expected:<8}  {result}\n", c.name));
        }
        out
    }
}
