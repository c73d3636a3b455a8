//! Run reports and their check records.

use serde::Serialize;

use super::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    /// Measured quantity; `null` in JSON when not finite.
    pub value: f64,
    pub bound: f64,
    /// How `value` is compared with `bound`: `<=`, `>=`, `<`, `>` or `==`.
    pub comparison: &'static str,
    pub detail: String,
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

impl CheckResult {
    pub fn le(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::build(name, value, bound, "<=", value <= bound)
    }

    pub fn lt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::build(name, value, bound, "<", value < bound)
    }

    pub fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::build(name, value, bound, ">=", value >= bound)
    }

    pub fn gt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::build(name, value, bound, ">", value > bound)
    }

    /// A yes/no check; `value` is 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let mut c = Self::build(name, if ok { 1.0 } else { 0.0 }, 1.0, "==", ok);
        c.detail = detail.into();
        c
    }

    fn build(name: impl Into<String>, value: f64, bound: f64, comparison: &'static str, ok: bool) -> Self {
        CheckResult {
            name: name.into(),
            status: status(ok && !value.is_nan()),
            value,
            bound,
            comparison,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub kind: String,
    pub status: Status,
    /// Resolved configuration, with tolerances already scaled.
    pub config: ExperimentConfig,
    pub tol_scale: f64,
    pub checks: Vec<CheckResult>,
    pub wall_time_seconds: f64,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub(crate) fn summarize(checks: &[CheckResult]) -> Status {
        status(!checks.is_empty() && checks.iter().all(CheckResult::passed))
    }
}
