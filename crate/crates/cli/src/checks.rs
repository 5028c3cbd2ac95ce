//! Named pass/fail checks and the margin table.

use ksring::record::Record;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub pass: bool,
    /// A failure here is the documented outcome and does not count.
    pub expected_fail: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, limit: format!("<= {tol:e}"), pass: value <= tol, expected_fail: false }
    }

    pub fn at_least(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, limit: format!(">= {tol:e}"), pass: value >= tol, expected_fail: false }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, limit: format!("in [{lo:e}, {hi:e}]"), pass: value >= lo && value <= hi, expected_fail: false }
    }

    pub fn expect_fail(mut self, yes: bool) -> Self {
        self.expected_fail = yes;
        self
    }

    pub fn status(&self) -> &'static str {
        match (self.pass, self.expected_fail) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "XFAIL",
            (true, true) => "XPASS",
        }
    }

    /// Counts toward the exit status.
    pub fn failed(&self) -> bool {
        !self.pass && !self.expected_fail
    }
}

pub fn table(checks: &[Check]) -> String {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    checks.iter().map(|c| format!("{:<5}  {:<w$}  {:>14.6e}  {}\n", c.status(), c.name, c.value, c.limit)).collect()
}

pub fn record(checks: &[Check]) -> Record {
    let mut r = Record::new();
    for c in checks {
        r.num(&format!("check.{}", c.name), c.value).text(&format!("check.{}.status", c.name), c.status());
    }
    r.flag("checks_pass", !checks.iter().any(Check::failed));
    r
}
