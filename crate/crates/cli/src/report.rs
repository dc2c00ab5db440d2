//! Machine-readable pass/fail reporting for numerical checks.

use serde::Serialize;
use std::io::Write;

/// Outcome of one numerical check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    /// What was checked, phrased as the property under test.
    pub description: String,
    /// Name of the independent reference the measurement was held against.
    pub reference: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(
        id: &str,
        description: &str,
        reference: &str,
        measured: f64,
        tolerance: f64,
    ) -> Self {
        CheckResult {
            id: id.to_string(),
            description: description.to_string(),
            reference: reference.to_string(),
            measured,
            tolerance,
            pass: measured.abs() <= tolerance,
        }
    }
}

/// A named batch of checks.
#[derive(Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_json<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("report serialization");
        w.write_all(json.as_bytes())?;
        w.write_all(b"\n")
    }

    pub fn write_table<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for c in &self.checks {
            writeln!(
                w,
                "{} {:<34} measured {:>12.4e}  tol {:>9.2e}  vs {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.measured,
                c.tolerance,
                c.reference,
            )?;
        }
        let n_fail = self.checks.iter().filter(|c| !c.pass).count();
        writeln!(
            w,
            "{} checks, {} failed",
            self.checks.len(),
            n_fail
        )
    }
}
