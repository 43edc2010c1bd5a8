//! Command reports and exit codes.

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Serialize) -> Self {
        Self {
            name: name.into(),
            status,
            detail: serde_json::to_value(detail).expect("details serialize"),
        }
    }

    pub fn from_bool(name: impl Into<String>, holds: bool, detail: impl Serialize) -> Self {
        Self::new(name, if holds { Status::Pass } else { Status::Fail }, detail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub digest: String,
    pub status: Status,
    pub checks: Vec<CheckResult>,
    /// Only filled on request so default output stays byte-stable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(command: &str, input: &str, digest: String, checks: Vec<CheckResult>) -> Self {
        let status = checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass);
        Self {
            command: command.into(),
            input: input.into(),
            digest,
            status,
            checks,
            timing_ms: None,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 4,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
