//! Structured verification records and their JSON form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::counterexample::{OscillationWitness, SuiteConfig};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

/// One measured quantity against its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    /// `<=`, `>=`, `>`, `finite` or `true`.
    pub relation: String,
    pub limit: Option<f64>,
    pub passed: bool,
}

impl Criterion {
    fn make(name: &str, value: f64, relation: &str, limit: Option<f64>, passed: bool) -> Self {
        Self { name: name.to_string(), value, relation: relation.to_string(), limit, passed }
    }

    pub fn le(name: &str, value: f64, limit: f64) -> Self {
        Self::make(name, value, "<=", Some(limit), value <= limit)
    }

    pub fn ge(name: &str, value: f64, limit: f64) -> Self {
        Self::make(name, value, ">=", Some(limit), value >= limit)
    }

    pub fn gt(name: &str, value: f64, limit: f64) -> Self {
        Self::make(name, value, ">", Some(limit), value > limit)
    }

    pub fn finite(name: &str, value: f64) -> Self {
        Self::make(name, value, "finite", None, value.is_finite())
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::make(name, if ok { 1.0 } else { 0.0 }, "true", None, ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub anchor: String,
    pub criteria: Vec<Criterion>,
    pub measured: BTreeMap<String, f64>,
    pub grids: BTreeMap<String, Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub witnesses: Vec<OscillationWitness>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Pass,
            anchor: anchor.to_string(),
            criteria: Vec::new(),
            measured: BTreeMap::new(),
            grids: BTreeMap::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn errored(name: &str, anchor: &str, err: &Error) -> Self {
        let mut rec = Self::new(name, anchor);
        rec.status = Status::Fail;
        rec.error = Some(err.to_string());
        rec
    }

    pub fn criterion(&mut self, c: Criterion) {
        self.criteria.push(c);
    }

    pub fn measure(&mut self, key: &str, value: f64) {
        self.measured.insert(key.to_string(), value);
    }

    pub fn grid(&mut self, key: &str, values: Vec<f64>) {
        self.grids.insert(key.to_string(), values);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Sets the status from the criteria: any failure is `fail`, notes on an
    /// otherwise passing record make it `warn`.
    pub fn finish(&mut self) {
        self.status = if self.error.is_some() || self.criteria.iter().any(|c| !c.passed) {
            Status::Fail
        } else if !self.notes.is_empty() {
            Status::Warn
        } else {
            Status::Pass
        };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Timings {
    pub total_seconds: f64,
    pub per_check: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub status: Status,
    pub config: SuiteConfig,
    pub records: Vec<CheckRecord>,
    pub timings: Timings,
}

impl VerificationReport {
    pub fn new(config: SuiteConfig, records: Vec<CheckRecord>, timings: Timings) -> Self {
        let status = if records.iter().any(|r| r.status == Status::Fail) {
            Status::Fail
        } else if records.iter().any(|r| r.status == Status::Warn) {
            Status::Warn
        } else {
            Status::Pass
        };
        Self {
            tool: "tauberlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status,
            config,
            records,
            timings,
        }
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// JSON with the timing block zeroed, for run-to-run comparison.
    pub fn to_json_without_timings(&self) -> String {
        let mut copy = self.clone();
        copy.timings = Timings::default();
        copy.to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_criteria_and_notes() {
        let mut r = CheckRecord::new("a", "x");
        r.criterion(Criterion::le("e", 1e-9, 1e-8));
        r.finish();
        assert_eq!(r.status, Status::Pass);
        r.note("slow");
        r.finish();
        assert_eq!(r.status, Status::Warn);
        r.criterion(Criterion::gt("c", 0.0, 0.0));
        r.finish();
        assert_eq!(r.status, Status::Fail);
        assert!(!Criterion::finite("f", f64::NAN).passed);
        assert!(Criterion::holds("h", true).passed);
    }

    #[test]
    fn report_status_and_json() {
        let mut ok = CheckRecord::new("ok", "x");
        ok.finish();
        let bad = CheckRecord::errored("bad", "y", &Error::InvalidArgument("boom".into()));
        let timings = Timings { total_seconds: 1.5, per_check: BTreeMap::new() };
        let rep = VerificationReport::new(SuiteConfig::default(), vec![ok, bad], timings);
        assert_eq!(rep.status, Status::Fail);
        assert!(!rep.passed());
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(v["records"][1]["status"], "fail");
        assert!(v["records"][0].get("error").is_none());
        assert!(!rep.to_json_without_timings().contains("1.5"));
    }
}
