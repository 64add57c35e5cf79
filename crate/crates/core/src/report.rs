//! JSON report envelope shared by the command-line tools.
//!
//! Everything outside `meta` is a pure function of the configuration, so two
//! runs with the same seed serialize identically once `meta` is dropped.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1.0.0";

pub fn report_schema_version() -> &'static str {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub property: String,
    pub count: usize,
    pub detail: String,
}

impl Violation {
    pub fn new(property: impl Into<String>, count: usize, detail: impl Into<String>) -> Self {
        Self { property: property.into(), count, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub weylgap: String,
}

impl Default for Versions {
    fn default() -> Self {
        Self { weylgap: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub wall_time_s: f64,
    pub os: String,
    pub arch: String,
    pub workers: usize,
}

impl Meta {
    pub fn new(wall_time_s: f64, workers: usize) -> Self {
        Self { wall_time_s, os: std::env::consts::OS.into(), arch: std::env::consts::ARCH.into(), workers }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report<C, R> {
    pub schema_version: String,
    pub command: String,
    pub config: C,
    pub result: R,
    pub violations: Vec<Violation>,
    pub versions: Versions,
    pub meta: Meta,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &str, config: C, result: R, violations: Vec<Violation>, meta: Meta) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            config,
            result,
            violations,
            versions: Versions::default(),
            meta,
        }
    }

    pub fn to_json_pretty(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Removes the `meta` key, leaving the deterministic part of a report.
pub fn strip_meta(value: &mut serde_json::Value) {
    if let Some(obj) = value.as_object_mut() {
        obj.remove("meta");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_carries_version_and_meta() {
        let r = Report::new("demo", 1u8, vec![1.0], vec![], Meta::new(0.5, 2));
        let mut v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema_version"], "1.0.0");
        assert!(v.get("meta").is_some());
        strip_meta(&mut v);
        assert!(v.get("meta").is_none());
        assert_eq!(report_schema_version(), "1.0.0");
    }
}
