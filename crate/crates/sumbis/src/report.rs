//! Serializable experiment records: exact quantities, inequality checks with
//! verdicts, and resource budgets.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BudgetError {
    #[error("tuple budget exceeded: {needed} needed, {allowed} allowed")]
    Tuples { needed: u64, allowed: u64 },
    #[error("time budget of {0} s exceeded")]
    Seconds(u64),
}

/// Resource limits for the enumeration kernels. Tuple budgets are checked
/// up front so nothing partial is emitted; the deadline is polled inside
/// long loops.
#[derive(Debug, Clone)]
pub struct Budget {
    pub max_tuples: u64,
    pub max_seconds: Option<u64>,
    started: Instant,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_tuples: 2_000_000_000, max_seconds: None, started: Instant::now() }
    }
}

impl Budget {
    pub fn new(max_tuples: u64, max_seconds: Option<u64>) -> Self {
        Budget { max_tuples, max_seconds, started: Instant::now() }
    }

    pub fn charge(&self, tuples: u64) -> Result<(), BudgetError> {
        if tuples > self.max_tuples {
            return Err(BudgetError::Tuples { needed: tuples, allowed: self.max_tuples });
        }
        self.check_deadline()
    }

    pub fn check_deadline(&self) -> Result<(), BudgetError> {
        if let Some(s) = self.max_seconds {
            if self.started.elapsed().as_secs() >= s {
                return Err(BudgetError::Seconds(s));
            }
        }
        Ok(())
    }
}

/// One verified inequality or equality: `lhs`, `rhs`, and the verdict.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: serde_json::Value,
    pub rhs: serde_json::Value,
    pub verdict: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub crate_version: String,
    pub wall_time_ms: u64,
}

/// Record of one experiment: the configuration that produced it, the named
/// quantities it computed (exact integers wherever exact), and its checks.
/// Identical config and seed reproduce the document byte for byte apart
/// from `provenance.wall_time_ms`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportDocument {
    pub schema: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub quantities: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
}

/// Exact JSON value for an unsigned quantity; values beyond u64 are emitted
/// as decimal strings so nothing is rounded.
pub fn json_uint(v: u128) -> serde_json::Value {
    match u64::try_from(v) {
        Ok(small) => serde_json::Value::from(small),
        Err(_) => serde_json::Value::from(v.to_string()),
    }
}

pub fn json_f64(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

impl ReportDocument {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        ReportDocument {
            schema: 1,
            command: command.to_string(),
            config,
            quantities: BTreeMap::new(),
            checks: Vec::new(),
            provenance: Provenance {
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_ms: 0,
            },
        }
    }

    pub fn quantity(&mut self, name: &str, value: serde_json::Value) -> &mut Self {
        self.quantities.insert(name.to_string(), value);
        self
    }

    pub fn uint(&mut self, name: &str, value: u128) -> &mut Self {
        self.quantity(name, json_uint(value))
    }

    pub fn float(&mut self, name: &str, value: f64) -> &mut Self {
        self.quantity(name, json_f64(value))
    }

    pub fn check_u(&mut self, name: &str, lhs: u128, rhs: u128, verdict: bool) -> &mut Self {
        self.checks.push(Check {
            name: name.to_string(),
            lhs: json_uint(lhs),
            rhs: json_uint(rhs),
            verdict,
        });
        self
    }

    pub fn check_f(&mut self, name: &str, lhs: f64, rhs: f64, verdict: bool) -> &mut Self {
        self.checks.push(Check {
            name: name.to_string(),
            lhs: json_f64(lhs),
            rhs: json_f64(rhs),
            verdict,
        });
        self
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict)
    }

    pub fn finish(&mut self, started: Instant) {
        self.provenance.wall_time_ms = started.elapsed().as_millis() as u64;
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// CSV for an integer histogram quantity: header `n,count`, one row per
    /// bin in ascending order.
    pub fn histogram_csv(hist: &BTreeMap<u64, u64>) -> String {
        let mut out = String::from("n,count\n");
        for (n, c) in hist {
            out.push_str(&format!("{n},{c}\n"));
        }
        out
    }
}
