use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one verifier.
///
/// Every entry of `thresholds` is keyed `<op>:<observed key>` with `op` one
/// of `max` (≤), `min` (≥), `lt` (<) or `gt` (>), so `pass` can be
/// recomputed from `observed` and `thresholds` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub observed: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: u64,
}

impl ExperimentReport {
    /// Re-derives the pass flag from the observed values and thresholds.
    pub fn recompute_pass(&self) -> bool {
        self.thresholds.iter().all(|(key, &bound)| {
            let Some((op, obs)) = key.split_once(':') else {
                return false;
            };
            let Some(&x) = self.observed.get(obs) else {
                return false;
            };
            match op {
                "max" => x <= bound,
                "min" => x >= bound,
                "lt" => x < bound,
                "gt" => x > bound,
                _ => false,
            }
        })
    }

    /// Names of the thresholds that fail.
    pub fn failures(&self) -> Vec<String> {
        self.thresholds
            .keys()
            .filter(|k| {
                let single = ExperimentReport {
                    thresholds: BTreeMap::from([((*k).clone(), self.thresholds[*k])]),
                    ..self.clone()
                };
                !single.recompute_pass()
            })
            .cloned()
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// JSON with the wall-clock field zeroed, for byte comparisons.
    pub fn canonical_json(&self) -> String {
        ExperimentReport {
            runtime_ms: 0,
            ..self.clone()
        }
        .to_json()
    }
}

/// Accumulates a report; `finish` stamps the runtime and the pass flag.
pub struct ReportBuilder {
    report: ExperimentReport,
    started: Instant,
}

impl ReportBuilder {
    pub fn new(name: &str, seed: u64) -> Self {
        ReportBuilder {
            report: ExperimentReport {
                name: name.to_owned(),
                parameters: BTreeMap::new(),
                observed: BTreeMap::new(),
                thresholds: BTreeMap::new(),
                pass: false,
                seed,
                runtime_ms: 0,
            },
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.report.parameters.insert(key.to_owned(), value.into());
        self
    }

    /// Records an observation. Non-finite values are left out, which fails
    /// any threshold that refers to them.
    pub fn observe(&mut self, key: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.report.observed.insert(key.to_owned(), value);
        }
        self
    }

    pub fn max(&mut self, key: &str, bound: f64) -> &mut Self {
        self.threshold("max", key, bound)
    }

    pub fn min(&mut self, key: &str, bound: f64) -> &mut Self {
        self.threshold("min", key, bound)
    }

    pub fn lt(&mut self, key: &str, bound: f64) -> &mut Self {
        self.threshold("lt", key, bound)
    }

    pub fn gt(&mut self, key: &str, bound: f64) -> &mut Self {
        self.threshold("gt", key, bound)
    }

    fn threshold(&mut self, op: &str, key: &str, bound: f64) -> &mut Self {
        self.report.thresholds.insert(format!("{op}:{key}"), bound);
        self
    }

    pub fn finish(&mut self) -> ExperimentReport {
        let mut report = self.report.clone();
        report.runtime_ms = self.started.elapsed().as_millis() as u64;
        report.pass = report.recompute_pass();
        report
    }
}
