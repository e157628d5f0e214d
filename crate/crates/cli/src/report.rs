//! Plain-text reports with a JSON summary block at the end.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use flowline::AxiomReport;

/// Failures kept verbatim in a report; the rest are only counted.
const LISTED_FAILURES: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct Law {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub failures: usize,
    pub first_failures: Vec<String>,
}

impl Law {
    pub fn new(name: &str, tolerance: f64) -> Self {
        Law {
            name: name.to_string(),
            samples: 0,
            max_residual: 0.0,
            tolerance,
            passed: true,
            failures: 0,
            first_failures: Vec::new(),
        }
    }

    pub fn record(&mut self, residual: f64) {
        self.samples += 1;
        if residual.is_nan() || self.max_residual.is_nan() {
            self.max_residual = f64::NAN;
        } else {
            self.max_residual = self.max_residual.max(residual);
        }
    }

    pub fn fail(&mut self, sample: usize, message: impl std::fmt::Display) {
        self.samples += 1;
        self.failures += 1;
        if self.first_failures.len() < LISTED_FAILURES {
            self.first_failures.push(format!("sample {sample}: {message}"));
        }
    }

    /// The consistency and restriction laws of an axiom report, under the
    /// given names.
    pub fn pair_from(names: [&str; 2], report: &AxiomReport) -> [Law; 2] {
        let make = |name: &str, residual: f64| {
            let mut law = Law::new(name, report.tolerance);
            law.samples = report.samples_tested;
            law.max_residual = residual;
            law.failures = report.failures.len();
            law.first_failures = report
                .failures
                .iter()
                .take(LISTED_FAILURES)
                .map(|f| format!("sample {}: {}", f.sample, f.message))
                .collect();
            law.finish()
        };
        [
            make(names[0], report.max_residual_consistency),
            make(names[1], report.max_residual_restriction),
        ]
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.failures == 0 && self.max_residual <= self.tolerance;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    facts: Vec<(String, Value)>,
    laws: Vec<Law>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            facts: Vec::new(),
            laws: Vec::new(),
        }
    }

    pub fn fact(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.facts.push((key.to_string(), value));
    }

    pub fn law(&mut self, law: Law) {
        self.laws.push(law.finish());
    }

    pub fn laws(&self) -> &[Law] {
        &self.laws
    }

    pub fn all_passed(&self) -> bool {
        self.laws.iter().all(|l| l.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "flowline {}", self.command);
        for (key, value) in &self.facts {
            let _ = writeln!(out, "{key}: {}", inline(value));
        }
        if !self.laws.is_empty() {
            let _ = writeln!(out);
            for law in &self.laws {
                let _ = writeln!(
                    out,
                    "{:<28} {} max residual {:e} tolerance {:e} samples {} failures {}",
                    law.name,
                    if law.passed { "PASS" } else { "FAIL" },
                    law.max_residual,
                    law.tolerance,
                    law.samples,
                    law.failures
                );
                for f in &law.first_failures {
                    let _ = writeln!(out, "    {f}");
                }
            }
        }
        let mut summary = Map::new();
        summary.insert("command".into(), json!(self.command));
        for (key, value) in &self.facts {
            summary.insert(key.clone(), value.clone());
        }
        if !self.laws.is_empty() {
            summary.insert("laws".into(), serde_json::to_value(&self.laws).unwrap_or(Value::Null));
            summary.insert("passed".into(), json!(self.all_passed()));
        }
        let _ = writeln!(out, "\n--- summary ---");
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&Value::Object(summary)).unwrap_or_default()
        );
        out
    }
}

fn inline(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV with header `t,x_1,..,x_n`.
pub fn samples_csv(rows: &[(f64, Vec<f64>)], n: usize) -> String {
    let mut out = String::from("t");
    for j in 1..=n {
        let _ = write!(out, ",x_{j}");
    }
    out.push('\n');
    for (t, x) in rows {
        let _ = write!(out, "{t}");
        for v in x {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
