use std::io::Write;
use std::path::Path;

use qcap_core::capacity::OptimizerConfig;
use serde::Serialize;
use serde_json::Value;

/// A named number and the tolerance of any check it took part in.
#[derive(Clone, Debug, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Machine-readable output of every subcommand. Field order is the key order
/// of the emitted JSON.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub channel_spec_digest: Option<String>,
    pub seed: u64,
    pub config: OptimizerConfig,
    pub results: Vec<NamedValue>,
    pub checks: Vec<Check>,
    pub details: Value,
    pub wall_time: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str, digest: Option<String>, cfg: &OptimizerConfig) -> Self {
        Self {
            command: command.into(),
            channel_spec_digest: digest,
            seed: cfg.seed,
            config: cfg.clone(),
            results: Vec::new(),
            checks: Vec::new(),
            details: Value::Null,
            wall_time: None,
        }
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64, tolerance: Option<f64>) {
        self.results.push(NamedValue {
            name: name.into(),
            value,
            tolerance,
        });
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self, indent: usize) -> String {
        if indent == 0 {
            return serde_json::to_string(self).expect("report serializes");
        }
        let pad = vec![b' '; indent];
        let mut buf = Vec::new();
        let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
        self.serialize(&mut ser).expect("report serializes");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}

/// Rows of a CSV table with a fixed header.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(f, "{}", r.join(","))?;
        }
        f.flush()
    }

    /// `name,value,tolerance` rows for a report's results.
    pub fn from_results(report: &RunReport) -> Self {
        Self {
            header: vec!["name", "value", "tolerance"],
            rows: report
                .results
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.value.to_string(),
                        r.tolerance.map_or(String::new(), |t| t.to_string()),
                    ]
                })
                .collect(),
        }
    }
}
