use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::metrics::Metric;
use crate::harness::protocol::{Protocol, ProtocolConfig};
use crate::harness::stats::{Interval, Verdict};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    /// One value per iteration (fold-averaged), or per fold.
    pub samples: Vec<f64>,
    pub mean: f64,
    pub ci: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub model: String,
    pub protocol: Protocol,
    pub metric: Metric,
    pub baseline: ConditionSummary,
    pub perturbed: ConditionSummary,
    /// Baseline mean minus perturbed mean.
    pub gap: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 of the canonical JSON of the config, roster and profile.
    pub config_hash: String,
    pub config: ProtocolConfig,
    pub models: Vec<String>,
    pub dataset_rows: usize,
    pub features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smm_gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub entries: Vec<ReportEntry>,
    /// Diagnostics such as fold re-splits or regularized fits.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn entry(&self, model: &str, metric: Metric) -> Option<&ReportEntry> {
        self.entries
            .iter()
            .find(|e| e.model == model && e.metric == metric)
    }

    pub fn models(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.model.as_str()) {
                out.push(&e.model);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Flat table: `model,metric,condition,mean,ci_lo,ci_hi,verdict`.
    pub fn write_table<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "model",
            "metric",
            "condition",
            "mean",
            "ci_lo",
            "ci_hi",
            "verdict",
        ])?;
        for e in &self.entries {
            for (condition, s) in [("baseline", &e.baseline), ("perturbed", &e.perturbed)] {
                w.write_record([
                    e.model.as_str(),
                    e.metric.name(),
                    condition,
                    &s.mean.to_string(),
                    &s.ci.lo.to_string(),
                    &s.ci.hi.to_string(),
                    e.verdict.name(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn table_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_table(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()?)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.table_string()?)?;
        Ok(())
    }
}
