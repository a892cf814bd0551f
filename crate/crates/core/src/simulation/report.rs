use std::io::Write;

use serde::Serialize;

use super::ks::KsResult;
use crate::error::{Error, Result};

/// Empirical rate with a normal-approximation 95% band.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Metric {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    /// `√(q̂(1 − q̂)/trials)`
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Metric {
    pub fn from_counts(name: &str, beta1: Option<f64>, successes: usize, trials: usize) -> Self {
        let (rate, se) = if trials == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let q = successes as f64 / trials as f64;
            (q, (q * (1.0 - q) / trials as f64).sqrt())
        };
        Metric {
            name: name.to_string(),
            beta1,
            successes,
            trials,
            rate,
            se,
            lo: rate - 1.96 * se,
            hi: rate + 1.96 * se,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RepStatus {
    Ok,
    /// Too many outliers flagged to refit.
    Excluded,
    /// Numerical failure (degenerate event, zero mass, solver stall).
    Failed,
}

impl RepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RepStatus::Ok => "ok",
            RepStatus::Excluded => "excluded",
            RepStatus::Failed => "failed",
        }
    }
}

/// One replication; `values` are named numeric outputs.
#[derive(Debug, Clone)]
pub struct Record {
    pub rep: usize,
    pub beta1: Option<f64>,
    pub status: RepStatus,
    pub values: Vec<(&'static str, f64)>,
}

impl Record {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    /// Flag stored as 0/1.
    pub fn flag(&self, key: &str) -> bool {
        self.get(key) == Some(1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NamedKs {
    pub name: String,
    #[serde(flatten)]
    pub result: KsResult,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimReport {
    pub kind: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub replications: usize,
    pub excluded: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_outliers: Option<Vec<usize>>,
    pub metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ks: Vec<NamedKs>,
    #[serde(skip)]
    pub records: Vec<Record>,
}

impl SimReport {
    pub fn metric(&self, name: &str, beta1: Option<f64>) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name && m.beta1 == beta1)
    }

    pub fn ks(&self, name: &str) -> Option<&KsResult> {
        self.ks.iter().find(|k| k.name == name).map(|k| &k.result)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat per-replication table; columns are the union of value names
    /// in first-seen order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut cols: Vec<&'static str> = Vec::new();
        for r in &self.records {
            for (k, _) in &r.values {
                if !cols.contains(k) {
                    cols.push(k);
                }
            }
        }
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["rep", "beta1", "status"];
        header.extend(&cols);
        w.write_record(&header).map_err(io)?;
        for r in &self.records {
            let mut row = vec![
                r.rep.to_string(),
                r.beta1.map(|b| b.to_string()).unwrap_or_default(),
                r.status.as_str().to_string(),
            ];
            row.extend(cols.iter().map(|c| r.get(c).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}
