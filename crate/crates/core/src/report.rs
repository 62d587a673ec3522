//! Evaluation report assembly: one record per (instance, method) plus
//! per-method aggregate means, rendered as tab-separated lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One solver run on one instance. `exact` and `ratio` are present only
/// when an exact reference length was computable.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub instance: String,
    pub method: String,
    pub length: f64,
    pub exact: Option<f64>,
    pub ratio: Option<f64>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub records: Vec<EvalRecord>,
    /// Free-form context lines emitted as `#` comments in the header.
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: EvalRecord) {
        self.records.push(record);
    }

    /// Mean ratio for one method over the records that have one.
    pub fn mean_ratio(&self, method: &str) -> Option<f64> {
        let ratios: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.ratio)
            .collect();
        if ratios.is_empty() {
            None
        } else {
            Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    }

    pub fn methods(&self) -> Vec<String> {
        let mut seen = BTreeMap::new();
        for r in &self.records {
            seen.entry(r.method.clone()).or_insert(());
        }
        seen.into_keys().collect()
    }

    /// Render the line-delimited report: `#` header comments, one TSV
    /// record per run, then one `mean` line per method with the ratio to
    /// three decimals (the table style, `1.xxx`).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            let _ = writeln!(out, "# {note}");
        }
        let _ = writeln!(out, "# instance\tmethod\tlength\texact\tratio\telapsed_ms");
        for r in &self.records {
            let exact = r.exact.map_or(String::from("-"), |e| format!("{e:.3}"));
            let ratio = r.ratio.map_or(String::from("-"), |g| format!("{g:.6}"));
            let _ = writeln!(
                out,
                "{}\t{}\t{:.3}\t{}\t{}\t{:.3}",
                r.instance, r.method, r.length, exact, ratio, r.elapsed_ms
            );
        }
        for method in self.methods() {
            if let Some(mean) = self.mean_ratio(&method) {
                let _ = writeln!(out, "mean\t{method}\tratio={mean:.3}");
            }
        }
        out
    }
}
