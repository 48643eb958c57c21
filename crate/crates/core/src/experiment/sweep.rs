use super::config::RunConfig;
use super::report::{summarize, Summary};
use super::run::{run_with, RunError, RunOptions};
use crate::agent::SchemeKind;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Number of UAVs, 2 to 5.
    M,
    /// Slots per episode, 40 to 70 in steps of 10.
    T,
}

impl Axis {
    pub fn values(self) -> Vec<usize> {
        match self {
            Axis::M => (2..=5).collect(),
            Axis::T => (40..=70).step_by(10).collect(),
        }
    }

    fn apply(self, base: &RunConfig, v: usize) -> RunConfig {
        match self {
            Axis::M => RunConfig { uavs: v, ..base.clone() },
            Axis::T => RunConfig { horizon: v, ..base.clone() },
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(Axis::M),
            "t" => Ok(Axis::T),
            _ => Err(format!("unknown axis `{s}` (expected m or t)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub scheme: SchemeKind,
    pub value: usize,
    /// Mean episode sum-rate over the final window.
    pub sum_rate: f64,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: Axis,
    pub values: Vec<usize>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn row(&self, scheme: SchemeKind) -> Vec<&SweepCell> {
        self.values
            .iter()
            .filter_map(|v| self.cells.iter().find(|c| c.scheme == scheme && c.value == *v))
            .collect()
    }

    /// Plain-text comparison table, one row per scheme and metric.
    pub fn render(&self) -> String {
        let name = match self.axis {
            Axis::M => "M",
            Axis::T => "T",
        };
        let mut s = format!("{:<10} {:<10}", "scheme", "metric");
        for v in &self.values {
            let _ = write!(s, " {:>12}", format!("{name}={v}"));
        }
        s.push('\n');
        let mut schemes: Vec<SchemeKind> = Vec::new();
        for c in &self.cells {
            if !schemes.contains(&c.scheme) {
                schemes.push(c.scheme);
            }
        }
        for k in schemes {
            let row = self.row(k);
            let metrics: [(&str, Box<dyn Fn(&SweepCell) -> String>); 3] = [
                ("sum_rate", Box::new(|c| format!("{:.3}", c.sum_rate))),
                ("snr_db", Box::new(|c| c.summary.mean_snr_db.map_or("-".into(), |v| format!("{v:.2}")))),
                ("mission", Box::new(|c| if c.summary.mission_constraint_met { "yes".into() } else { "no".into() })),
            ];
            for (label, f) in &metrics {
                let _ = write!(s, "{:<10} {:<10}", k.as_str(), label);
                for c in &row {
                    let _ = write!(s, " {:>12}", f(c));
                }
                s.push('\n');
            }
        }
        s
    }
}

/// Number of strict decreases along `xs`.
pub fn inversions(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[1] < w[0]).count()
}

/// Trains every scheme at every axis value from the same base config.
pub fn sweep(base: &RunConfig, axis: Axis, schemes: &[SchemeKind], opts: RunOptions) -> Result<SweepTable, RunError> {
    let values = axis.values();
    let mut cells = Vec::new();
    for &scheme in schemes {
        for &v in &values {
            let cfg = RunConfig { scheme, ..axis.apply(base, v) };
            let out = run_with(&cfg, opts)?;
            let summary = summarize(&out.metrics, &cfg);
            let w = out.metrics.final_window();
            let sum_rate = if w.is_empty() { f64::NAN } else { w.iter().map(|r| r.sum_rate).sum::<f64>() / w.len() as f64 };
            cells.push(SweepCell { scheme, value: v, sum_rate, summary });
        }
    }
    Ok(SweepTable { axis, values, cells })
}
