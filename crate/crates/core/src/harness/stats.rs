use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::records::TrialRecord;
use super::HarnessError;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub count: usize,
    pub mean: f64,
    /// Sample variance (divisor `count - 1`); zero for a single value.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl NumericSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { count, mean, variance, min, max })
    }

    /// Standard deviation over mean; infinite for a zero mean.
    pub fn coefficient_of_variation(&self) -> f64 {
        if self.mean == 0.0 {
            f64::INFINITY
        } else {
            self.variance.sqrt() / self.mean.abs()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub successes: usize,
    pub count: usize,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Frequency {
    pub fn new(successes: usize, count: usize) -> Self {
        let (lower, upper) = wilson_interval(successes, count);
        let estimate = if count == 0 { 0.0 } else { successes as f64 / count as f64 };
        Self { successes, count, estimate, lower, upper }
    }

    pub fn overlaps(&self, other: &Frequency) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// Wilson score interval at 95%. The empty sample gives `[0, 1]`.
pub fn wilson_interval(successes: usize, count: usize) -> (f64, f64) {
    if count == 0 {
        return (0.0, 1.0);
    }
    let n = count as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub numeric: BTreeMap<String, NumericSummary>,
    pub frequencies: BTreeMap<String, Frequency>,
}

impl SummaryStats {
    pub fn frequency(&self, name: &str) -> Option<&Frequency> {
        self.frequencies.get(name)
    }

    pub fn numeric(&self, name: &str) -> Option<&NumericSummary> {
        self.numeric.get(name)
    }
}

/// Aggregates records of one kind after sorting them by trial index. Missing
/// values (failed constructions, unreachable targets) are left out of the
/// corresponding field only.
pub fn summarize(records: &[TrialRecord]) -> Result<SummaryStats, HarnessError> {
    let Some(first) = records.first() else {
        return Ok(SummaryStats::default());
    };
    if records.iter().any(|r| r.kind() != first.kind()) {
        return Err(HarnessError::MixedRecords);
    }
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.trial());

    let mut values: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut flags: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    for r in &sorted {
        for (name, v) in r.numeric() {
            let slot = values.entry(name).or_default();
            if let Some(x) = v.filter(|x| x.is_finite()) {
                slot.push(x);
            }
        }
        for (name, b) in r.flags() {
            let slot = flags.entry(name).or_default();
            if let Some(b) = b {
                slot.1 += 1;
                slot.0 += usize::from(b);
            }
        }
    }
    Ok(SummaryStats {
        count: sorted.len(),
        numeric: values
            .into_iter()
            .filter_map(|(k, v)| NumericSummary::of(&v).map(|s| (k.to_string(), s)))
            .collect(),
        frequencies: flags.into_iter().filter(|(_, (_, c))| *c > 0).map(|(k, (s, c))| (k.to_string(), Frequency::new(s, c))).collect(),
    })
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}
