use std::io::Write;

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord {
    pub trial: usize,
    pub n: usize,
    pub r_n: f64,
    pub d_euclid: f64,
    pub d_uv: u64,
    pub d_gr: Option<usize>,
    pub e_uv: bool,
    pub f_uv: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthRecord {
    pub trial: usize,
    pub success: bool,
    /// Short failure code, empty on success.
    pub failure: String,
    pub lower: f64,
    pub total_edges: Option<usize>,
    pub ratio: Option<f64>,
    pub within_additive: Option<bool>,
    pub within_ratio: Option<bool>,
    pub max_reuse: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub trial: usize,
    pub success: bool,
    pub failure: String,
    pub l_n: u64,
    pub delta_n: f64,
    pub lower_achieved: Option<f64>,
    pub upper_cert: f64,
    pub lower_ratio: Option<f64>,
    pub upper_ratio: f64,
    pub eup_holds: Option<bool>,
    pub max_edge_weight: Option<f64>,
    pub hops_min: Option<usize>,
    pub hops_max: Option<usize>,
    pub min_hop_weight: Option<f64>,
    pub min_hop_over_log_n: Option<f64>,
    pub min_occupancy: Option<usize>,
    /// Median hop weight over the interior hops of the first path.
    pub median_hop_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RggRecord {
    pub trial: usize,
    pub n: usize,
    pub r_n: f64,
    pub edges: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
    pub isolated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordKind {
    Distance,
    Length,
    Weight,
    Rgg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrialRecord {
    Distance(DistanceRecord),
    Length(LengthRecord),
    Weight(WeightRecord),
    Rgg(RggRecord),
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "NA".to_string(), T::to_string)
}

impl TrialRecord {
    pub fn kind(&self) -> RecordKind {
        match self {
            TrialRecord::Distance(_) => RecordKind::Distance,
            TrialRecord::Length(_) => RecordKind::Length,
            TrialRecord::Weight(_) => RecordKind::Weight,
            TrialRecord::Rgg(_) => RecordKind::Rgg,
        }
    }

    pub fn trial(&self) -> usize {
        match self {
            TrialRecord::Distance(r) => r.trial,
            TrialRecord::Length(r) => r.trial,
            TrialRecord::Weight(r) => r.trial,
            TrialRecord::Rgg(r) => r.trial,
        }
    }

    pub fn columns(kind: RecordKind) -> &'static [&'static str] {
        match kind {
            RecordKind::Distance => &["trial", "n", "r_n", "d_euclid", "d_uv", "d_gr", "e_uv", "f_uv"],
            RecordKind::Length => &[
                "trial",
                "success",
                "failure",
                "lower",
                "total_edges",
                "ratio",
                "within_additive",
                "within_ratio",
                "max_reuse",
            ],
            RecordKind::Weight => &[
                "trial",
                "success",
                "failure",
                "l_n",
                "delta_n",
                "lower_achieved",
                "upper_cert",
                "lower_ratio",
                "upper_ratio",
                "eup_holds",
                "max_edge_weight",
                "hops_min",
                "hops_max",
                "min_hop_weight",
                "min_hop_over_log_n",
                "min_occupancy",
                "median_hop_weight",
            ],
            RecordKind::Rgg => &["trial", "n", "r_n", "edges", "mean_degree", "max_degree", "isolated"],
        }
    }

    pub fn row(&self) -> Vec<String> {
        match self {
            TrialRecord::Distance(r) => vec![
                r.trial.to_string(),
                r.n.to_string(),
                r.r_n.to_string(),
                r.d_euclid.to_string(),
                r.d_uv.to_string(),
                fmt_opt(&r.d_gr),
                r.e_uv.to_string(),
                r.f_uv.to_string(),
            ],
            TrialRecord::Length(r) => vec![
                r.trial.to_string(),
                r.success.to_string(),
                r.failure.clone(),
                r.lower.to_string(),
                fmt_opt(&r.total_edges),
                fmt_opt(&r.ratio),
                fmt_opt(&r.within_additive),
                fmt_opt(&r.within_ratio),
                fmt_opt(&r.max_reuse),
            ],
            TrialRecord::Weight(r) => vec![
                r.trial.to_string(),
                r.success.to_string(),
                r.failure.clone(),
                r.l_n.to_string(),
                r.delta_n.to_string(),
                fmt_opt(&r.lower_achieved),
                r.upper_cert.to_string(),
                fmt_opt(&r.lower_ratio),
                r.upper_ratio.to_string(),
                fmt_opt(&r.eup_holds),
                fmt_opt(&r.max_edge_weight),
                fmt_opt(&r.hops_min),
                fmt_opt(&r.hops_max),
                fmt_opt(&r.min_hop_weight),
                fmt_opt(&r.min_hop_over_log_n),
                fmt_opt(&r.min_occupancy),
                fmt_opt(&r.median_hop_weight),
            ],
            TrialRecord::Rgg(r) => vec![
                r.trial.to_string(),
                r.n.to_string(),
                r.r_n.to_string(),
                r.edges.to_string(),
                r.mean_degree.to_string(),
                r.max_degree.to_string(),
                r.isolated.to_string(),
            ],
        }
    }

    /// Numeric fields fed to the summary.
    pub fn numeric(&self) -> Vec<(&'static str, Option<f64>)> {
        match self {
            TrialRecord::Distance(r) => vec![("d_gr", r.d_gr.map(|h| h as f64))],
            TrialRecord::Length(r) => vec![
                ("total_edges", r.total_edges.map(|e| e as f64)),
                ("ratio", r.ratio),
                ("max_reuse", r.max_reuse.map(|e| e as f64)),
            ],
            TrialRecord::Weight(r) => vec![
                ("lower_achieved", r.lower_achieved),
                ("lower_ratio", r.lower_ratio),
                ("upper_ratio", Some(r.upper_ratio)),
                ("max_edge_weight", r.max_edge_weight),
                ("min_hop_over_log_n", r.min_hop_over_log_n),
                ("min_occupancy", r.min_occupancy.map(|m| m as f64)),
            ],
            TrialRecord::Rgg(r) => vec![
                ("edges", Some(r.edges as f64)),
                ("mean_degree", Some(r.mean_degree)),
                ("max_degree", Some(r.max_degree as f64)),
                ("isolated", Some(r.isolated as f64)),
            ],
        }
    }

    /// Boolean fields fed to the summary; `None` leaves the trial out of that
    /// frequency.
    pub fn flags(&self) -> Vec<(&'static str, Option<bool>)> {
        match self {
            TrialRecord::Distance(r) => vec![
                ("reachable", Some(r.d_gr.is_some())),
                ("e_uv", Some(r.e_uv)),
                ("f_uv", Some(r.f_uv)),
            ],
            TrialRecord::Length(r) => vec![
                ("success", Some(r.success)),
                ("within_additive", r.within_additive),
                ("within_ratio", r.within_ratio),
            ],
            TrialRecord::Weight(r) => vec![("success", Some(r.success)), ("eup_holds", r.eup_holds)],
            TrialRecord::Rgg(r) => vec![("no_isolated", Some(r.isolated == 0))],
        }
    }
}

/// Writes a header and one row per record, in the given order.
pub fn write_csv<W: Write>(out: W, kind: RecordKind, records: &[TrialRecord]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TrialRecord::columns(kind))?;
    for r in records {
        if r.kind() != kind {
            return Err(HarnessError::MixedRecords);
        }
        w.write_record(r.row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(kind: RecordKind, records: &[TrialRecord]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, kind, records)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
