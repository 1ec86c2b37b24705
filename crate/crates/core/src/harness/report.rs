use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode};
use crate::bounds::{BoundKind, BoundReport};
use crate::error::{Error, Result};
use crate::infotheory::BiasCorrection;
use crate::stats::Summary;
use crate::trial::PredictionTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersampleReport {
    pub index: usize,
    pub seed: u64,
    /// Gap over the trials (all enumerated rows in exact mode).
    pub gap: Summary,
    /// `I(f(z̃_S, x̃_i, R); S_i)` per pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mi_per_index: Option<Vec<f64>>,
    /// `I(f(z̃_S, x̃, R); S)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fcmi_all: Option<f64>,
    /// Information in the held-out predictions alone (exact mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_slot_mi: Option<f64>,
    /// `I(W; S)` over weight codes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_mi: Option<f64>,
    /// `I(f(z̃_S, x̃_i, R); S_i | S_{-i})` per pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_cmi_per_index: Option<Vec<f64>>,
    /// `Σ_i I(f(z̃_S, x̃, R); S_i | S_{-i})`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_cmi_all_sum: Option<f64>,
    /// Per-subset information keyed by subset size `m`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subset_mi: BTreeMap<usize, Vec<f64>>,
    /// `I(F_j; S)` per ensemble member.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member_fcmi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PredictionTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    /// Mean over supersamples of the per-supersample mean gap.
    pub mean: f64,
    /// Std of the per-supersample means (across `k1`).
    pub std_across_supersamples: Option<f64>,
    /// Mean of the within-supersample std (across `k2`).
    pub mean_std_within: Option<f64>,
    pub supersamples: usize,
}

impl GapSummary {
    pub fn of(supersamples: &[SupersampleReport]) -> GapSummary {
        let means: Vec<f64> = supersamples.iter().map(|s| s.gap.mean).collect();
        let within: Vec<f64> = supersamples.iter().filter_map(|s| s.gap.std).collect();
        let across = Summary::of(&means);
        GapSummary {
            mean: across.mean,
            std_across_supersamples: across.std,
            mean_std_within: (within.len() == supersamples.len())
                .then(|| Summary::of(&within).mean),
            supersamples: supersamples.len(),
        }
    }

    /// Standard error of `mean` over supersamples.
    pub fn sem(&self) -> Option<f64> {
        self.std_across_supersamples
            .map(|s| s / (self.supersamples as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    pub gamma: f64,
    pub d_out: usize,
    /// Noise variance of the smoothed learner.
    pub sigma_sq: f64,
    /// True when `sigma_sq` is the default `β/(2√d·γ)`.
    pub sigma_sq_is_default: bool,
    pub trials_per_probe: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorInfo {
    pub mode: Mode,
    pub supersamples: usize,
    /// Trials per supersample; `2^n × seeds` in exact mode.
    pub trials_per_supersample: usize,
    pub bias_correction: BiasCorrection,
    /// Per subset size `m`: (subsets per supersample, enumerated?).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subset_families: BTreeMap<usize, (usize, bool)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub gap: GapSummary,
    pub bounds: Vec<BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityReport>,
    pub estimator: EstimatorInfo,
    pub supersamples: Vec<SupersampleReport>,
}

impl ExperimentReport {
    pub fn bound(&self, kind: BoundKind) -> Option<&BoundReport> {
        self.bounds.iter().find(|b| b.name == kind)
    }
}

/// Writes `value` as pretty JSON with a trailing newline. Struct fields keep
/// declaration order and maps are sorted, so equal values give equal bytes.
pub fn persist<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("cannot serialize: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn persist_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    persist(report, path)
}

pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    load(path)
}

/// One row of the combined gap-vs-bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub learner: String,
    pub bound_name: String,
    pub gap_mean: f64,
    /// Mean within-supersample std over the `k2` trials.
    pub gap_std: Option<f64>,
    pub bound_value: f64,
    /// Std over the `k1` supersamples.
    pub bound_spread: Option<f64>,
    pub k1: usize,
    pub k2: usize,
    pub mode: String,
}

pub const CURVE_HEADER: [&str; 10] = [
    "n",
    "learner",
    "bound_name",
    "gap_mean",
    "gap_std",
    "bound_value",
    "bound_spread",
    "k1",
    "k2",
    "mode",
];

/// One row per bound; clipping caps plotted values at 1.
pub fn curve_rows(report: &ExperimentReport, clip: bool) -> Vec<CurveRow> {
    report
        .bounds
        .iter()
        .map(|b| {
            let b = if clip { b.clone().clip() } else { b.clone() };
            CurveRow {
                n: report.config.n,
                learner: report.config.learner.name().to_string(),
                bound_name: b.name.to_string(),
                gap_mean: report.gap.mean,
                gap_std: report.gap.mean_std_within,
                bound_value: b.value,
                bound_spread: b.spread,
                k1: report.config.k1,
                k2: report.estimator.trials_per_supersample,
                mode: report.config.mode.as_str().to_string(),
            }
        })
        .collect()
}

pub fn write_curves(rows: &[CurveRow], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    write_curves_to(rows, &mut out)?;
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_curves_to<W: std::io::Write>(rows: &[CurveRow], writer: W) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: "<curves>".into(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CURVE_HEADER).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<curves>", e))
}
