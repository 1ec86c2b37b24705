//! Closed-form generalization bounds as functions of information or
//! stability estimates.
//!
//! Functions taking per-supersample inputs return a [`BoundReport`] whose
//! value is the mean over supersamples and whose spread is the sample std
//! across them. Functions returning nats give bounds on an information
//! quantity rather than on the gap.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::infotheory::{kl_divergence, DiscreteDistribution};
use crate::stats::Summary;

/// Bounds the harness knows how to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    FcmiM1,
    FcmiMn,
    FcmiM(usize),
    FcmiSquared,
    CmiWeight,
    StabilityFcmi,
    StabilityFcmiSquared,
    Vc,
    Ensemble,
    DeterministicStability,
    DeterministicStabilitySquared,
}

impl BoundKind {
    /// Plain-text formula the value is computed from.
    pub fn tag(&self) -> &'static str {
        match self {
            BoundKind::FcmiM1 => "(1/n) sum_i sqrt(2 I(f(z_S, x_i, R); S_i))",
            BoundKind::FcmiMn => "sqrt(2 I(f(z_S, x, R); S) / n)",
            BoundKind::FcmiM(_) => "E_u sqrt(2 I(f(z_S, x_u, R); S_u) / m)",
            BoundKind::FcmiSquared => "(8/n) (I(f(z_S, x, R); S) + 2)",
            BoundKind::CmiWeight => "sqrt(2 I(W; S) / n)",
            BoundKind::StabilityFcmi => "(1/n) sum_i sqrt(2 I(f(z_S, x_i, R); S_i | S_-i))",
            BoundKind::StabilityFcmiSquared => "(8/n) (sum_i I(f(z_S, x, R); S_i | S_-i) + 2)",
            BoundKind::Vc => "sqrt(2 max((d+1) ln 2, d ln(2en/d)) / n)",
            BoundKind::Ensemble => "sqrt(2 sum_j I(F_j; S) / n)",
            BoundKind::DeterministicStability => "2^(3/2) d^(1/4) sqrt(gamma beta)",
            BoundKind::DeterministicStabilitySquared => {
                "32/n + 12^(3/2) sqrt(d) gamma sqrt(2 beta^2 + n beta1^2 + n beta2^2)"
            }
        }
    }

    /// True for bounds on the expected squared gap rather than on
    /// `|E gap|`.
    pub fn is_squared(&self) -> bool {
        matches!(
            self,
            BoundKind::FcmiSquared
                | BoundKind::StabilityFcmiSquared
                | BoundKind::DeterministicStabilitySquared
        )
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundKind::FcmiM1 => f.write_str("fcmi_m1"),
            BoundKind::FcmiMn => f.write_str("fcmi_mn"),
            BoundKind::FcmiM(m) => write!(f, "fcmi_m:{m}"),
            BoundKind::FcmiSquared => f.write_str("fcmi_squared"),
            BoundKind::CmiWeight => f.write_str("cmi_weight"),
            BoundKind::StabilityFcmi => f.write_str("stability_fcmi"),
            BoundKind::StabilityFcmiSquared => f.write_str("stability_fcmi_squared"),
            BoundKind::Vc => f.write_str("vc"),
            BoundKind::Ensemble => f.write_str("ensemble"),
            BoundKind::DeterministicStability => f.write_str("deterministic_stability"),
            BoundKind::DeterministicStabilitySquared => {
                f.write_str("deterministic_stability_squared")
            }
        }
    }
}

impl FromStr for BoundKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fcmi_m1" => BoundKind::FcmiM1,
            "fcmi_mn" => BoundKind::FcmiMn,
            "fcmi_squared" => BoundKind::FcmiSquared,
            "cmi_weight" => BoundKind::CmiWeight,
            "stability_fcmi" => BoundKind::StabilityFcmi,
            "stability_fcmi_squared" => BoundKind::StabilityFcmiSquared,
            "vc" => BoundKind::Vc,
            "ensemble" => BoundKind::Ensemble,
            "deterministic_stability" => BoundKind::DeterministicStability,
            "deterministic_stability_squared" => BoundKind::DeterministicStabilitySquared,
            other => match other.strip_prefix("fcmi_m:").map(str::parse::<usize>) {
                Some(Ok(m)) if m >= 1 => BoundKind::FcmiM(m),
                _ => return Err(Error::Config(format!("unknown bound `{other}`"))),
            },
        })
    }
}

impl Serialize for BoundKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BoundKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: BoundKind,
    pub value: f64,
    /// Sample std of the per-supersample values; present iff there are at
    /// least two supersamples.
    pub spread: Option<f64>,
    /// The estimates the value was computed from.
    pub inputs_digest: BTreeMap<String, Value>,
    pub formula_tag: String,
    /// Set when `value` was clipped to 1 for plotting.
    #[serde(default)]
    pub clipped: bool,
}

impl BoundReport {
    fn new(name: BoundKind, value: f64, spread: Option<f64>) -> BoundReport {
        BoundReport {
            name,
            value,
            spread,
            inputs_digest: BTreeMap::new(),
            formula_tag: name.tag().to_string(),
            clipped: false,
        }
    }

    /// A value that does not vary across supersamples.
    pub fn constant(name: BoundKind, value: f64) -> BoundReport {
        BoundReport::new(name, value, None)
    }

    fn from_values(name: BoundKind, per_supersample: &[f64]) -> BoundReport {
        let s = Summary::of(per_supersample);
        BoundReport::new(name, s.mean, s.std)
    }

    pub fn with_input(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.inputs_digest.insert(key.to_string(), value.into());
        self
    }

    /// Caps the value at 1, the largest possible gap of a [0,1] loss.
    pub fn clip(mut self) -> Self {
        if self.value > 1.0 {
            self.value = 1.0;
            self.clipped = true;
        }
        self
    }
}

fn check_nonnegative(context: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in values {
        if !(v >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{context}: information estimates must be nonnegative, got {v}"
            )));
        }
    }
    Ok(())
}

fn check_supersamples<T>(values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "need estimates from at least one supersample".into(),
        ));
    }
    Ok(())
}

/// `(1/n) Σ_i √(2 I_i)` per supersample, averaged over supersamples.
/// `mi_per_index[z][i]` is the estimate of `I(f(z̃_S, x̃_i, R); S_i)`.
pub fn fcmi_bound_m1(mi_per_index: &[Vec<f64>]) -> Result<BoundReport> {
    per_index_root_mean(BoundKind::FcmiM1, mi_per_index)
}

/// Same shape as [`fcmi_bound_m1`] with `I(f(z̃_S, x̃_i, R); S_i | S_{-i})`.
pub fn stability_fcmi_bound(cmi_per_index: &[Vec<f64>]) -> Result<BoundReport> {
    per_index_root_mean(BoundKind::StabilityFcmi, cmi_per_index)
}

fn per_index_root_mean(kind: BoundKind, per_index: &[Vec<f64>]) -> Result<BoundReport> {
    check_supersamples(per_index)?;
    let mut values = Vec::with_capacity(per_index.len());
    for mi in per_index {
        if mi.is_empty() {
            return Err(Error::InvalidArgument("need at least one index".into()));
        }
        check_nonnegative(&kind.to_string(), mi.iter().copied())?;
        values.push(mi.iter().map(|&v| (2.0 * v).sqrt()).sum::<f64>() / mi.len() as f64);
    }
    Ok(BoundReport::from_values(kind, &values).with_input("supersamples", per_index.len()))
}

/// `√(2 f-CMI(z̃) / n)` per supersample, averaged.
pub fn fcmi_bound_mn(fcmi_per_supersample: &[f64], n: usize) -> Result<BoundReport> {
    root_bound(BoundKind::FcmiMn, fcmi_per_supersample, n)
}

fn root_bound(kind: BoundKind, values: &[f64], n: usize) -> Result<BoundReport> {
    check_supersamples(values)?;
    check_nonnegative(&kind.to_string(), values.iter().copied())?;
    let per: Vec<f64> = values.iter().map(|&v| (2.0 * v / n as f64).sqrt()).collect();
    Ok(BoundReport::from_values(kind, &per)
        .with_input("n", n)
        .with_input("mean_information", Summary::of(values).mean))
}

/// `E_{z̃,u} √((2/m) I(f(z̃_S, x̃_u, R); S_u))`. `mi_per_subset[z]` holds one
/// estimate per subset in the (enumerated or sampled) family.
pub fn fcmi_bound_general_m(mi_per_subset: &[Vec<f64>], m: usize) -> Result<BoundReport> {
    check_supersamples(mi_per_subset)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let kind = BoundKind::FcmiM(m);
    let mut values = Vec::with_capacity(mi_per_subset.len());
    for family in mi_per_subset {
        if family.is_empty() {
            return Err(Error::InvalidArgument("empty subset family".into()));
        }
        check_nonnegative(&kind.to_string(), family.iter().copied())?;
        values.push(
            family.iter().map(|&v| (2.0 * v / m as f64).sqrt()).sum::<f64>() / family.len() as f64,
        );
    }
    Ok(BoundReport::from_values(kind, &values)
        .with_input("m", m)
        .with_input("subsets_per_supersample", mi_per_subset[0].len()))
}

/// `(8/n)(E f-CMI + 2)`, a bound on the expected squared gap.
pub fn fcmi_squared_bound(fcmi_per_supersample: &[f64], n: usize) -> Result<BoundReport> {
    linear_squared(BoundKind::FcmiSquared, fcmi_per_supersample, n)
}

/// `(8/n)(E Σ_i I(f(z̃_S, x̃, R); S_i | S_{-i}) + 2)`; input is the per-index
/// sum for each supersample.
pub fn stability_fcmi_squared_bound(sum_per_supersample: &[f64], n: usize) -> Result<BoundReport> {
    linear_squared(BoundKind::StabilityFcmiSquared, sum_per_supersample, n)
}

fn linear_squared(kind: BoundKind, values: &[f64], n: usize) -> Result<BoundReport> {
    check_supersamples(values)?;
    check_nonnegative(&kind.to_string(), values.iter().copied())?;
    let per: Vec<f64> = values.iter().map(|&v| 8.0 / n as f64 * (v + 2.0)).collect();
    Ok(BoundReport::from_values(kind, &per)
        .with_input("n", n)
        .with_input("mean_information", Summary::of(values).mean))
}

/// `√(2 CMI / n)` with the weight-level CMI averaged over supersamples first.
/// The spread is taken over the per-supersample roots.
pub fn cmi_weight_bound(cmi_per_supersample: &[f64], n: usize) -> Result<BoundReport> {
    check_supersamples(cmi_per_supersample)?;
    let kind = BoundKind::CmiWeight;
    check_nonnegative(&kind.to_string(), cmi_per_supersample.iter().copied())?;
    let mean = Summary::of(cmi_per_supersample).mean;
    let per: Vec<f64> = cmi_per_supersample
        .iter()
        .map(|&v| (2.0 * v / n as f64).sqrt())
        .collect();
    let spread = Summary::of(&per).std;
    Ok(BoundReport::new(kind, (2.0 * mean / n as f64).sqrt(), spread)
        .with_input("n", n)
        .with_input("mean_information", mean))
}

/// `max((d+1) log 2, d log(2en/d))` nats: a bound on `f-CMI(f, z̃)` for any
/// learner choosing from a class of VC dimension `d_vc`.
pub fn vc_fcmi_bound(d_vc: usize, n: usize) -> f64 {
    let d = d_vc as f64;
    let n = n as f64;
    ((d + 1.0) * std::f64::consts::LN_2).max(d * (2.0 * std::f64::consts::E * n / d).ln())
}

/// Gap bound from plugging [`vc_fcmi_bound`] into the `m = n` bound.
pub fn vc_gap_bound(d_vc: usize, n: usize) -> BoundReport {
    let nats = vc_fcmi_bound(d_vc, n);
    BoundReport::new(BoundKind::Vc, (2.0 * nats / n as f64).sqrt(), None)
        .with_input("d_vc", d_vc)
        .with_input("n", n)
        .with_input("fcmi_bound_nats", nats)
}

/// `Σ_j I(F_j; S)`: bounds `I(g(F_1..F_k); S)` when the members use
/// independent randomness.
pub fn ensemble_fcmi_bound(per_learner_fcmi: &[f64]) -> Result<f64> {
    check_nonnegative("ensemble", per_learner_fcmi.iter().copied())?;
    Ok(per_learner_fcmi.iter().sum())
}

/// `√(2 Σ_j I(F_j; S) / n)` per supersample, averaged over supersamples.
/// `member_fcmi[z][j]` is the information of member `j`.
pub fn ensemble_gap_bound(member_fcmi: &[Vec<f64>], n: usize) -> Result<BoundReport> {
    check_supersamples(member_fcmi)?;
    let values = member_fcmi
        .iter()
        .map(|members| Ok((2.0 * ensemble_fcmi_bound(members)? / n as f64).sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(BoundReport::from_values(BoundKind::Ensemble, &values)
        .with_input("members", member_fcmi[0].len()))
}

/// `¼ E_{S_{-i}} [KL(P₁‖P₀) + KL(P₀‖P₁)]` where `laws[c] = [P₀, P₁]` are
/// the prediction laws under `S_i = 0, 1` for the `c`-th value of `S_{-i}`,
/// each value equally likely.
pub fn stability_kl_decomposition(laws: &[[DiscreteDistribution; 2]]) -> Result<f64> {
    check_supersamples(laws)?;
    let mut total = 0.0;
    for [p0, p1] in laws {
        total += kl_divergence(p1, p0)? + kl_divergence(p0, p1)?;
    }
    Ok(0.25 * total / laws.len() as f64)
}

/// KL between `N(μ₁, σ²I)` and `N(μ₀, σ²I)` given `‖μ₁ − μ₀‖²`.
pub fn gaussian_shift_kl(sq_norm_mean_diff: f64, sigma_sq: f64) -> Result<f64> {
    if !(sigma_sq > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be positive (got {sigma_sq}); a deterministic learner has unbounded KL"
        )));
    }
    if !(sq_norm_mean_diff >= 0.0) {
        return Err(Error::InvalidArgument(
            "squared norm must be nonnegative".into(),
        ));
    }
    Ok(sq_norm_mean_diff / (2.0 * sigma_sq))
}

/// Functional-stability constants of a deterministic real-output learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    /// Self-stability: RMS shift at the replaced point.
    pub beta: f64,
    /// Test-stability: RMS shift at a fresh point.
    pub beta1: f64,
    /// Train-stability: RMS shift at another training point.
    pub beta2: f64,
    /// Lipschitz constant of the loss in the prediction.
    pub gamma: f64,
    /// Prediction dimension.
    pub d_out: usize,
}

impl StabilityConstants {
    fn validate(&self) -> Result<()> {
        if [self.beta, self.beta1, self.beta2, self.gamma]
            .iter()
            .any(|v| !(*v >= 0.0))
            || self.d_out == 0
        {
            return Err(Error::InvalidArgument(format!(
                "stability constants must be nonnegative with d_out ≥ 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// `2^{3/2} d^{1/4} √(γβ)`.
pub fn deterministic_stability_bound(c: &StabilityConstants) -> Result<f64> {
    c.validate()?;
    Ok(2f64.powf(1.5) * (c.d_out as f64).powf(0.25) * (c.gamma * c.beta).sqrt())
}

/// `32/n + 12^{3/2} √d γ √(2β² + nβ₁² + nβ₂²)`, a bound on the expected
/// squared gap.
pub fn deterministic_stability_squared_bound(c: &StabilityConstants, n: usize) -> Result<f64> {
    c.validate()?;
    let n = n as f64;
    let inner = 2.0 * c.beta.powi(2) + n * c.beta1.powi(2) + n * c.beta2.powi(2);
    Ok(32.0 / n + 12f64.powf(1.5) * (c.d_out as f64).sqrt() * c.gamma * inner.sqrt())
}
