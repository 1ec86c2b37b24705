use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundKind;
use crate::data::{binomial, DEFAULT_ENUMERATION_LIMIT};
use crate::datagen::GeneratorSpec;
use crate::error::{Error, Result};
use crate::infotheory::histogram::MAX_PLUGIN_CELLS;
use crate::infotheory::BiasCorrection;
use crate::learners::LearnerSpec;
use crate::loss::{Loss, LossSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSpec {
    Generator(GeneratorSpec),
    /// Rows `x_0..x_{p-1}, y`; supersamples are drawn without replacement.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    MonteCarlo,
    ExactEnumeration,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::MonteCarlo => "monte_carlo",
            Mode::ExactEnumeration => "exact_enumeration",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    /// A fresh learner seed per (supersample, trial).
    #[default]
    PerTrial,
    /// One learner seed per supersample, shared by its trials.
    Fixed,
}

/// How subsets of size `2 ≤ m < n` are chosen for the general-`m` bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetPolicy {
    /// Enumerate every subset when there are at most this many.
    pub max_enumerated: u64,
    /// Otherwise sample this many subsets uniformly.
    pub samples: usize,
}

impl Default for SubsetPolicy {
    fn default() -> Self {
        SubsetPolicy {
            max_enumerated: 1000,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    /// Monte Carlo draws per probed index.
    pub trials: usize,
    /// Lipschitz constant of the loss; defaults to the loss's own.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Noise variance for the smoothed learner; defaults to `β/(2√d·γ)`.
    #[serde(default)]
    pub sigma_sq: Option<f64>,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            trials: 200,
            gamma: None,
            sigma_sq: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSpec,
    pub n: usize,
    pub k1: usize,
    #[serde(default = "one")]
    pub k2: usize,
    pub learner: LearnerSpec,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub bounds: Vec<BoundKind>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub subset_policy: SubsetPolicy,
    #[serde(default)]
    pub loss: LossSpec,
    #[serde(default)]
    pub seed_mode: SeedMode,
    /// Size of the uniform seed set enumerated in exact mode.
    #[serde(default = "one")]
    pub exact_seeds: usize,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub bias_correction: BiasCorrection,
    #[serde(default = "default_limit")]
    pub enumeration_limit: usize,
    /// Keep every trial's predictions in the report.
    #[serde(default)]
    pub record_predictions: bool,
}

fn one() -> usize {
    1
}

fn default_limit() -> usize {
    DEFAULT_ENUMERATION_LIMIT
}

impl ExperimentConfig {
    /// Minimal config with defaults for everything optional.
    pub fn new(data: DataSpec, n: usize, k1: usize, k2: usize, learner: LearnerSpec) -> Self {
        ExperimentConfig {
            data,
            n,
            k1,
            k2,
            learner,
            mode: Mode::default(),
            bounds: Vec::new(),
            master_seed: 0,
            subset_policy: SubsetPolicy::default(),
            loss: LossSpec::default(),
            seed_mode: SeedMode::default(),
            exact_seeds: 1,
            stability: StabilityConfig::default(),
            bias_correction: BiasCorrection::default(),
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            record_predictions: false,
        }
    }

    pub fn num_classes_hint(&self) -> usize {
        match &self.data {
            DataSpec::Generator(g) => g.num_classes(),
            DataSpec::Csv { .. } => 2,
        }
    }

    /// Lipschitz constant used by the stability bounds.
    pub fn gamma(&self) -> Option<f64> {
        self.stability.gamma.or_else(|| self.loss.lipschitz())
    }

    /// Checks everything that can be checked without loading data.
    /// `num_classes` is the label-space size of the data source.
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        if self.n == 0 || self.k1 == 0 || self.k2 == 0 {
            return Err(Error::Config("n, k1 and k2 must all be at least 1".into()));
        }
        if let DataSpec::Generator(g) = &self.data {
            g.validate()?;
        }
        self.learner.validate()?;
        if self.exact_seeds == 0 {
            return Err(Error::Config("exact_seeds must be at least 1".into()));
        }
        let exact = self.mode == Mode::ExactEnumeration;
        if exact {
            if self.n > self.enumeration_limit || self.n >= 64 {
                return Err(Error::TooLarge {
                    what: "exact enumeration (pairs)",
                    size: self.n as u128,
                    limit: self.enumeration_limit.min(63) as u128,
                });
            }
            if !self.learner.emits_classes() {
                return Err(Error::unsupported(
                    self.learner.name(),
                    "exact_enumeration",
                    "exact mode tabulates class predictions only",
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for b in &self.bounds {
            if !seen.insert(*b) {
                return Err(Error::Config(format!("bound `{b}` requested twice")));
            }
            self.check_bound(*b, num_classes)?;
        }
        Ok(())
    }

    fn check_bound(&self, b: BoundKind, num_classes: usize) -> Result<()> {
        let exact = self.mode == Mode::ExactEnumeration;
        let learner = self.learner.name();
        let refuse = |reason: &str| Err(Error::unsupported(learner, b.to_string(), reason));
        let needs_classes = matches!(
            b,
            BoundKind::FcmiM1
                | BoundKind::FcmiMn
                | BoundKind::FcmiM(_)
                | BoundKind::FcmiSquared
                | BoundKind::StabilityFcmi
                | BoundKind::StabilityFcmiSquared
                | BoundKind::CmiWeight
                | BoundKind::Ensemble
        );
        if needs_classes && !self.learner.emits_classes() {
            return refuse("information is only estimated for class predictions");
        }
        match b {
            BoundKind::FcmiM1 => Ok(()),
            BoundKind::FcmiM(_) | BoundKind::FcmiMn | BoundKind::FcmiSquared if !exact => {
                let m = if let BoundKind::FcmiM(m) = b { m } else { self.n };
                if m > self.n {
                    return Err(Error::Config(format!("{b}: m exceeds n = {}", self.n)));
                }
                let cells = (num_classes as f64).powi(2 * m as i32) * 2f64.powi(m as i32);
                if cells > MAX_PLUGIN_CELLS as f64 {
                    return refuse(&format!(
                        "plug-in alphabet |K|^(2m)·2^m = {cells:e} exceeds 2^16 cells"
                    ));
                }
                Ok(())
            }
            BoundKind::FcmiM(m) => {
                if m > self.n {
                    return Err(Error::Config(format!("{b}: m exceeds n = {}", self.n)));
                }
                Ok(())
            }
            BoundKind::FcmiMn | BoundKind::FcmiSquared => Ok(()),
            BoundKind::CmiWeight => {
                if !self.learner.has_weight_code() {
                    return refuse("learner exposes no discrete weight code");
                }
                if !exact {
                    return refuse("weight information is computed in exact mode only");
                }
                Ok(())
            }
            BoundKind::StabilityFcmi => {
                if !exact && !self.learner.is_deterministic() {
                    return refuse(
                        "Monte Carlo conditional information needs a deterministic learner",
                    );
                }
                Ok(())
            }
            BoundKind::StabilityFcmiSquared => {
                if !exact {
                    return refuse("computed in exact mode only");
                }
                Ok(())
            }
            BoundKind::Vc => {
                if self.learner.vc_dimension().is_none() {
                    return refuse("learner has no known VC dimension");
                }
                Ok(())
            }
            BoundKind::Ensemble => {
                if !matches!(self.learner, LearnerSpec::Ensemble { .. }) {
                    return refuse("learner is not an ensemble");
                }
                if !exact {
                    return refuse("member information is computed in exact mode only");
                }
                Ok(())
            }
            BoundKind::DeterministicStability | BoundKind::DeterministicStabilitySquared => {
                if !self.learner.is_deterministic() || self.learner.emits_classes() {
                    return refuse("needs a deterministic learner with vector predictions");
                }
                if !matches!(self.data, DataSpec::Generator(_)) {
                    return refuse("stability estimation needs a generator to draw fresh data");
                }
                if b == BoundKind::DeterministicStabilitySquared && self.n < 2 {
                    return refuse("the train-stability clause needs n ≥ 2");
                }
                match self.gamma() {
                    Some(g) if g >= 0.0 => Ok(()),
                    _ => refuse("loss has no Lipschitz constant; set stability.gamma"),
                }
            }
        }
    }

    /// Number of subsets of size `m` used per supersample, and whether they
    /// are enumerated.
    pub fn subset_family_size(&self, m: usize) -> (usize, bool) {
        let total = binomial(self.n, m);
        if total <= self.subset_policy.max_enumerated as u128 {
            (total as usize, true)
        } else {
            (self.subset_policy.samples, false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::OutputKind;

    fn base(learner: LearnerSpec) -> ExperimentConfig {
        ExperimentConfig::new(
            DataSpec::Generator(GeneratorSpec::UniformLabels { dim: 1 }),
            4,
            1,
            10,
            learner,
        )
    }

    #[test]
    fn weight_bound_needs_weight_code() {
        let mut c = base(LearnerSpec::Knn {
            k: 1,
            bag_fraction: 1.0,
        });
        c.mode = Mode::ExactEnumeration;
        c.bounds = vec![BoundKind::CmiWeight];
        let err = c.validate(2).unwrap_err();
        assert!(matches!(err, Error::Unsupported { .. }));
        assert!(err.to_string().contains("knn"));
        c.learner = LearnerSpec::ThresholdErm;
        c.validate(2).unwrap();
    }

    #[test]
    fn plugin_alphabet_limit() {
        let mut c = base(LearnerSpec::ThresholdErm);
        c.n = 10;
        c.bounds = vec![BoundKind::FcmiM(3)];
        c.validate(2).unwrap();
        c.bounds = vec![BoundKind::FcmiMn];
        assert!(c.validate(2).is_err());
        c.mode = Mode::ExactEnumeration;
        c.validate(2).unwrap();
    }

    #[test]
    fn stability_bound_requirements() {
        let mut c = base(LearnerSpec::LogisticGd {
            steps: 5,
            learning_rate: 0.1,
            l2: 0.0,
            output: OutputKind::Probability,
            init_scale: 0.0,
        });
        c.bounds = vec![BoundKind::DeterministicStability];
        assert!(c.validate(2).is_err(), "0-1 loss has no Lipschitz constant");
        c.loss = LossSpec::AbsoluteProbability;
        c.validate(2).unwrap();
        c.bounds.push(BoundKind::FcmiM1);
        assert!(c.validate(2).is_err(), "vector outputs have no plug-in MI");
    }

    #[test]
    fn json_defaults_and_unknown_fields() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"data":{"generator":{"kind":"uniform_labels","params":{"dim":1}}},
                "n":3,"k1":2,"learner":{"kind":"memorizer"},"bounds":["fcmi_m1","fcmi_m:2"]}"#,
        )
        .unwrap();
        assert_eq!(c.k2, 1);
        assert_eq!(c.bounds, vec![BoundKind::FcmiM1, BoundKind::FcmiM(2)]);
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"data":{"csv":{"path":"x.csv"}},"n":3,"k1":2,"learner":{"kind":"memorizer"},"typo":1}"#
        )
        .is_err());
    }

    #[test]
    fn subset_policy() {
        let mut c = base(LearnerSpec::ThresholdErm);
        c.n = 8;
        assert_eq!(c.subset_family_size(3), (56, true));
        c.n = 30;
        assert_eq!(c.subset_family_size(5), (200, false));
    }
}
