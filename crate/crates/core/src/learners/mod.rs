//! Built-in learners behind one `train_predict` contract.
//!
//! Every learner is a pure function of (ordered training set, queries,
//! number of classes, seed). Learners whose output ignores the seed report
//! themselves as deterministic so exact mode can enumerate splits alone.

mod ensemble;
mod knn;
mod linear;
mod memorizer;
mod noisy;
mod stability;
mod threshold;

use serde::{Deserialize, Serialize};

use crate::data::LabeledExample;
use crate::error::{Error, Result};
use crate::trial::{Prediction, PredictionSpace};

pub use ensemble::{ensemble_combine, member_seed};
pub use linear::{InverseTemperature, OutputKind};
pub use noisy::{default_sigma_sq, noisy_predict};
pub use stability::{estimate_stability, StabilityClause, StabilityEstimate};
pub use threshold::threshold_erm_fit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum LearnerSpec {
    /// ERM over `x ↦ 1{x > w}` on the first feature.
    ThresholdErm,
    /// Recalls the label of an exact training input; predicts class 0 elsewhere.
    Memorizer,
    Knn {
        k: usize,
        /// Fraction of the training set kept in a seeded subsample.
        #[serde(default = "one")]
        bag_fraction: f64,
    },
    /// Full-batch gradient descent on softmax cross-entropy.
    LogisticGd {
        steps: usize,
        learning_rate: f64,
        #[serde(default)]
        l2: f64,
        #[serde(default)]
        output: OutputKind,
        /// Std of the seeded Gaussian initialization; 0 starts from zero.
        #[serde(default)]
        init_scale: f64,
    },
    /// Langevin dynamics on the same model: gradient step plus
    /// `sqrt(2η/β_t)` Gaussian noise.
    SgldLinear {
        steps: usize,
        learning_rate: f64,
        /// Multiplicative step-size decay applied every `decay_every` steps.
        #[serde(default = "one")]
        decay: f64,
        #[serde(default = "default_decay_every")]
        decay_every: usize,
        #[serde(default)]
        l2: f64,
        #[serde(default)]
        inverse_temperature: InverseTemperature,
        #[serde(default)]
        output: OutputKind,
        #[serde(default)]
        init_scale: f64,
    },
    /// Adds Gaussian noise of variance `sigma_sq` to the inner learner's
    /// vector predictions, independently per (training set, query).
    NoisyWrapper {
        inner: Box<LearnerSpec>,
        sigma_sq: f64,
    },
    /// Majority vote over class-output members.
    Ensemble {
        members: Vec<LearnerSpec>,
        /// When set, member `j` receives digit `j` of the seed in this radix,
        /// so each member draws from a finite seed set.
        #[serde(default)]
        seed_radix: Option<u64>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_decay_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerOutput {
    pub predictions: Vec<Prediction>,
    /// Discrete identifier of the fitted weights, for learners whose weight
    /// space is enumerable.
    pub weight_code: Option<u64>,
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::ThresholdErm => "threshold_erm",
            LearnerSpec::Memorizer => "memorizer",
            LearnerSpec::Knn { .. } => "knn",
            LearnerSpec::LogisticGd { .. } => "logistic_gd",
            LearnerSpec::SgldLinear { .. } => "sgld_linear",
            LearnerSpec::NoisyWrapper { .. } => "noisy_wrapper",
            LearnerSpec::Ensemble { .. } => "ensemble",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            LearnerSpec::ThresholdErm | LearnerSpec::Memorizer => Ok(()),
            LearnerSpec::Knn { k, bag_fraction } => {
                if *k == 0 {
                    return bad("knn.k must be at least 1".into());
                }
                if !(*bag_fraction > 0.0 && *bag_fraction <= 1.0) {
                    return bad(format!("knn.bag_fraction {bag_fraction} outside (0, 1]"));
                }
                Ok(())
            }
            LearnerSpec::LogisticGd {
                steps,
                learning_rate,
                l2,
                init_scale,
                ..
            } => linear::validate(*steps, *learning_rate, *l2, *init_scale),
            LearnerSpec::SgldLinear {
                steps,
                learning_rate,
                decay,
                decay_every,
                l2,
                inverse_temperature,
                init_scale,
                ..
            } => {
                linear::validate(*steps, *learning_rate, *l2, *init_scale)?;
                if !(*decay > 0.0) || *decay_every == 0 {
                    return bad("sgld_linear decay must be positive with decay_every ≥ 1".into());
                }
                inverse_temperature.validate()
            }
            LearnerSpec::NoisyWrapper { inner, sigma_sq } => {
                if !(*sigma_sq > 0.0) || !sigma_sq.is_finite() {
                    return bad(format!("noisy_wrapper.sigma_sq {sigma_sq} must be positive"));
                }
                inner.validate()
            }
            LearnerSpec::Ensemble {
                members,
                seed_radix,
            } => {
                if members.is_empty() {
                    return bad("ensemble needs at least one member".into());
                }
                if *seed_radix == Some(0) {
                    return bad("ensemble.seed_radix must be at least 1".into());
                }
                for m in members {
                    m.validate()?;
                    if !m.emits_classes() {
                        return bad(format!(
                            "ensemble member {} must emit class predictions",
                            m.name()
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// True when predictions are class labels.
    pub fn emits_classes(&self) -> bool {
        match self {
            LearnerSpec::LogisticGd { output, .. } | LearnerSpec::SgldLinear { output, .. } => {
                *output == OutputKind::Class
            }
            LearnerSpec::NoisyWrapper { .. } => false,
            _ => true,
        }
    }

    /// True when the output does not depend on the seed.
    pub fn is_deterministic(&self) -> bool {
        match self {
            LearnerSpec::ThresholdErm | LearnerSpec::Memorizer => true,
            LearnerSpec::Knn { bag_fraction, .. } => *bag_fraction >= 1.0,
            LearnerSpec::LogisticGd { init_scale, .. } => *init_scale == 0.0,
            LearnerSpec::SgldLinear { .. } | LearnerSpec::NoisyWrapper { .. } => false,
            LearnerSpec::Ensemble { members, .. } => members.iter().all(|m| m.is_deterministic()),
        }
    }

    /// VC dimension of the hypothesis class, where finite and known.
    pub fn vc_dimension(&self) -> Option<usize> {
        match self {
            LearnerSpec::ThresholdErm => Some(1),
            _ => None,
        }
    }

    /// Whether `train_predict` fills `weight_code`.
    pub fn has_weight_code(&self) -> bool {
        matches!(self, LearnerSpec::ThresholdErm)
    }

    pub fn prediction_space(&self, num_classes: usize) -> PredictionSpace {
        match self {
            LearnerSpec::NoisyWrapper { inner, .. } => PredictionSpace::Real {
                dim: match inner.prediction_space(num_classes) {
                    PredictionSpace::Real { dim } => dim,
                    PredictionSpace::Finite { size } => size,
                },
            },
            s if s.emits_classes() => PredictionSpace::Finite { size: num_classes },
            _ => PredictionSpace::Real { dim: num_classes },
        }
    }

    /// Train on `train` (order matters only to tie-breaks) and predict every
    /// query.
    pub fn train_predict(
        &self,
        train: &[&LabeledExample],
        queries: &[&[f64]],
        num_classes: usize,
        seed: u64,
    ) -> Result<LearnerOutput> {
        let Some(first) = train.first() else {
            return Err(Error::InvalidArgument("training set is empty".into()));
        };
        let dim = first.dim();
        for e in train {
            if e.dim() != dim {
                return Err(Error::LengthMismatch {
                    context: "training feature dimension",
                    expected: dim,
                    actual: e.dim(),
                });
            }
            if e.y >= num_classes {
                return Err(Error::SymbolOutOfRange {
                    symbol: e.y,
                    size: num_classes,
                });
            }
        }
        for q in queries {
            if q.len() != dim {
                return Err(Error::LengthMismatch {
                    context: "query feature dimension",
                    expected: dim,
                    actual: q.len(),
                });
            }
        }
        let classes = |v: Vec<usize>| v.into_iter().map(Prediction::Class).collect();
        Ok(match self {
            LearnerSpec::ThresholdErm => {
                let w = threshold_erm_fit(train);
                LearnerOutput {
                    predictions: classes(threshold::predict(w, queries)),
                    weight_code: Some(w.to_bits()),
                }
            }
            LearnerSpec::Memorizer => LearnerOutput {
                predictions: classes(memorizer::predict(train, queries)),
                weight_code: None,
            },
            LearnerSpec::Knn { k, bag_fraction } => LearnerOutput {
                predictions: classes(knn::predict(
                    train,
                    queries,
                    num_classes,
                    *k,
                    *bag_fraction,
                    seed,
                )),
                weight_code: None,
            },
            LearnerSpec::LogisticGd { .. } | LearnerSpec::SgldLinear { .. } => LearnerOutput {
                predictions: linear::train_predict(self, train, queries, num_classes, seed),
                weight_code: None,
            },
            LearnerSpec::NoisyWrapper { inner, sigma_sq } => {
                let out = inner.train_predict(train, queries, num_classes, seed)?;
                let vectors: Vec<Vec<f64>> = out
                    .predictions
                    .iter()
                    .map(|p| p.to_vector(num_classes))
                    .collect();
                let noisy = noisy_predict(train, queries, &vectors, *sigma_sq, seed)?;
                LearnerOutput {
                    predictions: noisy.into_iter().map(Prediction::Vector).collect(),
                    weight_code: None,
                }
            }
            LearnerSpec::Ensemble {
                members,
                seed_radix,
            } => {
                let votes = ensemble::member_votes(
                    members,
                    *seed_radix,
                    train,
                    queries,
                    num_classes,
                    seed,
                )?;
                LearnerOutput {
                    predictions: classes(
                        (0..queries.len())
                            .map(|q| ensemble_combine(&votes.iter().map(|v| v[q]).collect::<Vec<_>>()))
                            .collect(),
                    ),
                    weight_code: None,
                }
            }
        })
    }
}
