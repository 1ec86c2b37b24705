//! Per-trial prediction records and the generalization-gap estimator.

use serde::{Deserialize, Serialize};

use crate::data::{complement_set, select_train_set, slot_index, SplitMask, Supersample};
use crate::error::{Error, Result};
use crate::loss::Loss;
use crate::stats::Summary;

/// One learner output on one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prediction {
    Class(usize),
    Vector(Vec<f64>),
}

impl Prediction {
    pub fn as_class(&self) -> Option<usize> {
        match self {
            Prediction::Class(k) => Some(*k),
            Prediction::Vector(_) => None,
        }
    }

    /// Euclidean embedding; class `k` becomes the one-hot vector `e_k`.
    pub fn to_vector(&self, num_classes: usize) -> Vec<f64> {
        match self {
            Prediction::Class(k) => {
                let mut v = vec![0.0; num_classes.max(k + 1)];
                v[*k] = 1.0;
                v
            }
            Prediction::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictionSpace {
    Finite { size: usize },
    Real { dim: usize },
}

impl PredictionSpace {
    pub fn is_finite(&self) -> bool {
        matches!(self, PredictionSpace::Finite { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub split: SplitMask,
    pub seed: u64,
    /// `2n` predictions in pair-major slot order.
    pub predictions: Vec<Prediction>,
    pub train_loss: f64,
    pub test_loss: f64,
}

impl TrialRecord {
    /// Scores `predictions` (pair-major, one per supersample slot) against the
    /// training and held-out halves selected by `split`.
    pub fn evaluate(
        z: &Supersample,
        split: SplitMask,
        seed: u64,
        predictions: Vec<Prediction>,
        loss: &dyn Loss,
    ) -> Result<TrialRecord> {
        if predictions.len() != 2 * z.n() {
            return Err(Error::LengthMismatch {
                context: "trial predictions vs 2n slots",
                expected: 2 * z.n(),
                actual: predictions.len(),
            });
        }
        let n = z.n() as f64;
        let train = select_train_set(z, &split)?;
        let test = complement_set(z, &split)?;
        let mut train_loss = 0.0;
        let mut test_loss = 0.0;
        for i in 0..z.n() {
            let s = split.bit(i);
            train_loss += loss.loss(&predictions[slot_index(i, s)], train[i].y);
            test_loss += loss.loss(&predictions[slot_index(i, 1 - s)], test[i].y);
        }
        Ok(TrialRecord {
            split,
            seed,
            predictions,
            train_loss: train_loss / n,
            test_loss: test_loss / n,
        })
    }

    /// Prediction at pair `i`, member `slot`.
    pub fn prediction(&self, pair: usize, slot: usize) -> &Prediction {
        &self.predictions[slot_index(pair, slot)]
    }
}

/// Held-out loss minus training loss for one trial.
pub fn gap_estimate(trial: &TrialRecord) -> f64 {
    trial.test_loss - trial.train_loss
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionTable {
    pub supersample_id: String,
    pub n: usize,
    pub prediction_space: PredictionSpace,
    pub trials: Vec<TrialRecord>,
}

impl PredictionTable {
    pub fn new(
        supersample_id: impl Into<String>,
        n: usize,
        prediction_space: PredictionSpace,
        trials: Vec<TrialRecord>,
    ) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::InvalidArgument(
                "a prediction table needs at least one trial".into(),
            ));
        }
        for t in &trials {
            if t.split.len() != n || t.predictions.len() != 2 * n {
                return Err(Error::LengthMismatch {
                    context: "trial shape vs table n",
                    expected: n,
                    actual: t.split.len(),
                });
            }
        }
        Ok(PredictionTable {
            supersample_id: supersample_id.into(),
            n,
            prediction_space,
            trials,
        })
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.trials.iter().map(gap_estimate).collect()
    }
}

/// Mean and sample std of the per-trial gaps. With a single trial the std is
/// undefined (`None`).
pub fn aggregate_gap(table: &PredictionTable) -> Summary {
    Summary::of(&table.gaps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabeledExample;
    use crate::loss::LossSpec;

    fn trial(train_loss: f64, test_loss: f64) -> TrialRecord {
        TrialRecord {
            split: SplitMask::zeros(1),
            seed: 0,
            predictions: vec![Prediction::Class(0), Prediction::Class(0)],
            train_loss,
            test_loss,
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_estimate(&trial(0.0, 0.0)), 0.0);
        assert_eq!(gap_estimate(&trial(0.0, 0.5)), 0.5);
        assert!((gap_estimate(&trial(0.3, 0.2)) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn gap_is_antisymmetric() {
        for (a, b) in [(0.1, 0.7), (0.0, 1.0), (0.4, 0.4)] {
            assert_eq!(gap_estimate(&trial(a, b)), -gap_estimate(&trial(b, a)));
        }
    }

    #[test]
    fn aggregate_examples() {
        let table = |gaps: &[f64]| {
            PredictionTable::new(
                "z",
                1,
                PredictionSpace::Finite { size: 2 },
                gaps.iter().map(|&g| trial(0.0, g)).collect(),
            )
            .unwrap()
        };
        let s = aggregate_gap(&table(&[0.0, 0.2]));
        assert!((s.mean - 0.1).abs() < 1e-15);
        assert!((s.std.unwrap() - 0.141_421_356).abs() < 1e-8);
        let s = aggregate_gap(&table(&[0.3]));
        assert_eq!(s.mean, 0.3);
        assert!(s.std.is_none());
    }

    #[test]
    fn evaluate_scores_both_halves() {
        let z = Supersample::new(
            vec![
                [LabeledExample::new(vec![0.0], 0), LabeledExample::new(vec![1.0], 1)],
                [LabeledExample::new(vec![2.0], 1), LabeledExample::new(vec![3.0], 0)],
            ],
            2,
        )
        .unwrap();
        // Always predict 0: train = {(0,0) y=0, (1,1) y=0}, test = {(0,1) y=1, (1,0) y=1}.
        let preds = vec![Prediction::Class(0); 4];
        let t = TrialRecord::evaluate(&z, "01".parse().unwrap(), 9, preds, &LossSpec::ZeroOne)
            .unwrap();
        assert_eq!(t.train_loss, 0.0);
        assert_eq!(t.test_loss, 1.0);
        assert_eq!(gap_estimate(&t), 1.0);
        let short = TrialRecord::evaluate(
            &z,
            "01".parse().unwrap(),
            9,
            vec![Prediction::Class(0)],
            &LossSpec::ZeroOne,
        );
        assert!(short.is_err());
    }

    #[test]
    fn table_json_shape() {
        let t = PredictionTable::new(
            "zs-0",
            1,
            PredictionSpace::Finite { size: 2 },
            vec![trial(0.0, 0.5)],
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&t).unwrap();
        assert_eq!(v["supersample_id"], "zs-0");
        assert_eq!(v["n"], 1);
        assert_eq!(v["trials"][0]["split"], "0");
        assert_eq!(v["trials"][0]["predictions"][0], 0);
        assert_eq!(v["prediction_space"]["kind"], "finite");
        let back: PredictionTable = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }
}
