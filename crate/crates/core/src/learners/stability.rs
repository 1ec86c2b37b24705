use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LearnerSpec;
use crate::data::LabeledExample;
use crate::datagen::GeneratorSpec;
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng_for, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClause {
    /// Shift at the replaced point `Z_i`.
    SelfPoint,
    /// Shift at a fresh test point.
    Test,
    /// Shift at another training point `Z_j`, `j ≠ i`.
    Train,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub clause: StabilityClause,
    /// Square root of the largest per-index mean squared shift.
    pub value: f64,
    /// Replaced indices that were probed.
    pub probes: Vec<usize>,
    /// Mean squared shift per probe.
    pub mean_sq: Vec<f64>,
    pub trials: usize,
}

/// Monte Carlo estimate of one functional-stability constant: draw a
/// training sample `S` and a replacement `Z'`, retrain on `S` with `Z_i`
/// replaced by `Z'` under the same seed, and average the squared Euclidean
/// shift of the prediction at the point the clause names. Class outputs are
/// compared as one-hot vectors. The result takes the maximum over up to three
/// probed indices.
pub fn estimate_stability(
    spec: &LearnerSpec,
    gen: &GeneratorSpec,
    n: usize,
    clause: StabilityClause,
    trials: usize,
    seed: u64,
) -> Result<StabilityEstimate> {
    spec.validate()?;
    gen.validate()?;
    if trials == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "stability estimation needs n ≥ 1 and trials ≥ 1".into(),
        ));
    }
    if clause == StabilityClause::Train && n < 2 {
        return Err(Error::InvalidArgument(
            "the train clause needs n ≥ 2 so that some j ≠ i exists".into(),
        ));
    }
    let mut probes = vec![0, n / 2, n - 1];
    probes.dedup();
    let k = gen.num_classes();
    let mean_sq = probes
        .iter()
        .map(|&i| {
            let shifts = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng_for(&[seed, stream::STABILITY, i as u64, t as u64]);
                    let sample: Vec<LabeledExample> =
                        (0..n).map(|_| gen.sample_example(&mut rng)).collect();
                    let replacement = gen.sample_example(&mut rng);
                    let query = match clause {
                        StabilityClause::SelfPoint => sample[i].x.clone(),
                        StabilityClause::Test => gen.sample_example(&mut rng).x,
                        StabilityClause::Train => {
                            let j = (i + 1 + rand::Rng::random_range(&mut rng, 0..n - 1)) % n;
                            sample[j].x.clone()
                        }
                    };
                    let learner_seed =
                        derive_seed(&[seed, stream::STABILITY, i as u64, t as u64, stream::LEARNER]);
                    let original: Vec<&LabeledExample> = sample.iter().collect();
                    let mut swapped = original.clone();
                    swapped[i] = &replacement;
                    let q = [query.as_slice()];
                    let a = spec.train_predict(&original, &q, k, learner_seed)?;
                    let b = spec.train_predict(&swapped, &q, k, learner_seed)?;
                    let (a, b) = (a.predictions[0].to_vector(k), b.predictions[0].to_vector(k));
                    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(shifts.iter().sum::<f64>() / trials as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let value = mean_sq.iter().cloned().fold(0.0, f64::max).sqrt();
    Ok(StabilityEstimate {
        clause,
        value,
        probes,
        mean_sq,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::OutputKind;

    #[test]
    fn constant_learner_is_perfectly_stable() {
        let constant = LearnerSpec::LogisticGd {
            steps: 1,
            learning_rate: 0.0,
            l2: 0.0,
            output: OutputKind::Probability,
            init_scale: 0.0,
        };
        let gen = GeneratorSpec::UniformLabels { dim: 1 };
        for clause in [StabilityClause::SelfPoint, StabilityClause::Test, StabilityClause::Train] {
            let est = estimate_stability(&constant, &gen, 4, clause, 50, 1).unwrap();
            assert_eq!(est.value, 0.0);
        }
    }

    #[test]
    fn memorizer_clauses() {
        // Self: the replaced point is no longer memorized, so the prediction
        // moves from its label to class 0; one-hot shift² is 2 when the label
        // is 1 (prob 1/2) and 0 otherwise, so β² = 1.
        let gen = GeneratorSpec::UniformLabels { dim: 1 };
        let est =
            estimate_stability(&LearnerSpec::Memorizer, &gen, 2, StabilityClause::SelfPoint, 4000, 2)
                .unwrap();
        assert!((est.value * est.value - 1.0).abs() < 0.1, "{est:?}");
        let est =
            estimate_stability(&LearnerSpec::Memorizer, &gen, 3, StabilityClause::Train, 500, 2)
                .unwrap();
        assert_eq!(est.value, 0.0);
        assert!(
            estimate_stability(&LearnerSpec::Memorizer, &gen, 1, StabilityClause::Train, 5, 2)
                .is_err()
        );
    }
}
