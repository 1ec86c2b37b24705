use serde::{Deserialize, Serialize};

use crate::data::subsets_of_size;
use crate::error::Result;
use crate::infotheory::ExactTable;

use super::TOLERANCE;

/// What plays the role of `Φ` against `S_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InformationSource {
    /// Predictions on the pairs in `u`.
    Predictions,
    /// The learner's weight code.
    WeightCode,
}

/// `sqrt[m-1] = E_u √(2 I_u / m)` and `linear[m-1] = E_u I_u / m` over all
/// subsets `u` of size `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub sqrt: Vec<f64>,
    pub linear: Vec<f64>,
    /// Smallest step `value[m+1] - value[m]` over both sequences.
    pub margin: f64,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.margin >= -TOLERANCE
    }
}

pub fn verify_monotonicity_in_m(table: &ExactTable, source: InformationSource) -> Result<MonotonicityReport> {
    let n = table.n();
    let mut sqrt = Vec::with_capacity(n);
    let mut linear = Vec::with_capacity(n);
    for m in 1..=n {
        let family = subsets_of_size(n, m);
        let mut s = 0.0;
        let mut l = 0.0;
        for u in &family {
            let i = match source {
                InformationSource::Predictions => table.fcmi_subset(u)?,
                InformationSource::WeightCode => table.weight_mi_subset(u)?,
            } / m as f64;
            s += (2.0 * i).sqrt();
            l += i;
        }
        sqrt.push(s / family.len() as f64);
        linear.push(l / family.len() as f64);
    }
    let steps = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let margin = steps(&sqrt).min(steps(&linear));
    Ok(MonotonicityReport {
        sqrt,
        linear,
        margin: if margin.is_finite() { margin } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{sample_supersample, GeneratorSpec};
    use crate::infotheory::SeedPolicy;
    use crate::learners::LearnerSpec;

    fn table(learner: &LearnerSpec, gen: &GeneratorSpec, n: usize, seed: u64) -> ExactTable {
        let z = sample_supersample(gen, n, seed).unwrap();
        ExactTable::build(&z, learner, &SeedPolicy::Single(0), 20).unwrap()
    }

    #[test]
    fn threshold_and_memorizer_are_monotone() {
        let gen = GeneratorSpec::ThresholdRealizable {
            threshold: 0.5,
            label_noise: 0.1,
        };
        for seed in 0..5 {
            let t = table(&LearnerSpec::ThresholdErm, &gen, 4, seed);
            for source in [InformationSource::Predictions, InformationSource::WeightCode] {
                let r = verify_monotonicity_in_m(&t, source).unwrap();
                assert!(r.holds(), "{r:?}");
            }
            let t = table(&LearnerSpec::Memorizer, &gen, 4, seed);
            assert!(verify_monotonicity_in_m(&t, InformationSource::Predictions).unwrap().holds());
        }
    }

    #[test]
    fn constant_predictions_give_zeros() {
        // Every label the same: the memorizer predicts it everywhere.
        let gen = GeneratorSpec::ThresholdRealizable {
            threshold: 1.0,
            label_noise: 0.0,
        };
        let t = table(&LearnerSpec::Memorizer, &gen, 3, 1);
        let r = verify_monotonicity_in_m(&t, InformationSource::Predictions).unwrap();
        assert!(r.sqrt.iter().chain(&r.linear).all(|&v| v == 0.0));
        assert_eq!(r.margin, 0.0);
    }
}
