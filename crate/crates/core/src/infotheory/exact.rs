//! Exact information quantities by enumerating every split (and every seed
//! of a finite seed set) for a fixed supersample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measures::DiscreteDistribution;
use super::sparse::{Interner, SparseJoint};
use crate::data::{check_enumerable, select_train_set, slot_index, SplitMask, SubsetIndex, Supersample};
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::loss::Loss;
use crate::trial::{gap_estimate, Prediction, TrialRecord};

/// How the auxiliary randomness `R` is treated during enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// `R` is fixed to one value.
    Single(u64),
    /// `R` is uniform over a finite seed list.
    Uniform(Vec<u64>),
}

impl SeedPolicy {
    pub fn seeds(&self) -> &[u64] {
        match self {
            SeedPolicy::Single(s) => std::slice::from_ref(s),
            SeedPolicy::Uniform(v) => v,
        }
    }
}

/// Which predictions enter the f-CMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcmiTarget {
    /// Predictions on pair `i` against `S_i`.
    Index(usize),
    /// All `2n` predictions against `S`.
    All,
}

/// Class predictions on all `2n` supersample inputs for every (split, seed)
/// row. Rows are ordered split-major; every row has equal probability.
#[derive(Debug, Clone)]
pub struct ExactTable {
    n: usize,
    seeds: Vec<u64>,
    classes: Vec<u32>,
    weights: Option<Vec<u64>>,
}

impl ExactTable {
    pub fn build(
        z: &Supersample,
        learner: &LearnerSpec,
        policy: &SeedPolicy,
        enumeration_limit: usize,
    ) -> Result<ExactTable> {
        let n = z.n();
        check_enumerable(n, enumeration_limit)?;
        let seeds = policy.seeds().to_vec();
        if seeds.is_empty() {
            return Err(Error::InvalidArgument("seed policy lists no seeds".into()));
        }
        if !learner.emits_classes() {
            return Err(Error::unsupported(
                learner.name(),
                "exact enumeration",
                "information is only tabulated for class predictions",
            ));
        }
        let queries = z.inputs();
        let k = z.num_classes();
        let rows: Vec<(Vec<u32>, Option<u64>)> = (0..(1u64 << n) * seeds.len() as u64)
            .into_par_iter()
            .map(|row| {
                let split = SplitMask::from_index(row / seeds.len() as u64, n);
                let seed = seeds[(row % seeds.len() as u64) as usize];
                let train = select_train_set(z, &split)?;
                let out = learner.train_predict(&train, &queries, k, seed)?;
                let classes = out
                    .predictions
                    .iter()
                    .map(|p| p.as_class().map(|c| c as u32))
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| Error::InvalidArgument("expected class predictions".into()))?;
                Ok((classes, out.weight_code))
            })
            .collect::<Result<_>>()?;
        let weights = if rows.iter().all(|r| r.1.is_some()) {
            Some(rows.iter().map(|r| r.1.unwrap()).collect())
        } else {
            None
        };
        let classes = rows.into_iter().flat_map(|r| r.0).collect();
        Ok(ExactTable {
            n,
            seeds,
            classes,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        (1usize << self.n) * self.seeds.len()
    }

    pub fn split(&self, row: usize) -> SplitMask {
        SplitMask::from_index((row / self.seeds.len()) as u64, self.n)
    }

    pub fn seed(&self, row: usize) -> u64 {
        self.seeds[row % self.seeds.len()]
    }

    /// The `2n` class predictions of one row, pair-major.
    pub fn predictions(&self, row: usize) -> &[u32] {
        &self.classes[row * 2 * self.n..(row + 1) * 2 * self.n]
    }

    pub fn weight_code(&self, row: usize) -> Option<u64> {
        self.weights.as_ref().map(|w| w[row])
    }

    fn subset_symbols(&self, row: usize, u: &SubsetIndex) -> Vec<u32> {
        let p = self.predictions(row);
        u.indices()
            .iter()
            .flat_map(|&i| [p[slot_index(i, 0)], p[slot_index(i, 1)]])
            .collect()
    }

    fn check_subset(&self, u: &SubsetIndex) -> Result<()> {
        u.clone().within(self.n).map(|_| ())
    }

    /// `I(f(z̃_S, x̃_u, R); S_u)`.
    pub fn fcmi_subset(&self, u: &SubsetIndex) -> Result<f64> {
        self.check_subset(u)?;
        let mut preds = Interner::default();
        let mut joint = SparseJoint::new();
        for row in 0..self.rows() {
            let a = preds.id(self.subset_symbols(row, u));
            joint.add_pair(a, self.split(row).pack(u.indices()) as usize, 1.0);
        }
        Ok(joint.mutual_information())
    }

    pub fn fcmi_index(&self, i: usize) -> Result<f64> {
        self.fcmi_subset(&SubsetIndex::singleton(i))
    }

    pub fn fcmi_all(&self) -> Result<f64> {
        self.fcmi_subset(&SubsetIndex::full(self.n))
    }

    /// `I((f(z̃_S, x̃_{i,1-S_i}, R))_i; S)`: information carried by the
    /// predictions on held-out inputs only.
    pub fn test_slot_mi(&self) -> f64 {
        let mut preds = Interner::default();
        let mut joint = SparseJoint::new();
        for row in 0..self.rows() {
            let s = self.split(row);
            let p = self.predictions(row);
            let held_out: Vec<u32> = (0..self.n).map(|i| p[slot_index(i, 1 - s.bit(i))]).collect();
            joint.add_pair(preds.id(held_out), s.to_index() as usize, 1.0);
        }
        joint.mutual_information()
    }

    /// `I(W; S_u)` over the learner's weight codes.
    pub fn weight_mi_subset(&self, u: &SubsetIndex) -> Result<f64> {
        self.check_subset(u)?;
        let weights = self.weights.as_ref().ok_or_else(|| {
            Error::InvalidArgument("learner exposes no discrete weight code".into())
        })?;
        let mut codes = Interner::default();
        let mut joint = SparseJoint::new();
        for (row, &w) in weights.iter().enumerate() {
            joint.add_pair(codes.id(w), self.split(row).pack(u.indices()) as usize, 1.0);
        }
        Ok(joint.mutual_information())
    }

    pub fn weight_mi_all(&self) -> Result<f64> {
        self.weight_mi_subset(&SubsetIndex::full(self.n))
    }

    /// `I(f(z̃_S, x̃_i, R); S_i | S_{-i})`.
    pub fn stability_cmi(&self, i: usize) -> Result<f64> {
        self.conditional(i, false)
    }

    /// `I(f(z̃_S, x̃, R); S_i | S_{-i})` with all `2n` predictions.
    pub fn stability_cmi_all_predictions(&self, i: usize) -> Result<f64> {
        self.conditional(i, true)
    }

    fn conditional(&self, i: usize, all: bool) -> Result<f64> {
        if i >= self.n {
            return Err(Error::SymbolOutOfRange {
                symbol: i,
                size: self.n,
            });
        }
        let u = SubsetIndex::singleton(i);
        let mut preds = Interner::default();
        let mut joint = SparseJoint::new();
        for row in 0..self.rows() {
            let s = self.split(row);
            let a = if all {
                preds.id(self.predictions(row).to_vec())
            } else {
                preds.id(self.subset_symbols(row, &u))
            };
            joint.add(a, s.bit(i), s.pack_without(i) as usize, 1.0);
        }
        Ok(joint.conditional_mutual_information())
    }

    /// For every value of `S_{-i}` (in index order), the laws of the pair-`i`
    /// prediction under `S_i = 0` and `S_i = 1`, over a shared alphabet.
    pub fn conditional_laws(&self, i: usize) -> Result<Vec<[DiscreteDistribution; 2]>> {
        if i >= self.n {
            return Err(Error::SymbolOutOfRange {
                symbol: i,
                size: self.n,
            });
        }
        let u = SubsetIndex::singleton(i);
        let mut preds = Interner::default();
        let ids: Vec<(usize, usize, usize)> = (0..self.rows())
            .map(|row| {
                let s = self.split(row);
                let a = preds.id(self.subset_symbols(row, &u));
                (s.pack_without(i) as usize, s.bit(i), a)
            })
            .collect();
        let cells = 1usize << (self.n - 1);
        let mut counts = vec![[vec![0.0; preds.len()], vec![0.0; preds.len()]]; cells];
        for (c, b, a) in ids {
            counts[c][b][a] += 1.0;
        }
        counts
            .into_iter()
            .map(|[p0, p1]| {
                Ok([
                    DiscreteDistribution::from_weights(&p0)?,
                    DiscreteDistribution::from_weights(&p1)?,
                ])
            })
            .collect()
    }

    /// Per-row train/test losses and gap.
    pub fn trial(&self, z: &Supersample, row: usize, loss: &dyn Loss) -> Result<TrialRecord> {
        let preds = self
            .predictions(row)
            .iter()
            .map(|&c| Prediction::Class(c as usize))
            .collect();
        TrialRecord::evaluate(z, self.split(row), self.seed(row), preds, loss)
    }

    /// Expected gap over the uniform (split, seed) distribution.
    pub fn expected_gap(&self, z: &Supersample, loss: &dyn Loss) -> Result<f64> {
        let mut total = 0.0;
        for row in 0..self.rows() {
            total += gap_estimate(&self.trial(z, row, loss)?);
        }
        Ok(total / self.rows() as f64)
    }
}

/// Exact f-CMI of `learner` on `z` by enumerating all splits.
pub fn exact_fcmi_enumeration(
    z: &Supersample,
    learner: &LearnerSpec,
    target: FcmiTarget,
    policy: &SeedPolicy,
    enumeration_limit: usize,
) -> Result<f64> {
    let table = ExactTable::build(z, learner, policy, enumeration_limit)?;
    match target {
        FcmiTarget::Index(i) => table.fcmi_index(i),
        FcmiTarget::All => table.fcmi_all(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{LabeledExample, DEFAULT_ENUMERATION_LIMIT};
    use crate::learners::OutputKind;

    fn z(points: &[(f64, usize)]) -> Supersample {
        Supersample::from_examples(
            points
                .iter()
                .map(|&(x, y)| LabeledExample::new(vec![x], y))
                .collect(),
            2,
        )
        .unwrap()
    }

    fn exact(z: &Supersample, learner: &LearnerSpec) -> ExactTable {
        ExactTable::build(z, learner, &SeedPolicy::Single(0), DEFAULT_ENUMERATION_LIMIT).unwrap()
    }

    #[test]
    fn memorizer_test_slots_carry_no_information() {
        let zz = z(&[(0.1, 1), (0.2, 0), (0.3, 1), (0.4, 1), (0.5, 0), (0.6, 1)]);
        let t = exact(&zz, &LearnerSpec::Memorizer);
        assert_eq!(t.test_slot_mi(), 0.0);
        // The train slots, in contrast, reveal S wherever the pair's labels differ.
        assert!(t.fcmi_all().unwrap() > 0.0);
    }

    #[test]
    fn data_independent_learner_has_zero_fcmi() {
        let zz = z(&[(0.1, 1), (0.2, 0), (0.3, 1), (0.9, 0)]);
        let constant = LearnerSpec::LogisticGd {
            steps: 1,
            learning_rate: 0.0,
            l2: 0.0,
            output: OutputKind::Class,
            init_scale: 0.0,
        };
        let t = exact(&zz, &constant);
        for i in 0..2 {
            assert_eq!(t.fcmi_index(i).unwrap(), 0.0);
            assert_eq!(t.stability_cmi(i).unwrap(), 0.0);
        }
        assert_eq!(t.fcmi_all().unwrap(), 0.0);
    }

    #[test]
    fn threshold_n2_by_hand() {
        // Pairs: (0.1,y=0 | 0.6,y=1), (0.3,y=1 | 0.8,y=1).
        // S=00: train {0.1:0, 0.3:1}  -> w=0.2; preds on [0.1,0.6,0.3,0.8] = 0111
        // S=01: train {0.1:0, 0.8:1}  -> w=0.45;                              0101
        // S=10: train {0.6:1, 0.3:1}  -> w=0.0;                               1111
        // S=11: train {0.6:1, 0.8:1}  -> w=0.0;                               1111
        // Pair-0 predictions (slots 0.1, 0.6): 01, 01, 11, 11 -> determined by S_0,
        // so I(.; S_0) = ln 2. Pair-1 predictions (0.3, 0.8): 11, 01, 11, 11.
        // Joint with S_1: S_1=0 -> {11, 11}; S_1=1 -> {01, 11}.
        // P(01)=1/4, I = H(S_1) - H(S_1 | pred) = ln2 - (3/4)·H(1/3).
        let zz = z(&[(0.1, 0), (0.6, 1), (0.3, 1), (0.8, 1)]);
        let t = exact(&zz, &LearnerSpec::ThresholdErm);
        let h13 = -(1.0 / 3.0f64) * (1.0 / 3.0f64).ln() - (2.0 / 3.0f64) * (2.0 / 3.0f64).ln();
        let ln2 = std::f64::consts::LN_2;
        assert!((t.fcmi_index(0).unwrap() - ln2).abs() < 1e-12);
        assert!((t.fcmi_index(1).unwrap() - (ln2 - 0.75 * h13)).abs() < 1e-12);
        // All predictions: patterns 0111, 0101, 1111, 1111 -> H = 1.5 ln 2 and
        // the patterns are functions of S, so I = H(pattern).
        assert!((t.fcmi_all().unwrap() - 1.5 * ln2).abs() < 1e-12);
        // Weights 0.2, 0.45, 0.0, 0.0 carry the same information.
        assert!((t.weight_mi_all().unwrap() - 1.5 * ln2).abs() < 1e-12);
    }

    #[test]
    fn per_index_fcmi_is_at_most_ln2() {
        let zz = z(&[(0.15, 0), (0.7, 1), (0.35, 1), (0.8, 0), (0.55, 1), (0.05, 0)]);
        for learner in [LearnerSpec::ThresholdErm, LearnerSpec::Memorizer] {
            let t = exact(&zz, &learner);
            for i in 0..3 {
                assert!(t.fcmi_index(i).unwrap() <= std::f64::consts::LN_2 + 1e-12);
            }
        }
    }

    #[test]
    fn size_and_support_errors() {
        let big = Supersample::from_examples(
            (0..44).map(|i| LabeledExample::new(vec![i as f64], i % 2)).collect(),
            2,
        )
        .unwrap();
        assert!(matches!(
            exact_fcmi_enumeration(
                &big,
                &LearnerSpec::ThresholdErm,
                FcmiTarget::All,
                &SeedPolicy::Single(0),
                DEFAULT_ENUMERATION_LIMIT
            ),
            Err(Error::TooLarge { .. })
        ));
        let zz = z(&[(0.1, 0), (0.6, 1)]);
        let t = exact(&zz, &LearnerSpec::Memorizer);
        assert!(t.weight_mi_all().is_err());
    }
}
