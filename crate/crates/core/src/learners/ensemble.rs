use super::LearnerSpec;
use crate::data::LabeledExample;
use crate::error::Result;
use crate::seeding::{derive_seed, stream};

/// Majority vote; ties go to the smallest class index.
pub fn ensemble_combine(votes: &[usize]) -> usize {
    let top = votes.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; top + 1];
    for &v in votes {
        counts[v] += 1;
    }
    let mut best = 0;
    for c in 1..counts.len() {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

/// Seed handed to member `j` when its own randomness index is `digit`.
pub fn member_seed(j: usize, digit: u64) -> u64 {
    derive_seed(&[stream::MEMBER, j as u64, digit])
}

/// Per-member seeds for an ensemble seed. With a radix `r`, member `j` uses
/// digit `j` of `seed` in base `r`, so enumerating `seed` over `0..r^k`
/// enumerates every member-seed combination exactly once.
pub(super) fn member_seeds(count: usize, seed_radix: Option<u64>, seed: u64) -> Vec<u64> {
    match seed_radix {
        Some(r) => {
            let mut rest = seed;
            (0..count)
                .map(|j| {
                    let digit = rest % r;
                    rest /= r;
                    member_seed(j, digit)
                })
                .collect()
        }
        None => (0..count)
            .map(|j| derive_seed(&[stream::MEMBER, j as u64, seed]))
            .collect(),
    }
}

pub(super) fn member_votes(
    members: &[LearnerSpec],
    seed_radix: Option<u64>,
    train: &[&LabeledExample],
    queries: &[&[f64]],
    num_classes: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    members
        .iter()
        .zip(member_seeds(members.len(), seed_radix, seed))
        .map(|(m, s)| {
            let out = m.train_predict(train, queries, num_classes, s)?;
            Ok(out
                .predictions
                .iter()
                .map(|p| p.as_class().expect("ensemble members emit classes"))
                .collect())
        })
        .collect()
}
