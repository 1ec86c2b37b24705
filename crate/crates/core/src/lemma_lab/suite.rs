use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instances::{
    centered_distribution, independent_components, joint_instance, kl_instance,
};
use super::{
    fold_margins, verify_dv_inequality, verify_erasure_lemma, verify_hans_all_subsets,
    verify_kl_decomposition, verify_squared_inequality, verify_subgaussian_square,
};
use crate::error::Result;
use crate::seeding::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    DvInequality,
    SquaredInequality,
    SubgaussianSquare,
    ErasureLemma,
    HansSubsetInequality,
    KlDecomposition,
}

impl Lemma {
    pub const ALL: [Lemma; 6] = [
        Lemma::DvInequality,
        Lemma::SquaredInequality,
        Lemma::SubgaussianSquare,
        Lemma::ErasureLemma,
        Lemma::HansSubsetInequality,
        Lemma::KlDecomposition,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Lemma::DvInequality => "dv_inequality",
            Lemma::SquaredInequality => "squared_inequality",
            Lemma::SubgaussianSquare => "subgaussian_square",
            Lemma::ErasureLemma => "erasure_lemma",
            Lemma::HansSubsetInequality => "hans_subset_inequality",
            Lemma::KlDecomposition => "kl_decomposition",
        }
    }

    fn margin(&self, seed: u64, index: u64) -> Result<f64> {
        let mut rng = rng_for(&[seed, *self as u64, index]);
        Ok(match self {
            Lemma::DvInequality => verify_dv_inequality(&joint_instance(&mut rng)).margin,
            Lemma::SquaredInequality => verify_squared_inequality(&joint_instance(&mut rng)).margin,
            Lemma::SubgaussianSquare => {
                let (values, probs) = centered_distribution(&mut rng);
                verify_subgaussian_square(&values, &probs)?.margin
            }
            Lemma::ErasureLemma => {
                let n = 2 + (index % 2) as usize;
                verify_erasure_lemma(&independent_components(n, 3, &mut rng)).margin
            }
            Lemma::HansSubsetInequality => {
                let n = 2 + (index % 4) as usize;
                let max_component = if n <= 3 { 3 } else { 2 };
                verify_hans_all_subsets(&independent_components(n, max_component, &mut rng)).margin
            }
            Lemma::KlDecomposition => verify_kl_decomposition(&kl_instance(&mut rng))?.margin,
        })
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one verifier over many random instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub lemma: String,
    pub instances: usize,
    pub min_margin: f64,
    pub violations: usize,
}

impl LemmaSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `lemma` on `instances` random instances derived from `seed`.
pub fn run_lemma(lemma: Lemma, instances: usize, seed: u64) -> Result<LemmaSummary> {
    let margins = (0..instances as u64)
        .into_par_iter()
        .map(|k| lemma.margin(seed, k))
        .collect::<Result<Vec<f64>>>()?;
    let (min_margin, violations) = fold_margins(margins.into_par_iter());
    Ok(LemmaSummary {
        lemma: lemma.name().to_string(),
        instances,
        min_margin,
        violations,
    })
}

pub fn run_lemma_suite(instances: usize, seed: u64) -> Result<Vec<LemmaSummary>> {
    Lemma::ALL.iter().map(|&l| run_lemma(l, instances, seed)).collect()
}
