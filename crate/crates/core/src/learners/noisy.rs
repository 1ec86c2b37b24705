use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::LabeledExample;
use crate::error::{Error, Result};
use crate::seeding::{rng_for, stream, Digest};

/// Adds `N(0, sigma_sq)` noise to every coordinate of `vectors[q]`. The draw
/// for query `q` is keyed by (seed, training-set digest, query digest), so
/// repeating a (training set, query) combination within one seed repeats the
/// noise while distinct combinations get independent draws.
pub fn noisy_predict(
    train: &[&LabeledExample],
    queries: &[&[f64]],
    vectors: &[Vec<f64>],
    sigma_sq: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if !(sigma_sq > 0.0) || !sigma_sq.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be positive, got {sigma_sq}"
        )));
    }
    if vectors.len() != queries.len() {
        return Err(Error::LengthMismatch {
            context: "noisy predictions vs queries",
            expected: queries.len(),
            actual: vectors.len(),
        });
    }
    let train_digest = train
        .iter()
        .fold(Digest::default(), |d, e| d.floats(&e.x).word(e.y as u64))
        .finish();
    let sigma = sigma_sq.sqrt();
    Ok(queries
        .iter()
        .zip(vectors)
        .map(|(q, v)| {
            let qd = Digest::default().floats(q).finish();
            let mut rng = rng_for(&[seed, stream::NOISE, train_digest, qd]);
            v.iter()
                .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect())
}

/// `β / (2·√d·γ)`, the variance that balances the two terms of the
/// deterministic-stability argument.
pub fn default_sigma_sq(beta: f64, d_out: usize, gamma: f64) -> f64 {
    beta / (2.0 * (d_out as f64).sqrt() * gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_query_repeats_noise() {
        let e = LabeledExample::new(vec![0.0], 0);
        let train = [&e];
        let q = [0.3];
        let out = noisy_predict(&train, &[&q, &q], &[vec![0.5], vec![0.5]], 1.0, 4).unwrap();
        assert_eq!(out[0], out[1]);
        assert_ne!(out[0], vec![0.5]);
    }

    #[test]
    fn vanishing_variance_recovers_inner() {
        let e = LabeledExample::new(vec![0.0], 0);
        let q = [0.3];
        let out = noisy_predict(&[&e], &[&q], &[vec![0.25, 0.75]], 1e-24, 1).unwrap();
        assert!((out[0][0] - 0.25).abs() < 1e-9 && (out[0][1] - 0.75).abs() < 1e-9);
        assert!(noisy_predict(&[&e], &[&q], &[vec![0.0]], 0.0, 1).is_err());
    }

    #[test]
    fn distinct_queries_are_uncorrelated() {
        let e = LabeledExample::new(vec![0.0], 0);
        let (qa, qb) = ([0.1], [0.2]);
        let trials = 10_000;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for seed in 0..trials {
            let out = noisy_predict(&[&e], &[&qa, &qb], &[vec![0.0], vec![0.0]], 1.0, seed).unwrap();
            sab += out[0][0] * out[1][0];
            saa += out[0][0] * out[0][0];
            sbb += out[1][0] * out[1][0];
        }
        let corr = sab / (saa * sbb).sqrt();
        assert!(corr.abs() <= 0.05, "corr {corr}");
    }

    #[test]
    fn sigma_default() {
        assert!((default_sigma_sq(0.5, 4, 1.0) - 0.125).abs() < 1e-15);
    }
}
