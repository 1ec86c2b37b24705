//! Synthetic distributions with known structure.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{LabeledExample, Supersample};
use crate::error::{Error, Result};
use crate::seeding::{rng_for, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Balanced binary labels; class means at `±(separation/2)·e₁` with unit
    /// isotropic noise. Observed labels are flipped with `label_noise`.
    TwoGaussians {
        dim: usize,
        separation: f64,
        #[serde(default)]
        label_noise: f64,
    },
    /// `x ~ U[0,1]`, `y = 1{x > threshold}`, flipped with `label_noise`.
    ThresholdRealizable {
        threshold: f64,
        #[serde(default)]
        label_noise: f64,
    },
    /// `x ~ U[0,1]^dim`, `y ~ Bernoulli(1/2)` independent of `x`.
    UniformLabels { dim: usize },
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let noise_ok = |r: f64| (0.0..=0.5).contains(&r);
        match *self {
            GeneratorSpec::TwoGaussians {
                dim,
                separation,
                label_noise,
            } => {
                if dim == 0 {
                    return bad("two_gaussians.dim must be at least 1".into());
                }
                if !separation.is_finite() || separation < 0.0 {
                    return bad(format!("two_gaussians.separation {separation} is invalid"));
                }
                if !noise_ok(label_noise) {
                    return bad(format!("label_noise {label_noise} outside [0, 0.5]"));
                }
            }
            GeneratorSpec::ThresholdRealizable {
                threshold,
                label_noise,
            } => {
                if !(0.0..=1.0).contains(&threshold) {
                    return bad(format!("threshold {threshold} outside [0, 1]"));
                }
                if !noise_ok(label_noise) {
                    return bad(format!("label_noise {label_noise} outside [0, 0.5]"));
                }
            }
            GeneratorSpec::UniformLabels { dim } => {
                if dim == 0 {
                    return bad("uniform_labels.dim must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match *self {
            GeneratorSpec::TwoGaussians { dim, .. } | GeneratorSpec::UniformLabels { dim } => dim,
            GeneratorSpec::ThresholdRealizable { .. } => 1,
        }
    }

    pub fn num_classes(&self) -> usize {
        2
    }

    /// Probability of each class under the generator.
    pub fn label_marginal(&self) -> Vec<f64> {
        match *self {
            GeneratorSpec::ThresholdRealizable {
                threshold,
                label_noise,
            } => {
                let p1 = (1.0 - threshold) * (1.0 - label_noise) + threshold * label_noise;
                vec![1.0 - p1, p1]
            }
            _ => vec![0.5, 0.5],
        }
    }

    /// Error of the best classifier for the generator.
    pub fn bayes_error(&self) -> f64 {
        match *self {
            GeneratorSpec::TwoGaussians {
                separation,
                label_noise,
                ..
            } => {
                let clean = normal_cdf(-separation / 2.0);
                label_noise + (1.0 - 2.0 * label_noise) * clean
            }
            GeneratorSpec::ThresholdRealizable { label_noise, .. } => label_noise,
            GeneratorSpec::UniformLabels { .. } => 0.5,
        }
    }

    pub fn sample_example<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledExample {
        match *self {
            GeneratorSpec::TwoGaussians {
                dim,
                separation,
                label_noise,
            } => {
                let y: usize = rng.random_range(0..2);
                let sign = if y == 1 { 1.0 } else { -1.0 };
                let mut x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                x[0] += sign * separation / 2.0;
                LabeledExample::new(x, flip(y, label_noise, rng))
            }
            GeneratorSpec::ThresholdRealizable {
                threshold,
                label_noise,
            } => {
                let x: f64 = rng.random();
                let y = (x > threshold) as usize;
                LabeledExample::new(vec![x], flip(y, label_noise, rng))
            }
            GeneratorSpec::UniformLabels { dim } => {
                let x = (0..dim).map(|_| rng.random()).collect();
                LabeledExample::new(x, rng.random_range(0..2))
            }
        }
    }
}

fn flip<R: Rng + ?Sized>(y: usize, rate: f64, rng: &mut R) -> usize {
    // Always consume one draw so the stream layout does not depend on `rate`.
    let u: f64 = rng.random();
    if u < rate {
        1 - y
    } else {
        y
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// `2n` i.i.d. draws arranged into `n` pairs, deterministic in `seed`.
pub fn sample_supersample(gen: &GeneratorSpec, n: usize, seed: u64) -> Result<Supersample> {
    gen.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut rng = rng_for(&[seed, stream::SUPERSAMPLE]);
    let pairs = (0..n)
        .map(|_| [gen.sample_example(&mut rng), gen.sample_example(&mut rng)])
        .collect();
    Supersample::new(pairs, gen.num_classes())
}
