//! Softmax-linear model trained by full-batch gradient descent or Langevin
//! dynamics.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LearnerSpec;
use crate::data::LabeledExample;
use crate::error::{Error, Result};
use crate::loss::argmax;
use crate::seeding::{rng_for, stream};
use crate::trial::Prediction;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// Arg-max class.
    #[default]
    Class,
    /// Softmax probability vector.
    Probability,
}

/// `β_t = min(max, max(min, scale · exp(t / tau)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseTemperature {
    pub min: f64,
    pub max: f64,
    pub scale: f64,
    pub tau: f64,
}

impl Default for InverseTemperature {
    fn default() -> Self {
        InverseTemperature {
            min: 100.0,
            max: 4000.0,
            scale: 10.0,
            tau: 100.0,
        }
    }
}

impl InverseTemperature {
    /// Fixed inverse temperature `beta` at every step.
    pub fn constant(beta: f64) -> Self {
        InverseTemperature {
            min: beta,
            max: beta,
            scale: beta,
            tau: 1.0,
        }
    }

    pub fn at(&self, t: usize) -> f64 {
        (self.scale * (t as f64 / self.tau).exp()).max(self.min).min(self.max)
    }

    pub(super) fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max >= self.min && self.scale > 0.0 && self.tau > 0.0) {
            return Err(Error::Config(format!(
                "invalid inverse temperature schedule {self:?}"
            )));
        }
        Ok(())
    }
}

pub(super) fn validate(steps: usize, learning_rate: f64, l2: f64, init_scale: f64) -> Result<()> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
        return Err(Error::Config(format!("learning_rate {learning_rate} is invalid")));
    }
    if !(l2 >= 0.0 && init_scale >= 0.0) {
        return Err(Error::Config("l2 and init_scale must be nonnegative".into()));
    }
    Ok(())
}

/// Row-major `classes × (dim + 1)` weights; the last column is the bias.
struct Model {
    classes: usize,
    dim: usize,
    w: Vec<f64>,
}

impl Model {
    fn new(classes: usize, dim: usize, init_scale: f64, seed: u64) -> Model {
        let len = classes * (dim + 1);
        let w = if init_scale > 0.0 {
            let mut rng = rng_for(&[seed, stream::LEARNER, 0]);
            (0..len)
                .map(|_| init_scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        } else {
            vec![0.0; len]
        };
        Model { classes, dim, w }
    }

    fn probs_into(&self, x: &[f64], out: &mut [f64]) {
        let stride = self.dim + 1;
        for (c, o) in out.iter_mut().enumerate() {
            let row = &self.w[c * stride..(c + 1) * stride];
            *o = row[self.dim] + row[..self.dim].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            z += *o;
        }
        for o in out.iter_mut() {
            *o /= z;
        }
    }

    /// Gradient of mean cross-entropy plus `(l2/2)·‖w‖²`.
    fn gradient(&self, train: &[&LabeledExample], l2: f64, grad: &mut [f64]) {
        let stride = self.dim + 1;
        grad.iter_mut().zip(&self.w).for_each(|(g, w)| *g = l2 * w);
        let scale = 1.0 / train.len() as f64;
        let mut p = vec![0.0; self.classes];
        for e in train {
            self.probs_into(&e.x, &mut p);
            for c in 0..self.classes {
                let r = scale * (p[c] - (c == e.y) as u8 as f64);
                let row = &mut grad[c * stride..(c + 1) * stride];
                for (g, x) in row[..self.dim].iter_mut().zip(&e.x) {
                    *g += r * x;
                }
                row[self.dim] += r;
            }
        }
    }

    fn predict(&self, queries: &[&[f64]], output: OutputKind) -> Vec<Prediction> {
        let mut p = vec![0.0; self.classes];
        queries
            .iter()
            .map(|q| {
                self.probs_into(q, &mut p);
                match output {
                    OutputKind::Class => Prediction::Class(argmax(&p)),
                    OutputKind::Probability => Prediction::Vector(p.clone()),
                }
            })
            .collect()
    }
}

pub(super) fn train_predict(
    spec: &LearnerSpec,
    train: &[&LabeledExample],
    queries: &[&[f64]],
    num_classes: usize,
    seed: u64,
) -> Vec<Prediction> {
    let dim = train[0].dim();
    match *spec {
        LearnerSpec::LogisticGd {
            steps,
            learning_rate,
            l2,
            output,
            init_scale,
        } => {
            let mut m = Model::new(num_classes, dim, init_scale, seed);
            let mut g = vec![0.0; m.w.len()];
            for _ in 0..steps {
                m.gradient(train, l2, &mut g);
                m.w.iter_mut().zip(&g).for_each(|(w, g)| *w -= learning_rate * g);
            }
            m.predict(queries, output)
        }
        LearnerSpec::SgldLinear {
            steps,
            learning_rate,
            decay,
            decay_every,
            l2,
            inverse_temperature,
            output,
            init_scale,
        } => {
            let mut m = Model::new(num_classes, dim, init_scale, seed);
            let mut g = vec![0.0; m.w.len()];
            let mut rng = rng_for(&[seed, stream::LEARNER, 1]);
            for t in 0..steps {
                let eta = learning_rate * decay.powi((t / decay_every) as i32);
                let noise = (2.0 * eta / inverse_temperature.at(t)).sqrt();
                m.gradient(train, l2, &mut g);
                for (w, g) in m.w.iter_mut().zip(&g) {
                    let xi: f64 = rng.sample(StandardNormal);
                    *w -= eta * g - noise * xi;
                }
            }
            m.predict(queries, output)
        }
        _ => unreachable!("linear::train_predict called with {}", spec.name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> Vec<LabeledExample> {
        (0..20)
            .map(|i| {
                let x = i as f64 / 10.0 - 1.0;
                LabeledExample::new(vec![x, 0.5 * x * x], (x > 0.05) as usize)
            })
            .collect()
    }

    fn probs(spec: &LearnerSpec, seed: u64) -> Vec<f64> {
        let d = data();
        let train: Vec<_> = d.iter().collect();
        let q: Vec<&[f64]> = d.iter().map(|e| e.x.as_slice()).collect();
        train_predict(spec, &train, &q, 2, seed)
            .into_iter()
            .flat_map(|p| p.to_vector(2))
            .collect()
    }

    #[test]
    fn gd_fits_separable_data() {
        let spec = LearnerSpec::LogisticGd {
            steps: 300,
            learning_rate: 1.0,
            l2: 0.0,
            output: OutputKind::Class,
            init_scale: 0.0,
        };
        let d = data();
        let train: Vec<_> = d.iter().collect();
        let q: Vec<&[f64]> = d.iter().map(|e| e.x.as_slice()).collect();
        let preds = train_predict(&spec, &train, &q, 2, 0);
        for (p, e) in preds.iter().zip(&d) {
            assert_eq!(p.as_class(), Some(e.y));
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let spec = LearnerSpec::LogisticGd {
            steps: 10,
            learning_rate: 0.5,
            l2: 0.1,
            output: OutputKind::Probability,
            init_scale: 1.0,
        };
        for pair in probs(&spec, 4).chunks(2) {
            assert!((pair[0] + pair[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_matches_recipe() {
        let s = InverseTemperature::default();
        assert_eq!(s.at(0), 100.0);
        assert!((s.at(300) - 10.0 * 3f64.exp()).abs() < 1e-9);
        assert_eq!(s.at(100_000), 4000.0);
    }

    #[test]
    fn cold_sgld_approaches_gd() {
        let gd = LearnerSpec::LogisticGd {
            steps: 50,
            learning_rate: 0.3,
            l2: 0.01,
            output: OutputKind::Probability,
            init_scale: 0.0,
        };
        let sgld = |beta: f64| LearnerSpec::SgldLinear {
            steps: 50,
            learning_rate: 0.3,
            decay: 1.0,
            decay_every: 1,
            l2: 0.01,
            inverse_temperature: InverseTemperature::constant(beta),
            output: OutputKind::Probability,
            init_scale: 0.0,
        };
        let target = probs(&gd, 9);
        let dist = |beta: f64| {
            probs(&sgld(beta), 9)
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let ds: Vec<f64> = [1e2, 1e4, 1e6, 1e8].iter().map(|&b| dist(b)).collect();
        for w in ds.windows(2) {
            assert!(w[1] < w[0], "{ds:?}");
        }
        assert!(ds[3] < 1e-3, "{ds:?}");
    }
}
