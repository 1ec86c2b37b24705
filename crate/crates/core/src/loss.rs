//! Losses bounded in [0, 1].

use serde::{Deserialize, Serialize};

use crate::trial::Prediction;

pub trait Loss: Send + Sync {
    /// Must lie in [0, 1].
    fn loss(&self, prediction: &Prediction, label: usize) -> f64;

    /// Lipschitz constant in the prediction (Euclidean norm), if finite.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossSpec {
    /// 0-1 loss; real-vector predictions are read through their argmax.
    #[default]
    ZeroOne,
    /// `1 - p[y]` on probability vectors, clipped to [0, 1]; 1-Lipschitz.
    /// Class predictions are read as one-hot vectors.
    AbsoluteProbability,
}

impl Loss for LossSpec {
    fn loss(&self, prediction: &Prediction, label: usize) -> f64 {
        match (self, prediction) {
            (_, Prediction::Class(k)) => (*k != label) as u8 as f64,
            (LossSpec::ZeroOne, Prediction::Vector(v)) => (argmax(v) != label) as u8 as f64,
            (LossSpec::AbsoluteProbability, Prediction::Vector(v)) => {
                let p = v.get(label).copied().unwrap_or(0.0);
                (1.0 - p).clamp(0.0, 1.0)
            }
        }
    }

    fn lipschitz(&self) -> Option<f64> {
        match self {
            LossSpec::ZeroOne => None,
            LossSpec::AbsoluteProbability => Some(1.0),
        }
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_one() {
        let l = LossSpec::ZeroOne;
        assert_eq!(l.loss(&Prediction::Class(1), 1), 0.0);
        assert_eq!(l.loss(&Prediction::Class(0), 1), 1.0);
        assert_eq!(l.loss(&Prediction::Vector(vec![0.3, 0.7]), 1), 0.0);
        assert_eq!(l.loss(&Prediction::Vector(vec![0.5, 0.5]), 1), 1.0);
        assert_eq!(l.lipschitz(), None);
    }

    #[test]
    fn absolute_probability() {
        let l = LossSpec::AbsoluteProbability;
        assert!((l.loss(&Prediction::Vector(vec![0.25, 0.75]), 1) - 0.25).abs() < 1e-15);
        assert_eq!(l.loss(&Prediction::Vector(vec![-0.5, 1.5]), 1), 0.0);
        assert_eq!(l.loss(&Prediction::Vector(vec![1.5, -0.5]), 1), 1.0);
        assert_eq!(l.lipschitz(), Some(1.0));
    }
}
