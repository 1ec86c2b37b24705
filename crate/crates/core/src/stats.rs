//! Small summary statistics shared across modules.

use serde::{Deserialize, Serialize};

/// Mean and sample standard deviation (n − 1 denominator). `std` is `None`
/// with fewer than two values; it is never silently zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: Option<f64>,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let count = values.len();
        if count == 0 {
            return Summary {
                mean: f64::NAN,
                std: None,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = (count >= 2).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        });
        Summary { mean, std, count }
    }

    /// Standard error of the mean, when defined.
    pub fn sem(&self) -> Option<f64> {
        self.std.map(|s| s / (self.count as f64).sqrt())
    }
}

pub fn mean(values: &[f64]) -> f64 {
    Summary::of(values).mean
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_examples() {
        let s = Summary::of(&[0.1, 0.1, 0.1]);
        assert!((s.mean - 0.1).abs() < 1e-15);
        assert!(s.std.unwrap() < 1e-15);

        // sqrt(((0.1)^2 + (0.1)^2) / 1) = 0.141421...
        let s = Summary::of(&[0.0, 0.2]);
        assert!((s.mean - 0.1).abs() < 1e-15);
        assert!((s.std.unwrap() - 0.141_421_356_237_309_5).abs() < 1e-12);

        let s = Summary::of(&[0.3]);
        assert_eq!(s.mean, 0.3);
        assert_eq!(s.std, None);
        assert_eq!(s.sem(), None);
    }
}
