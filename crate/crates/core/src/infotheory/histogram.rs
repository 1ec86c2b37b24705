//! Count histograms and the plug-in mutual information estimator.

use std::hash::Hash;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::measures::{JointDistribution, JointDistribution3};
use super::sparse::{Interner, SparseJoint};
use crate::error::{Error, Result};

/// Largest dense product alphabet the plug-in estimator will accept.
pub const MAX_PLUGIN_CELLS: u128 = 1 << 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasCorrection {
    /// Raw empirical frequencies.
    #[default]
    None,
    /// Miller–Madow: adds (K_A - 1 + K_B - 1 - (K_AB - 1)) / 2N using occupied
    /// cell counts K.
    MillerMadow,
}

/// Nonnegative integer counts over a product of 2 or 3 finite alphabets,
/// row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HistogramRepr", into = "HistogramRepr")]
pub struct JointHistogram {
    alphabets: Vec<usize>,
    counts: Vec<u64>,
}

impl JointHistogram {
    pub fn new(alphabets: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&alphabets.len()) || alphabets.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "histogram needs 2 or 3 nonempty alphabets, got {alphabets:?}"
            )));
        }
        let cells = alphabets.iter().map(|&a| a as u128).product::<u128>();
        if cells > MAX_PLUGIN_CELLS {
            return Err(Error::TooLarge {
                what: "joint histogram cells",
                size: cells,
                limit: MAX_PLUGIN_CELLS,
            });
        }
        Ok(JointHistogram {
            alphabets: alphabets.to_vec(),
            counts: vec![0; cells as usize],
        })
    }

    pub fn from_counts(alphabets: &[usize], counts: Vec<u64>) -> Result<Self> {
        let mut h = JointHistogram::new(alphabets)?;
        if counts.len() != h.counts.len() {
            return Err(Error::LengthMismatch {
                context: "histogram counts",
                expected: h.counts.len(),
                actual: counts.len(),
            });
        }
        h.counts = counts;
        Ok(h)
    }

    pub fn alphabets(&self) -> &[usize] {
        &self.alphabets
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn offset(&self, symbols: &[usize]) -> Result<usize> {
        if symbols.len() != self.alphabets.len() {
            return Err(Error::LengthMismatch {
                context: "histogram symbol arity",
                expected: self.alphabets.len(),
                actual: symbols.len(),
            });
        }
        let mut off = 0;
        for (&s, &size) in symbols.iter().zip(&self.alphabets) {
            if s >= size {
                return Err(Error::SymbolOutOfRange { symbol: s, size });
            }
            off = off * size + s;
        }
        Ok(off)
    }

    pub fn increment(&mut self, symbols: &[usize]) -> Result<()> {
        let off = self.offset(symbols)?;
        self.counts[off] += 1;
        Ok(())
    }

    /// Cell-wise addition; alphabets must agree.
    pub fn merge(&mut self, other: &JointHistogram) -> Result<()> {
        if self.alphabets != other.alphabets {
            return Err(Error::InvalidArgument(format!(
                "cannot merge histograms over {:?} and {:?}",
                self.alphabets, other.alphabets
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn normalized(&self) -> Result<Vec<f64>> {
        let total = self.total();
        if total == 0 {
            return Err(Error::InvalidArgument("histogram is empty".into()));
        }
        Ok(self
            .counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect())
    }

    pub fn to_joint(&self) -> Result<JointDistribution> {
        match self.alphabets[..] {
            [a, b] => JointDistribution::new(a, b, self.normalized()?),
            _ => Err(Error::InvalidArgument("expected a 2-way histogram".into())),
        }
    }

    pub fn to_joint3(&self) -> Result<JointDistribution3> {
        match self.alphabets[..] {
            [a, b, c] => JointDistribution3::new([a, b, c], self.normalized()?),
            _ => Err(Error::InvalidArgument("expected a 3-way histogram".into())),
        }
    }

    /// Plug-in I(A; B) of a 2-way histogram.
    pub fn mutual_information(&self, correction: BiasCorrection) -> Result<f64> {
        let mi = super::measures::mutual_information(&self.to_joint()?);
        Ok(match correction {
            BiasCorrection::None => mi,
            BiasCorrection::MillerMadow => {
                let (ra, rb) = (self.alphabets[0], self.alphabets[1]);
                let occupied = |it: &mut dyn Iterator<Item = u64>| it.filter(|&c| c > 0).count();
                let k_ab = occupied(&mut self.counts.iter().copied());
                let k_a = occupied(&mut (0..ra).map(|a| self.counts[a * rb..(a + 1) * rb].iter().sum()));
                let k_b = occupied(&mut (0..rb).map(|b| (0..ra).map(|a| self.counts[a * rb + b]).sum()));
                miller_madow(mi, k_a, k_b, k_ab, self.total())
            }
        })
    }
}

fn miller_madow(mi: f64, k_a: usize, k_b: usize, k_ab: usize, total: u64) -> f64 {
    let adj = (k_a as f64 - 1.0) + (k_b as f64 - 1.0) - (k_ab as f64 - 1.0);
    (mi + adj / (2.0 * total as f64)).max(0.0)
}

#[derive(Serialize, Deserialize)]
struct HistogramRepr {
    alphabets: Vec<usize>,
    counts: Value,
}

impl From<JointHistogram> for HistogramRepr {
    fn from(h: JointHistogram) -> Self {
        fn nest(counts: &[u64], dims: &[usize]) -> Value {
            match dims {
                [_] => Value::from(counts.to_vec()),
                [first, rest @ ..] => {
                    let stride = counts.len() / first;
                    Value::Array(counts.chunks(stride).map(|c| nest(c, rest)).collect())
                }
                [] => Value::Null,
            }
        }
        HistogramRepr {
            counts: nest(&h.counts, &h.alphabets),
            alphabets: h.alphabets,
        }
    }
}

impl TryFrom<HistogramRepr> for JointHistogram {
    type Error = Error;
    fn try_from(r: HistogramRepr) -> Result<Self> {
        fn flatten(v: &Value, dims: &[usize], out: &mut Vec<u64>) -> Result<()> {
            let bad = || Error::InvalidArgument("histogram counts do not match alphabets".into());
            match (dims, v) {
                ([], Value::Number(n)) => {
                    out.push(n.as_u64().ok_or_else(bad)?);
                    Ok(())
                }
                ([d, rest @ ..], Value::Array(items)) if items.len() == *d => {
                    items.iter().try_for_each(|item| flatten(item, rest, out))
                }
                _ => Err(bad()),
            }
        }
        let mut counts = Vec::new();
        flatten(&r.counts, &r.alphabets, &mut counts)?;
        JointHistogram::from_counts(&r.alphabets, counts)
    }
}

/// Plug-in MI from paired symbols over declared alphabets.
pub fn plugin_mi_from_samples(
    pairs: &[(usize, usize)],
    alphabets: (usize, usize),
    correction: BiasCorrection,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut h = JointHistogram::new(&[alphabets.0, alphabets.1])?;
    for &(a, b) in pairs {
        h.increment(&[a, b])?;
    }
    h.mutual_information(correction)
}

/// Plug-in MI from samples over arbitrary hashable symbols. Only occupied
/// cells are stored, so the declared product alphabet may be large.
pub fn plugin_mi<A, B, I>(samples: I, correction: BiasCorrection) -> Result<f64>
where
    A: Hash + Eq,
    B: Hash + Eq,
    I: IntoIterator<Item = (A, B)>,
{
    let mut ia = Interner::default();
    let mut ib = Interner::default();
    let mut joint = SparseJoint::new();
    let mut count = 0u64;
    for (a, b) in samples {
        joint.add_pair(ia.id(a), ib.id(b), 1.0);
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mi = joint.mutual_information();
    Ok(match correction {
        BiasCorrection::None => mi,
        BiasCorrection::MillerMadow => {
            let (k_ab, k_a, k_b) = joint.occupied();
            miller_madow(mi, k_a, k_b, k_ab, count)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn histogram_mi_examples() {
        let h = JointHistogram::from_counts(&[2, 2], vec![25, 25, 25, 25]).unwrap();
        assert!(h.mutual_information(BiasCorrection::None).unwrap().abs() < 1e-15);
        let h = JointHistogram::from_counts(&[2, 2], vec![5, 0, 0, 5]).unwrap();
        assert!((h.mutual_information(BiasCorrection::None).unwrap() - LN2).abs() < 1e-15);
        let h = JointHistogram::from_counts(&[2, 2], vec![3, 1, 1, 3]).unwrap();
        assert!((h.mutual_information(BiasCorrection::None).unwrap() - 0.130_812).abs() < 1e-6);
    }

    #[test]
    fn plugin_examples() {
        let constant = vec![(0, 0); 100];
        assert_eq!(
            plugin_mi_from_samples(&constant, (2, 2), BiasCorrection::None).unwrap(),
            0.0
        );
        let alternating: Vec<_> = (0..100).map(|k| (k % 2, k % 2)).collect();
        let v = plugin_mi_from_samples(&alternating, (2, 2), BiasCorrection::None).unwrap();
        assert!((v - LN2).abs() < 1e-15);
        assert!(matches!(
            plugin_mi_from_samples(&[(2, 0)], (2, 2), BiasCorrection::None),
            Err(Error::SymbolOutOfRange { symbol: 2, size: 2 })
        ));
        assert!(plugin_mi_from_samples(&[], (2, 2), BiasCorrection::None).is_err());
    }

    #[test]
    fn plugin_converges_on_known_joint() {
        // Exact MI of [[3,1],[1,3]]/8 by the closed form.
        let exact = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pairs: Vec<(usize, usize)> = (0..100_000)
            .map(|_| {
                let a = rng.random_range(0..2);
                let same = rng.random::<f64>() < 0.75;
                (a, if same { a } else { 1 - a })
            })
            .collect();
        let est = plugin_mi_from_samples(&pairs, (2, 2), BiasCorrection::None).unwrap();
        assert!((est - exact).abs() <= 0.01, "est {est} exact {exact}");
        // Sparse route over the same samples agrees with the dense one.
        let sparse = plugin_mi(pairs.iter().copied(), BiasCorrection::None).unwrap();
        assert!((sparse - est).abs() < 1e-12);
    }

    #[test]
    fn plugin_is_order_independent() {
        let mut pairs: Vec<(usize, usize)> = (0..50).map(|k| (k % 3, (k / 3) % 2)).collect();
        let a = plugin_mi_from_samples(&pairs, (3, 2), BiasCorrection::None).unwrap();
        pairs.reverse();
        let b = plugin_mi_from_samples(&pairs, (3, 2), BiasCorrection::None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn miller_madow_adds_expected_term() {
        // All four cells and both marginals occupied: + (1 + 1 - 3) / 2N = -1/(2N),
        // which lands below zero here and is clipped.
        let h = JointHistogram::from_counts(&[2, 2], vec![25, 25, 25, 25]).unwrap();
        assert_eq!(h.mutual_information(BiasCorrection::MillerMadow).unwrap(), 0.0);
        let h = JointHistogram::from_counts(&[2, 2], vec![30, 10, 10, 30]).unwrap();
        let raw = h.mutual_information(BiasCorrection::None).unwrap();
        let mm = h.mutual_information(BiasCorrection::MillerMadow).unwrap();
        assert!((raw - mm - 1.0 / 160.0).abs() < 1e-15);
        let pairs: Vec<(usize, usize)> = [(0, 0); 30]
            .into_iter()
            .chain([(0, 1); 10])
            .chain([(1, 0); 10])
            .chain([(1, 1); 30])
            .collect();
        assert!((plugin_mi(pairs, BiasCorrection::MillerMadow).unwrap() - mm).abs() < 1e-15);
    }

    #[test]
    fn histogram_json_is_nested() {
        let h = JointHistogram::from_counts(&[2, 2, 2], (0..8).collect()).unwrap();
        let v = serde_json::to_value(&h).unwrap();
        assert_eq!(v["alphabets"], serde_json::json!([2, 2, 2]));
        assert_eq!(v["counts"][1][0][1], 5);
        let back: JointHistogram = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
        let bad = serde_json::json!({"alphabets": [2, 2], "counts": [[1, 2], [3]]});
        assert!(serde_json::from_value::<JointHistogram>(bad).is_err());
    }

    #[test]
    fn histogram_limits() {
        assert!(matches!(
            JointHistogram::new(&[1 << 9, 1 << 8]),
            Err(Error::TooLarge { .. })
        ));
        assert!(JointHistogram::new(&[2]).is_err());
        let mut a = JointHistogram::new(&[2, 2]).unwrap();
        let b = JointHistogram::new(&[2, 3]).unwrap();
        assert!(a.merge(&b).is_err());
    }
}
