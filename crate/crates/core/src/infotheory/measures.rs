//! Entropy, KL divergence, and (conditional) mutual information over dense
//! finite alphabets. All values are in nats, with 0 log 0 = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Entries must be nonnegative and sum to 1 within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a finite nonnegative value"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(DiscreteDistribution { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weights must be nonnegative with positive total, got {weights:?}"
            )));
        }
        DiscreteDistribution::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(size: usize) -> Result<Self> {
        DiscreteDistribution::from_weights(&vec![1.0; size])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for DiscreteDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        DiscreteDistribution::new(v)
    }
}

impl From<DiscreteDistribution> for Vec<f64> {
    fn from(d: DiscreteDistribution) -> Self {
        d.probs
    }
}

#[inline]
pub(crate) fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

pub fn entropy(p: &DiscreteDistribution) -> f64 {
    entropy_of(p.probs())
}

/// Entropy of nonnegative values that already sum to one.
pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    (-probs.iter().map(|&p| xlogx(p)).sum::<f64>()).max(0.0)
}

/// KL(p || q). Fails with [`Error::AbsoluteContinuity`] when p is not
/// absolutely continuous with respect to q (the divergence is infinite).
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            context: "kl_divergence alphabets",
            expected: p.len(),
            actual: q.len(),
        });
    }
    let mut total = 0.0;
    for (index, (&pi, &qi)) in p.probs.iter().zip(&q.probs).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::AbsoluteContinuity { index, p: pi });
        }
        total += pi * (pi / qi).ln();
    }
    Ok(total.max(0.0))
}

/// Dense probability grid over (A, B), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != rows * cols {
            return Err(Error::LengthMismatch {
                context: "joint distribution cells",
                expected: rows * cols,
                actual: probs.len(),
            });
        }
        DiscreteDistribution::new(probs.clone())?;
        Ok(JointDistribution { rows, cols, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("ragged joint grid".into()));
        }
        JointDistribution::new(rows.len(), cols, rows.concat())
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.cols + b]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|a| (0..self.cols).map(|b| self.get(a, b)).sum())
            .collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|b| (0..self.rows).map(|a| self.get(a, b)).sum())
            .collect()
    }
}

/// I(A; B) = KL(P_AB || P_A x P_B).
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    let pa = joint.marginal_a();
    let pb = joint.marginal_b();
    let mut total = 0.0;
    for a in 0..joint.rows {
        for b in 0..joint.cols {
            let p = joint.get(a, b);
            if p > 0.0 {
                total += p * (p / (pa[a] * pb[b])).ln();
            }
        }
    }
    total.max(0.0)
}

/// Dense probability grid over (A, B, C), index `(a * B + b) * C + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution3 {
    dims: [usize; 3],
    probs: Vec<f64>,
}

impl JointDistribution3 {
    pub fn new(dims: [usize; 3], probs: Vec<f64>) -> Result<Self> {
        let cells = dims.iter().product();
        if probs.len() != cells {
            return Err(Error::LengthMismatch {
                context: "joint distribution cells",
                expected: cells,
                actual: probs.len(),
            });
        }
        DiscreteDistribution::new(probs.clone())?;
        Ok(JointDistribution3 { dims, probs })
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.probs[(a * self.dims[1] + b) * self.dims[2] + c]
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }
}

/// I(A; B | C) = sum_c P(c) I(A; B | C = c). Empty conditioning cells
/// contribute zero.
pub fn conditional_mutual_information(joint: &JointDistribution3) -> f64 {
    let [na, nb, nc] = joint.dims;
    let mut total = 0.0;
    for c in 0..nc {
        let pc: f64 = (0..na)
            .flat_map(|a| (0..nb).map(move |b| (a, b)))
            .map(|(a, b)| joint.get(a, b, c))
            .sum();
        if pc <= 0.0 {
            continue;
        }
        let pac: Vec<f64> = (0..na)
            .map(|a| (0..nb).map(|b| joint.get(a, b, c)).sum())
            .collect();
        let pbc: Vec<f64> = (0..nb)
            .map(|b| (0..na).map(|a| joint.get(a, b, c)).sum())
            .collect();
        for a in 0..na {
            for b in 0..nb {
                let p = joint.get(a, b, c);
                if p > 0.0 {
                    total += p * (p * pc / (pac[a] * pbc[b])).ln();
                }
            }
        }
    }
    total.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn dist(v: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(v.to_vec()).unwrap()
    }

    // Oracle: MI through the entropy identity H(A) + H(B) - H(A, B), evaluated
    // with an independent loop.
    fn mi_by_entropies(grid: &[Vec<f64>]) -> f64 {
        let h = |v: &[f64]| -> f64 {
            v.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
        };
        let rows: Vec<f64> = grid.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..grid[0].len())
            .map(|j| grid.iter().map(|r| r[j]).sum())
            .collect();
        h(&rows) + h(&cols) - h(&grid.concat())
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&dist(&[1.0, 0.0])), 0.0);
        assert!((entropy(&dist(&[0.5, 0.5])) - LN2).abs() < 1e-15);
        // -(0.25 ln 0.25 + 0.75 ln 0.75)
        let oracle = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((oracle - 0.562_335).abs() < 1e-6);
        assert!((entropy(&dist(&[0.25, 0.75])) - oracle).abs() < 1e-15);
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::from_weights(&[0.0, 0.0]).is_err());
        assert_eq!(
            DiscreteDistribution::from_weights(&[1.0, 3.0]).unwrap().probs(),
            &[0.25, 0.75]
        );
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&dist(&[0.5, 0.5]), &dist(&[0.5, 0.5])).unwrap(), 0.0);
        let v = kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap();
        assert!((v - LN2).abs() < 1e-15);
        assert!(matches!(
            kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])),
            Err(Error::AbsoluteContinuity { index: 1, .. })
        ));
    }

    #[test]
    fn mi_examples() {
        let uniform = JointDistribution::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!(mutual_information(&uniform).abs() < 1e-15);
        let diag = JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((mutual_information(&diag) - LN2).abs() < 1e-15);

        let grid = vec![vec![3.0 / 8.0, 1.0 / 8.0], vec![1.0 / 8.0, 3.0 / 8.0]];
        let oracle = mi_by_entropies(&grid);
        assert!((oracle - 0.130_812).abs() < 1e-6);
        let j = JointDistribution::from_rows(&grid).unwrap();
        assert!((mutual_information(&j) - oracle).abs() < 1e-12);
    }

    #[test]
    fn cmi_examples() {
        // A independent of B within each c.
        let mut probs = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let pa = if c == 0 { [0.3, 0.7][a] } else { [0.6, 0.4][a] };
                    let pb = if c == 0 { [0.9, 0.1][b] } else { [0.5, 0.5][b] };
                    probs.push(0.5 * pa * pb);
                }
            }
        }
        let j = JointDistribution3::new([2, 2, 2], probs).unwrap();
        assert!(conditional_mutual_information(&j).abs() < 1e-15);

        // A = B uniform, C independent uniform: 8-cell enumeration gives ln 2.
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for c in 0..2 {
                probs[(a * 2 + a) * 2 + c] = 0.25;
            }
        }
        let j = JointDistribution3::new([2, 2, 2], probs).unwrap();
        assert!((conditional_mutual_information(&j) - LN2).abs() < 1e-15);
    }

    #[test]
    fn constant_conditioning_equals_mi() {
        let grid = [0.1, 0.2, 0.3, 0.05, 0.25, 0.1];
        let j2 = JointDistribution::new(2, 3, grid.to_vec()).unwrap();
        let j3 = JointDistribution3::new([2, 3, 1], grid.to_vec()).unwrap();
        assert!((mutual_information(&j2) - conditional_mutual_information(&j3)).abs() < 1e-15);
    }

    fn grid_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0.0f64..1.0, r * c).prop_map(move |w| (r, c, w))
        })
    }

    proptest! {
        #[test]
        fn mi_identity_and_bounds((r, c, w) in grid_strategy()) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-6);
            let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
            let j = JointDistribution::new(r, c, probs.clone()).unwrap();
            let mi = mutual_information(&j);
            let grid: Vec<Vec<f64>> = probs.chunks(c).map(|ch| ch.to_vec()).collect();
            prop_assert!((mi - mi_by_entropies(&grid)).abs() < 1e-10);
            prop_assert!(mi >= -1e-12);
            let ha = entropy_of(&j.marginal_a());
            let hb = entropy_of(&j.marginal_b());
            prop_assert!(mi <= ha.min(hb) + 1e-12);
        }

        #[test]
        fn kl_and_entropy_nonnegative(w in proptest::collection::vec(0.01f64..1.0, 1..6),
                                      v in proptest::collection::vec(0.01f64..1.0, 1..6)) {
            let k = w.len().min(v.len());
            let p = DiscreteDistribution::from_weights(&w[..k]).unwrap();
            let q = DiscreteDistribution::from_weights(&v[..k]).unwrap();
            prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-12);
            prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
            let h = entropy(&p);
            prop_assert!(h >= -1e-12 && h <= (k as f64).ln() + 1e-12);
        }

        #[test]
        fn cmi_nonnegative(w in proptest::collection::vec(0.0f64..1.0, 12)) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-6);
            let j = JointDistribution3::new([2, 3, 2], w.iter().map(|x| x / total).collect()).unwrap();
            prop_assert!(conditional_mutual_information(&j) >= -1e-12);
        }
    }
}
