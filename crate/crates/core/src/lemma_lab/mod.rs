//! Exhaustive numerical checks of the information inequalities the bounds
//! rest on. Every verifier evaluates both sides exactly on a finite
//! instance; `margin` is the slack of the asserted inequality.

pub mod instances;
mod monotone;
mod suite;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::stability_kl_decomposition;
use crate::error::{Error, Result};
use crate::infotheory::{
    conditional_mutual_information, mutual_information, DiscreteDistribution, JointDistribution,
    JointDistribution3,
};

pub use monotone::{verify_monotonicity_in_m, InformationSource, MonotonicityReport};
pub use suite::{run_lemma, run_lemma_suite, Lemma, LemmaSummary};

/// Margins below `-TOLERANCE` count as violations.
pub const TOLERANCE: f64 = 1e-9;

/// Points in the λ grid of [`verify_subgaussian_square`].
pub const LAMBDA_GRID: usize = 64;

/// Both sides of `lhs ≤ rhs`; `margin = rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl MarginReport {
    pub fn new(lhs: f64, rhs: f64) -> MarginReport {
        MarginReport {
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }

    pub fn holds(&self) -> bool {
        self.margin >= -TOLERANCE
    }

    fn tightest(reports: impl IntoIterator<Item = MarginReport>) -> MarginReport {
        reports
            .into_iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
            .unwrap_or(MarginReport::new(0.0, 0.0))
    }
}

/// Joint law of `(Φ, Ψ)` with a real function `g` on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointInstance {
    pub joint: JointDistribution,
    /// Row-major `g(φ, ψ)`.
    pub g: Vec<f64>,
}

impl DiscreteJointInstance {
    pub fn new(joint: JointDistribution, g: Vec<f64>) -> Result<Self> {
        let (a, b) = joint.shape();
        if g.len() != a * b {
            return Err(Error::LengthMismatch {
                context: "g table",
                expected: a * b,
                actual: g.len(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("g must be finite".into()));
        }
        Ok(DiscreteJointInstance { joint, g })
    }

    /// Half the range of `g`: the subgaussian constant of a bounded variable.
    pub fn sigma(&self) -> f64 {
        half_range(&self.g)
    }

    /// Largest half-range of `g(φ, ·)` over `φ`.
    pub fn sigma_per_phi(&self) -> f64 {
        let (_, b) = self.joint.shape();
        self.g.chunks(b).map(half_range).fold(0.0, f64::max)
    }

    fn g_at(&self, phi: usize, psi: usize) -> f64 {
        self.g[phi * self.joint.shape().1 + psi]
    }
}

fn half_range(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        (hi - lo) / 2.0
    } else {
        0.0
    }
}

/// `|E g(Φ,Ψ) - E g(Φ,Ψ̄)| ≤ √(2σ² I(Φ;Ψ))` with `Ψ̄` an independent copy
/// of `Ψ` and `σ` the half-range of `g`.
pub fn verify_dv_inequality(inst: &DiscreteJointInstance) -> MarginReport {
    verify_dv_inequality_with_sigma(inst, inst.sigma())
}

/// [`verify_dv_inequality`] with a caller-chosen `σ`.
pub fn verify_dv_inequality_with_sigma(inst: &DiscreteJointInstance, sigma: f64) -> MarginReport {
    let (a, b) = inst.joint.shape();
    let pa = inst.joint.marginal_a();
    let pb = inst.joint.marginal_b();
    let mut joint_mean = 0.0;
    let mut product_mean = 0.0;
    for phi in 0..a {
        for psi in 0..b {
            let g = inst.g_at(phi, psi);
            joint_mean += inst.joint.get(phi, psi) * g;
            product_mean += pa[phi] * pb[psi] * g;
        }
    }
    let i = mutual_information(&inst.joint);
    MarginReport::new((joint_mean - product_mean).abs(), (2.0 * sigma * sigma * i).sqrt())
}

/// `E (g(Φ,Ψ) - E_Ψ̄ g(Φ,Ψ̄))² ≤ 4σ²(I(Φ;Ψ) + log 3)` with the uniform
/// half-range `σ`.
pub fn verify_squared_inequality(inst: &DiscreteJointInstance) -> MarginReport {
    let (a, b) = inst.joint.shape();
    let pb = inst.joint.marginal_b();
    let mut lhs = 0.0;
    for phi in 0..a {
        let centre: f64 = (0..b).map(|psi| pb[psi] * inst.g_at(phi, psi)).sum();
        for psi in 0..b {
            let d = inst.g_at(phi, psi) - centre;
            lhs += inst.joint.get(phi, psi) * d * d;
        }
    }
    let sigma = inst.sigma();
    let i = mutual_information(&inst.joint);
    MarginReport::new(lhs, 4.0 * sigma * sigma * (i + 3f64.ln()))
}

/// `E e^{λX²} ≤ 1 + 8λσ²` for zero-mean `X` on `LAMBDA_GRID` values of
/// `λ ∈ [0, 1/(4σ²))`; reports the tightest grid point.
pub fn verify_subgaussian_square(values: &[f64], probs: &[f64]) -> Result<MarginReport> {
    let law = DiscreteDistribution::new(probs.to_vec())?;
    if values.len() != law.len() {
        return Err(Error::LengthMismatch {
            context: "support values",
            expected: law.len(),
            actual: values.len(),
        });
    }
    let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
    if mean.abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "X must have zero mean, got {mean:e}"
        )));
    }
    let sigma = half_range(values);
    let lambda_max = if sigma > 0.0 { 1.0 / (4.0 * sigma * sigma) } else { 1.0 };
    Ok(MarginReport::tightest((0..LAMBDA_GRID).map(|j| {
        let lambda = lambda_max * j as f64 / LAMBDA_GRID as f64;
        let lhs: f64 = values
            .iter()
            .zip(probs)
            .map(|(v, p)| p * (lambda * v * v).exp())
            .sum();
        MarginReport::new(lhs, 1.0 + 8.0 * lambda * sigma * sigma)
    })))
}

/// Joint law of `(Φ, Ψ_1..Ψ_n)`, row-major with `Φ` outermost and `Ψ_1`
/// the most significant component.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiJoint {
    pub phi: usize,
    pub sizes: Vec<usize>,
    pub probs: Vec<f64>,
}

impl MultiJoint {
    pub fn new(phi: usize, sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let cells = phi * sizes.iter().product::<usize>();
        if probs.len() != cells {
            return Err(Error::LengthMismatch {
                context: "multi-component joint",
                expected: cells,
                actual: probs.len(),
            });
        }
        DiscreteDistribution::new(probs.clone())?;
        Ok(MultiJoint { phi, sizes, probs })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    fn psi_cells(&self) -> usize {
        self.sizes.iter().product()
    }

    fn decode(&self, mut code: usize) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (j, &k) in self.sizes.iter().enumerate().rev() {
            out[j] = code % k;
            code /= k;
        }
        out
    }

    fn encode(&self, psi: &[usize], components: &[usize]) -> usize {
        components.iter().fold(0, |acc, &j| acc * self.sizes[j] + psi[j])
    }

    fn size_of(&self, components: &[usize]) -> usize {
        components.iter().map(|&j| self.sizes[j]).product()
    }

    /// `I(Φ; Ψ_u)`.
    pub fn mi_subset(&self, u: &[usize]) -> f64 {
        let cols = self.size_of(u);
        let cells = self.psi_cells();
        let mut probs = vec![0.0; self.phi * cols];
        for psi in 0..cells {
            let c = self.encode(&self.decode(psi), u);
            for f in 0..self.phi {
                probs[f * cols + c] += self.probs[f * cells + psi];
            }
        }
        mutual_information(&JointDistribution::new(self.phi, cols, probs).expect("marginal of a valid joint"))
    }

    pub fn mi_all(&self) -> f64 {
        self.mi_subset(&(0..self.n()).collect::<Vec<_>>())
    }

    /// `I(Φ; Ψ_i | Ψ_{-i})`.
    pub fn cmi_index(&self, i: usize) -> f64 {
        let rest: Vec<usize> = (0..self.n()).filter(|&j| j != i).collect();
        let dims = [self.phi, self.sizes[i], self.size_of(&rest)];
        let cells = self.psi_cells();
        let mut probs = vec![0.0; dims.iter().product()];
        for psi in 0..cells {
            let v = self.decode(psi);
            let r = self.encode(&v, &rest);
            for f in 0..self.phi {
                probs[(f * dims[1] + v[i]) * dims[2] + r] += self.probs[f * cells + psi];
            }
        }
        conditional_mutual_information(&JointDistribution3::new(dims, probs).expect("valid joint"))
    }
}

/// For independent `Ψ` components: `I(Φ;Ψ_i) ≤ I(Φ;Ψ_i|Ψ_{-i})` for every
/// `i` and `I(Φ;Ψ) ≤ Σ_i I(Φ;Ψ_i|Ψ_{-i})`. Reports the tightest of the
/// `n + 1` inequalities.
pub fn verify_erasure_lemma(joint: &MultiJoint) -> MarginReport {
    let cmi: Vec<f64> = (0..joint.n()).map(|i| joint.cmi_index(i)).collect();
    let per_index = (0..joint.n()).map(|i| MarginReport::new(joint.mi_subset(&[i]), cmi[i]));
    let total = MarginReport::new(joint.mi_all(), cmi.iter().sum());
    MarginReport::tightest(per_index.chain([total]))
}

/// `(1/m) Σ_{k∈u'} I(Φ; S_{u'∖k}) ≤ I(Φ; S_{u'})` for one `u'` of size
/// `m + 1 ≥ 2`.
pub fn verify_hans_subset_inequality(joint: &MultiJoint, u_prime: &[usize]) -> Result<MarginReport> {
    if u_prime.len() < 2 || u_prime.iter().any(|&j| j >= joint.n()) {
        return Err(Error::InvalidArgument(format!(
            "u' must hold at least two of the {} components",
            joint.n()
        )));
    }
    let m = (u_prime.len() - 1) as f64;
    let leave_one_out: f64 = (0..u_prime.len())
        .map(|k| {
            let rest: Vec<usize> = u_prime
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &c)| c)
                .collect();
            joint.mi_subset(&rest)
        })
        .sum();
    Ok(MarginReport::new(leave_one_out / m, joint.mi_subset(u_prime)))
}

/// [`verify_hans_subset_inequality`] over every `u'` with `|u'| ≥ 2`.
pub fn verify_hans_all_subsets(joint: &MultiJoint) -> MarginReport {
    let n = joint.n();
    MarginReport::tightest((0u32..1 << n).filter(|mask| mask.count_ones() >= 2).map(|mask| {
        let u: Vec<usize> = (0..n).filter(|&j| mask >> (n - 1 - j) & 1 == 1).collect();
        verify_hans_subset_inequality(joint, &u).expect("subset within range")
    }))
}

/// Prediction laws `P(F | S_{-i} = c, S_i = s)` for uniformly distributed
/// `S_{-i}` contexts `c` and a uniform bit `S_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KlInstance {
    pub laws: Vec<[DiscreteDistribution; 2]>,
}

impl KlInstance {
    pub fn new(laws: Vec<[DiscreteDistribution; 2]>) -> Result<Self> {
        let k = laws
            .first()
            .map(|l| l[0].len())
            .ok_or_else(|| Error::InvalidArgument("need at least one context".into()))?;
        if laws.iter().any(|[p, q]| p.len() != k || q.len() != k) {
            return Err(Error::InvalidArgument("laws must share one alphabet".into()));
        }
        Ok(KlInstance { laws })
    }

    /// Exact `I(F; S_i | S_{-i})`.
    pub fn cmi(&self) -> f64 {
        let c = self.laws.len();
        let k = self.laws[0][0].len();
        let w = 1.0 / (2 * c) as f64;
        let mut probs = vec![0.0; k * 2 * c];
        for (ctx, law) in self.laws.iter().enumerate() {
            for (s, p) in law.iter().enumerate() {
                for (f, q) in p.probs().iter().enumerate() {
                    probs[(f * 2 + s) * c + ctx] = w * q;
                }
            }
        }
        conditional_mutual_information(&JointDistribution3::new([k, 2, c], probs).expect("valid joint"))
    }
}

/// `I(F; S_i | S_{-i}) ≤ ¼ E[KL(P₁‖P₀) + KL(P₀‖P₁)]`.
pub fn verify_kl_decomposition(inst: &KlInstance) -> Result<MarginReport> {
    Ok(MarginReport::new(inst.cmi(), stability_kl_decomposition(&inst.laws)?))
}

/// Minimum margin and violation count over independently checked items.
pub(crate) fn fold_margins(margins: impl ParallelIterator<Item = f64>) -> (f64, usize) {
    margins
        .map(|m| (m, (m < -TOLERANCE) as usize))
        .reduce(|| (f64::INFINITY, 0), |a, b| (a.0.min(b.0), a.1 + b.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_for;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn product_instance(g: Vec<f64>) -> DiscreteJointInstance {
        let pa = [0.2, 0.5, 0.3];
        let pb = [0.6, 0.4];
        let probs = pa.iter().flat_map(|a| pb.iter().map(move |b| a * b)).collect();
        DiscreteJointInstance::new(JointDistribution::new(3, 2, probs).unwrap(), g).unwrap()
    }

    #[test]
    fn independent_pair_has_zero_lhs() {
        let inst = product_instance(vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0]);
        let r = verify_dv_inequality(&inst);
        assert!(r.lhs < 1e-15 && r.holds());
        let sq = verify_squared_inequality(&inst);
        assert!(sq.lhs <= 4.0 * inst.sigma().powi(2) * 3f64.ln());
    }

    #[test]
    fn constant_g_is_trivial() {
        let inst = product_instance(vec![2.0; 6]);
        assert_eq!(verify_dv_inequality(&inst).lhs, 0.0);
        assert_eq!(verify_squared_inequality(&inst).lhs, 0.0);
    }

    #[test]
    fn squared_inequality_by_hand() {
        // Φ = Ψ uniform on two symbols, g = indicator of agreement.
        let joint = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let inst = DiscreteJointInstance::new(joint, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = verify_squared_inequality(&inst);
        // Each (φ, ψ=φ) cell: g - E_Ψ̄ g = 1 - 0.5.
        assert!((r.lhs - 0.25).abs() < 1e-15);
        assert!((r.rhs - (LN2 + 3f64.ln())).abs() < 1e-15);
        let dv = verify_dv_inequality(&inst);
        assert!((dv.lhs - 0.5).abs() < 1e-15);
        assert!((dv.rhs - (0.5 * LN2).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn subgaussian_examples() {
        let zero = verify_subgaussian_square(&[0.0], &[1.0]).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (1.0, 1.0));
        let r = verify_subgaussian_square(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!(r.holds());
        // At λ = 0.2 directly.
        assert!((0.2f64.exp() - 1.2214).abs() < 1e-4 && 0.2f64.exp() <= 2.6);
        assert!(verify_subgaussian_square(&[0.0, 1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn xor_erasure() {
        // Φ = Ψ1 xor Ψ2 with uniform bits.
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                probs[(a ^ b) * 4 + a * 2 + b] = 0.25;
            }
        }
        let j = MultiJoint::new(2, vec![2, 2], probs).unwrap();
        assert!(j.mi_subset(&[0]).abs() < 1e-15);
        assert!((j.cmi_index(0) - LN2).abs() < 1e-15);
        assert!((j.mi_all() - LN2).abs() < 1e-15);
        let r = verify_erasure_lemma(&j);
        assert!(r.holds() && (r.margin - LN2).abs() < 1e-15);
    }

    #[test]
    fn identity_is_the_equality_case_of_the_subset_inequality() {
        let n = 3;
        let cells = 1 << n;
        let mut probs = vec![0.0; cells * cells];
        for s in 0..cells {
            probs[s * cells + s] = 1.0 / cells as f64;
        }
        let j = MultiJoint::new(cells, vec![2; n], probs).unwrap();
        let r = verify_hans_subset_inequality(&j, &[0, 1, 2]).unwrap();
        assert!((r.rhs - 3.0 * LN2).abs() < 1e-12);
        assert!(r.margin.abs() < 1e-12);
        assert!(verify_hans_all_subsets(&j).margin.abs() < 1e-12);
        assert!(verify_hans_subset_inequality(&j, &[1]).is_err());
    }

    #[test]
    fn kl_by_hand() {
        let p = DiscreteDistribution::new(vec![0.75, 0.25]).unwrap();
        let q = DiscreteDistribution::new(vec![0.25, 0.75]).unwrap();
        let inst = KlInstance::new(vec![[p.clone(), q.clone()]]).unwrap();
        let r = verify_kl_decomposition(&inst).unwrap();
        // Mixture is uniform: I = ln 2 - H(0.75).
        let h = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((r.lhs - (LN2 - h)).abs() < 1e-15);
        assert!((r.rhs - 0.5 * 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!(r.holds());
        let same = KlInstance::new(vec![[p.clone(), p]]).unwrap();
        let r = verify_kl_decomposition(&same).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn centered_instances_satisfy_the_per_phi_bound(seed in any::<u64>()) {
            let inst = instances::centered_joint_instance(&mut rng_for(&[seed]));
            prop_assert!(verify_dv_inequality_with_sigma(&inst, inst.sigma_per_phi()).holds());
        }

        #[test]
        fn random_instances_hold(seed in any::<u64>()) {
            let mut rng = rng_for(&[seed]);
            let inst = instances::joint_instance(&mut rng);
            prop_assert!(verify_dv_inequality(&inst).holds());
            prop_assert!(verify_squared_inequality(&inst).holds());
            let j = instances::independent_components(3, 3, &mut rng);
            prop_assert!(verify_erasure_lemma(&j).holds());
            prop_assert!(verify_hans_all_subsets(&j).holds());
            prop_assert!(verify_kl_decomposition(&instances::kl_instance(&mut rng)).unwrap().holds());
        }
    }
}
