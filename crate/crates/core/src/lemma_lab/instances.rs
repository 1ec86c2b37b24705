//! Random discrete instances for the verifiers. Grids are Dirichlet-uniform
//! with alphabets of at most four symbols; a quarter of draws zero out cells
//! or pull mass toward a vertex so near-deterministic corners get covered.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{DiscreteJointInstance, KlInstance, MultiJoint};
use crate::infotheory::{DiscreteDistribution, JointDistribution};

pub const MAX_ALPHABET: usize = 4;

/// Uniform draw from the probability simplex on `k` points.
pub fn dirichlet<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Dirichlet draw that sometimes lands on or near the boundary.
pub fn simplex_point<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut p = dirichlet(k, rng);
    match rng.random_range(0..8) {
        0 => {
            let keep = rng.random_range(0..k);
            for (j, v) in p.iter_mut().enumerate() {
                if j != keep && rng.random_bool(0.5) {
                    *v = 0.0;
                }
            }
        }
        1 => {
            let vertex = rng.random_range(0..k);
            let t = 1.0 - 10f64.powf(-rng.random_range(1.0..6.0));
            for (j, v) in p.iter_mut().enumerate() {
                *v = (1.0 - t) * *v + if j == vertex { t } else { 0.0 };
            }
        }
        _ => {}
    }
    let total: f64 = p.iter().sum();
    p.into_iter().map(|x| x / total).collect()
}

/// Strictly positive simplex point; near-boundary draws keep every cell
/// above `1e-6` so KL stays finite.
fn positive_simplex_point<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut p = dirichlet(k, rng);
    if rng.random_bool(0.25) {
        let vertex = rng.random_range(0..k);
        let t = 1.0 - 10f64.powf(-rng.random_range(1.0..5.0));
        for (j, v) in p.iter_mut().enumerate() {
            *v = (1.0 - t) * *v + if j == vertex { t } else { 0.0 };
        }
    }
    let floor = 1e-6;
    let total: f64 = p.iter().map(|x| x.max(floor)).sum();
    p.into_iter().map(|x| x.max(floor) / total).collect()
}

fn alphabet<R: Rng + ?Sized>(rng: &mut R) -> usize {
    rng.random_range(2..=MAX_ALPHABET)
}

/// Real table with a random offset and scale; one in five is two-valued.
fn g_table<R: Rng + ?Sized>(cells: usize, rng: &mut R) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let offset = rng.random_range(-2.0..2.0);
    let binary = rng.random_bool(0.2);
    (0..cells)
        .map(|_| {
            let u = if binary {
                rng.random_range(0..2) as f64
            } else {
                rng.random_range(-1.0..1.0)
            };
            offset + scale * u
        })
        .collect()
}

pub fn joint_instance<R: Rng + ?Sized>(rng: &mut R) -> DiscreteJointInstance {
    let (a, b) = (alphabet(rng), alphabet(rng));
    let joint = JointDistribution::new(a, b, simplex_point(a * b, rng)).expect("valid simplex point");
    DiscreteJointInstance::new(joint, g_table(a * b, rng)).expect("finite table")
}

/// Instance whose `g(φ, ·)` is centered under the `Ψ` marginal for every `φ`.
pub fn centered_joint_instance<R: Rng + ?Sized>(rng: &mut R) -> DiscreteJointInstance {
    let inst = joint_instance(rng);
    let (a, b) = inst.joint.shape();
    let psi = inst.joint.marginal_b();
    let mut g = inst.g.clone();
    for phi in 0..a {
        let row = &mut g[phi * b..(phi + 1) * b];
        let mean: f64 = row.iter().zip(&psi).map(|(v, p)| v * p).sum();
        row.iter_mut().for_each(|v| *v -= mean);
    }
    DiscreteJointInstance::new(inst.joint, g).expect("finite table")
}

/// Zero-mean bounded distribution: `(values, probs)`.
pub fn centered_distribution<R: Rng + ?Sized>(rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let k = rng.random_range(1..=2 * MAX_ALPHABET);
    let probs = simplex_point(k, rng);
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let mut values: Vec<f64> = (0..k).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    let mean: f64 = values.iter().zip(&probs).map(|(v, p)| v * p).sum();
    values.iter_mut().for_each(|v| *v -= mean);
    (values, probs)
}

/// `(Φ, Ψ_1..Ψ_n)` with independent `Ψ` components and an arbitrary channel
/// from `Ψ` to `Φ`.
pub fn independent_components<R: Rng + ?Sized>(
    n: usize,
    max_component: usize,
    rng: &mut R,
) -> MultiJoint {
    let phi = alphabet(rng);
    let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=max_component)).collect();
    let marginals: Vec<Vec<f64>> = sizes.iter().map(|&k| simplex_point(k, rng)).collect();
    let cells: usize = sizes.iter().product();
    let mut probs = vec![0.0; phi * cells];
    for psi in 0..cells {
        let mut rest = psi;
        let mut p_psi = 1.0;
        for (j, &k) in sizes.iter().enumerate().rev() {
            p_psi *= marginals[j][rest % k];
            rest /= k;
        }
        let channel = simplex_point(phi, rng);
        for (f, c) in channel.iter().enumerate() {
            probs[f * cells + psi] = p_psi * c;
        }
    }
    MultiJoint::new(phi, sizes, probs).expect("valid joint")
}

/// Per-`S_{-i}` pairs of strictly positive prediction laws.
pub fn kl_instance<R: Rng + ?Sized>(rng: &mut R) -> KlInstance {
    let contexts = 1usize << rng.random_range(0..=3);
    let k = alphabet(rng);
    let laws = (0..contexts)
        .map(|_| {
            let p0 = positive_simplex_point(k, rng);
            let p1 = if rng.random_bool(0.1) {
                p0.clone()
            } else {
                positive_simplex_point(k, rng)
            };
            [
                DiscreteDistribution::new(p0).expect("valid law"),
                DiscreteDistribution::new(p1).expect("valid law"),
            ]
        })
        .collect();
    KlInstance::new(laws).expect("matching alphabets")
}
