//! Entropy, divergences and mutual information over finite alphabets.

pub mod exact;
pub mod histogram;
pub mod measures;
pub mod sparse;

pub use exact::{exact_fcmi_enumeration, ExactTable, FcmiTarget, SeedPolicy};
pub use histogram::{plugin_mi, plugin_mi_from_samples, BiasCorrection, JointHistogram};
pub use measures::{
    conditional_mutual_information, entropy, kl_divergence, mutual_information,
    DiscreteDistribution, JointDistribution, JointDistribution3,
};
pub use sparse::{Interner, SparseJoint};
