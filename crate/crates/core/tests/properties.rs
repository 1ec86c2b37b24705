//! Cross-module invariants checked on random supersamples.

use fcmi::bounds::{fcmi_bound_general_m, fcmi_bound_m1, stability_kl_decomposition, vc_fcmi_bound};
use fcmi::data::subsets_of_size;
use fcmi::datagen::{sample_supersample, GeneratorSpec};
use fcmi::error::Error;
use fcmi::infotheory::{ExactTable, SeedPolicy};
use fcmi::learners::LearnerSpec;
use proptest::prelude::*;

fn threshold(noise: f64) -> GeneratorSpec {
    GeneratorSpec::ThresholdRealizable {
        threshold: 0.5,
        label_noise: noise,
    }
}

fn bagged_knn() -> LearnerSpec {
    LearnerSpec::Knn {
        k: 1,
        bag_fraction: 0.5,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn m1_bound_is_below_every_larger_m(seed in any::<u64>(), n in 2usize..=6) {
        let z = sample_supersample(&threshold(0.2), n, seed).unwrap();
        let table = ExactTable::build(&z, &LearnerSpec::ThresholdErm, &SeedPolicy::Single(0), 20).unwrap();
        let per_index: Vec<f64> = (0..n).map(|i| table.fcmi_index(i).unwrap()).collect();
        let m1 = fcmi_bound_m1(&[per_index]).unwrap().value;
        for m in 2..=n {
            let per_subset: Vec<f64> = subsets_of_size(n, m)
                .iter()
                .map(|u| table.fcmi_subset(u).unwrap())
                .collect();
            let general = fcmi_bound_general_m(&[per_subset], m).unwrap().value;
            prop_assert!(m1 <= general + 1e-9, "m = {m}: {m1} > {general}");
        }
    }

    #[test]
    fn vc_bound_dominates_threshold_fcmi(seed in any::<u64>(), n in 1usize..=8) {
        let z = sample_supersample(&threshold(0.1), n, seed).unwrap();
        let table = ExactTable::build(&z, &LearnerSpec::ThresholdErm, &SeedPolicy::Single(0), 20).unwrap();
        prop_assert!(table.fcmi_all().unwrap() <= vc_fcmi_bound(1, n) + 1e-12);
    }

    #[test]
    fn kl_decomposition_dominates_conditional_information(seed in any::<u64>(), n in 2usize..=4) {
        let z = sample_supersample(&threshold(0.2), n, seed).unwrap();
        let table = ExactTable::build(&z, &bagged_knn(), &SeedPolicy::Uniform((0..12).collect()), 20).unwrap();
        for i in 0..n {
            let cmi = table.stability_cmi(i).unwrap();
            prop_assert!(cmi <= std::f64::consts::LN_2 + 1e-12);
            match stability_kl_decomposition(&table.conditional_laws(i).unwrap()) {
                Ok(kl) => prop_assert!(cmi <= kl + 1e-9, "{cmi} > {kl}"),
                // Disjoint supports make the divergence infinite.
                Err(Error::AbsoluteContinuity { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn per_index_information_is_at_most_ln2(seed in any::<u64>(), n in 1usize..=6) {
        let z = sample_supersample(&threshold(0.3), n, seed).unwrap();
        let table = ExactTable::build(&z, &bagged_knn(), &SeedPolicy::Uniform((0..4).collect()), 20).unwrap();
        for i in 0..n {
            prop_assert!(table.fcmi_index(i).unwrap() <= std::f64::consts::LN_2 + 1e-12);
        }
    }

    #[test]
    fn realizable_erm_and_one_nn_fit_their_training_set(seed in any::<u64>(), n in 1usize..=30) {
        let z = sample_supersample(&threshold(0.0), n, seed).unwrap();
        let train: Vec<_> = z.examples().collect();
        let queries: Vec<&[f64]> = train.iter().map(|e| e.x.as_slice()).collect();
        let learners = [LearnerSpec::ThresholdErm, LearnerSpec::Knn { k: 1, bag_fraction: 1.0 }];
        for learner in learners {
            let out = learner.train_predict(&train, &queries, 2, seed).unwrap();
            for (p, e) in out.predictions.iter().zip(&train) {
                prop_assert_eq!(p.as_class(), Some(e.y));
            }
        }
    }
}
