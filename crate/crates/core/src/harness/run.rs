use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;

use super::config::{DataSpec, ExperimentConfig, Mode, SeedMode};
use super::dataset::{load_csv, Dataset};
use super::report::{
    EstimatorInfo, ExperimentReport, GapSummary, StabilityReport, SupersampleReport,
};
use crate::bounds::{self, BoundKind, BoundReport, StabilityConstants};
use crate::data::{select_train_set, slot_index, subsets_of_size, SplitMask, SubsetIndex, Supersample};
use crate::datagen::{sample_supersample, GeneratorSpec};
use crate::error::{Error, Result};
use crate::infotheory::{plugin_mi, plugin_mi_from_samples, ExactTable, SeedPolicy};
use crate::learners::{
    default_sigma_sq, estimate_stability, member_seed, LearnerSpec, StabilityClause,
};
use crate::seeding::{derive_seed, rng_for, stream};
use crate::stats::Summary;
use crate::trial::{aggregate_gap, PredictionTable, TrialRecord};

/// Execution knobs that do not change results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker-thread cap; `None` uses the global pool.
    pub jobs: Option<usize>,
}

enum Source {
    Generator(GeneratorSpec),
    Csv(Dataset),
}

impl Source {
    fn open(spec: &DataSpec) -> Result<Source> {
        Ok(match spec {
            DataSpec::Generator(g) => Source::Generator(g.clone()),
            DataSpec::Csv { path } => Source::Csv(load_csv(path)?),
        })
    }

    fn num_classes(&self) -> usize {
        match self {
            Source::Generator(g) => g.num_classes(),
            Source::Csv(d) => d.num_classes,
        }
    }

    fn supersample(&self, n: usize, seed: u64) -> Result<Supersample> {
        match self {
            Source::Generator(g) => sample_supersample(g, n, seed),
            Source::Csv(d) => d.sample_supersample(n, seed),
        }
    }
}

/// Runs the full protocol: `k1` supersamples, `k2` (split, seed) trials
/// each (or every split in exact mode), then information estimates and the
/// requested bounds. Deterministic in `config.master_seed`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentReport> {
    match options.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
            pool.install(|| run_inner(config))
        }
        None => run_inner(config),
    }
}

fn run_inner(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let source = Source::open(&config.data)?;
    let k = source.num_classes();
    config.validate(k)?;
    let supersamples = (0..config.k1)
        .into_par_iter()
        .map(|a| {
            let seed = derive_seed(&[config.master_seed, stream::SUPERSAMPLE, a as u64]);
            let z = source.supersample(config.n, seed)?;
            match config.mode {
                Mode::MonteCarlo => monte_carlo_supersample(config, &z, a, seed),
                Mode::ExactEnumeration => exact_supersample(config, &z, a, seed),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut subset_families = BTreeMap::new();
    for b in &config.bounds {
        if let BoundKind::FcmiM(m) = b {
            subset_families.insert(*m, config.subset_family_size(*m));
        }
    }
    let trials_per_supersample = match config.mode {
        Mode::MonteCarlo => config.k2,
        Mode::ExactEnumeration => (1usize << config.n) * exact_policy(config, 0).seeds().len(),
    };
    let estimator = EstimatorInfo {
        mode: config.mode,
        supersamples: config.k1,
        trials_per_supersample,
        bias_correction: config.bias_correction,
        subset_families,
    };

    let stability = stability_report(config, k)?;
    let bounds = config
        .bounds
        .iter()
        .map(|&b| assemble_bound(config, b, &supersamples, stability.as_ref()))
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentReport {
        config: config.clone(),
        gap: GapSummary::of(&supersamples),
        bounds,
        stability,
        estimator,
        supersamples,
    })
}

fn learner_seed(config: &ExperimentConfig, a: usize, b: usize) -> u64 {
    match config.seed_mode {
        SeedMode::PerTrial => derive_seed(&[config.master_seed, stream::LEARNER, a as u64, b as u64]),
        SeedMode::Fixed => derive_seed(&[config.master_seed, stream::LEARNER, a as u64]),
    }
}

fn needs(config: &ExperimentConfig, pred: impl Fn(&BoundKind) -> bool) -> bool {
    config.bounds.iter().any(pred)
}

/// Symbol for the two predictions on pair `i`.
fn pair_symbol(t: &TrialRecord, i: usize, k: usize) -> usize {
    let c = |slot| t.predictions[slot_index(i, slot)].as_class().unwrap_or(0);
    c(0) * k + c(1)
}

fn subset_family(config: &ExperimentConfig, m: usize, a: usize) -> Vec<SubsetIndex> {
    let (size, enumerated) = config.subset_family_size(m);
    if enumerated {
        return subsets_of_size(config.n, m);
    }
    let mut rng = rng_for(&[config.master_seed, stream::SUBSETS, a as u64, m as u64]);
    (0..size)
        .map(|_| {
            let idx = index::sample(&mut rng, config.n, m).into_vec();
            SubsetIndex::new(idx).expect("sampled indices are distinct")
        })
        .collect()
}

fn monte_carlo_supersample(
    config: &ExperimentConfig,
    z: &Supersample,
    a: usize,
    seed: u64,
) -> Result<SupersampleReport> {
    let n = z.n();
    let k = z.num_classes();
    let queries = z.inputs();
    let trials = (0..config.k2)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(&[config.master_seed, stream::SPLIT, a as u64, b as u64]);
            let split = SplitMask::random(n, &mut rng);
            let s = learner_seed(config, a, b);
            let train = select_train_set(z, &split)?;
            let out = config.learner.train_predict(&train, &queries, k, s)?;
            TrialRecord::evaluate(z, split, s, out.predictions, &config.loss)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = PredictionTable::new(
        format!("supersample-{a}"),
        n,
        config.learner.prediction_space(k),
        trials,
    )?;
    let bc = config.bias_correction;

    let mut report = SupersampleReport {
        index: a,
        seed,
        gap: aggregate_gap(&table),
        mi_per_index: None,
        fcmi_all: None,
        test_slot_mi: None,
        weight_mi: None,
        stability_cmi_per_index: None,
        stability_cmi_all_sum: None,
        subset_mi: BTreeMap::new(),
        member_fcmi: None,
        predictions: None,
    };

    if needs(config, |b| matches!(b, BoundKind::FcmiM1 | BoundKind::FcmiM(1))) {
        report.mi_per_index = Some(
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let samples: Vec<(usize, usize)> = table
                        .trials
                        .iter()
                        .map(|t| (pair_symbol(t, i, k), t.split.bit(i)))
                        .collect();
                    plugin_mi_from_samples(&samples, (k * k, 2), bc)
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if needs(config, |b| matches!(b, BoundKind::FcmiMn | BoundKind::FcmiSquared)) {
        let samples = table.trials.iter().map(|t| {
            let preds: Vec<usize> = t.predictions.iter().map(|p| p.as_class().unwrap_or(0)).collect();
            (preds, t.split.to_index())
        });
        report.fcmi_all = Some(plugin_mi(samples, bc)?);
    }
    for b in &config.bounds {
        let BoundKind::FcmiM(m) = *b else { continue };
        let family = subset_family(config, m, a);
        let cells = (k.pow(2 * m as u32), 1usize << m);
        let values = family
            .par_iter()
            .map(|u| {
                let samples: Vec<(usize, usize)> = table
                    .trials
                    .iter()
                    .map(|t| {
                        let sym = u
                            .indices()
                            .iter()
                            .fold(0, |acc, &i| acc * k * k + pair_symbol(t, i, k));
                        (sym, t.split.pack(u.indices()) as usize)
                    })
                    .collect();
                plugin_mi_from_samples(&samples, cells, bc)
            })
            .collect::<Result<Vec<_>>>()?;
        report.subset_mi.insert(m, values);
    }
    if needs(config, |b| *b == BoundKind::StabilityFcmi) {
        report.stability_cmi_per_index = Some(paired_flip_cmi(config, z, &table)?);
    }
    if config.record_predictions {
        report.predictions = Some(table);
    }
    Ok(report)
}

/// For a deterministic learner the prediction on pair `i` is a function of
/// `S`, so `I(f_i; S_i | S_{-i} = s)` is `ln 2` when flipping `S_i` changes
/// the prediction and 0 otherwise. Averaging that indicator over the sampled
/// splits gives an unbiased estimate of the conditional information.
fn paired_flip_cmi(
    config: &ExperimentConfig,
    z: &Supersample,
    table: &PredictionTable,
) -> Result<Vec<f64>> {
    let n = z.n();
    let k = z.num_classes();
    let pair_inputs: Vec<Vec<&[f64]>> = (0..n)
        .map(|i| vec![z.example(i, 0).x.as_slice(), z.example(i, 1).x.as_slice()])
        .collect();
    let changed = table
        .trials
        .par_iter()
        .map(|t| {
            (0..n)
                .map(|i| {
                    let flipped = t.split.with_bit(i, t.split.bit(i) == 0);
                    let train = select_train_set(z, &flipped)?;
                    let out = config.learner.train_predict(&train, &pair_inputs[i], k, t.seed)?;
                    let same = out.predictions[0] == t.predictions[slot_index(i, 0)]
                        && out.predictions[1] == t.predictions[slot_index(i, 1)];
                    Ok(!same as u8 as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let trials = changed.len() as f64;
    Ok((0..n)
        .map(|i| std::f64::consts::LN_2 * changed.iter().map(|c| c[i]).sum::<f64>() / trials)
        .collect())
}

fn exact_policy(config: &ExperimentConfig, a: usize) -> SeedPolicy {
    if let LearnerSpec::Ensemble {
        members,
        seed_radix: Some(r),
    } = &config.learner
    {
        return SeedPolicy::Uniform((0..r.pow(members.len() as u32)).collect());
    }
    if config.learner.is_deterministic() || config.exact_seeds == 1 {
        return SeedPolicy::Single(learner_seed(config, a, 0));
    }
    SeedPolicy::Uniform(
        (0..config.exact_seeds)
            .map(|b| derive_seed(&[config.master_seed, stream::LEARNER, a as u64, b as u64]))
            .collect(),
    )
}

fn exact_supersample(
    config: &ExperimentConfig,
    z: &Supersample,
    a: usize,
    seed: u64,
) -> Result<SupersampleReport> {
    let n = z.n();
    let policy = exact_policy(config, a);
    let table = ExactTable::build(z, &config.learner, &policy, config.enumeration_limit)?;
    let trials = (0..table.rows())
        .map(|row| table.trial(z, row, &config.loss))
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = trials.iter().map(crate::trial::gap_estimate).collect();

    let mut report = SupersampleReport {
        index: a,
        seed,
        gap: Summary::of(&gaps),
        mi_per_index: None,
        fcmi_all: None,
        test_slot_mi: Some(table.test_slot_mi()),
        weight_mi: None,
        stability_cmi_per_index: None,
        stability_cmi_all_sum: None,
        subset_mi: BTreeMap::new(),
        member_fcmi: None,
        predictions: None,
    };
    if needs(config, |b| matches!(b, BoundKind::FcmiM1 | BoundKind::FcmiM(1))) {
        report.mi_per_index = Some((0..n).map(|i| table.fcmi_index(i)).collect::<Result<_>>()?);
    }
    if needs(config, |b| {
        matches!(b, BoundKind::FcmiMn | BoundKind::FcmiSquared | BoundKind::Ensemble)
    }) {
        report.fcmi_all = Some(table.fcmi_all()?);
    }
    if needs(config, |b| *b == BoundKind::CmiWeight) {
        report.weight_mi = Some(table.weight_mi_all()?);
    }
    if needs(config, |b| *b == BoundKind::StabilityFcmi) {
        report.stability_cmi_per_index =
            Some((0..n).map(|i| table.stability_cmi(i)).collect::<Result<_>>()?);
    }
    if needs(config, |b| *b == BoundKind::StabilityFcmiSquared) {
        let mut sum = 0.0;
        for i in 0..n {
            sum += table.stability_cmi_all_predictions(i)?;
        }
        report.stability_cmi_all_sum = Some(sum);
    }
    for b in &config.bounds {
        let BoundKind::FcmiM(m) = *b else { continue };
        let values = subset_family(config, m, a)
            .par_iter()
            .map(|u| table.fcmi_subset(u))
            .collect::<Result<Vec<_>>>()?;
        report.subset_mi.insert(m, values);
    }
    if needs(config, |b| *b == BoundKind::Ensemble) {
        report.member_fcmi = Some(member_information(config, z, &policy)?);
    }
    if config.record_predictions {
        report.predictions = Some(PredictionTable::new(
            format!("supersample-{a}"),
            n,
            config.learner.prediction_space(z.num_classes()),
            trials,
        )?);
    }
    Ok(report)
}

/// Exact `I(F_j; S)` for every ensemble member over that member's own seed
/// set.
fn member_information(
    config: &ExperimentConfig,
    z: &Supersample,
    policy: &SeedPolicy,
) -> Result<Vec<f64>> {
    let LearnerSpec::Ensemble {
        members,
        seed_radix,
    } = &config.learner
    else {
        unreachable!("validated as an ensemble")
    };
    members
        .iter()
        .enumerate()
        .map(|(j, member)| {
            let member_policy = match seed_radix {
                Some(r) => SeedPolicy::Uniform((0..*r).map(|d| member_seed(j, d)).collect()),
                None => SeedPolicy::Uniform(
                    policy
                        .seeds()
                        .iter()
                        .map(|&s| derive_seed(&[stream::MEMBER, j as u64, s]))
                        .collect(),
                ),
            };
            ExactTable::build(z, member, &member_policy, config.enumeration_limit)?.fcmi_all()
        })
        .collect()
}

fn stability_report(config: &ExperimentConfig, d_out: usize) -> Result<Option<StabilityReport>> {
    let first = needs(config, |b| *b == BoundKind::DeterministicStability);
    let squared = needs(config, |b| *b == BoundKind::DeterministicStabilitySquared);
    if !(first || squared) {
        return Ok(None);
    }
    let DataSpec::Generator(gen) = &config.data else {
        unreachable!("validated to use a generator")
    };
    let gamma = config.gamma().expect("validated");
    let seed = derive_seed(&[config.master_seed, stream::STABILITY]);
    let trials = config.stability.trials;
    let estimate = |clause| -> Result<f64> {
        Ok(estimate_stability(&config.learner, gen, config.n, clause, trials, seed)?.value)
    };
    let beta = estimate(StabilityClause::SelfPoint)?;
    let (beta1, beta2) = if squared {
        (
            Some(estimate(StabilityClause::Test)?),
            Some(estimate(StabilityClause::Train)?),
        )
    } else {
        (None, None)
    };
    let (sigma_sq, sigma_sq_is_default) = match config.stability.sigma_sq {
        Some(s) => (s, false),
        None => (default_sigma_sq(beta, d_out, gamma), true),
    };
    Ok(Some(StabilityReport {
        beta,
        beta1,
        beta2,
        gamma,
        d_out,
        sigma_sq,
        sigma_sq_is_default,
        trials_per_probe: trials,
    }))
}

fn collect<T: Clone>(
    supersamples: &[SupersampleReport],
    field: impl Fn(&SupersampleReport) -> Option<T>,
) -> Vec<T> {
    supersamples
        .iter()
        .map(|s| field(s).expect("estimate computed for every supersample"))
        .collect()
}

fn assemble_bound(
    config: &ExperimentConfig,
    kind: BoundKind,
    supersamples: &[SupersampleReport],
    stability: Option<&StabilityReport>,
) -> Result<BoundReport> {
    let n = config.n;
    Ok(match kind {
        BoundKind::FcmiM1 => bounds::fcmi_bound_m1(&collect(supersamples, |s| s.mi_per_index.clone()))?,
        BoundKind::FcmiM(1) => {
            bounds::fcmi_bound_general_m(&collect(supersamples, |s| s.mi_per_index.clone()), 1)?
        }
        BoundKind::FcmiM(m) => {
            let (family, enumerated) = config.subset_family_size(m);
            bounds::fcmi_bound_general_m(
                &collect(supersamples, |s| s.subset_mi.get(&m).cloned()),
                m,
            )?
            .with_input("subsets_enumerated", enumerated)
            .with_input("subset_family_size", family)
        }
        BoundKind::FcmiMn => bounds::fcmi_bound_mn(&collect(supersamples, |s| s.fcmi_all), n)?,
        BoundKind::FcmiSquared => {
            bounds::fcmi_squared_bound(&collect(supersamples, |s| s.fcmi_all), n)?
        }
        BoundKind::CmiWeight => bounds::cmi_weight_bound(&collect(supersamples, |s| s.weight_mi), n)?,
        BoundKind::StabilityFcmi => bounds::stability_fcmi_bound(&collect(supersamples, |s| {
            s.stability_cmi_per_index.clone()
        }))?,
        BoundKind::StabilityFcmiSquared => bounds::stability_fcmi_squared_bound(
            &collect(supersamples, |s| s.stability_cmi_all_sum),
            n,
        )?,
        BoundKind::Vc => bounds::vc_gap_bound(config.learner.vc_dimension().expect("validated"), n),
        BoundKind::Ensemble => {
            bounds::ensemble_gap_bound(&collect(supersamples, |s| s.member_fcmi.clone()), n)?
        }
        BoundKind::DeterministicStability | BoundKind::DeterministicStabilitySquared => {
            let s = stability.expect("stability estimated when requested");
            let c = StabilityConstants {
                beta: s.beta,
                beta1: s.beta1.unwrap_or(0.0),
                beta2: s.beta2.unwrap_or(0.0),
                gamma: s.gamma,
                d_out: s.d_out,
            };
            let value = if kind == BoundKind::DeterministicStability {
                bounds::deterministic_stability_bound(&c)?
            } else {
                bounds::deterministic_stability_squared_bound(&c, n)?
            };
            let mut r = BoundReport::constant(kind, value)
                .with_input("beta", s.beta)
                .with_input("gamma", s.gamma)
                .with_input("d_out", s.d_out)
                .with_input("sigma_sq", s.sigma_sq);
            if let (Some(b1), Some(b2)) = (s.beta1, s.beta2) {
                r = r.with_input("beta1", b1).with_input("beta2", b2);
            }
            r
        }
    })
}
