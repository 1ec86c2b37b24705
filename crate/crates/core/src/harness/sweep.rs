use std::path::Path;

use super::report::{curve_rows, persist_report, write_curves, CurveRow, ExperimentReport};
use super::run::{run_experiment_with, RunOptions};
use super::config::ExperimentConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub reports: Vec<ExperimentReport>,
    pub curves: Vec<CurveRow>,
}

/// A sweep that stopped at `index`; `completed` holds everything before it.
#[derive(Debug)]
pub struct SweepFailure {
    pub index: usize,
    pub error: Error,
    pub completed: SweepOutput,
}

impl std::fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config {} failed: {}", self.index, self.error)
    }
}

impl std::error::Error for SweepFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Runs configs in order. With `out_dir`, writes `report_NNN.json` per
/// config and a combined `curves.csv`; on failure the files for the
/// completed configs are still written.
pub fn sweep(
    configs: &[ExperimentConfig],
    options: RunOptions,
    clip: bool,
    out_dir: Option<&Path>,
) -> std::result::Result<SweepOutput, SweepFailure> {
    let mut out = SweepOutput {
        reports: Vec::new(),
        curves: Vec::new(),
    };
    if configs.is_empty() {
        return Err(SweepFailure {
            index: 0,
            error: Error::Config("sweep has no configs".into()),
            completed: out,
        });
    }
    for (i, config) in configs.iter().enumerate() {
        let step = run_experiment_with(config, options).and_then(|report| {
            if let Some(dir) = out_dir {
                persist_report(&report, &dir.join(format!("report_{i:03}.json")))?;
            }
            Ok(report)
        });
        match step {
            Ok(report) => {
                out.curves.extend(curve_rows(&report, clip));
                out.reports.push(report);
            }
            Err(error) => {
                let error = match write_sweep_curves(&out, out_dir) {
                    Ok(()) => error,
                    Err(e) => e,
                };
                return Err(SweepFailure {
                    index: i,
                    error,
                    completed: out,
                });
            }
        }
    }
    match write_sweep_curves(&out, out_dir) {
        Ok(()) => Ok(out),
        Err(error) => Err(SweepFailure {
            index: configs.len(),
            error,
            completed: out,
        }),
    }
}

fn write_sweep_curves(out: &SweepOutput, out_dir: Option<&Path>) -> Result<()> {
    match out_dir {
        Some(dir) => write_curves(&out.curves, &dir.join("curves.csv")),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundKind;
    use crate::datagen::GeneratorSpec;
    use crate::harness::config::DataSpec;
    use crate::learners::LearnerSpec;

    fn config(n: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            DataSpec::Generator(GeneratorSpec::ThresholdRealizable {
                threshold: 0.5,
                label_noise: 0.0,
            }),
            n,
            2,
            20,
            LearnerSpec::ThresholdErm,
        );
        c.bounds = vec![BoundKind::FcmiM1, BoundKind::Vc];
        c
    }

    #[test]
    fn writes_reports_and_curves() {
        let dir = tempfile::tempdir().unwrap();
        let out = sweep(&[config(4), config(8)], RunOptions::default(), false, Some(dir.path())).unwrap();
        assert_eq!(out.reports.len(), 2);
        assert_eq!(out.curves.len(), 4);
        assert!(dir.path().join("report_000.json").exists());
        assert!(dir.path().join("report_001.json").exists());
        let csv = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn partial_failure_keeps_completed_work() {
        let dir = tempfile::tempdir().unwrap();
        let mut bad = config(4);
        bad.k1 = 0;
        let err = sweep(&[config(4), bad], RunOptions::default(), false, Some(dir.path())).unwrap_err();
        assert_eq!(err.index, 1);
        assert_eq!(err.completed.reports.len(), 1);
        assert!(dir.path().join("report_000.json").exists());
        assert!(dir.path().join("curves.csv").exists());
        assert!(sweep(&[], RunOptions::default(), false, None).is_err());
    }
}
