//! Experiment configuration, execution, persistence and sweeps.

pub mod config;
pub mod dataset;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{DataSpec, ExperimentConfig, Mode, SeedMode, StabilityConfig, SubsetPolicy};
pub use dataset::{load_csv, Dataset};
pub use report::{
    curve_rows, load, load_report, persist, persist_report, write_curves, write_curves_to,
    CurveRow, EstimatorInfo, ExperimentReport, GapSummary, StabilityReport, SupersampleReport,
    CURVE_HEADER,
};
pub use run::{run_experiment, run_experiment_with, RunOptions};
pub use sweep::{sweep, SweepFailure, SweepOutput};
