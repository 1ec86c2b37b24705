//! `fcmi`: run experiments, sweep configs, verify the lemma suite, and merge
//! reports into plot data.
//!
//! Exit codes: 0 success, 1 lemma violation, 2 configuration or input error,
//! 3 runtime failure.

mod overrides;
mod svg;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use fcmi::error::Error;
use fcmi::harness::{
    curve_rows, load_report, persist_report, run_experiment_with, sweep, write_curves,
    write_curves_to, CurveRow, ExperimentConfig, RunOptions,
};
use fcmi::lemma_lab::run_lemma_suite;
use serde_json::Value;

use overrides::Override;
use svg::{line_chart, Series};

#[derive(Parser)]
#[command(name = "fcmi", version, about = "Information-theoretic generalization bounds at desk scale")]
struct Cli {
    /// Progress on stderr; repeat for more.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config; writes report.json and curves.csv.
    Run {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a list or grid of configs; writes report_NNN.json and curves.csv.
    Sweep {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Check every lemma verifier on random exact instances.
    VerifyLemmas {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write the JSON summary here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Merge reports into one CSV and optional SVG charts.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// CSV destination; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Directory for one SVG chart per bound.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        clip_bounds: bool,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Dotted-path override such as `learner.params.k=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<Override>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread cap.
    #[arg(long)]
    jobs: Option<usize>,
    /// Clip bound values at 1 in curves.csv.
    #[arg(long)]
    clip_bounds: bool,
}

enum Failure {
    Violation(String),
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, flags } => cmd_run(&config, &out, &flags, cli.verbose),
        Command::Sweep { config, out, flags } => cmd_sweep(&config, &out, &flags, cli.verbose),
        Command::VerifyLemmas {
            instances,
            seed,
            jobs,
            out,
        } => cmd_verify(instances, seed, jobs, out.as_deref()),
        Command::Report {
            reports,
            out,
            svg,
            clip_bounds,
        } => cmd_report(&reports, out.as_deref(), svg.as_deref(), clip_bounds),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fcmi: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Applies `--set` and `--seed` and parses the result.
fn finish_config(mut doc: Value, flags: &RunFlags, origin: &str) -> Result<ExperimentConfig, Failure> {
    for o in &flags.set {
        o.apply(&mut doc).map_err(Failure::Config)?;
    }
    if let Some(seed) = flags.seed {
        Override {
            path: vec!["master_seed".into()],
            value: seed.into(),
        }
        .apply(&mut doc)
        .map_err(Failure::Config)?;
    }
    serde_json::from_value(doc).map_err(|e| Failure::Config(format!("{origin}: {e}")))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn print_curves(rows: &[CurveRow]) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    write_curves_to(rows, stdout.lock()).map_err(Failure::from)
}

fn cmd_run(config: &Path, out: &Path, flags: &RunFlags, verbose: u8) -> Result<(), Failure> {
    let config = finish_config(read_json(config)?, flags, &config.display().to_string())?;
    if verbose > 0 {
        eprintln!(
            "running {} on n = {} ({} x {} trials)",
            config.learner.name(),
            config.n,
            config.k1,
            config.k2
        );
    }
    let report = run_experiment_with(&config, RunOptions { jobs: flags.jobs })?;
    create_dir(out)?;
    persist_report(&report, &out.join("report.json"))?;
    let rows = curve_rows(&report, flags.clip_bounds);
    write_curves(&rows, &out.join("curves.csv"))?;
    print_curves(&rows)
}

/// A sweep file is either an array of configs or `{"base": {...}, "grid":
/// {"dotted.path": [values...]}}`, expanded as a cartesian product over the
/// grid keys in sorted order.
fn expand_sweep(doc: Value) -> Result<Vec<Value>, Failure> {
    match doc {
        Value::Array(items) => Ok(items),
        Value::Object(mut map) if map.contains_key("base") => {
            let base = map.remove("base").unwrap_or(Value::Null);
            let grid = match map.remove("grid") {
                Some(Value::Object(g)) => g,
                None => Default::default(),
                Some(_) => return Err(Failure::Config("sweep `grid` must be an object".into())),
            };
            if let Some(key) = map.keys().next() {
                return Err(Failure::Config(format!("unknown sweep field `{key}`")));
            }
            let mut docs = vec![base];
            for (key, values) in grid {
                let Value::Array(values) = values else {
                    return Err(Failure::Config(format!("grid entry `{key}` must be an array")));
                };
                let path: Vec<String> = key.split('.').map(str::to_string).collect();
                let mut next = Vec::with_capacity(docs.len() * values.len());
                for d in &docs {
                    for v in &values {
                        let mut d = d.clone();
                        Override {
                            path: path.clone(),
                            value: v.clone(),
                        }
                        .apply(&mut d)
                        .map_err(Failure::Config)?;
                        next.push(d);
                    }
                }
                docs = next;
            }
            Ok(docs)
        }
        _ => Err(Failure::Config(
            "sweep config must be an array of configs or {\"base\", \"grid\"}".into(),
        )),
    }
}

fn cmd_sweep(config: &Path, out: &Path, flags: &RunFlags, verbose: u8) -> Result<(), Failure> {
    let configs = expand_sweep(read_json(config)?)?
        .into_iter()
        .enumerate()
        .map(|(i, doc)| finish_config(doc, flags, &format!("{} (config {i})", config.display())))
        .collect::<Result<Vec<_>, _>>()?;
    if verbose > 0 {
        eprintln!("sweeping {} configs", configs.len());
    }
    create_dir(out)?;
    match sweep(&configs, RunOptions { jobs: flags.jobs }, flags.clip_bounds, Some(out)) {
        Ok(output) => print_curves(&output.curves),
        Err(failure) => {
            let _ = print_curves(&failure.completed.curves);
            let message = format!("config {}: {}", failure.index, failure.error);
            Err(if failure.error.is_config_error() {
                Failure::Config(message)
            } else {
                Failure::Runtime(message)
            })
        }
    }
}

fn cmd_verify(instances: usize, seed: u64, jobs: Option<usize>, out: Option<&Path>) -> Result<(), Failure> {
    let run = || run_lemma_suite(instances, seed);
    let summaries = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Failure::Runtime(e.to_string()))?
            .install(run),
        None => run(),
    }?;
    let text = serde_json::to_string_pretty(&summaries).map_err(|e| Failure::Runtime(e.to_string()))? + "\n";
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(path, &text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    let failed: Vec<&str> = summaries
        .iter()
        .filter(|s| !s.passed())
        .map(|s| s.lemma.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("violations in {}", failed.join(", "))))
    }
}

fn file_stem(bound: &str) -> String {
    bound
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn cmd_report(paths: &[PathBuf], out: Option<&Path>, svg_dir: Option<&Path>, clip: bool) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for path in paths {
        let report = load_report(path).map_err(|e| match e {
            Error::Parse { .. } => Failure::Config(format!("{} is not a valid report: {e}", path.display())),
            other => Failure::Config(format!("cannot read report {}: {other}", path.display())),
        })?;
        rows.extend(curve_rows(&report, clip));
    }
    match out {
        Some(path) => write_curves(&rows, path)?,
        None => print_curves(&rows)?,
    }
    if let Some(dir) = svg_dir {
        create_dir(dir)?;
        // bound -> learner -> (gap points, bound points)
        let mut groups: BTreeMap<&str, BTreeMap<&str, (Vec<(f64, f64)>, Vec<(f64, f64)>)>> = BTreeMap::new();
        for r in &rows {
            let entry = groups
                .entry(&r.bound_name)
                .or_default()
                .entry(&r.learner)
                .or_default();
            entry.0.push((r.n as f64, r.gap_mean));
            entry.1.push((r.n as f64, r.bound_value));
        }
        for (bound, learners) in groups {
            let series: Vec<Series> = learners
                .into_iter()
                .flat_map(|(learner, (gap, value))| {
                    [
                        Series {
                            label: format!("gap ({learner})"),
                            points: gap,
                            dashed: false,
                        },
                        Series {
                            label: format!("{bound} ({learner})"),
                            points: value,
                            dashed: true,
                        },
                    ]
                })
                .collect();
            let path = dir.join(format!("{}.svg", file_stem(bound)));
            let mut f = std::fs::File::create(&path)
                .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
            f.write_all(line_chart(bound, "n", &series).as_bytes())
                .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn grid_expands_as_a_product() {
        let docs = expand_sweep(json!({
            "base": {"n": 4, "learner": {"kind": "knn", "params": {"k": 1}}},
            "grid": {"n": [10, 25], "learner.params.k": [1, 3, 5]}
        }))
        .unwrap_or_else(|_| panic!("valid grid"));
        assert_eq!(docs.len(), 6);
        assert_eq!(docs[0]["learner"]["params"]["k"], json!(1));
        assert_eq!(docs[5]["n"], json!(25));
        assert_eq!(docs[5]["learner"]["params"]["k"], json!(5));
        assert_eq!(expand_sweep(json!([{"n": 1}])).ok().map(|d| d.len()), Some(1));
        assert!(expand_sweep(json!({"grid": {}})).is_err());
        assert!(expand_sweep(json!({"base": {}, "grid": {"n": 3}})).is_err());
    }

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(file_stem("fcmi_m:2"), "fcmi_m_2");
    }
}
