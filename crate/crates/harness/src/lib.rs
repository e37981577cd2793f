//! Configuration, orchestration and report writing for the simulation
//! engines in `ftsim-core`.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use ftsim_core::double::{DoubleError, DoubleState, LogError};
use ftsim_core::exact::ExactError;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, RawConfig};
pub use output::{Check, Report, RunOutput, Table};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "FTSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "ftsim-out";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("config is for {found}, not {expected}")]
    WrongExperiment {
        expected: &'static str,
        found: &'static str,
    },
    #[error("{path}: {source}")]
    Log { path: String, source: LogError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Lattice(#[from] ftsim_core::lattice::LatticeError),
    #[error(transparent)]
    Mc(#[from] ftsim_core::anyon_mc::McError),
    #[error(transparent)]
    Double(#[from] DoubleError),
    #[error(transparent)]
    Planner(#[from] ftsim_core::planner::PlannerError),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Experiment(String),
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub report: Report,
    pub files: Vec<PathBuf>,
}

/// Parses a config, applying a seed override before validation so that the
/// fingerprint reflects the seed actually used.
pub fn load_config(text: &str, path: &str, seed: Option<u64>) -> Result<ExperimentConfig, HarnessError> {
    let wrap = |source| HarnessError::Config {
        path: path.to_string(),
        source,
    };
    let mut raw = RawConfig::parse(text).map_err(wrap)?;
    if let Some(s) = seed {
        raw.set("seed", s);
    }
    ExperimentConfig::from_raw(&raw).map_err(wrap)
}

pub fn read_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    load_config(&text, &path.display().to_string(), seed)
}

fn resolve_out(opts: &RunOptions, from_config: Option<&str>) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| from_config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn pool(workers: Option<usize>) -> Result<(rayon::ThreadPool, usize), HarnessError> {
    let n = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Ok((rayon::ThreadPoolBuilder::new().num_threads(n).build()?, n))
}

/// Runs one experiment and writes `report.json`, `table.csv` and any event
/// logs. Nothing is left behind if a step fails.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, HarnessError> {
    let out_dir = resolve_out(opts, cfg.out_dir.as_deref());
    let (pool, workers) = pool(opts.workers.or(cfg.workers))?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis());
    let clock = Instant::now();
    let result = pool.install(|| experiments::run(cfg))?;
    let report = Report {
        artifact: env!("CARGO_PKG_NAME"),
        artifact_version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.kind().name().to_string(),
        config_fingerprint: cfg.fingerprint(),
        config: cfg.canonical.lines().map(str::to_string).collect(),
        seed: cfg.seed,
        workers,
        records: result.records,
        checks: result.checks,
        event_logs: result.logs.iter().map(|(p, _)| p.clone()).collect(),
        wall_clock: output::WallClock {
            started_unix_ms: started,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        },
    };
    let mut stage = output::Stage::new(&out_dir)?;
    for (path, text) in &result.logs {
        stage.write(path, text)?;
    }
    stage.write("table.csv", &result.table.to_csv())?;
    stage.write(
        "report.json",
        &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"),
    )?;
    let files = stage.commit()?;
    Ok(RunSummary { out_dir, report, files })
}

/// Reads and replays a line-delimited event log on an `l × l` grid.
pub fn replay_file(path: &Path, l: usize) -> Result<DoubleState, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    ftsim_core::double::replay_jsonl(l, &text).map_err(|source| HarnessError::Log {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the replayed state as `report.json` plus one `table.csv` row per
/// anyon in fusion order.
pub fn write_replay(state: &DoubleState, log: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let snapshot = state.snapshot_json();
    let mut table = Table::new(&["position", "id", "flux", "x", "y", "kind", "partner"]);
    for (i, id) in state.order().iter().enumerate() {
        let a = state.anyon(*id).expect("ordered ids exist");
        table.push(vec![
            i.into(),
            a.id.into(),
            a.flux.name().into(),
            a.site.x.into(),
            a.site.y.into(),
            format!("{:?}", a.kind).to_lowercase().into(),
            a.partner.into(),
        ]);
    }
    let report = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "experiment": "replay",
        "log": log.display().to_string(),
        "events": state.events().len(),
        "final_state_sha256": hex::encode(Sha256::digest(snapshot.as_bytes())),
        "total_flux": state.total_flux().name(),
        "final_state": serde_json::from_str::<serde_json::Value>(&snapshot).expect("snapshot is json"),
    });
    let mut stage = output::Stage::new(out_dir)?;
    stage.write("table.csv", &table.to_csv())?;
    stage.write(
        "report.json",
        &(serde_json::to_string_pretty(&report).expect("serializes") + "\n"),
    )?;
    Ok(stage.commit()?)
}
