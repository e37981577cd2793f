use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ftsim::{read_config, replay_file, run, write_replay, ExperimentKind, HarnessError, RunOptions, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "ftsim", version, about = "Fault-tolerant quantum simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (flat `key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `out_dir`, then `ftsim-out`.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Noisy stroboscopic toric-code simulation against the system's own noise.
    ExactDelta(Common),
    /// Monte Carlo logical error rate over lattice sizes.
    McSweep(Common),
    /// Flux-anyon memory with and without the sweeper.
    S3Braiding(Common),
    /// Optimal step for a stroboscopic simulation.
    TrotterPlan(Common),
    /// Checks a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rebuilds the final state from a flux-anyon event log.
    Replay {
        /// Line-delimited event log.
        log: PathBuf,
        /// Grid size; taken from `--config` (field `l`) when omitted.
        #[arg(long)]
        size: Option<usize>,
        /// An s3-braiding config supplying the grid size.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
}

fn experiment(kind: ExperimentKind, c: Common) -> Result<(), HarnessError> {
    let cfg = read_config(&c.config, c.seed)?;
    if cfg.kind() != kind {
        return Err(HarnessError::WrongExperiment {
            expected: kind.name(),
            found: cfg.kind().name(),
        });
    }
    let summary = run(
        &cfg,
        &RunOptions {
            out: c.out,
            seed: c.seed,
            workers: c.workers.map(|w| w as usize),
        },
    )?;
    println!(
        "{} finished in {:.2} s; config {}",
        kind.name(),
        summary.report.wall_clock.elapsed_seconds,
        &summary.report.config_fingerprint[..16]
    );
    for check in &summary.report.checks {
        println!(
            "  {} {}: {}",
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!("wrote {} files to {}", summary.files.len(), summary.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ExactDelta(c) => experiment(ExperimentKind::ExactDelta, c),
        Command::McSweep(c) => experiment(ExperimentKind::McSweep, c),
        Command::S3Braiding(c) => experiment(ExperimentKind::S3Braiding, c),
        Command::TrotterPlan(c) => experiment(ExperimentKind::TrotterPlan, c),
        Command::Validate { config, seed } => read_config(&config, seed).map(|cfg| {
            println!("ok: {} config {}", cfg.kind().name(), cfg.fingerprint());
        }),
        Command::Replay { log, size, config, out } => replay(log, size, config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn replay(
    log: PathBuf,
    size: Option<usize>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let l = match (size, config) {
        (Some(l), _) => l,
        (None, Some(path)) => match read_config(&path, None)?.experiment {
            ftsim::config::Experiment::S3Braiding(c) => c.memory.l,
            other => {
                return Err(HarnessError::WrongExperiment {
                    expected: "s3-braiding",
                    found: other.kind().name(),
                })
            }
        },
        (None, None) => return Err(HarnessError::Experiment("replay needs --size or --config".into())),
    };
    let state = replay_file(&log, l)?;
    let out = out.unwrap_or_else(|| PathBuf::from(ftsim::DEFAULT_OUT_DIR));
    let files = write_replay(&state, &log, &out)?;
    println!(
        "replayed {} events: {} anyons, total flux {}",
        state.events().len(),
        state.len(),
        state.total_flux()
    );
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}
