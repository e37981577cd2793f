//! Logical error rate against lattice size, per attraction setting.

use ftsim_core::anyon_mc::{logical_error_rate, McReport};
use serde_json::json;

use crate::config::McSweepConfig;
use crate::output::{Check, RunOutput, Table};
use crate::HarnessError;

const COLUMNS: [&str; 12] = [
    "k",
    "bias_q",
    "bias_radius",
    "params_fingerprint",
    "n_trials",
    "failures",
    "estimate",
    "ci_low",
    "ci_high",
    "mean_failure_time",
    "forced_cleanups",
    "seed",
];

fn overlap(a: &McReport, b: &McReport) -> bool {
    a.ci_low <= b.ci_high && b.ci_low <= a.ci_high
}

pub fn run(cfg: &McSweepConfig, seed: u64) -> Result<RunOutput, HarnessError> {
    let mut table = Table::new(&COLUMNS);
    let mut sweeps: Vec<(f64, Vec<McReport>)> = Vec::new();
    for &q in &cfg.bias_q_list {
        let params = cfg.params(q, seed);
        let mut reports = Vec::new();
        for &k in &cfg.k_list {
            let r = logical_error_rate(k, &params, cfg.n_trials)?;
            table.push(vec![
                k.into(),
                q.into(),
                cfg.bias_radius.into(),
                r.params_fingerprint.clone().into(),
                r.n_trials.into(),
                r.failures.into(),
                r.estimate.into(),
                r.ci_low.into(),
                r.ci_high.into(),
                r.mean_failure_time.into(),
                r.forced_cleanups.into(),
                seed.into(),
            ]);
            reports.push(r);
        }
        sweeps.push((q, reports));
    }

    let mut checks = Vec::new();
    for (q, reports) in &sweeps {
        let mut bad = Vec::new();
        for w in reports.windows(2) {
            if w[1].k > w[0].k && w[1].estimate > w[0].estimate && !overlap(&w[0], &w[1]) {
                bad.push(format!(
                    "k={}→{}: {} → {}",
                    w[0].k, w[1].k, w[0].estimate, w[1].estimate
                ));
            }
        }
        checks.push(Check::new(
            format!("non_increasing_in_k[bias_q={q}]"),
            bad.is_empty(),
            if bad.is_empty() {
                "every increase is within overlapping intervals".to_string()
            } else {
                bad.join("; ")
            },
        ));
    }
    if let Some((_, base)) = sweeps.iter().find(|(q, _)| *q == 0.0) {
        for (q, reports) in sweeps.iter().filter(|(q, _)| *q > 0.0) {
            for (b, u) in reports.iter().zip(base) {
                let ok = b.estimate <= u.estimate || overlap(b, u);
                checks.push(Check::new(
                    format!("bias_not_worse[k={},bias_q={q}]", b.k),
                    ok,
                    format!(
                        "biased {} [{}, {}] vs unbiased {} [{}, {}]",
                        b.estimate, b.ci_low, b.ci_high, u.estimate, u.ci_low, u.ci_high
                    ),
                ));
            }
        }
    }

    let records = json!({
        "conventions": {
            "p_create": "per defect-free edge per step, for each species",
            "attraction": "with probability bias_q a hop steps toward the nearest other defect of its species within bias_radius; otherwise uniform",
            "failure": "first time both species are absent with a nontrivial winding; defects left at t_max are matched to nearest partners",
        },
        "sweeps": sweeps
            .iter()
            .map(|(q, r)| json!({ "bias_q": q, "points": r }))
            .collect::<Vec<_>>(),
    });
    Ok(RunOutput {
        records,
        checks,
        table,
        logs: Vec::new(),
    })
}
