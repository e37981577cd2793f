//! Optimal step for a stroboscopic simulation, with an optional end-to-end
//! measurement on a noisy one-qubit product formula.

use ftsim_core::exact::{
    lindblad_evolve, trace_distance, trotter_channel, EvolveOptions, NoiseModel, Operator, PauliString, PauliSum,
    PureState, QuantumState, TrotterPlan,
};
use ftsim_core::planner::{noise_error, optimal_dt, stroboscopic_error, ErrorBudget};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::TrotterPlanConfig;
use crate::output::{Cell, Check, RunOutput, Table};
use crate::HarnessError;

const COLUMNS: [&str; 7] = [
    "source",
    "dt",
    "ratio_to_optimum",
    "stroboscopic",
    "noise",
    "model_total",
    "measured_total",
];

/// Ratios to the optimum tabulated for the model.
const SCAN: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Measured points above this error are outside the regime the model
/// describes (the state has decohered) and are not fitted.
const FIT_CEILING: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct ToyResult {
    pub eps_per_gate: f64,
    pub t_total: f64,
    /// `(dt, measured total error)`.
    pub points: Vec<(f64, f64)>,
    pub fitted_strobe: f64,
    pub fitted_noise: f64,
    pub budget: ErrorBudget,
    pub dt_opt: f64,
    pub dt_measured_best: f64,
    pub measured_at_opt: f64,
    pub measured_min: f64,
}

/// The pair `X + Z` on one qubit, split into its two terms.
fn toy_terms() -> (Operator, Vec<Operator>) {
    let h = Operator::Pauli(PauliSum::new(vec![
        (1.0, PauliString::x([0])),
        (1.0, PauliString::z([0])),
    ]));
    (h, vec![PauliString::x([0]).into(), PauliString::z([0]).into()])
}

/// Trace distance at `t` between the ideal evolution and a product formula
/// whose every gate suffers noise of fixed size `eps`.
pub fn toy_error(dt: f64, t: f64, eps: f64) -> Result<f64, HarnessError> {
    let (h, terms) = toy_terms();
    let start: QuantumState = PureState::basis(1, 0).into();
    let ideal = lindblad_evolve(&start, &h, &NoiseModel::none(1), &[], &EvolveOptions::new(t, t))?;
    let noise = NoiseModel::single_qubit_paulis(1, eps / dt)?;
    let plan = TrotterPlan::new(dt, t, terms.len(), 1)?.with_noise(noise);
    let sim = trotter_channel(&start, &terms, &plan, &[], false)?;
    Ok(trace_distance(
        &ideal.final_state.to_density(),
        &sim.final_state.to_density(),
    ))
}

/// Least squares for `y ≈ a·x + b/x` with relative residuals.
fn fit_model(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (u, v) = (x / y, 1.0 / (x * y));
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        r1 += u;
        r2 += v;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-300 {
        return None;
    }
    let a = (r1 * s22 - r2 * s12) / det;
    let b = (s11 * r2 - s12 * r1) / det;
    (a > 0.0 && b > 0.0).then_some((a, b))
}

pub fn toy_check(eps: f64, t: f64) -> Result<ToyResult, HarnessError> {
    // steps T/n on a roughly geometric grid of n
    let mut ns: Vec<usize> = (0..60).map(|i| (1.12f64.powi(i)).round() as usize).collect();
    ns.dedup();
    let points: Vec<(f64, f64)> = ns
        .par_iter()
        .map(|&n| {
            let dt = t / n as f64;
            toy_error(dt, t, eps).map(|e| (dt, e))
        })
        .collect::<Result<_, _>>()?;
    let fit_pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 < FIT_CEILING).collect();
    let (a, b) = fit_model(&fit_pts)
        .ok_or_else(|| HarnessError::Experiment("toy error curve does not fit a·dt + b/dt".into()))?;
    let h_norm = 2f64.sqrt();
    let gates = 2;
    let budget = ErrorBudget::new(h_norm, t, b / (t * gates as f64), gates, a / (t * h_norm * h_norm));
    let opt = optimal_dt(&budget)?;
    let best = points
        .iter()
        .copied()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("grid is nonempty");
    let near = points
        .iter()
        .copied()
        .min_by(|p, q| (p.0 / opt.dt).ln().abs().total_cmp(&(q.0 / opt.dt).ln().abs()))
        .expect("grid is nonempty");
    Ok(ToyResult {
        eps_per_gate: eps,
        t_total: t,
        points,
        fitted_strobe: a,
        fitted_noise: b,
        budget,
        dt_opt: opt.dt,
        dt_measured_best: best.0,
        measured_at_opt: near.1,
        measured_min: best.1,
    })
}

pub fn run(cfg: &TrotterPlanConfig) -> Result<RunOutput, HarnessError> {
    let b = &cfg.budget;
    let opt = optimal_dt(b)?;
    let mut table = Table::new(&COLUMNS);
    for r in SCAN {
        let dt = opt.dt * r;
        table.push(vec![
            "model".into(),
            dt.into(),
            r.into(),
            stroboscopic_error(b, dt)?.into(),
            noise_error(b, dt)?.into(),
            b.total_error(dt)?.into(),
            Cell::Empty,
        ]);
    }
    let (half, double) = (b.total_error(opt.dt / 2.0)?, b.total_error(opt.dt * 2.0)?);
    let mut checks = vec![Check::new(
        "optimum_beats_neighbours",
        opt.total_error <= half && opt.total_error <= double,
        format!("f(dt*) = {}, f(dt*/2) = {half}, f(2dt*) = {double}", opt.total_error),
    )];

    let toy = if cfg.toy_check {
        let toy = toy_check(cfg.toy_eps, cfg.toy_t)?;
        for &(dt, measured) in &toy.points {
            let tb = &toy.budget;
            table.push(vec![
                "toy".into(),
                dt.into(),
                (dt / toy.dt_opt).into(),
                stroboscopic_error(tb, dt)?.into(),
                noise_error(tb, dt)?.into(),
                tb.total_error(dt)?.into(),
                measured.into(),
            ]);
        }
        let ratio = toy.dt_measured_best / toy.dt_opt;
        checks.push(Check::new(
            "toy_minimum_near_optimum",
            (0.5..=2.0).contains(&ratio),
            format!(
                "measured minimum at dt = {} ({ratio}× the planned {}); error there {} vs {} at the planned step",
                toy.dt_measured_best, toy.dt_opt, toy.measured_min, toy.measured_at_opt
            ),
        ));
        Some(toy)
    } else {
        None
    };

    Ok(RunOutput {
        records: json!({
            "budget": b,
            "conventions": {
                "h_norm": "operator-norm scale of the simulated Hamiltonian, standing in for the state-dependent expectation",
                "model": "f(dt) = c_strobe * T * h_norm^2 * dt^order + T * eps_gate * gates_per_step / dt",
            },
            "optimum": opt,
            "total_at_half": half,
            "total_at_double": double,
            "toy": toy,
        }),
        checks,
        table,
        logs: Vec::new(),
    })
}
