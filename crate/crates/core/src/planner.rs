//! Error budget for stroboscopic simulation: discretization error grows with
//! the step, accumulated gate noise shrinks with it, and the best step
//! balances the two.
//!
//! The model is `f(Δt) = a·Δt^p + b/Δt` with `a = c_strobe·T·‖H‖²` and
//! `b = T·ε_gate·g` for `g` gates per step. First-order product formulas have
//! `p = 1`; larger exponents are accepted for higher-order formulas but the
//! constants for them are not calibrated here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("budget field {field} = {value} is invalid: {reason}")]
    InvalidField {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("step dt = {0} must be positive")]
    InvalidStep(f64),
    #[error("no stroboscopic error term (c_strobe·T·h_norm² = 0): larger steps are always better")]
    NoDiscretizationError,
    #[error("no gate-noise term (T·eps_gate·gates_per_step = 0): the error vanishes as dt → 0")]
    NoGateNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Operator-norm scale of the simulated Hamiltonian.
    pub h_norm: f64,
    /// Total simulated time.
    pub t_total: f64,
    /// Error strength per enacted gate.
    pub eps_gate: f64,
    pub gates_per_step: u32,
    /// Fitted constant of the stroboscopic error.
    pub c_strobe: f64,
    /// Power of `Δt` in the stroboscopic error; 1 for first-order formulas.
    pub order: f64,
}

impl ErrorBudget {
    pub fn new(h_norm: f64, t_total: f64, eps_gate: f64, gates_per_step: u32, c_strobe: f64) -> Self {
        Self {
            h_norm,
            t_total,
            eps_gate,
            gates_per_step,
            c_strobe,
            order: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), PlannerError> {
        let check = |field: &'static str, value: f64| {
            if value >= 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(PlannerError::InvalidField {
                    field,
                    value,
                    reason: "must be finite and nonnegative",
                })
            }
        };
        check("h_norm", self.h_norm)?;
        check("t_total", self.t_total)?;
        check("eps_gate", self.eps_gate)?;
        check("c_strobe", self.c_strobe)?;
        if self.gates_per_step < 1 {
            return Err(PlannerError::InvalidField {
                field: "gates_per_step",
                value: self.gates_per_step as f64,
                reason: "must be at least 1",
            });
        }
        if !(self.order > 0.0 && self.order.is_finite()) {
            return Err(PlannerError::InvalidField {
                field: "order",
                value: self.order,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// Coefficient `a` of the stroboscopic term.
    pub fn strobe_coefficient(&self) -> f64 {
        self.c_strobe * self.t_total * self.h_norm * self.h_norm
    }

    /// Coefficient `b` of the noise term.
    pub fn noise_coefficient(&self) -> f64 {
        self.t_total * self.eps_gate * self.gates_per_step as f64
    }

    /// Combined model error `f(Δt)`.
    pub fn total_error(&self, dt: f64) -> Result<f64, PlannerError> {
        Ok(stroboscopic_error(self, dt)? + noise_error(self, dt)?)
    }
}

fn check_dt(dt: f64) -> Result<(), PlannerError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(PlannerError::InvalidStep(dt))
    }
}

/// `c_strobe · T · Δt^p · h_norm²`
pub fn stroboscopic_error(budget: &ErrorBudget, dt: f64) -> Result<f64, PlannerError> {
    budget.validate()?;
    check_dt(dt)?;
    Ok(budget.strobe_coefficient() * dt.powf(budget.order))
}

/// `T · ε_gate · g / Δt`
pub fn noise_error(budget: &ErrorBudget, dt: f64) -> Result<f64, PlannerError> {
    budget.validate()?;
    check_dt(dt)?;
    Ok(budget.noise_coefficient() / dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub dt: f64,
    pub total_error: f64,
}

/// Minimizer of `a·Δt^p + b/Δt`: `Δt* = (b / (p·a))^(1/(p+1))`, which is
/// `√(b/a)` with minimum `2√(ab)` for `p = 1`.
pub fn optimal_dt(budget: &ErrorBudget) -> Result<Optimum, PlannerError> {
    budget.validate()?;
    let a = budget.strobe_coefficient();
    let b = budget.noise_coefficient();
    if a == 0.0 {
        return Err(PlannerError::NoDiscretizationError);
    }
    if b == 0.0 {
        return Err(PlannerError::NoGateNoise);
    }
    let p = budget.order;
    let dt = (b / (p * a)).powf(1.0 / (p + 1.0));
    Ok(Optimum {
        dt,
        total_error: a * dt.powf(p) + b / dt,
    })
}

/// Least-squares `c` for `measured ≈ c · T · Δt · h_norm²` over `(Δt, measured)` pairs.
pub fn fit_c_strobe(h_norm: f64, t_total: f64, samples: &[(f64, f64)]) -> Option<f64> {
    let xs: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(dt, m)| (t_total * dt * h_norm * h_norm, m))
        .collect();
    let sxx: f64 = xs.iter().map(|(x, _)| x * x).sum();
    (sxx > 0.0).then(|| xs.iter().map(|(x, y)| x * y).sum::<f64>() / sxx)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn budget() -> ErrorBudget {
        ErrorBudget::new(1.0, 1.0, 1e-4, 8, 0.5)
    }

    #[test]
    fn noise_error_arithmetic() {
        assert_relative_eq!(noise_error(&budget(), 0.01).unwrap(), 0.08, max_relative = 1e-12);
        let half = noise_error(&budget(), 0.005).unwrap();
        assert_relative_eq!(half, 0.16, max_relative = 1e-12);
        let quiet = ErrorBudget {
            eps_gate: 0.0,
            ..budget()
        };
        assert_eq!(noise_error(&quiet, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn strobe_error_is_linear() {
        let b = budget();
        let e1 = stroboscopic_error(&b, 0.01).unwrap();
        let e2 = stroboscopic_error(&b, 0.02).unwrap();
        assert_relative_eq!(e2, 2.0 * e1, max_relative = 1e-12);
        assert!(stroboscopic_error(&b, 1e-300).unwrap() < 1e-299);
        assert!(matches!(stroboscopic_error(&b, 0.0), Err(PlannerError::InvalidStep(_))));
    }

    #[test]
    fn symmetric_minimum() {
        // a = c·T·h² = 2, b = T·eps·g = 2
        let b = ErrorBudget::new(1.0, 1.0, 0.25, 8, 2.0);
        let opt = optimal_dt(&b).unwrap();
        assert_relative_eq!(opt.dt, 1.0, max_relative = 1e-12);
        assert_relative_eq!(opt.total_error, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn sqrt_scaling_in_eps() {
        let b = budget();
        let quad = ErrorBudget {
            eps_gate: 4.0 * b.eps_gate,
            ..b
        };
        assert_relative_eq!(
            optimal_dt(&quad).unwrap().dt,
            2.0 * optimal_dt(&b).unwrap().dt,
            max_relative = 1e-12
        );
    }

    #[test]
    fn neighbours_are_worse() {
        let b = budget();
        let opt = optimal_dt(&b).unwrap();
        assert!(opt.total_error <= b.total_error(opt.dt / 2.0).unwrap());
        assert!(opt.total_error <= b.total_error(opt.dt * 2.0).unwrap());
        assert_relative_eq!(opt.total_error, b.total_error(opt.dt).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn degenerate_budgets() {
        let b = budget();
        assert_eq!(
            optimal_dt(&ErrorBudget { c_strobe: 0.0, ..b }),
            Err(PlannerError::NoDiscretizationError)
        );
        assert_eq!(
            optimal_dt(&ErrorBudget { eps_gate: 0.0, ..b }),
            Err(PlannerError::NoGateNoise)
        );
        assert!(matches!(
            optimal_dt(&ErrorBudget { gates_per_step: 0, ..b }),
            Err(PlannerError::InvalidField {
                field: "gates_per_step",
                ..
            })
        ));
        assert!(matches!(
            optimal_dt(&ErrorBudget { h_norm: -1.0, ..b }),
            Err(PlannerError::InvalidField { field: "h_norm", .. })
        ));
    }

    #[test]
    fn higher_order_exponent() {
        let b = ErrorBudget { order: 2.0, ..budget() };
        let opt = optimal_dt(&b).unwrap();
        // first-order condition 2a·dt − b/dt² = 0
        let a = b.strobe_coefficient();
        let c = b.noise_coefficient();
        assert!((2.0 * a * opt.dt - c / (opt.dt * opt.dt)).abs() < 1e-9 * c / (opt.dt * opt.dt));
    }

    #[test]
    fn fits() {
        let samples = [(0.1, 0.3), (0.2, 0.6)];
        assert_relative_eq!(fit_c_strobe(1.0, 1.0, &samples).unwrap(), 3.0, max_relative = 1e-12);
        let pts = [(1.0, 2.0), (2.0, 8.0), (4.0, 32.0)];
        assert_relative_eq!(loglog_slope(&pts).unwrap(), 2.0, max_relative = 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }
}
