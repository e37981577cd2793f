use serde::{Deserialize, Serialize};

use super::ops::Operator;
use super::state::QuantumState;
use super::ExactError;

/// A labelled Hermitian observable.
#[derive(Debug, Clone)]
pub struct Observable {
    pub label: String,
    pub op: Operator,
}

impl Observable {
    pub fn new(label: impl Into<String>, op: impl Into<Operator>) -> Self {
        Self {
            label: label.into(),
            op: op.into(),
        }
    }
}

/// One emitted `(time, observable, expectation)` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub label: String,
    pub value: f64,
}

/// Expectation values sampled along an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// `values[i][j]` is observable `j` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub final_state: QuantumState,
    /// Final-expectation change when the step was halved, if that was checked.
    pub convergence_delta: Option<f64>,
}

pub(crate) const TIME_MATCH_TOL: f64 = 1e-9;

impl Trajectory {
    pub(crate) fn new(observables: &[Observable]) -> Self {
        Self {
            labels: observables.iter().map(|o| o.label.clone()).collect(),
            times: Vec::new(),
            values: Vec::new(),
            final_state: QuantumState::Pure(super::state::PureState::basis(0, 0)),
            convergence_delta: None,
        }
    }

    pub(crate) fn record(
        &mut self,
        time: f64,
        state: &QuantumState,
        observables: &[Observable],
        check_positivity: bool,
    ) -> Result<(), ExactError> {
        if let QuantumState::Mixed(m) = state {
            m.check(check_positivity)
                .map_err(|e| ExactError::InvalidState(format!("at t = {time}: {e}")))?;
        }
        self.times.push(time);
        self.values
            .push(observables.iter().map(|o| state.expectation(&o.op)).collect());
        Ok(())
    }

    pub fn sample_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= TIME_MATCH_TOL * t.abs().max(1.0))
    }

    /// Expectations at time `t`, if sampled.
    pub fn at(&self, t: f64) -> Option<&[f64]> {
        self.sample_index(t).map(|i| self.values[i].as_slice())
    }

    pub fn value(&self, label: &str, t: f64) -> Option<f64> {
        let j = self.labels.iter().position(|l| l == label)?;
        self.at(t).map(|row| row[j])
    }

    pub fn records(&self) -> impl Iterator<Item = TrajectoryRecord> + '_ {
        self.times.iter().zip(&self.values).flat_map(move |(&t, row)| {
            self.labels.iter().zip(row).map(move |(l, &v)| TrajectoryRecord {
                time: t,
                label: l.clone(),
                value: v,
            })
        })
    }
}

/// Largest deviation `max_j |⟨X̌_j(T)⟩ − ⟨X_j(T)⟩|` between two trajectories.
pub fn accuracy_delta(ideal: &Trajectory, noisy: &Trajectory, t: f64) -> Result<f64, ExactError> {
    if ideal.labels != noisy.labels {
        return Err(ExactError::MismatchedObservables {
            left: ideal.labels.clone(),
            right: noisy.labels.clone(),
        });
    }
    let a = ideal.at(t).ok_or(ExactError::MissingSample { time: t })?;
    let b = noisy.at(t).ok_or(ExactError::MissingSample { time: t })?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::state::PureState;

    fn traj(labels: &[&str], rows: Vec<(f64, Vec<f64>)>) -> Trajectory {
        Trajectory {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            times: rows.iter().map(|r| r.0).collect(),
            values: rows.into_iter().map(|r| r.1).collect(),
            final_state: QuantumState::Pure(PureState::basis(1, 0)),
            convergence_delta: None,
        }
    }

    #[test]
    fn delta_definition() {
        let a = traj(&["Z"], vec![(0.0, vec![1.0]), (1.0, vec![0.9])]);
        let b = traj(&["Z"], vec![(0.0, vec![1.0]), (1.0, vec![0.7])]);
        assert!((accuracy_delta(&a, &b, 1.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(accuracy_delta(&a, &a, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn delta_takes_maximum() {
        let a = traj(&["A", "B"], vec![(2.0, vec![0.5, -0.5])]);
        let b = traj(&["A", "B"], vec![(2.0, vec![0.4, 0.1])]);
        assert!((accuracy_delta(&a, &b, 2.0).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn delta_errors() {
        let a = traj(&["A"], vec![(1.0, vec![0.0])]);
        let b = traj(&["B"], vec![(1.0, vec![0.0])]);
        assert!(matches!(
            accuracy_delta(&a, &b, 1.0),
            Err(ExactError::MismatchedObservables { .. })
        ));
        assert!(matches!(
            accuracy_delta(&a, &a, 3.0),
            Err(ExactError::MissingSample { .. })
        ));
    }

    #[test]
    fn records_flatten_rows() {
        let a = traj(&["A", "B"], vec![(0.0, vec![1.0, 2.0]), (0.5, vec![3.0, 4.0])]);
        let recs: Vec<_> = a.records().collect();
        assert_eq!(recs.len(), 4);
        assert_eq!(
            recs[3],
            TrajectoryRecord {
                time: 0.5,
                label: "B".into(),
                value: 4.0
            }
        );
    }
}
