//! Stroboscopic product-formula channel with per-gate noise.

use super::master::{steps_for, Evolution, Propagator};
use super::noise::NoiseModel;
use super::ops::{CMatrix, Operator, C64};
use super::state::{DensityState, PureState, QuantumState};
use super::trajectory::{Observable, Trajectory};
use super::ExactError;

/// Largest number of qubits a single enacted term may touch.
pub const MAX_TERM_WEIGHT: u32 = 4;

/// Step schedule for [`trotter_channel`].
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    pub dt: f64,
    pub n_steps: usize,
    /// Order in which the local terms are enacted within one step.
    pub term_order: Vec<usize>,
    /// Noise applied on each enacted term's support after its exponential,
    /// for duration `dt` at strength `gate_noise.gamma()`.
    pub gate_noise: NoiseModel,
    pub sample_every: usize,
}

impl TrotterPlan {
    /// Noiseless plan over `n_terms` terms in their natural order, reaching `t_final`.
    pub fn new(dt: f64, t_final: f64, n_terms: usize, n_qubits: usize) -> Result<Self, ExactError> {
        let n_steps = steps_for(t_final, dt, 1)?;
        Ok(Self {
            dt,
            n_steps,
            term_order: (0..n_terms).collect(),
            gate_noise: NoiseModel::none(n_qubits),
            sample_every: 1,
        })
    }

    pub fn with_noise(mut self, gate_noise: NoiseModel) -> Self {
        self.gate_noise = gate_noise;
        self
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.term_order = order;
        self
    }

    pub fn sample_every(mut self, n: usize) -> Self {
        self.sample_every = n;
        self
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    fn validate(&self, terms: &[Operator], n_qubits: usize) -> Result<Vec<u64>, ExactError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ExactError::InvalidParameter(format!(
                "step dt = {} must be positive",
                self.dt
            )));
        }
        if self.n_steps == 0 {
            return Err(ExactError::InvalidParameter("plan needs at least one step".into()));
        }
        if self.sample_every == 0 {
            return Err(ExactError::InvalidParameter("sample_every must be at least 1".into()));
        }
        let mut seen = vec![false; terms.len()];
        for &i in &self.term_order {
            match seen.get_mut(i) {
                Some(s) if !*s => *s = true,
                _ => {
                    return Err(ExactError::InvalidParameter(format!(
                        "term order {:?} is not a permutation of 0..{}",
                        self.term_order,
                        terms.len()
                    )))
                }
            }
        }
        if self.term_order.len() != terms.len() {
            return Err(ExactError::InvalidParameter(format!(
                "term order {:?} is not a permutation of 0..{}",
                self.term_order,
                terms.len()
            )));
        }
        if self.gate_noise.n_qubits() != n_qubits {
            return Err(ExactError::Shape(format!(
                "gate noise acts on {} qubits, state has {n_qubits}",
                self.gate_noise.n_qubits()
            )));
        }
        let supports: Vec<u64> = terms.iter().map(|t| t.support(n_qubits)).collect();
        for (i, s) in supports.iter().enumerate() {
            if s.count_ones() > MAX_TERM_WEIGHT {
                return Err(ExactError::NonLocalTerm {
                    index: i,
                    weight: s.count_ones(),
                });
            }
        }
        if self.gate_noise.is_active() {
            for comp in self.gate_noise.component_supports() {
                if !supports.iter().any(|s| comp & !s == 0) {
                    return Err(ExactError::NonLocalNoise { support: comp });
                }
            }
        }
        Ok(supports)
    }
}

struct Gate {
    evolution: Evolution,
    noise: Option<NoiseModel>,
}

fn local_noise(model: &NoiseModel, t: f64, rho: &CMatrix) -> CMatrix {
    if let Some(out) = model.pauli_channel(t, rho) {
        return out;
    }
    // the local generator is bounded by gamma, so a few RK4 substeps suffice
    let n_sub = ((model.gamma() * t) / 0.005).ceil().max(1.0) as usize;
    let h = t / n_sub as f64;
    let c = |x: f64| C64::from(x);
    let mut y = rho.clone();
    for _ in 0..n_sub {
        let k1 = model.apply(&y);
        let k2 = model.apply(&(&y + &k1 * c(h / 2.0)));
        let k3 = model.apply(&(&y + &k2 * c(h / 2.0)));
        let k4 = model.apply(&(&y + &k3 * c(h)));
        y += (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0);
    }
    y
}

/// Enacts `Π_i exp(−i H_i Δt)` step by step, with each term followed by the
/// gate-noise channel restricted to that term's qubits. Samples are taken at
/// multiples of `plan.sample_every · Δt`.
pub fn trotter_channel(
    state: &QuantumState,
    terms: &[Operator],
    plan: &TrotterPlan,
    observables: &[Observable],
    check_positivity: bool,
) -> Result<Trajectory, ExactError> {
    let n_qubits = state.n_qubits();
    if n_qubits > super::ops::MAX_QUBITS {
        return Err(ExactError::TooLarge { n_qubits });
    }
    let supports = plan.validate(terms, n_qubits)?;
    let noisy = plan.gate_noise.is_active();
    let gates: Vec<Gate> = plan
        .term_order
        .iter()
        .map(|&i| Gate {
            evolution: Propagator::new(&terms[i], n_qubits).at(plan.dt),
            noise: noisy.then(|| plan.gate_noise.restricted_to(supports[i])),
        })
        .collect();

    let mut traj = Trajectory::new(observables);
    let mut current = if noisy {
        QuantumState::Mixed(state.to_density())
    } else {
        state.clone()
    };
    traj.record(0.0, &current, observables, check_positivity)?;
    for step in 1..=plan.n_steps {
        current = match current {
            QuantumState::Pure(p) => {
                let mut v = p.vector().clone();
                for g in &gates {
                    v = g.evolution.apply_vec(&v);
                }
                QuantumState::Pure(PureState::from_raw(n_qubits, v))
            }
            QuantumState::Mixed(m) => {
                let mut rho = m.into_matrix();
                for g in &gates {
                    rho = g.evolution.conjugate(&rho);
                    if let Some(model) = &g.noise {
                        if model.is_active() {
                            rho = local_noise(model, plan.dt, &rho);
                        }
                    }
                }
                QuantumState::Mixed(DensityState::new_unchecked(rho)?)
            }
        };
        if step % plan.sample_every == 0 || step == plan.n_steps {
            traj.record(step as f64 * plan.dt, &current, observables, check_positivity)?;
        }
    }
    traj.final_state = current;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ops::{PauliString, PauliSum};

    #[test]
    fn rejects_nonlocal_terms() {
        let terms = vec![Operator::from(PauliString::z([0, 1, 2, 3, 4]))];
        let plan = TrotterPlan::new(0.1, 1.0, 1, 5).unwrap();
        let err = trotter_channel(&PureState::basis(5, 0).into(), &terms, &plan, &[], false).unwrap_err();
        assert!(matches!(err, ExactError::NonLocalTerm { index: 0, weight: 5 }));
    }

    #[test]
    fn rejects_noise_outside_every_gate() {
        let terms = vec![Operator::from(PauliString::z([0, 1]))];
        let noise = NoiseModel::new(3, None, vec![PauliString::x([2]).into()], 0.1).unwrap();
        let plan = TrotterPlan::new(0.1, 1.0, 1, 3).unwrap().with_noise(noise);
        let err = trotter_channel(&PureState::basis(3, 0).into(), &terms, &plan, &[], false).unwrap_err();
        assert!(matches!(err, ExactError::NonLocalNoise { support: 0b100 }));
    }

    #[test]
    fn rejects_bad_order() {
        let terms = vec![Operator::from(PauliString::z([0])), Operator::from(PauliString::x([0]))];
        let plan = TrotterPlan::new(0.1, 1.0, 2, 1).unwrap().with_order(vec![0, 0]);
        assert!(trotter_channel(&PureState::basis(1, 0).into(), &terms, &plan, &[], false).is_err());
    }

    #[test]
    fn single_term_is_exact() {
        let h = Operator::Pauli(PauliSum::new(vec![
            (0.3, PauliString::x([0])),
            (1.1, PauliString::z([0])),
        ]));
        let plan = TrotterPlan::new(0.25, 2.0, 1, 1).unwrap();
        let psi: QuantumState = PureState::basis(1, 0).into();
        let traj = trotter_channel(&psi, std::slice::from_ref(&h), &plan, &[], false).unwrap();
        let u = crate::exact::ops::unitary_exp(&h.to_dense(1), 2.0);
        let want = &u * PureState::basis(1, 0).vector();
        let QuantumState::Pure(got) = traj.final_state else {
            panic!("expected pure")
        };
        assert!((got.vector() - want).norm() < 1e-12);
    }

    #[test]
    fn general_noise_path_matches_pauli_closed_form() {
        // a dense copy of a Pauli Lindblad forces the RK4 substep path
        let p = PauliString::x([0]);
        let fast = NoiseModel::new(1, None, vec![p.into()], 0.4).unwrap();
        let slow = NoiseModel::new(1, None, vec![Operator::Dense(p.to_dense(1))], 0.4).unwrap();
        let rho = DensityState::from_pure(&PureState::basis(1, 0)).into_matrix();
        let a = fast.pauli_channel(0.3, &rho).unwrap();
        let b = local_noise(&slow, 0.3, &rho);
        assert!((a - b).norm() < 1e-9);
    }
}
