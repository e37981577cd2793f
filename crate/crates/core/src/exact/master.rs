//! Master-equation integration.
//!
//! The state obeys `dρ/dt = −i[H, ρ] + γ(−i[Ȟ, ρ] + Σ_ℓ L_ℓ ρ L_ℓ† − ½{L_ℓ†L_ℓ, ρ})`,
//! the Schrödinger-picture dual of the Heisenberg-picture equation for
//! observables. The Hamiltonian part is propagated exactly and the noise part
//! is integrated with a fixed-step integrating-factor RK4 (Lawson) scheme, so
//! the step error scales with γ rather than with the spectral width of H.

use super::noise::NoiseModel;
use super::ops::{CMatrix, CVector, LocalOperator, Operator, PauliString, C64};
use super::state::{DensityState, PureState, QuantumState};
use super::trajectory::{Observable, Trajectory};
use super::ExactError;

pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-6;

/// `exp(−iHt)` for a fixed `t`, in a form that is cheap to apply.
#[derive(Debug, Clone)]
pub(crate) enum Evolution {
    /// Product of commuting Pauli rotations `cos θ − i sin θ P`.
    Rotations(Vec<(f64, f64, PauliString)>),
    Local {
        u: LocalOperator,
        u_dag: LocalOperator,
    },
    Dense {
        u: CMatrix,
        u_dag: CMatrix,
    },
}

impl Evolution {
    /// `U ρ U†`
    pub(crate) fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        match self {
            Evolution::Rotations(rots) => {
                let mut rho = rho.clone();
                let mut spare = CMatrix::zeros(rho.nrows(), rho.ncols());
                for &(c, s, p) in rots {
                    p.rotate_into(c, s, &rho, &mut spare);
                    std::mem::swap(&mut rho, &mut spare);
                }
                rho
            }
            Evolution::Local { u, u_dag } => u_dag.right_mul(&u.left_mul(rho)),
            Evolution::Dense { u, u_dag } => u * rho * u_dag,
        }
    }

    pub(crate) fn apply_vec(&self, v: &CVector) -> CVector {
        match self {
            Evolution::Rotations(rots) => {
                let mut v = v.clone();
                for &(c, s, p) in rots {
                    v = &v * C64::from(c) + p.apply_vec(&v) * C64::new(0.0, -s);
                }
                v
            }
            Evolution::Local { u, .. } => u.apply_vec(v),
            Evolution::Dense { u, .. } => u * v,
        }
    }
}

/// Exact propagator factory for a time-independent Hamiltonian.
#[derive(Debug, Clone)]
pub(crate) enum Propagator {
    Paulis(Vec<(f64, PauliString)>),
    Local(LocalOperator),
    Spectral { vectors: CMatrix, values: Vec<f64> },
}

impl Propagator {
    pub(crate) fn new(h: &Operator, n_qubits: usize) -> Self {
        match h {
            Operator::Pauli(p) if p.is_commuting() => Propagator::Paulis(
                p.terms
                    .iter()
                    .filter(|(c, s)| *s != PauliString::IDENTITY && *c != 0.0)
                    .copied()
                    .collect(),
            ),
            Operator::Local(l) => Propagator::Local(l.clone()),
            other => {
                let eig = other.to_dense(n_qubits).symmetric_eigen();
                Propagator::Spectral {
                    vectors: eig.eigenvectors,
                    values: eig.eigenvalues.iter().copied().collect(),
                }
            }
        }
    }

    pub(crate) fn at(&self, t: f64) -> Evolution {
        match self {
            Propagator::Paulis(terms) => {
                Evolution::Rotations(terms.iter().map(|&(c, p)| ((c * t).cos(), (c * t).sin(), p)).collect())
            }
            Propagator::Local(l) => {
                let u = super::ops::unitary_exp(l.matrix(), t);
                let u = LocalOperator::new(l.qubits().to_vec(), u).expect("same shape");
                let u_dag = u.adjoint();
                Evolution::Local { u, u_dag }
            }
            Propagator::Spectral { vectors, values } => {
                let phases =
                    CVector::from_iterator(values.len(), values.iter().map(|&lam| C64::from_polar(1.0, -lam * t)));
                let u = vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint();
                let u_dag = u.adjoint();
                Evolution::Dense { u, u_dag }
            }
        }
    }
}

/// Step size and sampling for [`lindblad_evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub t_final: f64,
    /// Integrator step.
    pub dt: f64,
    /// Record a sample every this many steps (and at `t = 0`).
    pub sample_every: usize,
    /// Run the eigenvalue positivity check at every sample.
    pub check_positivity: bool,
    /// Re-run at `dt / 2` and fail if final expectations move by more than this.
    pub convergence_tol: Option<f64>,
}

impl EvolveOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t_final,
            dt,
            sample_every: 1,
            check_positivity: false,
            convergence_tol: Some(DEFAULT_CONVERGENCE_TOL),
        }
    }

    pub fn sample_every(mut self, n: usize) -> Self {
        self.sample_every = n;
        self
    }

    pub fn check_positivity(mut self, on: bool) -> Self {
        self.check_positivity = on;
        self
    }

    pub fn convergence_tol(mut self, tol: Option<f64>) -> Self {
        self.convergence_tol = tol;
        self
    }

    pub(crate) fn n_steps(&self) -> Result<usize, ExactError> {
        steps_for(self.t_final, self.dt, self.sample_every)
    }
}

pub(crate) fn steps_for(t_final: f64, dt: f64, sample_every: usize) -> Result<usize, ExactError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ExactError::InvalidParameter(format!("step dt = {dt} must be positive")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(ExactError::InvalidParameter(format!(
            "final time {t_final} must be nonnegative"
        )));
    }
    if sample_every == 0 {
        return Err(ExactError::InvalidParameter("sample_every must be at least 1".into()));
    }
    let n = (t_final / dt).round();
    if (n * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(ExactError::InvalidParameter(format!(
            "final time {t_final} is not a multiple of the step {dt}"
        )));
    }
    Ok(n as usize)
}

fn check_dims(state: &QuantumState, noise: &NoiseModel) -> Result<usize, ExactError> {
    let n = state.n_qubits();
    if noise.n_qubits() != n {
        return Err(ExactError::Shape(format!(
            "noise model acts on {} qubits, state has {n}",
            noise.n_qubits()
        )));
    }
    if n > super::ops::MAX_QUBITS {
        return Err(ExactError::TooLarge { n_qubits: n });
    }
    Ok(n)
}

/// Integrates the master equation from `state` and samples the observables.
pub fn lindblad_evolve(
    state: &QuantumState,
    h: &Operator,
    noise: &NoiseModel,
    observables: &[Observable],
    opts: &EvolveOptions,
) -> Result<Trajectory, ExactError> {
    let n_qubits = check_dims(state, noise)?;
    let n_steps = opts.n_steps()?;
    let propagator = Propagator::new(h, n_qubits);

    if !noise.is_active() {
        return closed_evolve(state, &propagator, observables, opts, n_steps);
    }

    let mut traj = lawson_rk4(state.to_density(), &propagator, noise, observables, opts, n_steps)?;
    if let Some(tol) = opts.convergence_tol {
        let fine_opts = EvolveOptions {
            dt: opts.dt / 2.0,
            sample_every: opts.sample_every * 2,
            check_positivity: false,
            ..opts.clone()
        };
        let fine = lawson_rk4(
            state.to_density(),
            &propagator,
            noise,
            observables,
            &fine_opts,
            n_steps * 2,
        )?;
        let delta = if observables.is_empty() {
            super::ops::max_abs_diff(
                traj.final_state.to_density().matrix(),
                fine.final_state.to_density().matrix(),
            )
        } else {
            let a = traj.values.last().expect("at least one sample");
            let b = fine.values.last().expect("at least one sample");
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        traj.convergence_delta = Some(delta);
        if !(delta < tol) {
            return Err(ExactError::NonConvergent {
                dt: opts.dt,
                delta,
                tol,
            });
        }
    }
    Ok(traj)
}

fn closed_evolve(
    state: &QuantumState,
    propagator: &Propagator,
    observables: &[Observable],
    opts: &EvolveOptions,
    n_steps: usize,
) -> Result<Trajectory, ExactError> {
    let stride = propagator.at(opts.dt * opts.sample_every as f64);
    let mut traj = Trajectory::new(observables);
    let mut current = state.clone();
    traj.record(0.0, &current, observables, opts.check_positivity)?;
    let mut step = 0;
    while step + opts.sample_every <= n_steps {
        current = match current {
            QuantumState::Pure(p) => {
                QuantumState::Pure(PureState::from_raw(p.n_qubits(), stride.apply_vec(p.vector())))
            }
            QuantumState::Mixed(m) => QuantumState::Mixed(DensityState::new_unchecked(stride.conjugate(m.matrix()))?),
        };
        step += opts.sample_every;
        traj.record(step as f64 * opts.dt, &current, observables, opts.check_positivity)?;
    }
    if step < n_steps {
        let rest = propagator.at(opts.dt * (n_steps - step) as f64);
        current = match current {
            QuantumState::Pure(p) => QuantumState::Pure(PureState::from_raw(p.n_qubits(), rest.apply_vec(p.vector()))),
            QuantumState::Mixed(m) => QuantumState::Mixed(DensityState::new_unchecked(rest.conjugate(m.matrix()))?),
        };
        traj.record(n_steps as f64 * opts.dt, &current, observables, opts.check_positivity)?;
    }
    traj.final_state = current;
    Ok(traj)
}

fn lawson_rk4(
    rho: DensityState,
    propagator: &Propagator,
    noise: &NoiseModel,
    observables: &[Observable],
    opts: &EvolveOptions,
    n_steps: usize,
) -> Result<Trajectory, ExactError> {
    let h = opts.dt;
    let half = propagator.at(h / 2.0);
    let mut traj = Trajectory::new(observables);
    let mut state = QuantumState::Mixed(rho);
    traj.record(0.0, &state, observables, opts.check_positivity)?;
    let QuantumState::Mixed(mut rho) = state else {
        unreachable!()
    };
    let c = |x: f64| C64::from(x);
    for step in 1..=n_steps {
        let y = rho.matrix();
        let k1 = noise.apply(y);
        let half_y = half.conjugate(y);
        let k2 = noise.apply(&half.conjugate(&(y + &k1 * c(h / 2.0))));
        let k3 = noise.apply(&(&half_y + &k2 * c(h / 2.0)));
        let full_y = half.conjugate(&half_y);
        let k4 = noise.apply(&(&full_y + half.conjugate(&k3) * c(h)));
        let full_k1 = half.conjugate(&half.conjugate(&k1));
        let mid = half.conjugate(&(k2 + k3));
        let next = full_y + (full_k1 + mid * c(2.0) + k4) * c(h / 6.0);
        *rho.matrix_mut() = next;
        if step % opts.sample_every == 0 || step == n_steps {
            state = QuantumState::Mixed(rho);
            traj.record(step as f64 * h, &state, observables, opts.check_positivity)?;
            let QuantumState::Mixed(r) = state else { unreachable!() };
            rho = r;
        }
    }
    traj.final_state = QuantumState::Mixed(rho);
    Ok(traj)
}
