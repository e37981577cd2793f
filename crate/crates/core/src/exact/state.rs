use super::ops::{hermiticity_error, CMatrix, CVector, Operator, C64};
use super::ExactError;

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Density matrix of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    n_qubits: usize,
    rho: CMatrix,
}

impl DensityState {
    /// Validates trace, Hermiticity and numerical positivity.
    pub fn new(rho: CMatrix) -> Result<Self, ExactError> {
        let state = Self::new_unchecked(rho)?;
        state.check(true)?;
        Ok(state)
    }

    pub(crate) fn new_unchecked(rho: CMatrix) -> Result<Self, ExactError> {
        let dim = rho.nrows();
        if dim != rho.ncols() || !dim.is_power_of_two() {
            return Err(ExactError::Shape(format!(
                "density matrix must be square with power-of-two side, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            rho,
        })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.vector();
        Self {
            n_qubits: psi.n_qubits(),
            rho: v * v.adjoint(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * C64::from(0.5);
        h.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Checks the physical-state invariants; the eigenvalue test is the
    /// expensive part and can be skipped.
    pub fn check(&self, positivity: bool) -> Result<(), ExactError> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(ExactError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = hermiticity_error(&self.rho);
        if herm > HERMITIAN_TOL {
            return Err(ExactError::InvalidState(format!("hermiticity violated by {herm:e}")));
        }
        if positivity {
            let min = self.min_eigenvalue();
            if min < -POSITIVITY_TOL {
                return Err(ExactError::InvalidState(format!(
                    "minimum eigenvalue {min:e} is negative"
                )));
            }
        }
        Ok(())
    }

    pub fn expectation(&self, op: &Operator) -> f64 {
        op.expectation(&self.rho).re
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    psi: CVector,
}

impl PureState {
    pub fn new(psi: CVector) -> Result<Self, ExactError> {
        let dim = psi.len();
        if !dim.is_power_of_two() {
            return Err(ExactError::Shape(format!("state length {dim} is not a power of two")));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(ExactError::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            psi,
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut psi = CVector::zeros(1 << n_qubits);
        psi[index] = C64::new(1.0, 0.0);
        Self { n_qubits, psi }
    }

    pub(crate) fn from_raw(n_qubits: usize, psi: CVector) -> Self {
        Self { n_qubits, psi }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn vector(&self) -> &CVector {
        &self.psi
    }

    pub fn expectation(&self, op: &Operator) -> f64 {
        op.expectation_vec(&self.psi).re
    }
}

/// Either representation; engines keep pure states pure when no noise acts.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityState),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.n_qubits(),
            QuantumState::Mixed(m) => m.n_qubits(),
        }
    }

    pub fn expectation(&self, op: &Operator) -> f64 {
        match self {
            QuantumState::Pure(p) => p.expectation(op),
            QuantumState::Mixed(m) => m.expectation(op),
        }
    }

    pub fn to_density(&self) -> DensityState {
        match self {
            QuantumState::Pure(p) => DensityState::from_pure(p),
            QuantumState::Mixed(m) => m.clone(),
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityState> for QuantumState {
    fn from(d: DensityState) -> Self {
        QuantumState::Mixed(d)
    }
}

/// Trace distance `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityState, b: &DensityState) -> f64 {
    let diff = a.matrix() - b.matrix();
    let h = (&diff + diff.adjoint()) * C64::from(0.5);
    // singular values rather than eigenvalues: the Hermitian eigensolver can
    // return NaN when the entries are all roundoff-sized
    0.5 * h.singular_values().iter().sum::<f64>()
}
