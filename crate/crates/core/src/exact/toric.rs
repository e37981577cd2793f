//! Dense toric-code model on a small lattice.

use crate::lattice::{BitSet, PauliChain, ToricLattice};

use super::ops::{CMatrix, CVector, Operator, PauliString, PauliSum, C64, MAX_QUBITS};
use super::state::PureState;
use super::trajectory::Observable;
use super::ExactError;

/// Which noncontractible loop operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Logical {
    /// Z along the horizontal primal loop at y = 0.
    Z1,
    /// Z along the vertical primal loop at x = 0.
    Z2,
    /// X along the vertical dual loop cutting horizontal edges at x = 0.
    X1,
    /// X along the horizontal dual loop cutting vertical edges at y = 0.
    X2,
}

impl Logical {
    pub const ALL: [Logical; 4] = [Logical::Z1, Logical::Z2, Logical::X1, Logical::X2];

    pub fn label(&self) -> &'static str {
        match self {
            Logical::Z1 => "Zbar1",
            Logical::Z2 => "Zbar2",
            Logical::X1 => "Xbar1",
            Logical::X2 => "Xbar2",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToricModel {
    lattice: ToricLattice,
    stars: Vec<PauliString>,
    plaquettes: Vec<PauliString>,
}

impl ToricModel {
    pub fn new(lattice: ToricLattice) -> Result<Self, ExactError> {
        let n = lattice.n_edges();
        if n > MAX_QUBITS {
            return Err(ExactError::TooLarge { n_qubits: n });
        }
        let stars = (0..lattice.n_vertices())
            .map(|s| PauliString::x(lattice.star(s).expect("valid vertex")))
            .collect();
        let plaquettes = (0..lattice.n_faces())
            .map(|p| PauliString::z(lattice.bound(p).expect("valid face")))
            .collect();
        Ok(Self {
            lattice,
            stars,
            plaquettes,
        })
    }

    pub fn lattice(&self) -> &ToricLattice {
        &self.lattice
    }

    pub fn n_qubits(&self) -> usize {
        self.lattice.n_edges()
    }

    /// `A_s`, the X-type star operators.
    pub fn star_operators(&self) -> &[PauliString] {
        &self.stars
    }

    /// `B_p`, the Z-type plaquette operators.
    pub fn plaquette_operators(&self) -> &[PauliString] {
        &self.plaquettes
    }

    fn stabilizers(&self) -> impl Iterator<Item = &PauliString> {
        self.stars.iter().chain(&self.plaquettes)
    }

    /// `H = Σ_s (1 − A_s) + Σ_p (1 − B_p)`.
    pub fn hamiltonian(&self) -> Operator {
        Operator::Pauli(PauliSum::new(
            self.stabilizers()
                .flat_map(|&s| [(1.0, PauliString::IDENTITY), (-1.0, s)])
                .collect(),
        ))
    }

    pub fn hamiltonian_dense(&self) -> CMatrix {
        self.hamiltonian().to_dense(self.n_qubits())
    }

    /// The local terms `1 − A_s` then `1 − B_p`, each on four qubits.
    pub fn terms(&self) -> Vec<Operator> {
        self.stabilizers()
            .map(|&s| Operator::Pauli(PauliSum::new(vec![(1.0, PauliString::IDENTITY), (-1.0, s)])))
            .collect()
    }

    pub fn logical(&self, which: Logical) -> PauliString {
        let l = &self.lattice;
        match which {
            Logical::Z1 => PauliString::z(l.dual_seam_h().ones()),
            Logical::Z2 => PauliString::z(l.dual_seam_v().ones()),
            Logical::X1 => PauliString::x(l.seam_v().ones()),
            Logical::X2 => PauliString::x(l.seam_h().ones()),
        }
    }

    pub fn logical_observables(&self) -> Vec<Observable> {
        Logical::ALL
            .iter()
            .map(|&w| Observable::new(w.label(), self.logical(w)))
            .collect()
    }

    /// Ground state with the requested logical eigenvalues, built by projecting
    /// `|0…0⟩` (every plaquette +1) onto the star +1 space.
    pub fn code_state(&self, fixed: &[(Logical, bool)]) -> Result<PureState, ExactError> {
        for (i, &(a, _)) in fixed.iter().enumerate() {
            for &(b, _) in &fixed[i + 1..] {
                if !self.logical(a).commutes_with(&self.logical(b)) {
                    return Err(ExactError::InvalidParameter(format!(
                        "logicals {a:?} and {b:?} anticommute and cannot be fixed together"
                    )));
                }
            }
        }
        let n = self.n_qubits();
        let mut psi = PureState::basis(n, 0).vector().clone();
        // |0…0⟩ has Z̄ = +1; the crossing X̄ flips it
        for &(w, plus) in fixed {
            match (w, plus) {
                (Logical::Z1, false) => psi = self.logical(Logical::X1).apply_vec(&psi),
                (Logical::Z2, false) => psi = self.logical(Logical::X2).apply_vec(&psi),
                _ => {}
            }
        }
        let mut project = |p: PauliString, sign: f64| {
            psi = (&psi + p.apply_vec(&psi) * C64::from(sign)) * C64::from(0.5);
        };
        for &(w, plus) in fixed {
            project(self.logical(w), if plus { 1.0 } else { -1.0 });
        }
        for &s in &self.stars {
            project(s, 1.0);
        }
        let norm = psi.norm();
        if norm < 1e-12 {
            return Err(ExactError::InvalidParameter(format!(
                "logical constraints {fixed:?} are incompatible"
            )));
        }
        PureState::new(psi / C64::from(norm))
    }

    /// Stabilizer expectations of a state, stars first.
    pub fn stabilizer_expectations(&self, psi: &CVector) -> Vec<f64> {
        self.stabilizers().map(|s| s.expectation_vec(psi).re).collect()
    }

    /// Defects read off a state that is a stabilizer eigenstate: vertices whose
    /// star is −1 and faces whose plaquette is −1.
    pub fn syndrome_of_state(&self, psi: &CVector) -> (Vec<usize>, Vec<usize>) {
        let vals = self.stabilizer_expectations(psi);
        let nv = self.stars.len();
        let vertices = (0..nv).filter(|&s| vals[s] < -0.5).collect();
        let faces = (0..self.plaquettes.len()).filter(|&p| vals[nv + p] < -0.5).collect();
        (vertices, faces)
    }

    /// The Pauli operator corresponding to a lattice chain.
    pub fn chain_operator(&self, chain: &PauliChain) -> PauliString {
        let mask = |b: &BitSet| b.ones().fold(0u64, |m, e| m | (1 << e));
        PauliString {
            x_mask: mask(&chain.x_part),
            z_mask: mask(&chain.z_part),
        }
    }
}
