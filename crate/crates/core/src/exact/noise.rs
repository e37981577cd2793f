use super::ops::{CMatrix, LocalOperator, Operator, PauliString, PauliSum, C64};
use super::ExactError;

/// One Lindblad generator with the products the dissipator needs.
#[derive(Debug, Clone)]
pub struct Lindblad {
    op: Operator,
    adjoint: Operator,
    /// `L†L`; `None` when it is the identity (Hermitian Pauli strings).
    number: Option<Operator>,
    pauli: Option<PauliString>,
    support: u64,
}

impl Lindblad {
    fn new(op: Operator, n_qubits: usize) -> Self {
        let pauli = op.as_single_pauli().and_then(|(c, p)| (c.abs() == 1.0).then_some(p));
        let adjoint = op.adjoint();
        let number = if pauli.is_some() {
            None
        } else {
            Some(match &op {
                Operator::Local(l) => Operator::Local(
                    LocalOperator::new(l.qubits().to_vec(), l.matrix().adjoint() * l.matrix())
                        .expect("square local matrix"),
                ),
                _ => {
                    let d = op.to_dense(n_qubits);
                    Operator::Dense(d.adjoint() * d)
                }
            })
        };
        let support = op.support(n_qubits);
        Self {
            op,
            adjoint,
            number,
            pauli,
            support,
        }
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn pauli(&self) -> Option<PauliString> {
        self.pauli
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    /// `L ρ L† − ½{L†L, ρ}`
    pub fn dissipate(&self, rho: &CMatrix) -> CMatrix {
        match (&self.pauli, &self.number) {
            (Some(p), _) => p.sandwich(rho) - rho,
            (None, Some(n)) => {
                let jump = self.adjoint.right_mul(&self.op.left_mul(rho));
                jump - (n.left_mul(rho) + n.right_mul(rho)) * C64::from(0.5)
            }
            (None, None) => unreachable!("non-Pauli Lindblad always carries L†L"),
        }
    }
}

/// Error dynamics of strength `gamma`: a Hamiltonian perturbation plus
/// Lindblad generators, each rescaled to unit operator norm on construction.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    n_qubits: usize,
    h_check: Option<Operator>,
    lindblads: Vec<Lindblad>,
    gamma: f64,
    h_check_scale: Option<f64>,
    lindblad_scales: Vec<f64>,
}

impl NoiseModel {
    pub fn none(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            h_check: None,
            lindblads: Vec::new(),
            gamma: 0.0,
            h_check_scale: None,
            lindblad_scales: Vec::new(),
        }
    }

    pub fn new(
        n_qubits: usize,
        h_check: Option<Operator>,
        lindblads: Vec<Operator>,
        gamma: f64,
    ) -> Result<Self, ExactError> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(ExactError::InvalidParameter(format!(
                "noise strength gamma = {gamma} must be finite and nonnegative"
            )));
        }
        let normalize = |op: Operator, what: &str| -> Result<(Operator, f64), ExactError> {
            let norm = op.operator_norm(n_qubits);
            if norm <= 0.0 || !norm.is_finite() {
                return Err(ExactError::InvalidParameter(format!("{what} has zero norm")));
            }
            Ok((op.scaled(1.0 / norm), norm))
        };
        let (h_check, h_check_scale) = match h_check {
            Some(h) if !h.is_zero() => {
                let (h, s) = normalize(h, "Hamiltonian perturbation")?;
                (Some(h), Some(s))
            }
            _ => (None, None),
        };
        let mut ls = Vec::with_capacity(lindblads.len());
        let mut scales = Vec::with_capacity(lindblads.len());
        for (i, l) in lindblads.into_iter().enumerate() {
            let (l, s) = normalize(l, &format!("Lindblad operator {i}"))?;
            ls.push(Lindblad::new(l, n_qubits));
            scales.push(s);
        }
        Ok(Self {
            n_qubits,
            h_check,
            lindblads: ls,
            gamma,
            h_check_scale,
            lindblad_scales: scales,
        })
    }

    /// Single-edge X and Z Lindblads on every qubit.
    pub fn single_qubit_paulis(n_qubits: usize, gamma: f64) -> Result<Self, ExactError> {
        let ops = (0..n_qubits)
            .flat_map(|q| [PauliString::x([q]), PauliString::z([q])])
            .map(Operator::from)
            .collect();
        Self::new(n_qubits, None, ops, gamma)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self, ExactError> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(ExactError::InvalidParameter(format!(
                "noise strength gamma = {gamma} must be finite and nonnegative"
            )));
        }
        Ok(Self { gamma, ..self.clone() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn h_check(&self) -> Option<&Operator> {
        self.h_check.as_ref()
    }

    pub fn lindblads(&self) -> &[Lindblad] {
        &self.lindblads
    }

    /// Norms the raw operators had before rescaling: `(Ȟ, [L_ℓ])`.
    pub fn normalization(&self) -> (Option<f64>, &[f64]) {
        (self.h_check_scale, &self.lindblad_scales)
    }

    /// True when the dissipative or perturbative part can change a state.
    pub fn is_active(&self) -> bool {
        self.gamma > 0.0 && (self.h_check.is_some() || !self.lindblads.is_empty())
    }

    /// `γ(−i[Ȟ, ρ] + Σ D[L]ρ)`, the part of the generator beyond the system
    /// Hamiltonian.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        if !self.is_active() {
            return out;
        }
        if let Some(h) = &self.h_check {
            out += h.commutator(rho) * C64::new(0.0, -1.0);
        }
        // Pauli jumps accumulate in place; each also contributes −ρ
        let mut paulis = 0usize;
        for l in &self.lindblads {
            match l.pauli {
                Some(p) => {
                    p.add_sandwich(1.0, rho, &mut out);
                    paulis += 1;
                }
                None => out += l.dissipate(rho),
            }
        }
        if paulis > 0 {
            let k = paulis as f64;
            for (o, r) in out.as_mut_slice().iter_mut().zip(rho.as_slice()) {
                *o -= r * k;
            }
        }
        out *= C64::from(self.gamma);
        out
    }

    /// The part of this model acting inside `support`, at the same gamma.
    pub(crate) fn restricted_to(&self, support: u64) -> NoiseModel {
        let inside = |s: u64| s & !support == 0;
        let h_check = self.h_check.as_ref().and_then(|h| match h {
            Operator::Pauli(p) => {
                let terms: Vec<_> = p.terms.iter().filter(|(_, s)| inside(s.support())).copied().collect();
                (!terms.is_empty()).then(|| Operator::Pauli(PauliSum::new(terms)))
            }
            other => inside(other.support(self.n_qubits)).then(|| other.clone()),
        });
        let mut lindblads = Vec::new();
        let mut lindblad_scales = Vec::new();
        for (l, s) in self.lindblads.iter().zip(&self.lindblad_scales) {
            if inside(l.support) {
                lindblads.push(l.clone());
                lindblad_scales.push(*s);
            }
        }
        NoiseModel {
            n_qubits: self.n_qubits,
            h_check,
            lindblads,
            gamma: self.gamma,
            h_check_scale: self.h_check_scale,
            lindblad_scales,
        }
    }

    /// Supports of every component that must fit inside some gate.
    pub(crate) fn component_supports(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.lindblads.iter().map(|l| l.support).collect();
        if let Some(h) = &self.h_check {
            match h {
                Operator::Pauli(p) => out.extend(p.terms.iter().map(|(_, s)| s.support())),
                other => out.push(other.support(self.n_qubits)),
            }
        }
        out
    }

    /// Exact channel `exp(t · apply)` when every generator is a Pauli string and
    /// there is no perturbation; `None` otherwise.
    pub fn pauli_channel(&self, t: f64, rho: &CMatrix) -> Option<CMatrix> {
        if self.h_check.is_some() || self.lindblads.iter().any(|l| l.pauli.is_none()) {
            return None;
        }
        // D[P] has eigenvalue −2 on the part of ρ anticommuting with P; Pauli
        // channels commute, so they compose in any order.
        let p = 0.5 * (1.0 - (-2.0 * self.gamma * t).exp());
        let mut rho = rho.clone();
        let mut spare = CMatrix::zeros(rho.nrows(), rho.ncols());
        for l in &self.lindblads {
            l.pauli.expect("checked above").mix_into(1.0 - p, p, &rho, &mut spare);
            std::mem::swap(&mut rho, &mut spare);
        }
        Some(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_gamma() {
        assert!(NoiseModel::new(1, None, vec![], -0.1).is_err());
        assert!(NoiseModel::new(1, None, vec![], f64::NAN).is_err());
    }

    #[test]
    fn normalizes_to_unit_norm() {
        let raw = Operator::from(PauliString::z([0])).scaled(3.0);
        let m = NoiseModel::new(1, Some(raw.clone()), vec![raw], 0.5).unwrap();
        assert_eq!(m.normalization().0, Some(3.0));
        assert_eq!(m.normalization().1, &[3.0]);
        assert!((m.lindblads()[0].operator().operator_norm(1) - 1.0).abs() < 1e-12);
        assert!(m.lindblads()[0].pauli().is_some());
    }

    #[test]
    fn zero_operator_rejected() {
        let zero = Operator::Pauli(PauliSum::single(0.0, PauliString::x([0])));
        assert!(NoiseModel::new(1, None, vec![zero], 1.0).is_err());
    }

    #[test]
    fn dense_and_pauli_dissipators_agree() {
        let p = PauliString {
            x_mask: 0b01,
            z_mask: 0b11,
        };
        let dense = Lindblad::new(Operator::Dense(p.to_dense(2)), 2);
        let fast = Lindblad::new(Operator::from(p), 2);
        let rho = CMatrix::from_fn(4, 4, |r, c| C64::new((r * 4 + c) as f64 * 0.1, r as f64 - c as f64));
        let diff = (dense.dissipate(&rho) - fast.dissipate(&rho)).norm();
        assert!(diff < 1e-13);
    }

    #[test]
    fn restriction_keeps_contained_components() {
        let m = NoiseModel::single_qubit_paulis(4, 0.1).unwrap();
        let r = m.restricted_to(0b0110);
        assert_eq!(r.lindblads().len(), 4);
        assert!(r.lindblads().iter().all(|l| l.support() & !0b0110 == 0));
    }
}
