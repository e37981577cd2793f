//! Operators on n-qubit registers and their action on vectors and matrices.
//!
//! Qubit `q` is bit `q` of a computational-basis index. Every action here
//! works on the full register without forming Kronecker products, so the
//! cost of applying a Pauli string to a density matrix is O(dim²) and a
//! dense m-qubit operator costs O(dim² · 2^m).

use nalgebra::{Complex, DMatrix, DVector};

use super::ExactError;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const MAX_QUBITS: usize = 12;

const I_POW: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

/// Hermitian Pauli product: X on `x_mask`, Z on `z_mask`, Y where both are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x_mask: u64,
    pub z_mask: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x_mask: 0, z_mask: 0 };

    pub fn x(qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x_mask: mask_of(qubits),
            z_mask: 0,
        }
    }

    pub fn z(qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x_mask: 0,
            z_mask: mask_of(qubits),
        }
    }

    pub fn y(qubits: impl IntoIterator<Item = usize>) -> Self {
        let m = mask_of(qubits);
        Self { x_mask: m, z_mask: m }
    }

    pub fn support(&self) -> u64 {
        self.x_mask | self.z_mask
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones()).is_multiple_of(2)
    }

    /// Matrix element `P[b ^ x_mask, b]`.
    #[inline]
    fn phase(&self, b: usize) -> C64 {
        let y = (self.x_mask & self.z_mask).count_ones();
        let sign = (b as u64 & self.z_mask).count_ones();
        I_POW[((y + 2 * sign) % 4) as usize]
    }

    pub fn to_dense(&self, n_qubits: usize) -> CMatrix {
        let dim = 1usize << n_qubits;
        let x = self.x_mask as usize;
        let mut m = CMatrix::zeros(dim, dim);
        for b in 0..dim {
            m[(b ^ x, b)] = self.phase(b);
        }
        m
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        let x = self.x_mask as usize;
        CVector::from_fn(v.len(), |r, _| self.phase(r ^ x) * v[r ^ x])
    }

    /// `out += coeff * P * m`
    fn add_left(&self, coeff: f64, m: &CMatrix, out: &mut CMatrix) {
        let dim = m.nrows();
        let x = self.x_mask as usize;
        for c in 0..m.ncols() {
            for r in 0..dim {
                out[(r, c)] += self.phase(r ^ x) * m[(r ^ x, c)] * coeff;
            }
        }
    }

    /// `out += coeff * m * P`
    fn add_right(&self, coeff: f64, m: &CMatrix, out: &mut CMatrix) {
        let x = self.x_mask as usize;
        for c in 0..m.ncols() {
            let ph = self.phase(c) * coeff;
            for r in 0..m.nrows() {
                out[(r, c)] += m[(r, c ^ x)] * ph;
            }
        }
    }

    /// `P m P`, which for a Hermitian Pauli is also `P m P†`.
    pub fn sandwich(&self, m: &CMatrix) -> CMatrix {
        let x = self.x_mask as usize;
        let n = m.nrows();
        CMatrix::from_fn(n, n, |r, c| self.phase(r ^ x) * m[(r ^ x, c ^ x)] * self.phase(c))
    }

    /// `out += coeff * P m P`, without temporaries.
    pub fn add_sandwich(&self, coeff: f64, m: &CMatrix, out: &mut CMatrix) {
        let x = self.x_mask as usize;
        let n = m.nrows();
        let sign = self.sign_table(n);
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        // the two phases multiply to (-1)^y · sign(r^x) · sign(c)
        let y = (self.x_mask & self.z_mask).count_ones();
        let base = if y.is_multiple_of(2) { coeff } else { -coeff };
        for c in 0..n {
            let sc = sign[c];
            let col = &src[(c ^ x) * n..(c ^ x) * n + n];
            let o = &mut dst[c * n..c * n + n];
            for r in 0..n {
                o[r] += col[r ^ x] * (base * sign[r ^ x] * sc);
            }
        }
    }

    /// `U m U†` for `U = cos θ − i sin θ P`, given `(cos θ, sin θ)`.
    pub fn rotate(&self, cos: f64, sin: f64, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        self.rotate_into(cos, sin, m, &mut out);
        out
    }

    /// Writes `U m U†` into `out`, which must have the shape of `m`. Uses
    /// `c²m + s²PmP + ics(mP − Pm)` in one pass.
    pub fn rotate_into(&self, cos: f64, sin: f64, m: &CMatrix, out: &mut CMatrix) {
        let x = self.x_mask as usize;
        let n = m.nrows();
        let ph: Vec<C64> = (0..n).map(|b| self.phase(b)).collect();
        let (cc, ss, ics) = (cos * cos, sin * sin, C64::new(0.0, cos * sin));
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for c in 0..n {
            let pc = ph[c];
            let col = &src[c * n..c * n + n];
            let colx = &src[(c ^ x) * n..(c ^ x) * n + n];
            let o = &mut dst[c * n..c * n + n];
            for r in 0..n {
                let prx = ph[r ^ x];
                let pm = prx * col[r ^ x];
                let mp = colx[r] * pc;
                let pmp = prx * colx[r ^ x] * pc;
                o[r] = col[r] * cc + pmp * ss + (mp - pm) * ics;
            }
        }
    }

    /// Writes `keep · m + flip · P m P` into `out`.
    pub fn mix_into(&self, keep: f64, flip: f64, m: &CMatrix, out: &mut CMatrix) {
        let x = self.x_mask as usize;
        let n = m.nrows();
        let sign = self.sign_table(n);
        let y = (self.x_mask & self.z_mask).count_ones();
        let base = if y.is_multiple_of(2) { flip } else { -flip };
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for c in 0..n {
            let sc = base * sign[c];
            let col = &src[c * n..c * n + n];
            let colx = &src[(c ^ x) * n..(c ^ x) * n + n];
            let o = &mut dst[c * n..c * n + n];
            for r in 0..n {
                o[r] = col[r] * keep + colx[r ^ x] * (sign[r ^ x] * sc);
            }
        }
    }

    /// `(-1)^(popcount(b & z))` for every basis index.
    fn sign_table(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|b| {
                if (b as u64 & self.z_mask).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    }

    /// `tr(rho P)`
    pub fn expectation(&self, rho: &CMatrix) -> C64 {
        let x = self.x_mask as usize;
        (0..rho.nrows()).map(|c| rho[(c, c ^ x)] * self.phase(c)).sum()
    }

    pub fn expectation_vec(&self, v: &CVector) -> C64 {
        let x = self.x_mask as usize;
        (0..v.len()).map(|r| v[r].conj() * self.phase(r ^ x) * v[r ^ x]).sum()
    }
}

fn mask_of(qubits: impl IntoIterator<Item = usize>) -> u64 {
    qubits.into_iter().fold(0u64, |m, q| {
        assert!(q < 64, "qubit index {q} exceeds mask width");
        m ^ (1 << q)
    })
}

/// Real linear combination of Pauli strings (Hermitian by construction).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    pub terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Self {
        Self { terms }
    }

    pub fn single(coeff: f64, p: PauliString) -> Self {
        Self {
            terms: vec![(coeff, p)],
        }
    }

    pub fn support(&self) -> u64 {
        self.terms.iter().fold(0, |m, (_, p)| m | p.support())
    }

    pub fn to_dense(&self, n_qubits: usize) -> CMatrix {
        let dim = 1usize << n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            m += p.to_dense(n_qubits) * C64::from(*c);
        }
        m
    }

    /// True when every pair of strings commutes, so the exponential factorizes.
    pub fn is_commuting(&self) -> bool {
        self.terms
            .iter()
            .enumerate()
            .all(|(i, (_, a))| self.terms[i + 1..].iter().all(|(_, b)| a.commutes_with(b)))
    }
}

/// Dense operator acting on a listed subset of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    qubits: Vec<usize>,
    matrix: CMatrix,
}

impl LocalOperator {
    pub fn new(qubits: Vec<usize>, matrix: CMatrix) -> Result<Self, ExactError> {
        let m = qubits.len();
        let side = 1usize << m;
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(ExactError::Shape(format!(
                "local operator on {m} qubits needs a {side}x{side} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != m {
            return Err(ExactError::Shape("repeated qubit in local operator".into()));
        }
        Ok(Self { qubits, matrix })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn support(&self) -> u64 {
        mask_of(self.qubits.iter().copied())
    }

    fn spread(&self) -> Vec<usize> {
        let m = self.qubits.len();
        (0..1usize << m)
            .map(|a| {
                (0..m)
                    .filter(|j| (a >> j) & 1 == 1)
                    .fold(0, |acc, j| acc | (1 << self.qubits[j]))
            })
            .collect()
    }

    fn rests(&self, dim: usize) -> impl Iterator<Item = usize> {
        let mask = self.support() as usize;
        (0..dim).filter(move |r| r & mask == 0)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            qubits: self.qubits.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn to_dense(&self, n_qubits: usize) -> CMatrix {
        let dim = 1usize << n_qubits;
        self.left_mul(&CMatrix::identity(dim, dim))
    }

    pub fn left_mul(&self, m: &CMatrix) -> CMatrix {
        let spread = self.spread();
        let side = spread.len();
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        let mut idx = vec![0usize; side];
        let mut tmp = vec![C64::new(0.0, 0.0); side];
        for rest in self.rests(m.nrows()) {
            for (i, s) in idx.iter_mut().zip(&spread) {
                *i = rest | s;
            }
            for c in 0..m.ncols() {
                for (t, &i) in tmp.iter_mut().zip(&idx) {
                    *t = m[(i, c)];
                }
                for a in 0..side {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..side {
                        acc += self.matrix[(a, b)] * tmp[b];
                    }
                    out[(idx[a], c)] = acc;
                }
            }
        }
        out
    }

    pub fn right_mul(&self, m: &CMatrix) -> CMatrix {
        let spread = self.spread();
        let side = spread.len();
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        let mut idx = vec![0usize; side];
        for rest in self.rests(m.ncols()) {
            for (i, s) in idx.iter_mut().zip(&spread) {
                *i = rest | s;
            }
            for b in 0..side {
                for r in 0..m.nrows() {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..side {
                        acc += m[(r, idx[a])] * self.matrix[(a, b)];
                    }
                    out[(r, idx[b])] = acc;
                }
            }
        }
        out
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        let as_matrix = CMatrix::from_column_slice(v.len(), 1, v.as_slice());
        let out = self.left_mul(&as_matrix);
        CVector::from_column_slice(out.as_slice())
    }
}

/// An operator in whichever representation is cheapest to apply.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Pauli(PauliSum),
    Local(LocalOperator),
    Dense(CMatrix),
}

impl From<PauliSum> for Operator {
    fn from(p: PauliSum) -> Self {
        Operator::Pauli(p)
    }
}

impl From<PauliString> for Operator {
    fn from(p: PauliString) -> Self {
        Operator::Pauli(PauliSum::single(1.0, p))
    }
}

impl From<LocalOperator> for Operator {
    fn from(l: LocalOperator) -> Self {
        Operator::Local(l)
    }
}

impl Operator {
    pub fn zero() -> Self {
        Operator::Pauli(PauliSum::default())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Operator::Pauli(p) => p.terms.iter().all(|(c, _)| *c == 0.0),
            Operator::Local(l) => l.matrix.iter().all(|z| z.norm() == 0.0),
            Operator::Dense(m) => m.iter().all(|z| z.norm() == 0.0),
        }
    }

    /// Bit mask of qubits the operator acts on nontrivially; dense operators
    /// report every qubit of the register.
    pub fn support(&self, n_qubits: usize) -> u64 {
        match self {
            Operator::Pauli(p) => p.support(),
            Operator::Local(l) => l.support(),
            Operator::Dense(_) => {
                if n_qubits >= 64 {
                    u64::MAX
                } else {
                    (1u64 << n_qubits) - 1
                }
            }
        }
    }

    pub fn to_dense(&self, n_qubits: usize) -> CMatrix {
        match self {
            Operator::Pauli(p) => p.to_dense(n_qubits),
            Operator::Local(l) => l.to_dense(n_qubits),
            Operator::Dense(m) => m.clone(),
        }
    }

    pub fn adjoint(&self) -> Operator {
        match self {
            Operator::Pauli(p) => Operator::Pauli(p.clone()),
            Operator::Local(l) => Operator::Local(l.adjoint()),
            Operator::Dense(m) => Operator::Dense(m.adjoint()),
        }
    }

    pub fn scaled(&self, s: f64) -> Operator {
        match self {
            Operator::Pauli(p) => Operator::Pauli(PauliSum::new(p.terms.iter().map(|(c, q)| (c * s, *q)).collect())),
            Operator::Local(l) => Operator::Local(LocalOperator {
                qubits: l.qubits.clone(),
                matrix: &l.matrix * C64::from(s),
            }),
            Operator::Dense(m) => Operator::Dense(m * C64::from(s)),
        }
    }

    /// `self * m`
    pub fn left_mul(&self, m: &CMatrix) -> CMatrix {
        match self {
            Operator::Pauli(p) => {
                let mut out = CMatrix::zeros(m.nrows(), m.ncols());
                for (c, s) in &p.terms {
                    s.add_left(*c, m, &mut out);
                }
                out
            }
            Operator::Local(l) => l.left_mul(m),
            Operator::Dense(d) => d * m,
        }
    }

    /// `m * self`
    pub fn right_mul(&self, m: &CMatrix) -> CMatrix {
        match self {
            Operator::Pauli(p) => {
                let mut out = CMatrix::zeros(m.nrows(), m.ncols());
                for (c, s) in &p.terms {
                    s.add_right(*c, m, &mut out);
                }
                out
            }
            Operator::Local(l) => l.right_mul(m),
            Operator::Dense(d) => m * d,
        }
    }

    /// `[self, m]`
    pub fn commutator(&self, m: &CMatrix) -> CMatrix {
        self.left_mul(m) - self.right_mul(m)
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        match self {
            Operator::Pauli(p) => {
                let mut out = CVector::zeros(v.len());
                for (c, s) in &p.terms {
                    out += s.apply_vec(v) * C64::from(*c);
                }
                out
            }
            Operator::Local(l) => l.apply_vec(v),
            Operator::Dense(d) => d * v,
        }
    }

    /// `tr(rho * self)`
    pub fn expectation(&self, rho: &CMatrix) -> C64 {
        match self {
            Operator::Pauli(p) => p.terms.iter().map(|(c, s)| s.expectation(rho) * *c).sum(),
            _ => self.left_mul(rho).trace(),
        }
    }

    pub fn expectation_vec(&self, v: &CVector) -> C64 {
        match self {
            Operator::Pauli(p) => p.terms.iter().map(|(c, s)| s.expectation_vec(v) * *c).sum(),
            _ => v.dotc(&self.apply_vec(v)),
        }
    }

    /// Largest singular value.
    pub fn operator_norm(&self, n_qubits: usize) -> f64 {
        match self {
            Operator::Pauli(p) if p.terms.len() == 1 => p.terms[0].0.abs(),
            Operator::Local(l) => max_singular_value(&l.matrix),
            _ => max_singular_value(&self.to_dense(n_qubits)),
        }
    }

    /// Returns the single Pauli string when the operator is `c * P`.
    pub fn as_single_pauli(&self) -> Option<(f64, PauliString)> {
        match self {
            Operator::Pauli(p) if p.terms.len() == 1 => Some(p.terms[0]),
            _ => None,
        }
    }
}

fn max_singular_value(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().fold(0.0f64, |a, &b| a.max(b))
}

/// `exp(-i * h * t)` for a Hermitian matrix, by eigendecomposition.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&lam| C64::from_polar(1.0, -lam * t)),
    ));
    v * phases * v.adjoint()
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}
