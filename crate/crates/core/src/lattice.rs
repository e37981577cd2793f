//! Toric lattice geometry and the Z2 chain algebra that Pauli errors live in.
//!
//! Coordinates are periodic in both directions. Vertex `(x, y)` and face
//! `(x, y)` are both indexed `y * k + x`. A horizontal edge `(x, y, h)` joins
//! vertex `(x, y)` to `(x + 1, y)`; a vertical edge `(x, y, v)` joins `(x, y)`
//! to `(x, y + 1)`. Horizontal edges take indices `0..k²` and vertical edges
//! `k²..2k²`, each block in `y * k + x` order.
//!
//! Face `(x, y)` is bounded by `(x, y, h)`, `(x, y + 1, h)`, `(x, y, v)` and
//! `(x + 1, y, v)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice size k = {0} is invalid, k must be at least 2")]
    InvalidSize(usize),
    #[error("vertex index {index} out of range for {count} vertices")]
    InvalidVertex { index: usize, count: usize },
    #[error("face index {index} out of range for {count} faces")]
    InvalidFace { index: usize, count: usize },
    #[error("edge index {index} out of range for {count} edges")]
    InvalidEdge { index: usize, count: usize },
    #[error("chain covers {got} edges but the lattice has {expected}")]
    ChainLength { expected: usize, got: usize },
    #[error("chain is not closed: {vertex_defects} vertex and {face_defects} face defects")]
    OpenChain { vertex_defects: usize, face_defects: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// An edge named by its base vertex and orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeCoord {
    pub x: usize,
    pub y: usize,
    pub orientation: Orientation,
}

impl EdgeCoord {
    pub fn h(x: usize, y: usize) -> Self {
        Self {
            x,
            y,
            orientation: Orientation::Horizontal,
        }
    }

    pub fn v(x: usize, y: usize) -> Self {
        Self {
            x,
            y,
            orientation: Orientation::Vertical,
        }
    }
}

/// Packed Z2 vector over a fixed number of positions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::zeros(len);
        for i in indices {
            set.toggle(i);
        }
        set
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        if self.get(i) != value {
            self.toggle(i);
        }
    }

    pub fn xor_assign(&mut self, other: &BitSet) {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Parity of the overlap with `other`.
    pub fn overlap_parity(&self, other: &BitSet) -> bool {
        assert_eq!(self.len, other.len, "bitset length mismatch");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

/// A Pauli error up to phase: an X-type and a Z-type Z2 chain over edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliChain {
    pub x_part: BitSet,
    pub z_part: BitSet,
}

impl PauliChain {
    pub fn identity(n_edges: usize) -> Self {
        Self {
            x_part: BitSet::zeros(n_edges),
            z_part: BitSet::zeros(n_edges),
        }
    }

    pub fn from_parts(x_part: BitSet, z_part: BitSet) -> Self {
        assert_eq!(x_part.len(), z_part.len(), "chain parts differ in length");
        Self { x_part, z_part }
    }

    pub fn z_only(z_part: BitSet) -> Self {
        let n = z_part.len();
        Self {
            x_part: BitSet::zeros(n),
            z_part,
        }
    }

    pub fn x_only(x_part: BitSet) -> Self {
        let n = x_part.len();
        Self {
            x_part,
            z_part: BitSet::zeros(n),
        }
    }

    pub fn n_edges(&self) -> usize {
        self.x_part.len()
    }

    pub fn is_identity(&self) -> bool {
        self.x_part.is_zero() && self.z_part.is_zero()
    }

    pub fn xor_assign(&mut self, other: &PauliChain) {
        self.x_part.xor_assign(&other.x_part);
        self.z_part.xor_assign(&other.z_part);
    }

    pub fn xor(&self, other: &PauliChain) -> PauliChain {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }
}

/// Defects ("particles") flagged by a chain: vertex defects come from the
/// Z-type part, face defects from the X-type part. Both lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DefectSet {
    pub vertex_defects: Vec<usize>,
    pub face_defects: Vec<usize>,
}

impl DefectSet {
    pub fn is_empty(&self) -> bool {
        self.vertex_defects.is_empty() && self.face_defects.is_empty()
    }

    /// Elementwise symmetric difference.
    pub fn symmetric_difference(&self, other: &DefectSet) -> DefectSet {
        fn symdiff(a: &[usize], b: &[usize]) -> Vec<usize> {
            let mut out: Vec<usize> = a
                .iter()
                .filter(|i| b.binary_search(i).is_err())
                .chain(b.iter().filter(|i| a.binary_search(i).is_err()))
                .copied()
                .collect();
            out.sort_unstable();
            out
        }
        DefectSet {
            vertex_defects: symdiff(&self.vertex_defects, &other.vertex_defects),
            face_defects: symdiff(&self.face_defects, &other.face_defects),
        }
    }
}

/// The four winding bits of a closed chain.
///
/// `wz_*` count Z-type edges on the primal seams; `wx_*` count X-type edges
/// on the dual seams (primal loops the dual chain must cross).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HomologyClass {
    pub wz_v: bool,
    pub wz_h: bool,
    pub wx_v: bool,
    pub wx_h: bool,
}

impl HomologyClass {
    pub fn is_trivial(&self) -> bool {
        !(self.wz_v || self.wz_h || self.wx_v || self.wx_h)
    }

    pub fn bits(&self) -> [bool; 4] {
        [self.wz_v, self.wz_h, self.wx_v, self.wx_h]
    }
}

/// Immutable k×k torus with all incidence maps precomputed.
#[derive(Debug, Clone)]
pub struct ToricLattice {
    k: usize,
    stars: Vec<[usize; 4]>,
    bounds: Vec<[usize; 4]>,
    edge_vertices: Vec<[usize; 2]>,
    edge_faces: Vec<[usize; 2]>,
    seam_v: BitSet,
    seam_h: BitSet,
    dual_seam_v: BitSet,
    dual_seam_h: BitSet,
}

impl ToricLattice {
    pub fn new(k: usize) -> Result<Self, LatticeError> {
        if k < 2 {
            return Err(LatticeError::InvalidSize(k));
        }
        let n = k * k;
        let site = |x: usize, y: usize| (y % k) * k + (x % k);
        let h = |x: usize, y: usize| site(x, y);
        let v = |x: usize, y: usize| n + site(x, y);

        let mut stars = Vec::with_capacity(n);
        let mut bounds = Vec::with_capacity(n);
        for y in 0..k {
            for x in 0..k {
                stars.push([h(x, y), h(x + k - 1, y), v(x, y), v(x, y + k - 1)]);
                bounds.push([h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)]);
            }
        }

        let mut edge_vertices = vec![[0; 2]; 2 * n];
        let mut edge_faces = vec![[0; 2]; 2 * n];
        for y in 0..k {
            for x in 0..k {
                edge_vertices[h(x, y)] = [site(x, y), site(x + 1, y)];
                edge_vertices[v(x, y)] = [site(x, y), site(x, y + 1)];
                // (x, y, h) is the lower side of face (x, y) and the upper side of (x, y - 1)
                edge_faces[h(x, y)] = [site(x, y), site(x, y + k - 1)];
                // (x, y, v) is the left side of face (x, y) and the right side of (x - 1, y)
                edge_faces[v(x, y)] = [site(x, y), site(x + k - 1, y)];
            }
        }

        let seam_v = BitSet::from_indices(2 * n, (0..k).map(|y| h(0, y)));
        let seam_h = BitSet::from_indices(2 * n, (0..k).map(|x| v(x, 0)));
        let dual_seam_v = BitSet::from_indices(2 * n, (0..k).map(|y| v(0, y)));
        let dual_seam_h = BitSet::from_indices(2 * n, (0..k).map(|x| h(x, 0)));

        Ok(Self {
            k,
            stars,
            bounds,
            edge_vertices,
            edge_faces,
            seam_v,
            seam_h,
            dual_seam_v,
            dual_seam_h,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_edges(&self) -> usize {
        2 * self.k * self.k
    }

    pub fn n_vertices(&self) -> usize {
        self.k * self.k
    }

    pub fn n_faces(&self) -> usize {
        self.k * self.k
    }

    pub fn vertex_index(&self, x: usize, y: usize) -> usize {
        (y % self.k) * self.k + (x % self.k)
    }

    pub fn site_coords(&self, index: usize) -> (usize, usize) {
        (index % self.k, index / self.k)
    }

    pub fn edge_index(&self, e: EdgeCoord) -> usize {
        let base = self.vertex_index(e.x, e.y);
        match e.orientation {
            Orientation::Horizontal => base,
            Orientation::Vertical => self.k * self.k + base,
        }
    }

    pub fn edge_coord(&self, index: usize) -> EdgeCoord {
        let n = self.k * self.k;
        let (orientation, base) = if index < n {
            (Orientation::Horizontal, index)
        } else {
            (Orientation::Vertical, index - n)
        };
        let (x, y) = self.site_coords(base);
        EdgeCoord { x, y, orientation }
    }

    /// The four edges incident on vertex `s`.
    pub fn star(&self, s: usize) -> Result<[usize; 4], LatticeError> {
        self.stars.get(s).copied().ok_or(LatticeError::InvalidVertex {
            index: s,
            count: self.n_vertices(),
        })
    }

    /// The four edges bordering face `p`.
    pub fn bound(&self, p: usize) -> Result<[usize; 4], LatticeError> {
        self.bounds.get(p).copied().ok_or(LatticeError::InvalidFace {
            index: p,
            count: self.n_faces(),
        })
    }

    pub fn star_set(&self, s: usize) -> Result<BitSet, LatticeError> {
        Ok(BitSet::from_indices(self.n_edges(), self.star(s)?))
    }

    pub fn bound_set(&self, p: usize) -> Result<BitSet, LatticeError> {
        Ok(BitSet::from_indices(self.n_edges(), self.bound(p)?))
    }

    /// Endpoint vertices of an edge.
    #[inline]
    pub fn edge_vertices(&self, e: usize) -> [usize; 2] {
        self.edge_vertices[e]
    }

    /// The two faces an edge separates.
    #[inline]
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        self.edge_faces[e]
    }

    /// Horizontal edges at x = 0; a Z-type loop winding in x crosses it once.
    pub fn seam_v(&self) -> &BitSet {
        &self.seam_v
    }

    /// Vertical edges at y = 0; a Z-type loop winding in y crosses it once.
    pub fn seam_h(&self) -> &BitSet {
        &self.seam_h
    }

    /// Vertical edges at x = 0, the reference cut for X-type chains winding in x.
    pub fn dual_seam_v(&self) -> &BitSet {
        &self.dual_seam_v
    }

    /// Horizontal edges at y = 0, the reference cut for X-type chains winding in y.
    pub fn dual_seam_h(&self) -> &BitSet {
        &self.dual_seam_h
    }

    fn check_chain(&self, chain: &PauliChain) -> Result<(), LatticeError> {
        if chain.n_edges() != self.n_edges() {
            return Err(LatticeError::ChainLength {
                expected: self.n_edges(),
                got: chain.n_edges(),
            });
        }
        Ok(())
    }

    pub fn syndrome(&self, chain: &PauliChain) -> Result<DefectSet, LatticeError> {
        self.check_chain(chain)?;
        let odd = |edges: &[usize; 4], part: &BitSet| edges.iter().filter(|&&e| part.get(e)).count() % 2 == 1;
        let vertex_defects = self
            .stars
            .iter()
            .enumerate()
            .filter(|(_, star)| odd(star, &chain.z_part))
            .map(|(s, _)| s)
            .collect();
        let face_defects = self
            .bounds
            .iter()
            .enumerate()
            .filter(|(_, bound)| odd(bound, &chain.x_part))
            .map(|(p, _)| p)
            .collect();
        Ok(DefectSet {
            vertex_defects,
            face_defects,
        })
    }

    /// Seam parities of a chain, without checking that it is closed.
    pub fn winding_parities(&self, chain: &PauliChain) -> HomologyClass {
        HomologyClass {
            wz_v: chain.z_part.overlap_parity(&self.seam_v),
            wz_h: chain.z_part.overlap_parity(&self.seam_h),
            wx_v: chain.x_part.overlap_parity(&self.dual_seam_v),
            wx_h: chain.x_part.overlap_parity(&self.dual_seam_h),
        }
    }

    pub fn homology_class(&self, chain: &PauliChain) -> Result<HomologyClass, LatticeError> {
        let defects = self.syndrome(chain)?;
        if !defects.is_empty() {
            return Err(LatticeError::OpenChain {
                vertex_defects: defects.vertex_defects.len(),
                face_defects: defects.face_defects.len(),
            });
        }
        Ok(self.winding_parities(chain))
    }

    /// Periodic Manhattan distance between two sites (vertices or faces).
    pub fn torus_distance(&self, a: usize, b: usize) -> usize {
        let k = self.k;
        let (ax, ay) = self.site_coords(a);
        let (bx, by) = self.site_coords(b);
        let dx = ax.abs_diff(bx);
        let dy = ay.abs_diff(by);
        dx.min(k - dx) + dy.min(k - dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let l = ToricLattice::new(2).unwrap();
        assert_eq!((l.n_edges(), l.n_vertices(), l.n_faces()), (8, 4, 4));
        assert_eq!(ToricLattice::new(4).unwrap().n_edges(), 32);
        assert_eq!(ToricLattice::new(1).unwrap_err(), LatticeError::InvalidSize(1));
        assert_eq!(ToricLattice::new(0).unwrap_err(), LatticeError::InvalidSize(0));
    }

    #[test]
    fn star_of_origin_at_k2() {
        let l = ToricLattice::new(2).unwrap();
        let mut got = l.star(0).unwrap().to_vec();
        got.sort_unstable();
        // edges touching (0,0) enumerated straight from the coordinate convention
        let mut want: Vec<usize> = (0..l.n_edges()).filter(|&e| l.edge_vertices(e).contains(&0)).collect();
        want.sort_unstable();
        assert_eq!(got, want);
        let mut named: Vec<usize> = [
            EdgeCoord::h(0, 0),
            EdgeCoord::h(1, 0),
            EdgeCoord::v(0, 0),
            EdgeCoord::v(0, 1),
        ]
        .into_iter()
        .map(|e| l.edge_index(e))
        .collect();
        named.sort_unstable();
        assert_eq!(got, named);
    }

    #[test]
    fn incidence_counts() {
        for k in 2..=6 {
            let l = ToricLattice::new(k).unwrap();
            let mut star_hits = vec![0; l.n_edges()];
            let mut bound_hits = vec![0; l.n_edges()];
            for s in 0..l.n_vertices() {
                let star = l.star(s).unwrap();
                let mut dedup = star.to_vec();
                dedup.sort_unstable();
                dedup.dedup();
                assert_eq!(dedup.len(), 4);
                for e in star {
                    star_hits[e] += 1;
                }
            }
            for p in 0..l.n_faces() {
                let bound = l.bound(p).unwrap();
                let mut dedup = bound.to_vec();
                dedup.sort_unstable();
                dedup.dedup();
                assert_eq!(dedup.len(), 4);
                for e in bound {
                    bound_hits[e] += 1;
                }
            }
            assert!(star_hits.iter().all(|&c| c == 2));
            assert!(bound_hits.iter().all(|&c| c == 2));
        }
    }

    #[test]
    fn edge_faces_agree_with_bounds() {
        let l = ToricLattice::new(5).unwrap();
        for e in 0..l.n_edges() {
            for p in l.edge_faces(e) {
                assert!(l.bound(p).unwrap().contains(&e));
            }
        }
    }

    #[test]
    fn invalid_indices() {
        let l = ToricLattice::new(3).unwrap();
        assert!(matches!(l.star(9), Err(LatticeError::InvalidVertex { .. })));
        assert!(matches!(l.bound(9), Err(LatticeError::InvalidFace { .. })));
        let short = PauliChain::identity(3);
        assert!(matches!(l.syndrome(&short), Err(LatticeError::ChainLength { .. })));
    }

    #[test]
    fn stars_and_bounds_sum_to_zero() {
        let l = ToricLattice::new(4).unwrap();
        let mut acc = BitSet::zeros(l.n_edges());
        for s in 0..l.n_vertices() {
            acc.xor_assign(&l.star_set(s).unwrap());
        }
        assert!(acc.is_zero());
        for p in 0..l.n_faces() {
            acc.xor_assign(&l.bound_set(p).unwrap());
        }
        assert!(acc.is_zero());
    }

    #[test]
    fn commutation_certificate() {
        for k in 2..=6 {
            let l = ToricLattice::new(k).unwrap();
            for s in 0..l.n_vertices() {
                let star = l.star_set(s).unwrap();
                for p in 0..l.n_faces() {
                    assert!(!star.overlap_parity(&l.bound_set(p).unwrap()), "k={k} s={s} p={p}");
                }
            }
        }
    }

    #[test]
    fn single_edge_syndrome() {
        let l = ToricLattice::new(4).unwrap();
        for e in 0..l.n_edges() {
            let z = PauliChain::z_only(BitSet::from_indices(l.n_edges(), [e]));
            let d = l.syndrome(&z).unwrap();
            let mut ends = l.edge_vertices(e).to_vec();
            ends.sort_unstable();
            assert_eq!(d.vertex_defects, ends);
            assert!(d.face_defects.is_empty());

            let x = PauliChain::x_only(BitSet::from_indices(l.n_edges(), [e]));
            let d = l.syndrome(&x).unwrap();
            let mut faces = l.edge_faces(e).to_vec();
            faces.sort_unstable();
            assert_eq!(d.face_defects, faces);
            assert!(d.vertex_defects.is_empty());
        }
    }

    #[test]
    fn stabilizers_have_empty_syndrome() {
        let l = ToricLattice::new(3).unwrap();
        assert!(l.syndrome(&PauliChain::identity(18)).unwrap().is_empty());
        for p in 0..l.n_faces() {
            let c = PauliChain::z_only(l.bound_set(p).unwrap());
            assert!(l.syndrome(&c).unwrap().is_empty());
            assert!(l.homology_class(&c).unwrap().is_trivial());
        }
        for s in 0..l.n_vertices() {
            let c = PauliChain::x_only(l.star_set(s).unwrap());
            assert!(l.syndrome(&c).unwrap().is_empty());
            assert!(l.homology_class(&c).unwrap().is_trivial());
        }
    }

    #[test]
    fn z_star_is_not_a_z_stabilizer() {
        // a Z-type star flags the four neighbouring vertices
        let l = ToricLattice::new(4).unwrap();
        let c = PauliChain::z_only(l.star_set(5).unwrap());
        assert_eq!(l.syndrome(&c).unwrap().vertex_defects.len(), 4);
    }

    #[test]
    fn noncontractible_loops() {
        let l = ToricLattice::new(5).unwrap();
        let n = l.n_edges();
        let zh = PauliChain::z_only(BitSet::from_indices(
            n,
            (0..5).map(|x| l.edge_index(EdgeCoord::h(x, 2))),
        ));
        let c = l.homology_class(&zh).unwrap();
        assert_eq!(c.bits(), [true, false, false, false]);

        let zv = PauliChain::z_only(BitSet::from_indices(
            n,
            (0..5).map(|y| l.edge_index(EdgeCoord::v(3, y))),
        ));
        assert_eq!(l.homology_class(&zv).unwrap().bits(), [false, true, false, false]);

        // dual loop in x: vertical edges along a row of faces
        let xh = PauliChain::x_only(BitSet::from_indices(
            n,
            (0..5).map(|x| l.edge_index(EdgeCoord::v(x, 1))),
        ));
        assert_eq!(l.homology_class(&xh).unwrap().bits(), [false, false, true, false]);

        let xv = PauliChain::x_only(BitSet::from_indices(
            n,
            (0..5).map(|y| l.edge_index(EdgeCoord::h(4, y))),
        ));
        assert_eq!(l.homology_class(&xv).unwrap().bits(), [false, false, false, true]);
    }

    #[test]
    fn open_chain_rejected() {
        let l = ToricLattice::new(3).unwrap();
        let c = PauliChain::z_only(BitSet::from_indices(l.n_edges(), [0]));
        assert!(matches!(
            l.homology_class(&c),
            Err(LatticeError::OpenChain { vertex_defects: 2, .. })
        ));
    }

    #[test]
    fn torus_distance_wraps() {
        let l = ToricLattice::new(6).unwrap();
        assert_eq!(l.torus_distance(l.vertex_index(0, 0), l.vertex_index(5, 5)), 2);
        assert_eq!(l.torus_distance(l.vertex_index(0, 0), l.vertex_index(3, 3)), 6);
    }
}
