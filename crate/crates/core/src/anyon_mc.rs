//! Stochastic toric-code memory on large lattices.
//!
//! Errors are tracked as a cumulative [`PauliChain`]. Defects sit at vertices
//! (from the Z-type part) and faces (from the X-type part); each species
//! evolves independently by pair creation on defect-free edges, random hops
//! and annihilation on contact. Winding bits are flipped whenever a toggled
//! edge lies on a seam, so the homology class is known at every vacuum time
//! without recomputation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lattice::{DefectSet, HomologyClass, PauliChain, ToricLattice};
use crate::stats::RateEstimate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("parameter {field} = {value} must lie in [0, 1]")]
    Probability { field: &'static str, value: f64 },
    #[error("bias_radius must be at least 1")]
    BiasRadius,
    #[error("n_trials must be at least 1")]
    NoTrials,
    #[error("site {site} is out of range or already a defect")]
    BadSite { site: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCParams {
    /// Per eligible edge per step, for each species.
    pub p_create: f64,
    /// Per defect per step.
    pub p_hop: f64,
    /// Chance that a hop heads for the nearest other defect within `bias_radius`.
    pub bias_q: f64,
    pub bias_radius: usize,
    pub t_max: u64,
    pub seed: u64,
}

impl MCParams {
    pub fn validate(&self) -> Result<(), McError> {
        for (field, value) in [
            ("p_create", self.p_create),
            ("p_hop", self.p_hop),
            ("bias_q", self.bias_q),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(McError::Probability { field, value });
            }
        }
        if self.bias_radius < 1 {
            return Err(McError::BiasRadius);
        }
        Ok(())
    }

    /// Short stable digest of every field except the seed.
    pub fn fingerprint(&self) -> String {
        let canon = format!(
            "p_create={:?};p_hop={:?};bias_q={:?};bias_radius={};t_max={}",
            self.p_create, self.p_hop, self.bias_q, self.bias_radius, self.t_max
        );
        let digest = Sha256::digest(canon.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Which stabilizer a defect violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    /// Star defects, moved by Z-type edges.
    Vertex,
    /// Plaquette defects, moved by X-type edges.
    Face,
}

impl Species {
    const ALL: [Species; 2] = [Species::Vertex, Species::Face];

    fn idx(self) -> usize {
        self as usize
    }
}

/// Flattened neighbour tables for both species.
#[derive(Debug, Clone)]
pub struct McGeometry {
    lattice: ToricLattice,
    /// `[species][site]` → four `(edge, other site)`.
    hops: [Vec<[(u32, u32); 4]>; 2],
    /// `[species][edge]` → the two sites it joins.
    ends: [Vec<[u32; 2]>; 2],
    /// `[species][edge]` → bitmask of winding bits flipped by toggling it,
    /// in [`HomologyClass::bits`] order.
    seam_mask: [Vec<u8>; 2],
}

impl McGeometry {
    pub fn new(lattice: ToricLattice) -> Self {
        let n_sites = lattice.n_vertices();
        let n_edges = lattice.n_edges();
        let mut hops: [Vec<[(u32, u32); 4]>; 2] = [Vec::with_capacity(n_sites), Vec::with_capacity(n_sites)];
        let mut ends: [Vec<[u32; 2]>; 2] = [Vec::with_capacity(n_edges), Vec::with_capacity(n_edges)];
        let mut seam_mask = [vec![0u8; n_edges], vec![0u8; n_edges]];
        for e in 0..n_edges {
            let [a, b] = lattice.edge_vertices(e);
            ends[0].push([a as u32, b as u32]);
            let [a, b] = lattice.edge_faces(e);
            ends[1].push([a as u32, b as u32]);
            let bit = |on: bool, i: u8| if on { 1u8 << i } else { 0 };
            seam_mask[0][e] = bit(lattice.seam_v().get(e), 0) | bit(lattice.seam_h().get(e), 1);
            seam_mask[1][e] = bit(lattice.dual_seam_v().get(e), 2) | bit(lattice.dual_seam_h().get(e), 3);
        }
        for s in 0..n_sites {
            let other = |ends: &[[u32; 2]], e: usize| {
                let [a, b] = ends[e];
                if a as usize == s {
                    b
                } else {
                    a
                }
            };
            let star = lattice.star(s).expect("valid vertex");
            let bound = lattice.bound(s).expect("valid face");
            hops[0].push(star.map(|e| (e as u32, other(&ends[0], e))));
            hops[1].push(bound.map(|e| (e as u32, other(&ends[1], e))));
        }
        Self {
            lattice,
            hops,
            ends,
            seam_mask,
        }
    }

    pub fn lattice(&self) -> &ToricLattice {
        &self.lattice
    }
}

/// One defect species: occupancy, an unordered list for O(1) updates, and
/// the pending creation skip.
#[derive(Debug, Clone)]
struct Defects {
    occupied: Vec<bool>,
    list: Vec<u32>,
    slot: Vec<u32>,
    /// Step at which a defect last arrived at a site, to stop double hops.
    arrived: Vec<u64>,
    /// Edges left to pass over before the next creation attempt; drawn
    /// lazily on the first sweep.
    skip: Option<u64>,
}

impl Defects {
    fn new(n_sites: usize) -> Self {
        Self {
            occupied: vec![false; n_sites],
            list: Vec::new(),
            slot: vec![u32::MAX; n_sites],
            arrived: vec![u64::MAX; n_sites],
            skip: None,
        }
    }

    fn flip(&mut self, site: u32) {
        let s = site as usize;
        if self.occupied[s] {
            let i = self.slot[s] as usize;
            let last = self.list.pop().expect("occupied site is listed");
            if i < self.list.len() {
                self.list[i] = last;
                self.slot[last as usize] = i as u32;
            }
            self.slot[s] = u32::MAX;
            self.occupied[s] = false;
        } else {
            self.slot[s] = self.list.len() as u32;
            self.list.push(site);
            self.occupied[s] = true;
        }
    }
}

/// Mutable state of one trial.
#[derive(Debug, Clone)]
pub struct AnyonState<'g> {
    geom: &'g McGeometry,
    chain: PauliChain,
    defects: [Defects; 2],
    winding: u8,
    clock: u64,
    rng: ChaCha8Rng,
    toggles: Option<Vec<(Species, usize)>>,
    scratch: Vec<u32>,
}

impl<'g> AnyonState<'g> {
    /// Defect-free state with its own generator.
    pub fn vacuum(geom: &'g McGeometry, seed: u64) -> Self {
        let n_sites = geom.lattice.n_vertices();
        Self {
            geom,
            chain: PauliChain::identity(geom.lattice.n_edges()),
            defects: [Defects::new(n_sites), Defects::new(n_sites)],
            winding: 0,
            clock: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            toggles: None,
            scratch: Vec::new(),
        }
    }

    /// Keep a log of every toggled edge, for replay checks.
    pub fn record_toggles(mut self) -> Self {
        self.toggles = Some(Vec::new());
        self
    }

    pub fn toggles(&self) -> Option<&[(Species, usize)]> {
        self.toggles.as_deref()
    }

    /// Toggle the edge between two neighbouring defect-free sites.
    pub fn create_pair(&mut self, species: Species, edge: usize) -> Result<(), McError> {
        let i = species.idx();
        for site in self.geom.ends[i].get(edge).ok_or(McError::BadSite { site: edge })? {
            if self.defects[i].occupied[*site as usize] {
                return Err(McError::BadSite { site: *site as usize });
            }
        }
        self.toggle(species, edge as u32);
        Ok(())
    }

    pub fn chain(&self) -> &PauliChain {
        &self.chain
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn winding(&self) -> HomologyClass {
        let b = |i: u8| self.winding & (1 << i) != 0;
        HomologyClass {
            wz_v: b(0),
            wz_h: b(1),
            wx_v: b(2),
            wx_h: b(3),
        }
    }

    /// Cached defects as sorted lists.
    pub fn defects(&self) -> DefectSet {
        let sorted = |d: &Defects| {
            let mut v: Vec<usize> = d.list.iter().map(|&s| s as usize).collect();
            v.sort_unstable();
            v
        };
        DefectSet {
            vertex_defects: sorted(&self.defects[0]),
            face_defects: sorted(&self.defects[1]),
        }
    }

    pub fn defect_count(&self) -> usize {
        self.defects[0].list.len() + self.defects[1].list.len()
    }

    pub fn is_vacuum(&self) -> bool {
        self.defect_count() == 0
    }

    fn toggle(&mut self, species: Species, edge: u32) {
        let i = species.idx();
        let e = edge as usize;
        match species {
            Species::Vertex => self.chain.z_part.toggle(e),
            Species::Face => self.chain.x_part.toggle(e),
        }
        self.winding ^= self.geom.seam_mask[i][e];
        let [a, b] = self.geom.ends[i][e];
        self.defects[i].flip(a);
        self.defects[i].flip(b);
        if let Some(log) = &mut self.toggles {
            log.push((species, e));
        }
    }

    fn next_skip(&mut self, p: f64) -> u64 {
        if p <= 0.0 {
            u64::MAX
        } else if p >= 1.0 {
            0
        } else {
            let u: f64 = self.rng.gen();
            ((1.0 - u).ln() / (-p).ln_1p()).floor().min(u64::MAX as f64) as u64
        }
    }

    fn create_phase(&mut self, species: Species, p: f64) {
        let i = species.idx();
        let n_edges = self.geom.ends[i].len() as u64;
        let mut pos = 0u64;
        loop {
            let skip = match self.defects[i].skip {
                Some(s) => s,
                None => self.next_skip(p),
            };
            if skip >= n_edges - pos {
                self.defects[i].skip = Some(skip - (n_edges - pos));
                return;
            }
            pos += skip;
            let e = pos as u32;
            let [a, b] = self.geom.ends[i][e as usize];
            if !self.defects[i].occupied[a as usize] && !self.defects[i].occupied[b as usize] {
                self.toggle(species, e);
            }
            pos += 1;
            self.defects[i].skip = Some(self.next_skip(p));
        }
    }

    /// Nearest other defect within `radius`, ties to the lowest site index.
    fn nearest_partner(&self, species: Species, from: u32, radius: usize) -> Option<u32> {
        let l = &self.geom.lattice;
        self.defects[species.idx()]
            .list
            .iter()
            .filter(|&&s| s != from)
            .map(|&s| (l.torus_distance(from as usize, s as usize), s))
            .filter(|&(d, _)| d <= radius)
            .min()
            .map(|(_, s)| s)
    }

    fn hop_phase(&mut self, species: Species, params: &MCParams) {
        let i = species.idx();
        if self.defects[i].list.is_empty() || params.p_hop <= 0.0 {
            return;
        }
        let stamp = self.clock;
        // list order is a deterministic function of history, so no sort is needed
        let mut snapshot = std::mem::take(&mut self.scratch);
        snapshot.clear();
        snapshot.extend_from_slice(&self.defects[i].list);
        for &site in &snapshot {
            let s = site as usize;
            if !self.defects[i].occupied[s] || self.defects[i].arrived[s] == stamp {
                continue;
            }
            if params.p_hop < 1.0 && self.rng.gen::<f64>() >= params.p_hop {
                continue;
            }
            let options = self.geom.hops[i][s];
            let mut choice = None;
            if params.bias_q > 0.0 && self.rng.gen::<f64>() < params.bias_q {
                if let Some(target) = self.nearest_partner(species, site, params.bias_radius) {
                    let l = &self.geom.lattice;
                    let here = l.torus_distance(s, target as usize);
                    choice = options
                        .iter()
                        .filter(|(_, nb)| l.torus_distance(*nb as usize, target as usize) < here)
                        .min_by_key(|(e, _)| *e)
                        .copied();
                }
            }
            let (edge, to) = choice.unwrap_or_else(|| options[self.rng.gen_range(0..4)]);
            self.toggle(species, edge);
            if self.defects[i].occupied[to as usize] {
                self.defects[i].arrived[to as usize] = stamp;
            }
        }
        self.scratch = snapshot;
    }

    /// One sweep: creation, then hops, for each species in turn.
    pub fn step(&mut self, params: &MCParams) {
        self.clock += 1;
        for species in Species::ALL {
            self.create_phase(species, params.p_create);
            self.hop_phase(species, params);
        }
    }

    /// Greedy closest-pair matching along shortest torus paths. Returns the
    /// number of pairs joined.
    pub fn force_cleanup(&mut self) -> usize {
        let mut joined = 0;
        for species in Species::ALL {
            let i = species.idx();
            while self.defects[i].list.len() >= 2 {
                let mut sites = self.defects[i].list.clone();
                sites.sort_unstable();
                let l = &self.geom.lattice;
                let mut best = (usize::MAX, 0, 0);
                for (n, &a) in sites.iter().enumerate() {
                    for &b in &sites[n + 1..] {
                        let d = l.torus_distance(a as usize, b as usize);
                        if d < best.0 {
                            best = (d, a, b);
                        }
                    }
                }
                let (_, mut cur, target) = best;
                while cur != target {
                    let here = self.geom.lattice.torus_distance(cur as usize, target as usize);
                    let (edge, next) = self.geom.hops[i][cur as usize]
                        .iter()
                        .filter(|(_, nb)| self.geom.lattice.torus_distance(*nb as usize, target as usize) < here)
                        .min_by_key(|(e, _)| *e)
                        .copied()
                        .expect("a neighbour is always closer on the torus");
                    self.toggle(species, edge);
                    cur = next;
                }
                joined += 1;
            }
        }
        joined
    }
}

/// Result of one memory trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub failed: bool,
    /// Step at which the failure was decided; `t_max` when decided by cleanup.
    pub failure_time: Option<u64>,
    pub max_defect_count: usize,
    /// Defects were still present at `t_max` and had to be paired off.
    pub forced_cleanup: bool,
}

/// Runs a prepared state to `t_max`, failing at the first vacuum time with a
/// nontrivial winding.
pub fn run_from(state: &mut AnyonState<'_>, params: &MCParams) -> TrialOutcome {
    let mut max_defects = state.defect_count();
    while state.clock < params.t_max {
        if state.is_vacuum() && params.p_create <= 0.0 {
            break;
        }
        state.step(params);
        max_defects = max_defects.max(state.defect_count());
        if state.winding != 0 && state.is_vacuum() {
            return TrialOutcome {
                failed: true,
                failure_time: Some(state.clock),
                max_defect_count: max_defects,
                forced_cleanup: false,
            };
        }
    }
    let forced = !state.is_vacuum();
    if forced {
        state.force_cleanup();
    }
    let failed = state.winding != 0;
    TrialOutcome {
        failed,
        failure_time: failed.then_some(params.t_max.max(state.clock)),
        max_defect_count: max_defects,
        forced_cleanup: forced,
    }
}

/// One trial from vacuum with generator seed `params.seed`.
pub fn run_trial(geom: &McGeometry, params: &MCParams) -> TrialOutcome {
    let mut state = AnyonState::vacuum(geom, params.seed);
    run_from(&mut state, params)
}

/// Aggregated sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub k: usize,
    pub params_fingerprint: String,
    pub n_trials: u64,
    pub failures: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_failure_time: Option<f64>,
    pub forced_cleanups: u64,
}

/// Runs `n_trials` independent trials on the current rayon pool, trial `i`
/// seeded with `params.seed + i`.
pub fn logical_error_rate(k: usize, params: &MCParams, n_trials: u64) -> Result<McReport, McError> {
    params.validate()?;
    if n_trials == 0 {
        return Err(McError::NoTrials);
    }
    let lattice = ToricLattice::new(k).map_err(|_| McError::BadSite { site: k })?;
    let geom = McGeometry::new(lattice);
    let outcomes: Vec<TrialOutcome> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let p = MCParams {
                seed: params.seed.wrapping_add(i),
                ..*params
            };
            run_trial(&geom, &p)
        })
        .collect();
    Ok(summarize(k, params, &outcomes))
}

pub fn summarize(k: usize, params: &MCParams, outcomes: &[TrialOutcome]) -> McReport {
    let failures = outcomes.iter().filter(|o| o.failed).count() as u64;
    let rate = RateEstimate::from_counts(failures, outcomes.len() as u64);
    let times: Vec<u64> = outcomes.iter().filter_map(|o| o.failure_time).collect();
    McReport {
        k,
        params_fingerprint: params.fingerprint(),
        n_trials: rate.trials,
        failures,
        estimate: rate.estimate,
        ci_low: rate.ci_low,
        ci_high: rate.ci_high,
        mean_failure_time: (!times.is_empty()).then(|| times.iter().sum::<u64>() as f64 / times.len() as f64),
        forced_cleanups: outcomes.iter().filter(|o| o.forced_cleanup).count() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MCParams {
        MCParams {
            p_create: 0.01,
            p_hop: 0.5,
            bias_q: 0.0,
            bias_radius: 1,
            t_max: 1000,
            seed: 7,
        }
    }

    fn geom(k: usize) -> McGeometry {
        McGeometry::new(ToricLattice::new(k).unwrap())
    }

    #[test]
    fn validation() {
        assert!(params().validate().is_ok());
        assert!(MCParams { p_hop: 1.5, ..params() }.validate().is_err());
        assert!(MCParams {
            bias_radius: 0,
            ..params()
        }
        .validate()
        .is_err());
        assert_ne!(
            params().fingerprint(),
            MCParams {
                bias_q: 0.1,
                ..params()
            }
            .fingerprint()
        );
        assert_eq!(params().fingerprint(), MCParams { seed: 99, ..params() }.fingerprint());
    }

    #[test]
    fn quiet_vacuum_only_ticks() {
        let g = geom(4);
        let p = MCParams {
            p_create: 0.0,
            ..params()
        };
        let mut s = AnyonState::vacuum(&g, 1);
        for _ in 0..10 {
            s.step(&p);
        }
        assert_eq!(s.clock(), 10);
        assert!(s.chain().is_identity());
        assert!(!run_trial(&g, &p).failed);
    }

    #[test]
    fn cache_matches_recomputed_syndrome() {
        for k in [2, 3, 5, 8] {
            let g = geom(k);
            let p = MCParams {
                p_create: 0.02,
                bias_q: 0.3,
                bias_radius: 2,
                ..params()
            };
            let mut s = AnyonState::vacuum(&g, k as u64);
            for _ in 0..10_000 {
                s.step(&p);
                let d = s.defects();
                assert_eq!(d.vertex_defects.len() % 2, 0);
                assert_eq!(d.face_defects.len() % 2, 0);
                if s.clock().is_multiple_of(97) {
                    assert_eq!(d, g.lattice().syndrome(s.chain()).unwrap());
                }
                if s.is_vacuum() {
                    assert_eq!(s.winding(), g.lattice().homology_class(s.chain()).unwrap());
                }
            }
            assert_eq!(s.defects(), g.lattice().syndrome(s.chain()).unwrap());
        }
    }

    #[test]
    fn adjacent_pair_joins_under_full_bias() {
        let g = geom(6);
        let p = MCParams {
            p_create: 0.0,
            p_hop: 1.0,
            bias_q: 1.0,
            bias_radius: 3,
            ..params()
        };
        let mut s = AnyonState::vacuum(&g, 3);
        s.create_pair(Species::Vertex, 7).unwrap();
        assert_eq!(s.defect_count(), 2);
        s.step(&p);
        assert!(s.is_vacuum());
        assert!(s.winding().is_trivial());
    }

    #[test]
    fn create_pair_rejects_occupied() {
        let g = geom(4);
        let mut s = AnyonState::vacuum(&g, 0);
        s.create_pair(Species::Face, 0).unwrap();
        assert!(s.create_pair(Species::Face, 0).is_err());
        assert!(s.create_pair(Species::Face, 10_000).is_err());
    }

    #[test]
    fn cleanup_returns_to_vacuum() {
        let g = geom(8);
        let p = MCParams {
            p_create: 0.05,
            ..params()
        };
        let mut s = AnyonState::vacuum(&g, 11);
        for _ in 0..20 {
            s.step(&p);
        }
        assert!(!s.is_vacuum());
        s.force_cleanup();
        assert!(s.is_vacuum());
        assert_eq!(s.winding(), g.lattice().homology_class(s.chain()).unwrap());
    }

    #[test]
    fn deterministic_per_seed() {
        let g = geom(4);
        let p = MCParams {
            p_create: 0.05,
            t_max: 500,
            ..params()
        };
        let a: Vec<_> = (0..20).map(|i| run_trial(&g, &MCParams { seed: i, ..p })).collect();
        let b: Vec<_> = (0..20).map(|i| run_trial(&g, &MCParams { seed: i, ..p })).collect();
        assert_eq!(a, b);
        for o in &a {
            assert_eq!(o.failed, o.failure_time.is_some());
        }
    }

    #[test]
    fn zero_creation_rate_gives_zero_estimate() {
        let r = logical_error_rate(
            4,
            &MCParams {
                p_create: 0.0,
                ..params()
            },
            50,
        )
        .unwrap();
        assert_eq!((r.failures, r.estimate, r.ci_low), (0, 0.0, 0.0));
        assert!(r.ci_high > 0.0 && r.ci_high < 0.1);
        assert!(logical_error_rate(4, &params(), 0).is_err());
    }
}
