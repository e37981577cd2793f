//! Memory experiment: a logical anyon is carried once around a large loop
//! while noise creates wandering stray pairs, with or without the sweeper.
//!
//! The winding angle of the carried anyon around every stray is accumulated
//! move by move. When the loop closes, each stray it wound around `n` times is
//! braided `n` times, and the trial fails if the carried flux changed.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::group::S3Element;
use super::log::Event;
use super::{AnyonKind, ClassWeights, DoubleError, DoubleState, Site};
use crate::stats::RateEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    pub l: usize,
    pub p_pair: f64,
    pub radius: usize,
    pub n_trials: u64,
    pub seed: u64,
    pub class_weights: ClassWeights,
    /// Distance from the grid edge to the transport loop.
    pub margin: usize,
}

impl MemoryConfig {
    pub fn new(l: usize, p_pair: f64, radius: usize, n_trials: u64, seed: u64) -> Self {
        Self {
            l,
            p_pair,
            radius,
            n_trials,
            seed,
            class_weights: ClassWeights::default(),
            margin: 3,
        }
    }

    pub fn validate(&self) -> Result<(), DoubleError> {
        if self.l < 8 || self.margin < 1 || self.l < 2 * self.margin + 2 {
            return Err(DoubleError::InvalidSize(self.l));
        }
        if !(0.0..=1.0).contains(&self.p_pair) {
            return Err(DoubleError::InvalidProbability(self.p_pair));
        }
        if self.radius < 1 {
            return Err(DoubleError::InvalidRadius);
        }
        self.class_weights.validate()
    }

    /// Counterclockwise loop starting and ending at `(margin, margin)`.
    fn loop_path(&self) -> Vec<Site> {
        let (lo, hi) = (self.margin, self.l - 1 - self.margin);
        let mut p = Vec::new();
        p.extend((lo..hi).map(|x| Site::new(x, lo)));
        p.extend((lo..hi).map(|y| Site::new(hi, y)));
        p.extend((lo + 1..=hi).rev().map(|x| Site::new(x, hi)));
        p.extend((lo + 1..=hi).rev().map(|y| Site::new(lo, y)));
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub arm: String,
    pub failures: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub wrong_pairs: u64,
    /// Trials where the loop could not be closed within the step cap.
    pub incomplete: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub config: MemoryConfig,
    pub swept: ArmReport,
    pub unswept: ArmReport,
    pub cis_overlap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialResult {
    pub failed: bool,
    pub wrong_pairs: u64,
    pub incomplete: bool,
}

/// Winding angles of the carried anyon around each tracked anyon, fed from
/// the event log.
struct Winding {
    carrier: u64,
    carrier_at: Site,
    at: BTreeMap<u64, Site>,
    angle: BTreeMap<u64, f64>,
}

fn bearing(from: Site, to: Site) -> f64 {
    (to.y as f64 - from.y as f64).atan2(to.x as f64 - from.x as f64)
}

fn wrapped(d: f64) -> f64 {
    let d = d.rem_euclid(TAU);
    if d > TAU / 2.0 {
        d - TAU
    } else {
        d
    }
}

impl Winding {
    fn observe(&mut self, e: &Event) {
        match *e {
            Event::Create { ids, sites, anyon, .. } if anyon != AnyonKind::Logical => {
                for (id, s) in ids.into_iter().zip(sites) {
                    self.at.insert(id, s);
                    self.angle.insert(id, 0.0);
                }
            }
            Event::Move { id, from, to } if id == self.carrier => {
                for (k, &s) in &self.at {
                    *self.angle.get_mut(k).expect("tracked") += wrapped(bearing(to, s) - bearing(from, s));
                }
                self.carrier_at = to;
            }
            Event::Move { id, from, to } => {
                if let Some(a) = self.angle.get_mut(&id) {
                    *a += wrapped(bearing(self.carrier_at, to) - bearing(self.carrier_at, from));
                    self.at.insert(id, to);
                }
            }
            Event::Fuse {
                left, right, residual, ..
            } => {
                let site = self.at.get(&left).copied();
                for id in [left, right] {
                    self.at.remove(&id);
                    self.angle.remove(&id);
                }
                if let (Some(r), Some(s)) = (residual, site) {
                    self.at.insert(r, s);
                    self.angle.insert(r, 0.0);
                }
            }
            _ => {}
        }
    }
}

/// One trial; returns the result and the full event log.
pub fn run_memory_trial(cfg: &MemoryConfig, seed: u64, swept: bool) -> Result<(TrialResult, DoubleState), DoubleError> {
    cfg.validate()?;
    let path = cfg.loop_path();
    let start = path[0];
    let mut st = DoubleState::new(cfg.l, seed)?;
    let [carrier, _] = st.create_pair(
        S3Element::T12,
        start,
        Site::new(start.x - 1, start.y),
        AnyonKind::Logical,
    )?;
    let mut winding = Winding {
        carrier,
        carrier_at: start,
        at: BTreeMap::new(),
        angle: BTreeMap::new(),
    };
    let mut seen = st.events().len();
    let mut done = 0;
    let mut wrong_pairs = 0;
    let cap = 20 * path.len();
    for _ in 0..cap {
        if done == path.len() {
            break;
        }
        let next = path[(done + 1) % path.len()];
        if st.at(next).is_none() {
            st.move_anyon(carrier, next)?;
            done += 1;
        }
        st.noise_step(cfg.p_pair, &cfg.class_weights)?;
        if swept {
            wrong_pairs += st.sweep(cfg.radius)?.wrong_pairs as u64;
        }
        for e in &st.events()[seen..] {
            winding.observe(e);
        }
        seen = st.events().len();
    }
    for (&id, &theta) in &winding.angle {
        let n = (theta / TAU).round() as i64;
        for _ in 0..n.unsigned_abs() {
            st.braid_fluxes(carrier, id, n < 0)?;
        }
    }
    let incomplete = done < path.len();
    let failed = incomplete || st.anyon(carrier).map(|a| a.flux) != Some(S3Element::T12);
    Ok((
        TrialResult {
            failed,
            wrong_pairs,
            incomplete,
        },
        st,
    ))
}

fn arm(name: &str, results: &[TrialResult]) -> ArmReport {
    let failures = results.iter().filter(|r| r.failed).count() as u64;
    let rate = RateEstimate::from_counts(failures, results.len() as u64);
    ArmReport {
        arm: name.to_string(),
        failures,
        trials: rate.trials,
        estimate: rate.estimate,
        ci_low: rate.ci_low,
        ci_high: rate.ci_high,
        wrong_pairs: results.iter().map(|r| r.wrong_pairs).sum(),
        incomplete: results.iter().filter(|r| r.incomplete).count() as u64,
    }
}

/// Both arms over `n_trials` trials on the current rayon pool; trial `i`
/// of either arm uses seed `seed + i`.
pub fn braiding_memory_experiment(cfg: &MemoryConfig) -> Result<MemoryReport, DoubleError> {
    cfg.validate()?;
    let pairs: Result<Vec<(TrialResult, TrialResult)>, DoubleError> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            Ok((
                run_memory_trial(cfg, seed, true)?.0,
                run_memory_trial(cfg, seed, false)?.0,
            ))
        })
        .collect();
    let pairs = pairs?;
    let swept: Vec<_> = pairs.iter().map(|p| p.0).collect();
    let unswept: Vec<_> = pairs.iter().map(|p| p.1).collect();
    let (swept, unswept) = (arm("swept", &swept), arm("unswept", &unswept));
    let cis_overlap = swept.ci_low <= unswept.ci_high && unswept.ci_low <= swept.ci_high;
    Ok(MemoryReport {
        config: *cfg,
        swept,
        unswept,
        cis_overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_is_closed_and_counterclockwise() {
        let cfg = MemoryConfig::new(10, 0.0, 1, 1, 0);
        let p = cfg.loop_path();
        assert_eq!(p.len(), 4 * 3);
        for w in p.windows(2).chain([[p[p.len() - 1], p[0]].as_slice()]) {
            assert_eq!(w[0].manhattan(w[1]), 1);
        }
        let area2: i64 = (0..p.len())
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % p.len()]);
                a.x as i64 * b.y as i64 - b.x as i64 * a.y as i64
            })
            .sum();
        assert!(area2 > 0);
    }

    #[test]
    fn noiseless_trials_never_fail() {
        let r = braiding_memory_experiment(&MemoryConfig::new(12, 0.0, 2, 20, 1)).unwrap();
        assert_eq!((r.swept.failures, r.unswept.failures), (0, 0));
        assert!(MemoryConfig::new(6, 0.0, 2, 20, 1).validate().is_err());
    }

    #[test]
    fn enclosed_pair_cancels_but_single_member_does_not() {
        // a (13) pair parked inside the loop
        let cfg = MemoryConfig::new(12, 0.0, 1, 1, 0);
        let mut st = DoubleState::new(12, 0).unwrap();
        let [carrier, _] = st
            .create_pair(S3Element::T12, Site::new(3, 3), Site::new(2, 3), AnyonKind::Logical)
            .unwrap();
        let [first, second] = st
            .create_pair(S3Element::T13, Site::new(5, 5), Site::new(5, 6), AnyonKind::Logical)
            .unwrap();
        st.move_anyon(second, Site::new(6, 6)).unwrap();
        let mut w = Winding {
            carrier,
            carrier_at: Site::new(3, 3),
            at: BTreeMap::from([(first, Site::new(5, 5)), (second, Site::new(6, 6))]),
            angle: BTreeMap::from([(first, 0.0), (second, 0.0)]),
        };
        let path = cfg.loop_path();
        for i in 0..path.len() {
            w.observe(&Event::Move {
                id: carrier,
                from: path[i],
                to: path[(i + 1) % path.len()],
            });
        }
        assert_eq!((w.angle[&first] / TAU).round(), 1.0);
        assert_eq!((w.angle[&second] / TAU).round(), 1.0);
        let mut single = st.clone();
        single.braid_fluxes(carrier, first, false).unwrap();
        assert_eq!(single.anyon(carrier).unwrap().flux, S3Element::T23);
        st.braid_fluxes(carrier, first, false).unwrap();
        st.braid_fluxes(carrier, second, false).unwrap();
        assert_eq!(st.anyon(carrier).unwrap().flux, S3Element::T12);
        assert_eq!(st.total_flux(), S3Element::E);
    }
}
