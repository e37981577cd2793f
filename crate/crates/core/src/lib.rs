//! Simulation engines for testing whether a stroboscopic simulation of an
//! intrinsically fault-tolerant system keeps its fault tolerance.
//!
//! - [`lattice`]: toric-code geometry, Pauli chains, syndromes and homology.
//! - [`exact`]: dense small-system dynamics (master equation and noisy
//!   product-formula channel) for the k = 2 toric code.
//! - [`anyon_mc`]: large-lattice stochastic defect walks with homology
//!   tracking.
//! - [`double`]: S3 flux anyons with braiding, fusion, noise and a pair sweeper.
//! - [`planner`]: step-size error budget for stroboscopic simulation.
//! - [`stats`]: binomial confidence intervals shared by the Monte Carlo engines.

pub mod anyon_mc;
pub mod double;
pub mod exact;
pub mod lattice;
pub mod planner;
pub mod stats;
