//! pilotwave: a quantum-hydrodynamic laboratory.
//!
//! The crate solves the time-dependent Schrödinger equation on periodic and
//! dirichlet grids, integrates guidance-equation (pilot-wave) trajectory
//! ensembles, and quantifies the hydrodynamic bookkeeping that connects the
//! two pictures: the quantum potential, stationarity/dissipation residuals of
//! the phase flow, equivariance of transported ensembles, the uncertainty
//! decomposition, and the perturbation-energy functional. A classical
//! companion module integrates Hamilton flows with variational (tangent)
//! dynamics, Lyapunov-type growth exponents, and stability verdicts, so
//! quantum and classical stability statements can be compared side by side.
//!
//! Start with the `examples/` directory for runnable, end-to-end tours; the
//! `pilotwave` binary drives the same machinery from TOML scenario configs.

pub mod bohm;
pub mod classical;
pub mod config;
pub mod diagnostics;
pub mod field;
pub mod grid;
pub mod ops;
pub mod potential;
pub mod qhdf;
pub mod rng;
pub mod run;
pub mod spectral;
pub mod states;
pub mod tdse;
pub mod tolerances;
pub mod units;
