//! Quantum-jump trajectory simulation and Bayesian inference of a drive
//! detuning from photodetection click patterns.
//!
//! The crate covers the full pipeline: complex linear algebra on truncated
//! Fock spaces ([`quantum`]), construction of jump models for a driven
//! two-level atom and linear/non-linear optomechanical cavities ([`models`]),
//! Monte Carlo wave-function unravelling into click records ([`trajectory`]),
//! exact likelihoods and grid posteriors ([`inference`]), summary statistics
//! ([`stats`]), persistent trajectory libraries ([`library`]) and the
//! likelihood-free ABC rejection sampler with its fidelity harness ([`abc`]).

pub mod abc;
pub mod error;
pub mod inference;
pub mod krylov;
pub mod library;
pub mod models;
pub mod ode;
pub mod quad;
pub mod quantum;
pub mod spectral;
pub mod stats;
pub mod trajectory;

pub use error::{Error, Result};
pub use quantum::{Basis, DensityMatrix, Operator, StateVector};
