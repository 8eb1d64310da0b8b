//! Pseudo-spectral simulation of the defocusing energy-critical wave equation
//! `u_tt - Δu + |u|^{4/(d-2)} u = 0` on tori of dimension 3 to 5 with
//! randomized initial data, together with the Monte Carlo and deterministic
//! checks that go with it.

pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod propagators;
pub mod randomization;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
