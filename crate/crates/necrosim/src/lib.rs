//! necrosim — stationary states, linear spectra, and interface evolution
//! for a two-interface annular tumor model.
//!
//! A necrotic core occupies the disc inside an inner interface `Γ_2`; living
//! tissue occupies the annulus between `Γ_2` and an outer interface `Γ_1`;
//! pressure and nutrient fields solve elliptic problems in the annulus and
//! drive the normal velocity of both interfaces. This crate provides:
//!
//! - [`specfun`]: modified Bessel functions `I_m`, `K_m` of integer order,
//!   with derivatives and exponentially scaled internal variants;
//! - [`stationary`]: radially symmetric stationary annuli — the critical
//!   nutrient threshold, the unique compatible parameter pair, the radial
//!   pressure/nutrient profiles, and certificates for the underlying
//!   monotonicity facts;
//! - [`spectral`]: truncated Fourier series on the circle (transforms,
//!   derivatives, norms, symmetry operations);
//! - [`annulus_solver`]: a variable-coefficient elliptic solver on the
//!   reference annulus for fields pulled back from perturbed geometries,
//!   plus per-mode closed-form oracle solutions on the round annulus;
//! - [`linearization`]: the Fourier-multiplier form of the linearized
//!   interface operator at a stationary annulus, and finite-difference
//!   probes of the full nonlinear map that validate it;
//! - [`evolution`]: semi-implicit time stepping of the coupled interface
//!   system with adaptive step control and explicit termination reasons;
//! - [`cli`]: the `necrosim` command-line frontend (configuration files,
//!   reports, batch sweeps, and plot-ready CSV output).
//!
//! Radii are ordered `R_1 > R_2 > 0` (outer first) throughout.

pub mod annulus_solver;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod linearization;
pub mod specfun;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};
