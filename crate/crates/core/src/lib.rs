//! Numerical laboratory for the Maxwell-Bloch top family
//! `x1' = b1 x2, x2' = b2 x1 x3, x3' = b3 x1 x2`.
//!
//! - [`model`]: parameters, vector field, first integrals and the SL(2,R)
//!   family of Hamilton-Poisson realizations.
//! - [`poly`], [`poisson`]: exact polynomial checks of the Poisson axioms.
//! - [`integrate`]: RK4, Dormand-Prince 5(4) and implicit midpoint with
//!   invariant-drift reporting.
//! - [`pendulum`]: reduction to the pendulum on level sets of `H0`.
//! - [`stability`]: equilibria, spectra, Lyapunov and energy-Casimir
//!   certificates, perturbation probes.
//! - [`g4`]: optimal control on the nilpotent group `G4` and its costate top.
//! - [`cli`]: the `mbtop` command-line front end.

pub mod cli;
pub mod error;
pub mod g4;
pub mod integrate;
pub mod model;
pub mod pendulum;
pub mod poisson;
pub mod poly;
pub mod stability;

pub use error::{Error, Result};
pub use model::{Params, Preset, Realization, RealizationBundle, State};
