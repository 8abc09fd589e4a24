//! Radiative decay of two-level atoms scattered by a resonant standing
//! light wave.
//!
//! The crate covers the adiabatic (Raman–Nath) solution in position space,
//! its diffraction-order decomposition, a direct integrator for the coupled
//! order equations including recoil and detuning, and the analysis used to
//! extract power-law tails and the suppression of Rabi oscillations.

pub mod analysis;
pub mod diffraction;
pub mod dynamics;
pub mod error;
pub mod ladder;
pub mod model;
pub mod output;
pub mod quadrature;
pub mod quasienergy;
pub mod special;

pub use error::{Error, Result};
pub use model::{ModelParams, SpatialGrid, TimeGrid};
