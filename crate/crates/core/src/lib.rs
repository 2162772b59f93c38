//! Steady-state sideband cooling of two coupled mechanical resonators
//! through one optomechanical cavity, and of longer resonator chains.
//!
//! Rates are normalized to the dressed frequency of the first resonator.
//! Four independent routes give the final phonon numbers of the two-mode
//! system: a determinant closed form ([`closedform`]), spectral quadrature
//! ([`spectra`]), a Lyapunov solve ([`linearize::steady_covariance`]) and the
//! reduced adiabatic model ([`adiabatic`]).

pub mod adiabatic;
pub mod chain;
pub mod config;
pub mod closedform;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod linearize;
pub mod output;
pub mod par;
pub mod params;
pub mod presets;
pub mod quadrature;
pub mod result;
pub mod spectra;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use result::{CoolingResult, Method};
