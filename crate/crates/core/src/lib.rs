//! Deformed k-photon Jaynes-Cummings model with a Kerr medium, Stark shift
//! and a coupling that oscillates as `gamma * cos(mu * t)`.
//!
//! Every coupling constant of the model is dressed by an intensity-dependent
//! function `f(n)`. The dynamics closes on Fock doublets `{|n, e>, |n+k, g>}`,
//! so the state is propagated doublet by doublet, either through the closed
//! form ([`dynamics`]) or through the Runge-Kutta oracle ([`oracle`]).
//!
//! ```
//! use jcm_core::{dynamics::{evolve_closed_form, ModelParams}, field, nonlinearity::Nonlinearity};
//! use jcm_core::observables::atomic_inversion;
//!
//! let params = ModelParams { mu: 0.1, ..ModelParams::default() };
//! let dist = field::coherent_distribution(25.0, 1e-12, params.k).unwrap();
//! let state = evolve_closed_form(&params, &Nonlinearity::sqrt_n(), &dist, 1.0).unwrap();
//! let w = atomic_inversion(&state);
//! assert!(w.abs() <= 1.0);
//! ```

pub mod dynamics;
pub mod error;
pub mod field;
pub mod nonlinearity;
pub mod observables;
pub mod oracle;
mod par;
pub mod scenario;

pub use error::{Error, Result};
