//! Forward scattering, dark-soliton synthesis, long-time asymptotics and a
//! split-step solver for the defocusing nonlinear Schrödinger equation
//!
//!   i q_t + q_xx − 2(|q|² − 1) q = 0,   q → ±1 as x → ±∞.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cser;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod grid;
pub mod jost;
pub mod maps;
pub mod nsoliton;
pub mod potential;
pub mod quadrature;
pub mod spectrum;

pub use error::{Error, Result};
pub use maps::C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
