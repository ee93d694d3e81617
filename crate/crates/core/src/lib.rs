//! Simulation and information-theoretic analysis of two driven-dissipative
//! coupled Kerr oscillators used as a reservoir for a stochastic input drive.
//!
//! The numerical modules are generic over the real scalar ([`Real`], `f32` or
//! `f64`); the aliases below fix `f64`, with `*32` variants for `f32`.

// Negated comparisons are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod drive;
pub mod error;
pub mod expctl;
pub mod fock;
pub mod info;
pub mod memory;
pub mod num;
pub mod params;
pub mod quantum;
pub mod response;
pub mod semiclassical;
pub mod simulator;

pub use drive::DriveSignal;
pub use error::{Error, Result};
pub use fock::FockCutoff;
pub use num::Real;
pub use params::Regime;
pub use quantum::ReadoutSample;

pub type SystemParams = params::SystemParams<f64>;
pub type SystemParams32 = params::SystemParams<f32>;
pub type DensityMatrix = quantum::DensityMatrix<f64>;
pub type DensityMatrix32 = quantum::DensityMatrix<f32>;
pub type OperatorMatrix = fock::OperatorMatrix<f64>;
pub type OperatorMatrix32 = fock::OperatorMatrix<f32>;
