//! Intrusive stochastic Galerkin schemes built on Haar-type wavelet systems
//! for hyperbolic conservation laws with Lipschitz-continuous flux.
//!
//! The crate is organised bottom-up:
//!
//! - [`basis`]: Haar-type matrices and their wavelet systems on [0, 1].
//! - [`algebra`]: Galerkin tensors, spectral transforms and closed-form
//!   nonlinear gPC operations with their Jacobians.
//! - [`models`]: the four stochastic Galerkin systems and experiment presets.
//! - [`solver`]: CWENO3 / local Lax-Friedrichs / SSPRK3 finite volumes.
//! - [`reference`]: exact and sampled reference solutions and error metrics.
//! - [`config`], [`experiment`], [`output`]: run configuration, orchestration
//!   and CSV output used by the `haarsg` binary.

pub mod algebra;
pub mod basis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod models;
pub mod output;
pub mod quadrature;
pub mod reference;
pub mod solver;

pub use algebra::{GalerkinTensor, ModeVector, SpectrumVector};
pub use basis::{BasisKind, HaarTypeBasis};
pub use error::{Error, Result};
