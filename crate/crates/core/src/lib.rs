//! Discovery of stochastic differential equations driven by Brownian
//! and isotropic α-stable Lévy noise from one-step snapshot data.
//!
//! The pipeline turns `(Z, X)` snapshot pairs into three regression
//! problems via nonlocal Kramers–Moyal estimators (jump measure, drift,
//! diffusion), then searches for symbolic models of each with genetic
//! programming whose individuals are sparse linear combinations of
//! expression trees.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod discovery;
pub mod evolution;
pub mod expr;
pub mod km;
pub mod linalg;
pub mod math;
mod parallel;
pub mod quadrature;
pub mod regression;
pub mod rng;
pub mod sde;

pub use error::Error;
