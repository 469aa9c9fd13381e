//! Numerical laboratory for integral functionals `Y_t = int_{tD} phi(B_x) dx`
//! of stationary isotropic Gaussian fields.
//!
//! The crate covers the full pipeline: spectral measures and their
//! covariances, Hermite expansions of observables, a random-wave field
//! simulator, observation domains, the chaos variance theory, and a Monte
//! Carlo engine that checks Gaussian fluctuations and variance growth rates.

#![allow(clippy::excessive_precision)]

pub mod domain;
pub mod error;
pub mod experiment;
pub mod field;
pub mod hermite;
pub mod observable;
pub mod plot;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod variance;

pub use error::{Error, Result};
