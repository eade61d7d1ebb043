//! Core library for surge-distance surrogate modelling: probabilistic neural
//! networks, deep ensembles, and pool-based active learning over synthetic
//! pump operating data.
//!
//! Everything is deterministic given explicit seeds; no global RNG state is
//! consulted anywhere.

pub mod active_learning;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod nnet;
pub mod pump_data;
pub mod seed;

pub use error::{Error, Result};
