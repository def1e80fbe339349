//! Pulsed cooling of a mechanical mirror in linearized cavity optomechanics.
//!
//! A chirped (sech amplitude, tanh frequency) modulation of the
//! cavity-mirror coupling swaps the thermal fluctuations of the mirror into
//! the cavity, where they leak away. This crate propagates the second
//! moments of the fluctuations, reconstructs the laser drive that realizes the
//! pulse, checks the engine against the closed-form rotating-wave solution and
//! runs the parameter studies around it.

pub mod app;
pub mod config;
pub mod covariance;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numerics;
pub mod output;
pub mod rwa;

pub use error::{Error, Result};
