//! Spectral and temporal two-photon correlations for a Gaussian-pumped,
//! sinc phase-matched biphoton source, with simulated instruments and
//! width extraction.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod instrument;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod reference;
pub mod transform;

pub use error::{Error, Result};
