//! Rate-loss bounds for secret-key agreement over pure-loss optical
//! channels, together with device-limited key rates of decoy-state BB84
//! and Gaussian-modulated coherent-state (GG02) QKD.
//!
//! Rates are in bits per channel use throughout.

pub mod bounds;
pub mod config;
mod dd;
pub mod entropy;
pub mod error;
pub mod gaussian;
pub mod optimize;
pub mod protocols;
pub mod sweep;

pub use error::{Error, Result};
