//! Likely-bit-string quantum digital signatures.
//!
//! Hashing, the three-party protocol engine, a simulated key-generation
//! channel, the finite-size SNS model and the signature-rate optimizer.

pub mod bitcore;
pub mod channel_sim;
pub mod error;
pub mod lfsr_hash;
pub mod optimizer;
pub mod protocol;
pub mod security;
pub mod seed;
pub mod sns_model;

pub use error::{Error, Infeasibility, Result};
