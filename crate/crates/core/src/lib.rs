//! Simulation and cheating-bias analysis for quantum coin tossing and
//! random bit-string generation over a depolarizing qubit channel.

pub mod acceptance;
pub mod adversary;
pub mod error;
pub mod harness;
pub mod json;
pub mod protocol;
pub mod qstate;
pub mod rng;

pub use error::{Error, Result};
