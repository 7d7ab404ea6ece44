//! Simulation and verification of a three-party protocol that implements two
//! consecutive controlled diagonal-block operations, `U` on Alice/Bob and `V`
//! on Alice/Charlie, using one shared GHZ state and three classical bits.
//!
//! * [`qstate`]: exact statevector math (gates, measurement, entropy).
//! * [`gates`]: named gates, block embeddings, the combined target `W`.
//! * [`locc`]: parties, wire ownership, classical channels and a
//!   deterministic scheduler.
//! * [`protocols`]: the GHZ protocol and the two-Bell-pair baseline with
//!   exhaustive branch verification.
//! * [`analysis`]: resource accounting and the entanglement lower-bound
//!   witness.
//! * [`cli`]: the `ghz-locc` command-line driver.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod gates;
pub mod locc;
pub mod protocols;
pub mod qstate;

pub use error::{Error, Result};
