//! Entanglement-assisted secret sharing over qubit channels.
//!
//! The crate evaluates the deterministic and stochastic secret-sharing tasks
//! exactly for arbitrary two-qubit states, encodings and decoding
//! measurements, enumerates classical strategies, lower-bounds unassisted
//! qubit strategies by seesaw optimization, certifies (un)steerability of
//! two-qubit states with linear programs and simulates the photonic
//! apparatus (Jones calculus, finite statistics, tomography).
//!
//! It is `no_std` and needs only `alloc`. File formats, parallel drivers and
//! the command line tool live in the companion `secshare` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classical;
pub mod error;
pub mod optics;
pub mod protocol;
pub mod qmath;
pub mod rng;
pub mod seesaw;
pub mod states;
pub mod steering;

pub use error::{Error, Result};
pub use qmath::{CMat, CVec, HermEig, Subsystem, C64};
pub use states::{Bell, DensityMatrix, Outcome, Povm};
