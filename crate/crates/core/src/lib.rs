//! Simulation models for parametric downconversion seeded by multimode
//! thermal light.
//!
//! - [`gaussian`]: covariance blocks, loss and the PPT separability test.
//! - [`fock`]: exact truncated Fock-space evolution of one mode pair, used as
//!   the brute-force reference for all moment formulas.
//! - [`correlations`]: intensity-correlation index, noise reduction factor and
//!   their thresholds.
//! - [`ghost`]: fourth-order correlation maps, ghost imaging and ghost
//!   diffraction over a discrete transverse-momentum grid.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod correlations;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod ghost;

pub use error::{Error, Result};
