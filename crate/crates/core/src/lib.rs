//! Photon-echo quantum memory theory: spectral transfer functions for
//! CRIB/GEM and AFC, comb dispersion analysis, and closed-form pulse-area
//! solutions, each paired with an independent numerical oracle.
//!
//! Frequencies are in units of the inhomogeneous width (`delta_in = 1`),
//! lengths enter through dimensionless optical depths.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod afc;
pub mod area;
pub mod cli;
pub mod error;
pub mod linear;
pub mod model;
pub mod oracle;
pub mod pulses;

pub use error::{Error, Result};
