//! Grand-canonical pressure of continuum particle systems with superstable,
//! tempered pair potentials under boundary conditions of growing density.
//!
//! The crate provides pair potentials and envelopes ([`potential`]), the box
//! and its partition ([`geometry`]), boundary configurations and external
//! fields ([`boundary`], [`field`]), analytic bounds and probes ([`bounds`]),
//! exact and Monte Carlo pressures ([`ensemble`]) and the experiment harness
//! ([`harness`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod bounds;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod potential;
pub mod quadrature;
pub mod rng;
pub mod table;

pub use error::{Error, Result};
