//! Geometry of the two-dimensional harmonic oscillator in the holomorphic
//! (Bargmann) representation.

pub mod error;
pub mod fock;
pub mod geometry;
pub mod dynamics;
pub mod divisor;
pub mod coherent;
pub mod cli;

pub use error::{Error, Result};
