//! Scalar D2Q9 multiple-relaxation-time lattice Boltzmann laboratory.
//!
//! The lattice scheme lives in [`lattice`]; [`reference`] holds the explicit
//! heat solver and the staggered damped-acoustic solver it is compared
//! against, and [`spectral`] computes the exact Fourier symbol of one lattice
//! step. [`experiments`] wires these into mesh sweeps and [`io`] handles
//! configuration files and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod field;
pub mod io;
pub mod lattice;
pub mod reference;
pub mod scaling;
pub mod spectral;

pub use error::{LabError, Result};
pub use field::ScalarField;
