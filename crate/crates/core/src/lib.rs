//! Magnus-expansion analysis of the Jaynes-Cummings model without the
//! rotating wave approximation.
//!
//! All quantities use `hbar = 1`; frequencies are angular.

pub mod cli;
pub mod error;
pub mod hilbert;
pub mod jc_model;
pub mod magnus;
pub mod observables;
pub mod propagator;
pub mod quadrature;

pub use error::{Error, Result};
pub use hilbert::{AtomLevel, ComplexMatrix, HilbertSpec, C64};
pub use jc_model::ModelParams;
