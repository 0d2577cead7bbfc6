//! Numerical laboratory for estimating the purity of a qubit from `N` copies.
//!
//! The crate has two halves. [`joint`] evaluates the optimal collective
//! measurement exactly: spin-block probabilities, multiplicities, and the
//! maximal prior-averaged fidelity. [`simkit`] and [`protocols`] simulate
//! separable strategies (tomography followed by an adapted von Neumann
//! measurement, and the greedy fixed-axis scheme) by Monte Carlo.
//! [`analysis`] collects pointwise diagnostics and scaling fits.

pub mod analysis;
pub mod error;
pub mod joint;
pub mod numeric;
pub mod prior;
pub mod protocols;
pub mod quadrature;
pub mod rng;
pub mod simkit;
pub mod special;
pub mod state;

pub use error::{Error, Result};
pub use prior::PurityPrior;
pub use state::{bures_distance, fidelity, BlochVector, PurityEstimate, UnitVector};
