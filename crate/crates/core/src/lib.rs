//! Simulation complexity of open quantum dynamics.
//!
//! The crate estimates the dimension of an effective reservoir that lets a
//! system plus that reservoir evolve under a GKSL semigroup while reproducing
//! the true non-Markovian reduced dynamics to a chosen accuracy. Alongside
//! the closed-form estimate it provides the machinery to check the estimate on
//! small instances: Trotterized dynamics, the timeline reservoir network in
//! matrix-product form with its Schmidt spectra and truncations, an exactly
//! solvable qubit-in-a-band model, and GKSL fits of fixed reservoir size.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod complexity;
pub mod error;
pub mod exact_model;
pub mod fitting;
pub mod fixtures;
pub mod lindblad;
pub mod trotter_trn;

pub use algebra::{ComplexMatrix, C64};
pub use complexity::{ComplexityEstimate, HeatmapGrid, PhysicalParams};
pub use error::{Error, Result};
pub use lindblad::{GkslGenerator, Trajectory};
