//! Frozen parameter sets shared by the acceptance suite, the CLI and benches.
//!
//! The numbers in the doc comments were recorded from the exact solver and the
//! default fit options (seed 1, 201 samples) when the fixtures were frozen.

use crate::error::Result;
use crate::exact_model::ExactModel;
use crate::lindblad::{uniform_grid, PseudomodeParams};

/// Accuracy used for every fixture estimate.
pub const EPSILON: f64 = 0.05;

/// Samples per fit target trajectory.
pub const FIT_SAMPLES: usize = 201;

/// Seed for the fixed-size reservoir fits.
pub const FIT_SEED: u64 = 1;

/// Residual floor for a two-level reservoir on [`high_complexity`].
///
/// Recorded embedding mse 2.5e-2 on the high fixture against 9.0e-4 on
/// the low one.
pub const HIGH_RESIDUAL_FLOOR: f64 = 1e-2;

/// A qubit in a named band bath together with its sampling window.
#[derive(Debug, Clone)]
pub struct ExactFixture {
    pub name: &'static str,
    pub model: ExactModel,
    pub t_max: f64,
}

impl ExactFixture {
    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t_max, FIT_SAMPLES)
    }
}

/// Four modes in `[1, 2]`, weakly coupled. d_ER about 12 (4 qubits).
/// Markov mse 0.44, embedding mse 9.0e-4.
pub fn low_complexity() -> Result<ExactFixture> {
    Ok(ExactFixture { name: "low", model: ExactModel::with_modes(1.375, 1.0, 2.0, 4, 0.02)?, t_max: 400.0 })
}

/// 200 modes in `[9, 10]`, `g^2/dw = 0.02`. d_ER about 2.7e6.
/// Markov mse 9.6e-3, embedding mse 3.4e-4.
pub fn mid_complexity() -> Result<ExactFixture> {
    Ok(ExactFixture {
        name: "mid",
        model: ExactModel::with_modes(9.5, 9.0, 10.0, 200, (0.02f64 * 0.005).sqrt())?,
        t_max: 30.0,
    })
}

/// 200 modes in `[9, 10]`, `g^2/dw = 0.3`. d_ER about 4.9e8.
/// Markov mse 8.6e-2, embedding mse 2.5e-2.
pub fn high_complexity() -> Result<ExactFixture> {
    Ok(ExactFixture {
        name: "high",
        model: ExactModel::with_modes(9.5, 9.0, 10.0, 200, (0.3f64 * 0.005).sqrt())?,
        t_max: 10.0,
    })
}

/// Damped resonant pseudomode with weak Rabi coupling. d_ER about 6.
pub fn pseudomode() -> PseudomodeParams {
    PseudomodeParams { omega0: 1.0, omega: 1.0, omega_rabi: 0.1, gamma_decay: 0.5, cutoff: 6, n0: 0.0 }
}

/// Sampling window for [`pseudomode`], ten damping times.
pub fn pseudomode_times() -> Vec<f64> {
    uniform_grid(10.0 / pseudomode().gamma_decay, 201)
}
