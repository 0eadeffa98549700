//! Joint transmit precoding and BD-RIS design for multi-user sum-rate.
//!
//! The solver alternates a weighted-MMSE precoder step with projected
//! gradient ascent on the scattering blocks. Both steps refuse to lower the
//! rate, so the recorded trajectory is non-decreasing.

pub mod grouping;
pub mod pairing;
pub mod precoder;
pub mod rate;
pub mod ris;
mod solve;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::ScatteringState;

pub use grouping::{select_grouping, select_grouping_with, GroupingMode};
pub use pairing::{pair_antennas, Pairing};
pub use precoder::{matched_filter, precoder_update};
pub use rate::sum_rate;
pub use ris::ris_update;
pub use solve::{solve, solve_from};

/// Transmit beamforming matrix, `N x K`; column `k` serves user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub w: CMatrix,
}

impl Precoder {
    pub fn new(w: CMatrix) -> Self {
        Precoder { w }
    }

    pub fn zeros(tx_antennas: usize, users: usize) -> Self {
        Precoder {
            w: CMatrix::from_element(tx_antennas, users, Complex64::new(0.0, 0.0)),
        }
    }

    /// `sum_k ||w_k||^2`.
    pub fn power(&self) -> f64 {
        self.w.norm_squared()
    }

    pub fn satisfies_power(&self, tx_power: f64, tol: f64) -> bool {
        self.power() <= tx_power + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerParams {
    /// Outer alternating iterations `I`.
    pub max_outer_iterations: usize,
    pub rel_tolerance: f64,
    /// First trial step, relative to `||V|| / ||grad||`.
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_increase: f64,
    pub inner_steps: usize,
    pub max_backtracks: usize,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        OptimizerParams {
            max_outer_iterations: 100,
            rel_tolerance: 1e-4,
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_increase: 1e-4,
            inner_steps: 10,
            max_backtracks: 40,
        }
    }
}

impl OptimizerParams {
    pub fn check(&self) -> Result<()> {
        let ok = self.max_outer_iterations > 0
            && self.rel_tolerance > 0.0
            && self.initial_step > 0.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.sufficient_increase > 0.0
            && self.inner_steps > 0
            && self.max_backtracks > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid optimizer parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Sum-rate of the initial point followed by every outer iterate.
    pub rate_trajectory: Vec<f64>,
    pub final_state: ScatteringState,
    pub final_precoder: Precoder,
    pub iterations_used: usize,
}

impl SolveResult {
    pub fn final_rate(&self) -> f64 {
        *self.rate_trajectory.last().expect("trajectory holds the initial rate")
    }
}
