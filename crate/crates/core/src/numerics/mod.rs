//! Numerical oracles: Moreau envelopes, proximal points, Fenchel
//! conjugates, and two threshold estimators.
//!
//! Everything runs on a derivative-free search: a coarse grid over balls of
//! geometrically growing radius, local refinement from the best grid cells,
//! and a ray probe when the best point sits on the outermost ball. Results
//! are bit-identical regardless of the number of threads.

mod envelope;
mod estimate;
mod grid;
mod search;

pub use envelope::{envelope_via_conjugate, fenchel_conjugate, moreau_envelope, prox_points, EnvelopeResult, EnvelopeValue};
pub use estimate::{
    bounded_below_probe, check_quadratic_minorant, estimate_threshold_bisection, estimate_threshold_liminf,
    MinorantCheck, NumericEstimate, ProbeResult,
};
pub use grid::{envelope_sweep, function_sweep, read_csv, sweep_points, write_csv, Grid};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Objective values below `-divergence_bound` certify `-inf`.
    pub divergence_bound: f64,
    pub max_radius: f64,
    pub radius_growth: f64,
    /// Grid points per dimension on each ball.
    pub grid_points: usize,
    /// Argument tolerance of the local refinement.
    pub arg_tol: f64,
    pub bisection_tol: f64,
    /// Largest `k` in the liminf radii `R_k = 2^k`.
    pub liminf_radii: usize,
    pub sphere_samples_1d: usize,
    pub sphere_samples_2d: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            divergence_bound: 1e12,
            max_radius: 1e6,
            radius_growth: 2.0,
            grid_points: 257,
            arg_tol: 1e-8,
            bisection_tol: 1e-3,
            liminf_radii: 40,
            sphere_samples_1d: 2,
            sphere_samples_2d: 64,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), NumericsError> {
        let positive = [self.divergence_bound, self.max_radius, self.arg_tol, self.bisection_tol];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(NumericsError::Config("tolerances, bounds and radii must be positive".into()));
        }
        if !(self.radius_growth.is_finite() && self.radius_growth > 1.0) {
            return Err(NumericsError::Config("radius growth must exceed 1".into()));
        }
        if self.grid_points < 3 || self.liminf_radii < 4 || self.sphere_samples_1d == 0 || self.sphere_samples_2d < 4 {
            return Err(NumericsError::Config("grid, radii and sample counts are too small".into()));
        }
        Ok(())
    }

    /// Odd point count so the grid contains its center.
    pub(crate) fn odd_grid(&self) -> usize {
        self.grid_points | 1
    }

    pub(crate) fn radii(&self) -> Vec<f64> {
        let mut radii = vec![1.0_f64.min(self.max_radius)];
        while *radii.last().expect("nonempty") < self.max_radius {
            let next = (radii.last().expect("nonempty") * self.radius_growth).min(self.max_radius);
            radii.push(next);
        }
        radii
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("numerics support dimensions 1 and 2, got {0}")]
    Dimension(usize),
    #[error("prox parameter must be {0}")]
    Parameter(&'static str),
    #[error("no finite function value found within the search radius")]
    Improper,
    #[error("prox undefined: the envelope is -inf at this point")]
    ProxUndefined,
    #[error("search was inconclusive near {0:?}")]
    Inconclusive(Vec<f64>),
}
