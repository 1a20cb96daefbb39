//! The iterated estimators at finite `(n, p, t)`: simulation of the paths, exact
//! conditional risk given `X`, Monte Carlo summaries and a deterministic-equivalent
//! check for the resolvent quadratic form.
//!
//! Generation `t` fits
//!
//! ```text
//! β̂_t = (XᵀX + nλI)⁻¹ Xᵀ (w y_t + (1−w) ỹ_t),   y_t = Xβ + ε_t,   ỹ_t = Xβ̂_{t−1} + ε̃_t
//! ```
//!
//! on a fixed design, with `β̂_0` fitted to `y_0` alone; `λ = 0` means the
//! pseudoinverse (min-norm interpolator).

mod conditional;
mod detequiv;
mod factor;
mod montecarlo;
mod paths;

pub use conditional::{conditional_interpolator_risk, conditional_ridge_risk, ConditionalRisk, RiskEvaluator};
pub use detequiv::{det_equiv_check, identity_target, DetEquivCheck, DetEquivTarget};
pub use factor::{DesignFactor, SigmaGeometry, RANK_SLACK};
pub use montecarlo::{
    empirical_risk, mean_se, noise_moments, simulate, MeanSe, NoiseMoments, Setting, SimulationPlan,
    SimulationSummary,
};
pub use paths::{
    draw_noise, interpolator_path, interpolator_trace, iterate_coords, ridge_path, ridge_trace, PathTrace,
    ProjectedNoise,
};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::spectra::{DesignSample, SpectraError};
use crate::stieltjes::StieltjesError;

#[derive(Debug, Error)]
pub enum FiniteError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("design has numerical rank {rank}, expected about {expected}; likely a numerical failure")]
    SuspiciousRank { rank: usize, expected: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Stieltjes(#[from] StieltjesError),
}

/// Noise law for `ε_t` and `ε̃_t`, both with variance `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDist {
    #[default]
    Gaussian,
    /// `±σ` with equal probability.
    Rademacher,
}

/// One run of the iteration. Unlike the limit formulas, `w` is not clamped here:
/// `w = 1` (real data only) and `w = 0` (synthetic only) are both exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub n: usize,
    pub p: usize,
    /// `0` selects the interpolator.
    pub lambda: f64,
    pub w: f64,
    /// Number of synthetic generations after the initial fit.
    pub t: usize,
    pub sigma2: f64,
    pub reps: usize,
    pub seed: u64,
    pub noise: NoiseDist,
}

impl IterationConfig {
    pub(crate) fn validate(&self, design: &DesignSample, beta_len: usize) -> Result<(), FiniteError> {
        if design.n() != self.n || design.p() != self.p {
            return Err(FiniteError::InvalidConfig(format!(
                "design is {}x{}, config says n = {}, p = {}",
                design.n(),
                design.p(),
                self.n,
                self.p
            )));
        }
        if beta_len != self.p {
            return Err(FiniteError::Dimension { expected: self.p, got: beta_len });
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(FiniteError::InvalidConfig(format!("w must lie in [0, 1], got {}", self.w)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(FiniteError::InvalidConfig(format!("λ must be nonnegative, got {}", self.lambda)));
        }
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(FiniteError::InvalidConfig(format!("σ² must be nonnegative, got {}", self.sigma2)));
        }
        Ok(())
    }

    pub(crate) fn require_overparametrized(&self) -> Result<(), FiniteError> {
        if self.p <= self.n {
            return Err(FiniteError::InvalidConfig(format!(
                "the interpolator needs p > n (n = {}, p = {})",
                self.n, self.p
            )));
        }
        Ok(())
    }
}

/// Interpolator variance multipliers `f_0, …, f_{t_max}`; see [`crate::theory::variance_factors`].
pub fn variance_monotonicity_factor(w: f64, t_max: usize) -> Vec<f64> {
    crate::theory::variance_factors(w, t_max)
}
