//! Companion Stieltjes transform `m(z)` on `z ≤ 0`, defined by
//!
//! ```text
//! 1/m + z = γ ∫ x / (1 + m x) dH(x)
//! ```
//!
//! For `z < 0` the function `G(m) = 1 + z m − γ ∫ m x/(1 + m x) dH` is strictly
//! decreasing on `m > 0` with `G(0) = 1` and `G(1/|z|) ≤ 0`, so the positive root
//! is unique and bracketed. At `z = 0` the equation has a positive root iff
//! `γ · H((0, ∞)) > 1`.

use thiserror::Error;

use crate::spectra::DiscreteMeasure;

/// Acceptance threshold for the scaled residual (see [`StieltjesSolution::residual`]).
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100_000;
const DAMPING: f64 = 0.5;
const FIXED_POINT_BUDGET: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StieltjesError {
    #[error("fixed point did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no positive root at z = 0: need γ·H((0,∞)) > 1, got {0}")]
    NoPositiveRoot(f64),
}

impl StieltjesError {
    /// Last solver residual, when the error came from non-convergence.
    pub fn residual(&self) -> Option<f64> {
        match self {
            StieltjesError::NonConvergence { residual, .. } => Some(*residual),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesSolution {
    pub z: f64,
    pub m: f64,
    pub m_prime: f64,
    /// `|1/m + z − γ∫x/(1+mx)dH| / max(1, 1/m)`. The scaling only matters when
    /// `m < 1`, i.e. far left on the axis, where `1/m ≈ |z|` and the unscaled
    /// residual is bounded below by rounding in `1/m + z`.
    pub residual: f64,
    pub iterations: usize,
}

fn check(h: &DiscreteMeasure, gamma: f64) -> Result<(), StieltjesError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(StieltjesError::InvalidArgument(format!("γ must be positive, got {gamma}")));
    }
    debug_assert!(h.locations().iter().all(|&x| x >= 0.0));
    Ok(())
}

/// `γ ∫ x/(1+mx) dH`.
fn i1(h: &DiscreteMeasure, gamma: f64, m: f64) -> f64 {
    gamma * h.integrate(|x| x / (1.0 + m * x))
}

fn scaled_residual(h: &DiscreteMeasure, gamma: f64, z: f64, m: f64) -> f64 {
    (1.0 / m + z - i1(h, gamma, m)).abs() / (1.0 / m).max(1.0)
}

/// `m² / (1 − γ∫(mx)²/(1+mx)² dH)`, the implicit derivative written without `m⁻²`.
fn derivative(h: &DiscreteMeasure, gamma: f64, m: f64) -> f64 {
    let q = gamma * h.integrate(|x| {
        let u = m * x / (1.0 + m * x);
        u * u
    });
    m * m / (1.0 - q)
}

fn solve(z: f64, h: &DiscreteMeasure, gamma: f64) -> Result<StieltjesSolution, StieltjesError> {
    let g = |m: f64| 1.0 + z * m - gamma * h.integrate(|x| m * x / (1.0 + m * x));
    let slope = |m: f64| z - gamma * h.integrate(|x| x / ((1.0 + m * x) * (1.0 + m * x)));
    // A few extra Newton steps past the tolerance bring m to rounding level.
    let finish = |mut m: f64, iterations: usize| {
        let mut residual = scaled_residual(h, gamma, z, m);
        for _ in 0..3 {
            let next = m - g(m) / slope(m);
            if !(next > 0.0 && next.is_finite()) {
                break;
            }
            let r = scaled_residual(h, gamma, z, next);
            if r >= residual {
                break;
            }
            m = next;
            residual = r;
        }
        StieltjesSolution { z, m, m_prime: derivative(h, gamma, m), residual, iterations }
    };

    let mut m = 1.0 / (-z + gamma * h.mean());
    if !(m.is_finite() && m > 0.0) {
        m = 1.0;
    }
    let mut iterations = 0;
    let mut best = scaled_residual(h, gamma, z, m);
    let mut stalled = 0;
    while iterations < FIXED_POINT_BUDGET && best > RESIDUAL_TOL {
        let denom = i1(h, gamma, m) - z;
        if !(denom > 0.0) {
            break;
        }
        m = (1.0 - DAMPING) * m + DAMPING / denom;
        iterations += 1;
        let r = scaled_residual(h, gamma, z, m);
        if r < best {
            best = r;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        }
    }
    if best <= RESIDUAL_TOL {
        return Ok(finish(m, iterations));
    }

    // Safeguarded Newton on the decreasing G.
    let mut lo = 0.0_f64;
    let mut hi = if z < 0.0 {
        1.0 / -z
    } else {
        let mut hi = m.max(1.0);
        while g(hi) >= 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                let mass = 1.0 - h.cdf(0.0);
                return Err(StieltjesError::NoPositiveRoot(gamma * mass));
            }
        }
        hi
    };
    let gm = g(m);
    if gm > 0.0 {
        lo = lo.max(m);
    } else {
        hi = hi.min(m);
    }
    let mut m = if m > lo && m < hi { m } else { 0.5 * (lo + hi) };
    let mut residual = scaled_residual(h, gamma, z, m);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let gv = g(m);
        if gv > 0.0 {
            lo = m;
        } else if gv < 0.0 {
            hi = m;
        }
        let newton = m - gv / slope(m);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let r = scaled_residual(h, gamma, z, next);
        if r <= RESIDUAL_TOL {
            return Ok(finish(next, iterations));
        }
        residual = r;
        if next == m || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        m = next;
    }
    Err(StieltjesError::NonConvergence { residual, iterations })
}

/// `m(z)` for `z < 0`.
pub fn solve_m(z: f64, h: &DiscreteMeasure, gamma: f64) -> Result<StieltjesSolution, StieltjesError> {
    check(h, gamma)?;
    if !(z.is_finite() && z < 0.0) {
        return Err(StieltjesError::InvalidArgument(format!("z must be negative, got {z}")));
    }
    solve(z, h, gamma)
}

/// The `z → 0⁻` limit, only defined in the overparametrized regime `γ > 1`.
pub fn m_at_zero(h: &DiscreteMeasure, gamma: f64) -> Result<StieltjesSolution, StieltjesError> {
    check(h, gamma)?;
    if gamma <= 1.0 {
        return Err(StieltjesError::InvalidArgument(format!("m(0) requires γ > 1, got {gamma}")));
    }
    let mass = 1.0 - h.cdf(0.0);
    if gamma * mass <= 1.0 {
        return Err(StieltjesError::NoPositiveRoot(gamma * mass));
    }
    solve(0.0, h, gamma)
}

/// `f(z) = 1/m(−z) − z` and its derivative, for `z > 0`.
///
/// Evaluated as `f = γ∫x/(1+mx)dH` and `f′ = q/(1−q)` with `q = γ∫(mx)²/(1+mx)²dH`,
/// both algebraically equal to the definitions but free of cancellation at large `z`.
pub fn f_eval(zpos: f64, h: &DiscreteMeasure, gamma: f64) -> Result<(f64, f64), StieltjesError> {
    if !(zpos.is_finite() && zpos > 0.0) {
        return Err(StieltjesError::InvalidArgument(format!("f is evaluated at z > 0, got {zpos}")));
    }
    let sol = solve_m(-zpos, h, gamma)?;
    let m = sol.m;
    let f = i1(h, gamma, m);
    let q = gamma * h.integrate(|x| {
        let u = m * x / (1.0 + m * x);
        u * u
    });
    Ok((f, q / (1.0 - q)))
}

/// `df₂(κ) = Σ_k s_k² / (κ + s_k)²`.
pub fn df2(kappa: f64, eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&s| (s / (kappa + s)).powi(2)).sum()
}
