//! Limiting risk of iterated ridge / min-norm interpolation and the mixing-weight
//! calculus built on it.
//!
//! With `m₁ = m(−λ/w)` and `m₂ = m(−λ/(2−w))`, the ridge limit is
//!
//! ```text
//! R = b★ B_λ + σ² c(w) V_λ
//! B_λ = ∫ x/(1+m₁x)² dG / (1 − γ ∫ m₁²x²/(1+m₁x)² dH)
//! V_λ = (w(2−w) / 2(1−w)) (γ/λ) (∫ x/(1+m₁x) dH − ∫ x/(1+m₂x) dH)
//! ```
//!
//! and the interpolator limit is `b★ (m′(0)/m(0)²) ∫ x/(1+m(0)x)² dG + σ² c(w) (m′(0)/m(0)² − 1)`.

mod mixing;
mod risk;

pub use mixing::{
    c_of_w, dynamic_weight_fraction, dynamic_weights, variance_factor, variance_factors, MixingWeight, W_MIN,
};
pub use risk::{
    interpolator_limit_risk, interpolator_risk_at_t, isotropic_m, isotropic_ridge_risk, random_effects_risk,
    ridge_limit_risk, spiked_risk, LimitModel, RiskDecomposition,
};

use rayon::prelude::*;
use thiserror::Error;

use crate::spectra::DiscreteMeasure;
use crate::stieltjes::StieltjesError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error(transparent)]
    Stieltjes(#[from] StieltjesError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite risk: {0}")]
    NonFinite(String),
}

impl TheoryError {
    pub fn residual(&self) -> Option<f64> {
        match self {
            TheoryError::Stieltjes(e) => e.residual(),
            _ => None,
        }
    }
}

/// Scalars shared by every model path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub sigma2: f64,
    pub bstar: f64,
}

/// Which limiting-risk formula to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum RidgePath {
    /// `H = G = δ_α`, closed-form quadratic for `m`.
    Isotropic { alpha: f64 },
    /// `G = H`, through `f(z)`.
    RandomEffects { h: DiscreteMeasure },
    /// `H = δ₁`, `G = (1 − θ²) δ₁ + θ² δ_{1+s}`.
    Spiked { strength: f64, theta: f64 },
    /// Arbitrary `(H, G)`.
    Generic { h: DiscreteMeasure, g: DiscreteMeasure },
}

impl RidgePath {
    /// The `(H, G)` pair this path stands for.
    pub fn limit_model(&self, params: &ModelParams) -> Result<LimitModel, TheoryError> {
        let bad = |e: crate::spectra::SpectraError| TheoryError::InvalidArgument(e.to_string());
        let (h, g) = match self {
            RidgePath::Isotropic { alpha } => {
                let d = DiscreteMeasure::dirac(*alpha).map_err(bad)?;
                (d.clone(), d)
            }
            RidgePath::RandomEffects { h } => (h.clone(), h.clone()),
            RidgePath::Spiked { strength, theta } => {
                let t2 = theta * theta;
                (
                    DiscreteMeasure::dirac(1.0).map_err(bad)?,
                    DiscreteMeasure::new([(1.0, 1.0 - t2), (1.0 + strength, t2)]).map_err(bad)?,
                )
            }
            RidgePath::Generic { h, g } => (h.clone(), g.clone()),
        };
        LimitModel::new(h, g, params.gamma, params.sigma2, params.bstar)
    }

    /// Ridge limit (`t → ∞`) for this path.
    pub fn ridge_risk(
        &self,
        params: &ModelParams,
        w: MixingWeight,
        lambda: f64,
    ) -> Result<RiskDecomposition, TheoryError> {
        let ModelParams { gamma, sigma2, bstar } = *params;
        match self {
            RidgePath::Isotropic { alpha } => isotropic_ridge_risk(*alpha, gamma, sigma2, bstar, w, lambda),
            RidgePath::RandomEffects { h } => random_effects_risk(h, gamma, sigma2, bstar, w, lambda),
            RidgePath::Spiked { strength, theta } => spiked_risk(*strength, *theta, gamma, sigma2, bstar, w, lambda),
            RidgePath::Generic { .. } => ridge_limit_risk(&self.limit_model(params)?, w, lambda),
        }
    }

    /// Interpolator risk after `t` generations, or in the `t → ∞` limit when `t` is `None`.
    pub fn interpolator_risk(
        &self,
        params: &ModelParams,
        w: MixingWeight,
        t: Option<usize>,
    ) -> Result<RiskDecomposition, TheoryError> {
        let model = self.limit_model(params)?;
        match t {
            Some(t) => interpolator_risk_at_t(&model, w, t),
            None => interpolator_limit_risk(&model, w),
        }
    }

    /// `λ = 0` selects the interpolator.
    pub fn risk(
        &self,
        params: &ModelParams,
        w: MixingWeight,
        lambda: f64,
    ) -> Result<RiskDecomposition, TheoryError> {
        if lambda == 0.0 {
            self.interpolator_risk(params, w, None)
        } else {
            self.ridge_risk(params, w, lambda)
        }
    }
}

/// Location and value of a minimum over `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalW {
    pub w: f64,
    pub risk: f64,
}

/// Final bracket width of the golden-section search.
pub const W_SEARCH_TOL: f64 = 1e-6;

/// Golden-section search of `log risk(w)` over `[W_MIN, 1 − W_MIN]`.
///
/// The risk curves in scope are log-convex in `w`, so the search is exact up to
/// the bracket width. The best point evaluated is returned.
pub fn optimal_w<F>(mut risk: F) -> Result<OptimalW, TheoryError>
where
    F: FnMut(MixingWeight) -> Result<f64, TheoryError>,
{
    let mut eval = |w: f64| -> Result<f64, TheoryError> {
        let r = risk(MixingWeight::new(w)?)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(TheoryError::NonFinite(format!("risk {r} at w = {w}")));
        }
        Ok(r.ln())
    };
    let inv_phi = crate::INV_GOLDEN_RATIO;
    let (mut a, mut b) = (W_MIN, 1.0 - W_MIN);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > W_SEARCH_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let (w, f) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(OptimalW { w, risk: f.exp() })
}

/// `w★(λ)` on a sorted positive grid; points are evaluated in parallel and
/// returned in grid order.
pub fn optimal_w_curve(
    path: &RidgePath,
    params: &ModelParams,
    lambdas: &[f64],
) -> Result<Vec<(f64, OptimalW)>, TheoryError> {
    if lambdas.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(TheoryError::InvalidArgument("λ grid must be positive".into()));
    }
    if lambdas.windows(2).any(|p| p[1] < p[0]) {
        return Err(TheoryError::InvalidArgument("λ grid must be sorted".into()));
    }
    lambdas
        .par_iter()
        .map(|&lambda| {
            let best = optimal_w(|w| Ok(path.ridge_risk(params, w, lambda)?.total))?;
            Ok((lambda, best))
        })
        .collect()
}

/// Outcome of [`snr_monotonicity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SnrCheck {
    /// `(SNR, w★)` in input order.
    pub points: Vec<(f64, f64)>,
    /// `w★` nondecreasing in SNR up to [`SNR_MONOTONE_TOL`].
    pub monotone: bool,
}

pub const SNR_MONOTONE_TOL: f64 = 2e-6;

/// `w★` at fixed `λ` across SNR values, holding `b★` fixed and setting `σ² = b★/SNR`.
pub fn snr_monotonicity_check(
    path: &RidgePath,
    gamma: f64,
    bstar: f64,
    lambda: f64,
    snrs: &[f64],
) -> Result<SnrCheck, TheoryError> {
    if snrs.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(TheoryError::InvalidArgument("SNR grid must be positive".into()));
    }
    let points = snrs
        .iter()
        .map(|&snr| {
            let params = ModelParams { gamma, sigma2: bstar / snr, bstar };
            let best = optimal_w(|w| Ok(path.ridge_risk(&params, w, lambda)?.total))?;
            Ok((snr, best.w))
        })
        .collect::<Result<Vec<_>, TheoryError>>()?;
    let mut order: Vec<(f64, f64)> = points.clone();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = order.windows(2).all(|p| p[1].1 >= p[0].1 - SNR_MONOTONE_TOL);
    Ok(SnrCheck { points, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::INV_GOLDEN_RATIO;

    fn params(gamma: f64, sigma2: f64) -> ModelParams {
        ModelParams { gamma, sigma2, bstar: 1.0 }
    }

    #[test]
    fn golden_section_on_quadratic() {
        let best = optimal_w(|w| Ok(1.0 + (w.value() - 0.3).powi(2))).unwrap();
        assert!((best.w - 0.3).abs() < 1e-6);
        let err = optimal_w(|w| Ok(if w.value() > 0.5 { f64::NAN } else { 1.0 })).unwrap_err();
        assert!(matches!(err, TheoryError::NonFinite(_)));
    }

    #[test]
    fn interpolator_optimum_is_golden() {
        let h = DiscreteMeasure::new([(0.5, 0.3), (1.0, 0.3), (3.0, 0.4)]).unwrap();
        let g = DiscreteMeasure::new([(0.5, 0.5), (3.0, 0.5)]).unwrap();
        for path in [RidgePath::Isotropic { alpha: 1.0 }, RidgePath::Generic { h, g }] {
            let p = params(2.0, 1.0);
            let best = optimal_w(|w| Ok(path.interpolator_risk(&p, w, None)?.total)).unwrap();
            assert!((best.w - INV_GOLDEN_RATIO).abs() < 1e-5);
            for e in [-1e-5, 1e-5] {
                let w = MixingWeight::new(best.w + e).unwrap();
                assert!(best.risk <= path.interpolator_risk(&p, w, None).unwrap().total);
            }
        }
    }

    #[test]
    fn ridge_optimum_limits() {
        let path = RidgePath::Isotropic { alpha: 1.0 };
        let p = params(2.0, 1.0);
        let small = optimal_w(|w| Ok(path.ridge_risk(&p, w, 1e-6)?.total)).unwrap();
        assert!((small.w - INV_GOLDEN_RATIO).abs() < 1e-2);
        let large = optimal_w(|w| Ok(path.ridge_risk(&p, w, 1e4)?.total)).unwrap();
        assert!(large.w > 0.99);
    }

    #[test]
    fn curve_keeps_order_and_bounds() {
        let path = RidgePath::Isotropic { alpha: 1.0 };
        let grid: Vec<f64> = (0..9).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect();
        let curve = optimal_w_curve(&path, &params(2.0, 64.0), &grid).unwrap();
        assert_eq!(curve.len(), grid.len());
        for ((l, best), g) in curve.iter().zip(&grid) {
            assert_eq!(l, g);
            assert!(best.w >= 0.5 - 1e-5 && best.w <= 1.0);
        }
        assert!(optimal_w_curve(&path, &params(2.0, 1.0), &[1.0, 0.5]).is_err());
        assert!(optimal_w_curve(&path, &params(2.0, 1.0), &[0.0]).is_err());
    }

    #[test]
    fn snr_check() {
        let path = RidgePath::Isotropic { alpha: 1.0 };
        let c = snr_monotonicity_check(&path, 2.0, 1.0, 1.0, &[0.1, 1.0, 10.0]).unwrap();
        assert!(c.monotone);
        let hi = snr_monotonicity_check(&path, 2.0, 1.0, 1.0, &[1.0, 1e3]).unwrap();
        assert!(hi.points[1].1 > hi.points[0].1);
        let dup = snr_monotonicity_check(&path, 2.0, 1.0, 1.0, &[2.0, 2.0]).unwrap();
        assert_eq!(dup.points[0].1, dup.points[1].1);
    }

    #[test]
    fn risk_dispatch_uses_interpolator_at_zero() {
        let path = RidgePath::Isotropic { alpha: 1.0 };
        let p = params(2.0, 1.0);
        let w = MixingWeight::new(0.5).unwrap();
        assert_eq!(path.risk(&p, w, 0.0).unwrap(), path.interpolator_risk(&p, w, None).unwrap());
        assert_eq!(path.risk(&p, w, 0.3).unwrap(), path.ridge_risk(&p, w, 0.3).unwrap());
    }
}
