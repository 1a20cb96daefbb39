use super::mixing::{c_of_w, variance_factor, MixingWeight};
use super::TheoryError;
use crate::spectra::DiscreteMeasure;
use crate::stieltjes::{f_eval, m_at_zero, solve_m};

/// Bias, variance and their sum, all in the `Σ`-weighted norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskDecomposition {
    pub bias: f64,
    pub variance: f64,
    pub total: f64,
}

impl RiskDecomposition {
    pub fn new(bias: f64, variance: f64) -> Self {
        RiskDecomposition { bias, variance, total: bias + variance }
    }

    fn checked(bias: f64, variance: f64, what: &str) -> Result<Self, TheoryError> {
        // Clip rounding-level negatives; anything bigger is a real failure.
        let clip = |x: f64| if x < 0.0 && x > -1e-12 { 0.0 } else { x };
        let (bias, variance) = (clip(bias), clip(variance));
        if !(bias.is_finite() && variance.is_finite() && bias >= 0.0 && variance >= 0.0) {
            return Err(TheoryError::NonFinite(format!("{what}: bias {bias}, variance {variance}")));
        }
        Ok(RiskDecomposition::new(bias, variance))
    }
}

/// Limiting spectra and the scalar parameters of the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitModel {
    /// Limit of `Ĥ_p`.
    pub h: DiscreteMeasure,
    /// Limit of `Ĝ_p`.
    pub g: DiscreteMeasure,
    /// `p/n`, strictly above one.
    pub gamma: f64,
    pub sigma2: f64,
    pub bstar: f64,
}

impl LimitModel {
    pub fn new(
        h: DiscreteMeasure,
        g: DiscreteMeasure,
        gamma: f64,
        sigma2: f64,
        bstar: f64,
    ) -> Result<Self, TheoryError> {
        check_scalars(gamma, sigma2, bstar)?;
        Ok(LimitModel { h, g, gamma, sigma2, bstar })
    }

    /// `b★ / σ²`.
    pub fn snr(&self) -> f64 {
        self.bstar / self.sigma2
    }
}

pub(crate) fn check_scalars(gamma: f64, sigma2: f64, bstar: f64) -> Result<(), TheoryError> {
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(TheoryError::InvalidArgument(format!("γ must exceed 1, got {gamma}")));
    }
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(TheoryError::InvalidArgument(format!("σ² must be nonnegative, got {sigma2}")));
    }
    if !(bstar.is_finite() && bstar >= 0.0) {
        return Err(TheoryError::InvalidArgument(format!("b★ must be nonnegative, got {bstar}")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<(), TheoryError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(TheoryError::InvalidArgument(format!(
            "ridge penalty must be positive, got {lambda} (use the interpolator for λ → 0)"
        )));
    }
    Ok(())
}

/// `B = (m′(0)/m(0)²) ∫ x/(1+m(0)x)² dG` and `V = m′(0)/m(0)² − 1`.
fn interpolator_terms(model: &LimitModel) -> Result<(f64, f64), TheoryError> {
    let s = m_at_zero(&model.h, model.gamma)?;
    let ratio = s.m_prime / (s.m * s.m);
    let bias = ratio * model.g.integrate(|x| x / (1.0 + s.m * x).powi(2));
    Ok((bias, ratio - 1.0))
}

/// Min-norm interpolator after infinitely many generations: `σ² c(w) V + b★ B`.
pub fn interpolator_limit_risk(model: &LimitModel, w: MixingWeight) -> Result<RiskDecomposition, TheoryError> {
    let (b, v) = interpolator_terms(model)?;
    RiskDecomposition::checked(model.bstar * b, model.sigma2 * c_of_w(w) * v, "interpolator")
}

/// Min-norm interpolator after `t` generations in the proportional limit: the
/// multiplier `c(w)` is replaced by the finite-`t` factor `f_t(w)`.
pub fn interpolator_risk_at_t(
    model: &LimitModel,
    w: MixingWeight,
    t: usize,
) -> Result<RiskDecomposition, TheoryError> {
    let (b, v) = interpolator_terms(model)?;
    let factor = variance_factor(w.value(), t);
    RiskDecomposition::checked(model.bstar * b, model.sigma2 * factor * v, "interpolator")
}

/// The `w`-dependent prefactor `w(2−w) / (2(1−w))` of `V_λ`.
fn v_prefactor(w: f64) -> f64 {
    w * (2.0 - w) / (2.0 * (1.0 - w))
}

/// Ridge with penalty `λ` after infinitely many generations, for general `(H, G)`.
pub fn ridge_limit_risk(
    model: &LimitModel,
    w: MixingWeight,
    lambda: f64,
) -> Result<RiskDecomposition, TheoryError> {
    check_lambda(lambda)?;
    let wv = w.value();
    let gamma = model.gamma;
    let m1 = solve_m(-lambda / wv, &model.h, gamma)?.m;
    let m2 = solve_m(-lambda / (2.0 - wv), &model.h, gamma)?.m;

    let num = model.g.integrate(|x| x / (1.0 + m1 * x).powi(2));
    let q = gamma * model.h.integrate(|x| (m1 * x / (1.0 + m1 * x)).powi(2));
    let b_lambda = num / (1.0 - q);

    // ∫x/(1+m₁x)dH − ∫x/(1+m₂x)dH without the cancellation.
    let diff = (m2 - m1) * model.h.integrate(|x| x * x / ((1.0 + m1 * x) * (1.0 + m2 * x)));
    let v_lambda = v_prefactor(wv) * (gamma / lambda) * diff;

    RiskDecomposition::checked(model.bstar * b_lambda, model.sigma2 * c_of_w(w) * v_lambda, "ridge")
}

/// Positive root of `zα m² + (α + z − γα) m + 1 = 0` for `z < 0`.
pub fn isotropic_m(alpha: f64, gamma: f64, z: f64) -> f64 {
    let a = z * alpha;
    let b = alpha + z - gamma * alpha;
    2.0 / (-b + (b * b - 4.0 * a).sqrt())
}

fn isotropic_parts(alpha: f64, gamma: f64, wv: f64, lambda: f64) -> (f64, f64) {
    let m1 = isotropic_m(alpha, gamma, -lambda / wv);
    let m2 = isotropic_m(alpha, gamma, -lambda / (2.0 - wv));
    let d1 = 1.0 + alpha * m1;
    let b_lambda = (alpha / (d1 * d1)) / (1.0 - gamma * alpha * alpha * m1 * m1 / (d1 * d1));
    let diff = alpha * alpha * (m2 - m1) / (d1 * (1.0 + alpha * m2));
    let v_lambda = v_prefactor(wv) * (gamma / lambda) * diff;
    (b_lambda, v_lambda)
}

/// Closed form for `Σ = αI`, `H = G = δ_α`.
pub fn isotropic_ridge_risk(
    alpha: f64,
    gamma: f64,
    sigma2: f64,
    bstar: f64,
    w: MixingWeight,
    lambda: f64,
) -> Result<RiskDecomposition, TheoryError> {
    check_scalars(gamma, sigma2, bstar)?;
    check_lambda(lambda)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(TheoryError::InvalidArgument(format!("α must be positive, got {alpha}")));
    }
    let (b, v) = isotropic_parts(alpha, gamma, w.value(), lambda);
    RiskDecomposition::checked(bstar * b, sigma2 * c_of_w(w) * v, "isotropic ridge")
}

/// `G = H` (random effects), written entirely through `f(z) = 1/m(−z) − z`.
pub fn random_effects_risk(
    h: &DiscreteMeasure,
    gamma: f64,
    sigma2: f64,
    bstar: f64,
    w: MixingWeight,
    lambda: f64,
) -> Result<RiskDecomposition, TheoryError> {
    check_scalars(gamma, sigma2, bstar)?;
    check_lambda(lambda)?;
    let wv = w.value();
    let a = lambda / wv;
    let b = lambda / (2.0 - wv);
    let (fa, fpa) = f_eval(a, h, gamma)?;
    let (fb, _) = f_eval(b, h, gamma)?;
    let b_lambda = (fa - a * fpa) / gamma;
    let v_lambda = (fa - fb) / (a - b);
    RiskDecomposition::checked(bstar * b_lambda, sigma2 * c_of_w(w) * v_lambda, "random effects")
}

/// `Σ = I + s v vᵀ` with `⟨β, v⟩² → θ★²`; `H = δ₁` in the limit.
pub fn spiked_risk(
    strength: f64,
    theta: f64,
    gamma: f64,
    sigma2: f64,
    bstar: f64,
    w: MixingWeight,
    lambda: f64,
) -> Result<RiskDecomposition, TheoryError> {
    check_scalars(gamma, sigma2, bstar)?;
    check_lambda(lambda)?;
    if !(strength.is_finite() && strength >= 0.0) {
        return Err(TheoryError::InvalidArgument(format!("spike strength must be nonnegative, got {strength}")));
    }
    if !(-1.0..=1.0).contains(&theta) {
        return Err(TheoryError::InvalidArgument(format!("θ★ must lie in [-1, 1], got {theta}")));
    }
    let wv = w.value();
    let (_, v_lambda) = isotropic_parts(1.0, gamma, wv, lambda);
    let m1 = isotropic_m(1.0, gamma, -lambda / wv);
    let t2 = theta * theta;
    let top = 1.0 + strength;
    let num = t2 * top / (1.0 + m1 * top).powi(2) + (1.0 - t2) / (1.0 + m1).powi(2);
    let b_lambda = num / (1.0 - gamma * m1 * m1 / (1.0 + m1).powi(2));
    RiskDecomposition::checked(bstar * b_lambda, sigma2 * c_of_w(w) * v_lambda, "spiked")
}
