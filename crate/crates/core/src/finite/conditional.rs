use super::{DesignFactor, FiniteError, IterationConfig, SigmaGeometry};
use crate::spectra::{Covariance, DesignSample};
use crate::theory::variance_factor;

/// Bias, variance and total of `E[‖β̂ − β‖²_Σ | X]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalRisk {
    pub bias: f64,
    pub variance: f64,
    pub total: f64,
}

impl ConditionalRisk {
    fn new(bias: f64, variance: f64) -> Self {
        ConditionalRisk { bias, variance, total: bias + variance }
    }
}

/// `Σ_{k=1}^t (1−w)^{2(k−1)} x^{2k−1}` and `(1−w)^{2t} x^{2t+1}`, with
/// `1 − (1−w)x` passed in separately so it is never formed by subtraction.
fn geometric_parts(x: f64, wt: f64, one_minus_wx: f64, t: usize) -> (f64, f64) {
    let r = wt * x;
    let q = r * r;
    let tail = x * q.powi(t as i32);
    let sum = if t == 0 {
        0.0
    } else if q == 0.0 {
        x
    } else if one_minus_wx <= 0.0 {
        t as f64 * x
    } else {
        x * -((t as f64) * q.ln()).exp_m1() / (one_minus_wx * (1.0 + r))
    };
    (sum, tail)
}

/// Exact conditional risks for one design, shared across `(w, λ, t)`.
///
/// Everything is diagonal in the eigenbasis of `M = XᵀX`: with `μ_i = s_i²`,
/// `a_i = 1/(μ_i + nλ)` and `x_i = μ_i a_i`,
///
/// ```text
/// Var: σ² Σ_i a_i [(w² + (1−w)²) Σ_{k=1}^t (1−w)^{2(k−1)} x_i^{2k−1} + (1−w)^{2t} x_i^{2t+1}] (VᵀΣV)_ii
/// E c_t,i = (1 − h_i) b_i,  h_i = nλ/(wμ_i + nλ) · (1 − ((1−w) x_i)^{t+1})
/// ```
///
/// and the bias is `‖E β̂_t − β‖²_Σ`, which includes the null-space part `‖P⊥β‖²_Σ`.
#[derive(Debug, Clone)]
pub struct RiskEvaluator {
    pub factor: DesignFactor,
    pub geometry: SigmaGeometry,
}

impl RiskEvaluator {
    pub fn new(design: &DesignSample, cov: &Covariance, beta: &[f64]) -> Result<Self, FiniteError> {
        let factor = DesignFactor::new(design)?;
        let geometry = SigmaGeometry::new(&factor, cov, beta)?;
        Ok(RiskEvaluator { factor, geometry })
    }

    pub fn from_parts(factor: DesignFactor, geometry: SigmaGeometry) -> Self {
        RiskEvaluator { factor, geometry }
    }

    /// Ridge, `λ > 0`.
    pub fn ridge(&self, w: f64, lambda: f64, t: usize, sigma2: f64) -> ConditionalRisk {
        let nl = self.factor.n() as f64 * lambda;
        let wt = 1.0 - w;
        let mix = w * w + wt * wt;
        let k = self.geometry.k();
        let b = self.geometry.signal_coords();
        let mut variance = 0.0;
        let mut offset = Vec::with_capacity(b.len());
        for (i, &s) in self.factor.singular_values().iter().enumerate() {
            let mu = s * s;
            let a = 1.0 / (mu + nl);
            let x = mu * a;
            let one_minus_wx = nl * a + w * x;
            let (sum, tail) = geometric_parts(x, wt, one_minus_wx, t);
            variance += a * (mix * sum + tail) * k[(i, i)];
            let r = wt * x;
            let h = nl / (w * mu + nl) * -((t as f64 + 1.0) * r.ln()).exp_m1();
            let h = if r == 0.0 { nl / (w * mu + nl) } else { h };
            offset.push(-h * b[i]);
        }
        ConditionalRisk::new(self.geometry.offset_norm(&offset), sigma2 * variance)
    }

    /// Min-norm interpolator: `σ² f_t(w) Tr[(XᵀX)†Σ]` and `‖P⊥β‖²_Σ`.
    pub fn interpolator(&self, w: f64, t: usize, sigma2: f64) -> ConditionalRisk {
        ConditionalRisk::new(self.interpolator_bias(), sigma2 * variance_factor(w, t) * self.pinv_trace())
    }

    /// `‖P⊥β‖²_Σ`; depends on the design and `β` only.
    pub fn interpolator_bias(&self) -> f64 {
        self.geometry.null_space_bias()
    }

    /// `Tr[(XᵀX)†Σ]`.
    pub fn pinv_trace(&self) -> f64 {
        let k = self.geometry.k();
        self.factor.singular_values().iter().enumerate().map(|(i, s)| k[(i, i)] / (s * s)).sum()
    }

    /// `λ = 0` selects the interpolator.
    pub fn risk(&self, w: f64, lambda: f64, t: usize, sigma2: f64) -> ConditionalRisk {
        if lambda == 0.0 {
            self.interpolator(w, t, sigma2)
        } else {
            self.ridge(w, lambda, t, sigma2)
        }
    }
}

pub fn conditional_ridge_risk(
    design: &DesignSample,
    cov: &Covariance,
    beta: &[f64],
    config: &IterationConfig,
) -> Result<ConditionalRisk, FiniteError> {
    config.validate(design, beta.len())?;
    if !(config.lambda > 0.0) {
        return Err(FiniteError::InvalidConfig("conditional ridge risk needs λ > 0".into()));
    }
    let eval = RiskEvaluator::new(design, cov, beta)?;
    Ok(eval.ridge(config.w, config.lambda, config.t, config.sigma2))
}

pub fn conditional_interpolator_risk(
    design: &DesignSample,
    cov: &Covariance,
    beta: &[f64],
    config: &IterationConfig,
) -> Result<ConditionalRisk, FiniteError> {
    config.validate(design, beta.len())?;
    config.require_overparametrized()?;
    let eval = RiskEvaluator::new(design, cov, beta)?;
    eval.factor.require_sane_rank()?;
    Ok(eval.interpolator(config.w, config.t, config.sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::spectra::{build_covariance, sample_design, CovarianceModel, EntryDist, SeedRecord};
    use faer::linalg::solvers::Solve;
    use faer::{Mat, Side};

    fn setup(model: CovarianceModel, n: usize, p: usize) -> (Covariance, DesignSample, Vec<f64>) {
        let cov = build_covariance(&model, p).unwrap();
        let d = sample_design(&cov, n, EntryDist::Gaussian, SeedRecord { master: 21, replicate: 0 });
        let beta = (0..p).map(|i| (1.0 + (i as f64 * 1.3).cos()) / (p as f64).sqrt()).collect();
        (cov, d, beta)
    }

    /// `Tr[(XᵀX + nκI)⁻¹ Σ]` by a dense Cholesky solve.
    fn trace_resolvent(d: &DesignSample, cov: &Covariance, kappa: f64) -> f64 {
        let (n, p) = (d.n(), d.p());
        let mut a = d.x.transpose() * d.x.as_ref();
        for i in 0..p {
            a[(i, i)] += n as f64 * kappa;
        }
        let sol = a.llt(Side::Lower).unwrap().solve(&cov.sigma);
        (0..p).map(|i| sol[(i, i)]).sum()
    }

    #[test]
    fn base_case_matches_dense_formulas() {
        let (cov, d, beta) = setup(CovarianceModel::Ar1 { rho: 0.5 }, 10, 16);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        let lambda = 0.3;
        let (n, p) = (10, 16);
        let m = d.x.transpose() * d.x.as_ref();
        let mut a = m.clone();
        for i in 0..p {
            a[(i, i)] += n as f64 * lambda;
        }
        let llt = a.llt(Side::Lower).unwrap();
        let am = llt.solve(&m);
        let amma = llt.solve(am.transpose());
        let var: f64 = {
            let prod = &amma * cov.sigma.as_ref();
            (0..p).map(|i| prod[(i, i)]).sum()
        };
        let resid = Mat::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.0 } - am[(i, j)]);
        let bias_vec = linalg::mat_vec(resid.as_ref(), &beta);
        let bias = linalg::quad_form(cov.sigma.as_ref(), &bias_vec);
        let r = eval.ridge(0.5, lambda, 0, 2.0);
        assert!((r.variance - 2.0 * var).abs() < 1e-10 * var);
        assert!((r.bias - bias).abs() < 1e-10 * bias);
    }

    #[test]
    fn long_run_variance_matches_closed_trace_formula() {
        let (cov, d, beta) = setup(CovarianceModel::spiked(4.0), 12, 20);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        for (w, lambda) in [(0.3, 0.1), (0.618, 1.0), (0.9, 0.05)] {
            let r = eval.ridge(w, lambda, 200, 1.5);
            let wt: f64 = 1.0 - w;
            let closed = 1.5 * (w * w + wt * wt) / (2.0 * (1.0 - w))
                * (trace_resolvent(&d, &cov, lambda / w) / w - trace_resolvent(&d, &cov, lambda / (2.0 - w)) / (2.0 - w));
            assert!((r.variance - closed).abs() < 1e-8 * closed.max(1.0), "{} vs {closed}", r.variance);
        }
    }

    #[test]
    fn increments_follow_geometric_series() {
        let (cov, d, beta) = setup(CovarianceModel::Isotropic { alpha: 1.0 }, 10, 14);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        let k = eval.geometry.k();
        let (w, lambda, sigma2) = (0.4, 0.2, 1.0);
        let wt = 1.0 - w;
        let nl = 10.0 * lambda;
        for t in 0..12 {
            let step = eval.ridge(w, lambda, t + 1, sigma2).variance - eval.ridge(w, lambda, t, sigma2).variance;
            let mut expect = 0.0;
            for (i, s) in eval.factor.singular_values().iter().enumerate() {
                let mu = s * s;
                let a = 1.0 / (mu + nl);
                let x = mu * a;
                let g = wt.powi(2 * t as i32) * x.powi(2 * t as i32 + 1);
                expect += a * ((w * w + wt * wt) * g + wt * wt * x * x * g - g) * k[(i, i)];
            }
            assert!((step - expect).abs() < 1e-13, "t = {t}: {step} vs {expect}");
        }
    }

    #[test]
    fn no_synthetic_weight_keeps_variance_constant() {
        let (cov, d, beta) = setup(CovarianceModel::Ar1 { rho: 0.5 }, 10, 16);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        let v0 = eval.ridge(1.0, 0.4, 0, 1.0);
        for t in 1..6 {
            let vt = eval.ridge(1.0, 0.4, t, 1.0);
            assert!((vt.variance - v0.variance).abs() < 1e-14);
            assert!((vt.bias - v0.bias).abs() < 1e-14);
        }
        let i = eval.interpolator(1.0, 7, 1.0);
        assert!((i.variance - eval.pinv_trace()).abs() < 1e-14);
    }

    #[test]
    fn interpolator_bias_is_bit_identical() {
        let (cov, d, beta) = setup(CovarianceModel::Ar1 { rho: 0.5 }, 10, 16);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        let b = eval.interpolator(0.3, 0, 1.0).bias;
        for w in [0.1, 0.5, 0.618, 0.99] {
            for t in [0, 1, 5, 50] {
                assert_eq!(eval.interpolator(w, t, 1.0).bias.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn interpolator_factor_limits() {
        let (cov, d, beta) = setup(CovarianceModel::Isotropic { alpha: 1.0 }, 10, 16);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        let tr = eval.pinv_trace();
        assert!((eval.interpolator(2.0 / 3.0, 1, 1.0).variance - 2.0 / 3.0 * tr).abs() < 1e-13 * tr);
        let phi = crate::INV_GOLDEN_RATIO;
        assert!((eval.interpolator(phi, 300, 1.0).variance - phi * tr).abs() < 1e-12 * tr);
    }

    #[test]
    fn small_lambda_ridge_approaches_interpolator() {
        let (cov, d, beta) = setup(CovarianceModel::Ar1 { rho: 0.5 }, 10, 16);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        for t in [0, 3] {
            let r = eval.ridge(0.6, 1e-9, t, 1.0);
            let i = eval.interpolator(0.6, t, 1.0);
            assert!((r.total - i.total).abs() < 1e-5 * i.total);
        }
    }

    #[test]
    fn pure_synthetic_interpolator_grows_linearly() {
        let (cov, d, beta) = setup(CovarianceModel::Isotropic { alpha: 1.0 }, 10, 16);
        let eval = RiskEvaluator::new(&d, &cov, &beta).unwrap();
        let tr = eval.pinv_trace();
        assert!((eval.interpolator(0.0, 4, 1.0).variance - 5.0 * tr).abs() < 1e-12 * tr);
    }
}
