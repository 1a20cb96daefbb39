use std::sync::Arc;

use faer::Mat;

use super::SpectraError;
use crate::linalg;

/// Direction `v` of the rank-one spike in `Σ = I + s v vᵀ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SpikeDirection {
    /// `e₁`.
    #[default]
    FirstBasis,
    /// Any vector of length `p`; normalized on use.
    Unit(Vec<f64>),
}

impl SpikeDirection {
    /// The unit spike vector in dimension `p`.
    pub fn vector(&self, p: usize) -> Result<Vec<f64>, SpectraError> {
        match self {
            SpikeDirection::FirstBasis => {
                let mut v = vec![0.0; p];
                v[0] = 1.0;
                Ok(v)
            }
            SpikeDirection::Unit(v) => {
                if v.len() != p {
                    return Err(SpectraError::InvalidParameter(format!(
                        "spike direction has length {}, expected {p}",
                        v.len()
                    )));
                }
                let norm = linalg::norm_sq(v).sqrt();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(SpectraError::InvalidParameter("spike direction must be nonzero".into()));
                }
                Ok(v.iter().map(|x| x / norm).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceModel {
    /// `Σ = α I`.
    Isotropic { alpha: f64 },
    /// `Σ_ij = ρ^{|i−j|}`.
    Ar1 { rho: f64 },
    /// `Σ = I + s v vᵀ`.
    Spiked { strength: f64, direction: SpikeDirection },
    /// `Σ = (1 − ρ/√p) I + (ρ/√p) 11ᵀ`. Its top eigenvalue grows like `ρ√p`.
    Equicorrelated { rho: f64 },
    /// A user-supplied symmetric PSD matrix.
    Explicit(Mat<f64>),
}

impl CovarianceModel {
    pub fn spiked(strength: f64) -> Self {
        CovarianceModel::Spiked { strength, direction: SpikeDirection::FirstBasis }
    }

    /// True for families whose spectrum is not bounded uniformly in `p`.
    pub fn violates_bounded_spectrum(&self) -> bool {
        matches!(self, CovarianceModel::Equicorrelated { .. })
    }

    /// A `p`-independent interval containing every eigenvalue, when one exists.
    pub fn eigenvalue_bounds(&self) -> Option<(f64, f64)> {
        match *self {
            CovarianceModel::Isotropic { alpha } => Some((alpha, alpha)),
            CovarianceModel::Ar1 { rho } => Some(((1.0 - rho) / (1.0 + rho), (1.0 + rho) / (1.0 - rho))),
            CovarianceModel::Spiked { strength, .. } => Some((1.0, 1.0 + strength)),
            CovarianceModel::Equicorrelated { .. } | CovarianceModel::Explicit(_) => None,
        }
    }

    fn validate(&self, p: usize) -> Result<(), SpectraError> {
        let bad = |msg: String| Err(SpectraError::InvalidParameter(msg));
        if p == 0 {
            return bad("dimension p must be at least 1".into());
        }
        match self {
            CovarianceModel::Isotropic { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                bad(format!("isotropic scale must be positive, got {alpha}"))
            }
            CovarianceModel::Ar1 { rho } if !(*rho > 0.0 && *rho < 1.0) => {
                bad(format!("AR(1) correlation must lie in (0, 1), got {rho}"))
            }
            CovarianceModel::Spiked { strength, .. } if !(strength.is_finite() && *strength > 0.0) => {
                bad(format!("spike strength must be positive, got {strength}"))
            }
            CovarianceModel::Equicorrelated { rho }
                if !(rho.is_finite() && *rho >= 0.0 && *rho <= (p as f64).sqrt()) =>
            {
                bad(format!("equicorrelation must lie in [0, sqrt(p)], got {rho}"))
            }
            CovarianceModel::Explicit(m) if m.nrows() != p || m.ncols() != p => {
                bad(format!("explicit covariance is {}x{}, expected {p}x{p}", m.nrows(), m.ncols()))
            }
            _ => Ok(()),
        }
    }
}

/// A realized covariance matrix with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct Covariance {
    pub sigma: Mat<f64>,
    /// Nondecreasing.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: Mat<f64>,
    /// Symmetric PSD square root `V diag(√s) Vᵀ`.
    pub sqrt_sigma: Arc<Mat<f64>>,
    /// `Some(α)` when `Σ = α I`; lets designs skip the dense product.
    pub isotropic_scale: Option<f64>,
}

impl Covariance {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn build_covariance(model: &CovarianceModel, p: usize) -> Result<Covariance, SpectraError> {
    model.validate(p)?;
    if let CovarianceModel::Isotropic { alpha } = *model {
        let eye = Mat::<f64>::identity(p, p);
        return Ok(Covariance {
            sigma: Mat::from_fn(p, p, |i, j| if i == j { alpha } else { 0.0 }),
            eigenvalues: vec![alpha; p],
            eigenvectors: eye,
            sqrt_sigma: Arc::new(Mat::from_fn(p, p, |i, j| if i == j { alpha.sqrt() } else { 0.0 })),
            isotropic_scale: Some(alpha),
        });
    }

    let sigma = match model {
        CovarianceModel::Isotropic { .. } => unreachable!(),
        CovarianceModel::Ar1 { rho } => Mat::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32)),
        CovarianceModel::Spiked { strength, direction } => {
            let v = direction.vector(p)?;
            Mat::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.0 } + strength * v[i] * v[j])
        }
        CovarianceModel::Equicorrelated { rho } => {
            let c = rho / (p as f64).sqrt();
            Mat::from_fn(p, p, |i, j| if i == j { 1.0 } else { c })
        }
        CovarianceModel::Explicit(m) => {
            if !linalg::is_finite(m.as_ref()) {
                return Err(linalg::LinalgError::NonFinite.into());
            }
            let scale = (0..p).flat_map(|j| (0..p).map(move |i| (i, j))).fold(1.0_f64, |acc, (i, j)| {
                acc.max(m[(i, j)].abs())
            });
            let asym = linalg::max_asymmetry(m.as_ref());
            if asym > 1e-10 * scale {
                return Err(linalg::LinalgError::NotSymmetric(asym).into());
            }
            Mat::from_fn(p, p, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
        }
    };

    let (mut eigenvalues, eigenvectors) = linalg::sym_eigen(sigma.as_ref())?;
    let top = eigenvalues.iter().fold(0.0_f64, |a, &s| a.max(s.abs()));
    let floor = -1e-10 * top.max(1.0);
    let lowest = eigenvalues[0];
    if lowest < floor {
        return Err(SpectraError::NotPsd(lowest));
    }
    for s in &mut eigenvalues {
        *s = s.max(0.0);
    }
    let roots: Vec<f64> = eigenvalues.iter().map(|s| s.sqrt()).collect();
    let sqrt_sigma = linalg::reconstruct(eigenvectors.as_ref(), &roots);
    Ok(Covariance { sigma, eigenvalues, eigenvectors, sqrt_sigma: Arc::new(sqrt_sigma), isotropic_scale: None })
}
