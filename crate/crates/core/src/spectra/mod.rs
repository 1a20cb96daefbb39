//! Covariance and signal families, seeded designs `X = Z Σ^{1/2}`, and the
//! empirical spectral measures
//!
//! ```text
//! Ĥ_p = (1/p) Σ_k δ_{s_k},     Ĝ_p = (1/‖β‖²) Σ_k ⟨v_k, β⟩² δ_{s_k}
//! ```
//!
//! where `(s_k, v_k)` are the eigenpairs of `Σ`.

mod covariance;
mod design;
mod measure;
mod signal;

pub use covariance::{build_covariance, Covariance, CovarianceModel, SpikeDirection};
pub use design::{draw_design, sample_design, DesignSample, EntryDist, SeedRecord};
pub use measure::{kolmogorov_distance, DiscreteMeasure, MERGE_TOL};
pub use signal::{draw_signal, SignalDraw, SignalModel, MAX_SIGNAL_ATTEMPTS};

use crate::linalg::LinalgError;
use faer::MatRef;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("measure has no atoms with positive weight")]
    EmptyMeasure,
    #[error("atom location {0} is negative or not finite")]
    InvalidLocation(f64),
    #[error("atom weight {0} is negative or not finite")]
    InvalidWeight(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("covariance matrix is not positive semidefinite (most negative eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("signal vector is zero")]
    ZeroSignal,
    #[error("Bernoulli signal was all zeros in {0} consecutive draws")]
    DegenerateSignal(u32),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `Ĥ_p`: every eigenvalue gets mass `1/p`; repeated eigenvalues merge.
pub fn empirical_h(eigenvalues: &[f64]) -> Result<DiscreteMeasure, SpectraError> {
    if eigenvalues.is_empty() {
        return Err(SpectraError::EmptyMeasure);
    }
    let w = 1.0 / eigenvalues.len() as f64;
    DiscreteMeasure::new(eigenvalues.iter().map(|&s| (s, w)))
}

/// `Ĝ_p(β)`: eigenvalue `s_k` gets mass `⟨v_k, β⟩² / ‖β‖²`.
pub fn empirical_g(
    eigenvalues: &[f64],
    eigenvectors: MatRef<'_, f64>,
    beta: &[f64],
) -> Result<DiscreteMeasure, SpectraError> {
    let p = eigenvalues.len();
    if eigenvectors.nrows() != beta.len() || eigenvectors.ncols() != p {
        return Err(LinalgError::Dimension { expected: p, got: beta.len() }.into());
    }
    let norm_sq = crate::linalg::norm_sq(beta);
    if norm_sq == 0.0 || !norm_sq.is_finite() {
        return Err(SpectraError::ZeroSignal);
    }
    let proj = crate::linalg::mat_t_vec(eigenvectors, beta);
    DiscreteMeasure::new(eigenvalues.iter().zip(&proj).map(|(&s, &c)| (s, c * c / norm_sq)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    #[test]
    fn h_counts_multiplicities() {
        let h = empirical_h(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(h, DiscreteMeasure::dirac(1.0).unwrap());
        let h = empirical_h(&[6.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(h.locations(), &[1.0, 6.0]);
        assert!((h.weights()[0] - 0.75).abs() < 1e-15);
        assert!((h.weights()[1] - 0.25).abs() < 1e-15);
        assert!(matches!(empirical_h(&[]), Err(SpectraError::EmptyMeasure)));
    }

    #[test]
    fn h_of_ar1_two_by_two() {
        let cov = build_covariance(&CovarianceModel::Ar1 { rho: 0.5 }, 2).unwrap();
        let h = empirical_h(&cov.eigenvalues).unwrap();
        assert_eq!(h.len(), 2);
        assert!((h.locations()[0] - 0.5).abs() < 1e-14);
        assert!((h.locations()[1] - 1.5).abs() < 1e-14);
        assert!((h.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn g_isotropic_is_dirac() {
        let cov = build_covariance(&CovarianceModel::Isotropic { alpha: 1.0 }, 5).unwrap();
        let beta = [0.6, 0.0, 0.8, 0.0, 0.0];
        let g = empirical_g(&cov.eigenvalues, cov.eigenvectors.as_ref(), &beta).unwrap();
        assert_eq!(g, DiscreteMeasure::dirac(1.0).unwrap());
    }

    #[test]
    fn g_spiked_aligned() {
        let s = 5.0;
        let cov = build_covariance(&CovarianceModel::spiked(s), 6).unwrap();
        let g1 = empirical_g(&cov.eigenvalues, cov.eigenvectors.as_ref(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert_eq!(g1.len(), 1);
        assert!((g1.locations()[0] - 6.0).abs() < 1e-12);

        let t = 0.75_f64.sqrt();
        let beta = [0.5, t * 0.6, 0.0, t * 0.8, 0.0, 0.0];
        let g = empirical_g(&cov.eigenvalues, cov.eigenvectors.as_ref(), &beta).unwrap();
        assert_eq!(g.len(), 2);
        assert!((g.locations()[0] - 1.0).abs() < 1e-12);
        assert!((g.weights()[0] - 0.75).abs() < 1e-12);
        assert!((g.locations()[1] - 6.0).abs() < 1e-12);
        assert!((g.weights()[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn g_rejects_zero_beta() {
        let v = Mat::<f64>::identity(2, 2);
        assert!(matches!(empirical_g(&[1.0, 2.0], v.as_ref(), &[0.0, 0.0]), Err(SpectraError::ZeroSignal)));
    }
}
