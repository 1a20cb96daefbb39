use faer::{Mat, MatRef};

use super::{DesignFactor, FiniteError};
use crate::linalg;
use crate::spectra::{empirical_h, Covariance};
use crate::stieltjes::{df2, solve_m};

/// The matrix `C` in `z² Tr[C Q(z) Σ Q(z)]`.
#[derive(Debug, Clone, Copy)]
pub enum DetEquivTarget<'a> {
    /// `C = ββᵀ`, evaluated without forming `p × p` matrices.
    SignalOuter(&'a [f64]),
    Matrix(MatRef<'a, f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetEquivCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / |rhs|`.
    pub relative_gap: f64,
    /// `m(z)` under `Ĥ_p` with `γ = p/n`.
    pub m: f64,
}

/// Compares `z² Tr[C Q Σ Q]`, `Q = (XᵀX/n − zI)⁻¹`, with its deterministic
/// equivalent `Tr[C (I + mΣ)⁻² Σ] / (1 − df₂(1/m)/n)`.
pub fn det_equiv_check(
    target: DetEquivTarget<'_>,
    factor: &DesignFactor,
    cov: &Covariance,
    z: f64,
) -> Result<DetEquivCheck, FiniteError> {
    let (n, p) = (factor.n(), factor.p());
    if cov.dim() != p {
        return Err(FiniteError::Dimension { expected: p, got: cov.dim() });
    }
    let nf = n as f64;
    let h = empirical_h(&cov.eigenvalues)?;
    let m = solve_m(z, &h, p as f64 / nf)?.m;
    let denom = 1.0 - df2(1.0 / m, &cov.eigenvalues) / nf;
    let scale: Vec<f64> = cov.eigenvalues.iter().map(|&s| s / (1.0 + m * s).powi(2)).collect();
    let resolvent: Vec<f64> = factor.gram_eigenvalues().iter().map(|mu| 1.0 / (mu / nf - z)).collect();

    let (lhs, rhs_num) = match target {
        DetEquivTarget::SignalOuter(beta) => {
            if beta.len() != p {
                return Err(FiniteError::Dimension { expected: p, got: beta.len() });
            }
            // Qβ = V diag(1/(μ/n − z)) Vᵀβ − (1/z) P⊥β.
            let b = factor.coords(beta);
            let vb = factor.lift(&b);
            let scaled: Vec<f64> = b.iter().zip(&resolvent).map(|(b, r)| b * r).collect();
            let mut qb = factor.lift(&scaled);
            for ((q, beta_i), vb_i) in qb.iter_mut().zip(beta).zip(&vb) {
                *q -= (beta_i - vb_i) / z;
            }
            let lhs = z * z * linalg::quad_form(cov.sigma.as_ref(), &qb);
            let proj = linalg::mat_t_vec(cov.eigenvectors.as_ref(), beta);
            let rhs: f64 = proj.iter().zip(&scale).map(|(c, s)| c * c * s).sum();
            (lhs, rhs)
        }
        DetEquivTarget::Matrix(c) => {
            if c.nrows() != p || c.ncols() != p {
                return Err(FiniteError::Dimension { expected: p, got: c.nrows() });
            }
            let shift: Vec<f64> = resolvent.iter().map(|r| r + 1.0 / z).collect();
            let mut q = linalg::reconstruct(factor.v(), &shift);
            for i in 0..p {
                q[(i, i)] -= 1.0 / z;
            }
            let qsq = &q * cov.sigma.as_ref() * &q;
            let lhs = z * z * trace_product(c, qsq.as_ref());
            let d = linalg::reconstruct(cov.eigenvectors.as_ref(), &scale);
            (lhs, trace_product(c, d.as_ref()))
        }
    };
    let rhs = rhs_num / denom;
    Ok(DetEquivCheck { lhs, rhs, relative_gap: (lhs - rhs).abs() / rhs.abs(), m })
}

/// `Tr[A B]`.
fn trace_product(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `C = I` as a dense matrix, for the scalar sanity check.
pub fn identity_target(p: usize) -> Mat<f64> {
    Mat::identity(p, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_covariance, sample_design, CovarianceModel, EntryDist, SeedRecord};

    #[test]
    fn identity_target_closed_form() {
        let cov = build_covariance(&CovarianceModel::Isotropic { alpha: 1.0 }, 30).unwrap();
        let d = sample_design(&cov, 15, EntryDist::Gaussian, SeedRecord { master: 3, replicate: 0 });
        let f = DesignFactor::new(&d).unwrap();
        let eye = identity_target(30);
        let r = det_equiv_check(DetEquivTarget::Matrix(eye.as_ref()), &f, &cov, -1.0).unwrap();
        let m = r.m;
        let gamma = 2.0;
        assert!((r.rhs - 30.0 / ((1.0 + m).powi(2) - gamma * m * m)).abs() < 1e-10);
        assert!((m - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn rank_one_and_dense_paths_agree() {
        let cov = build_covariance(&CovarianceModel::Ar1 { rho: 0.5 }, 24).unwrap();
        let d = sample_design(&cov, 10, EntryDist::Gaussian, SeedRecord { master: 5, replicate: 0 });
        let f = DesignFactor::new(&d).unwrap();
        let beta: Vec<f64> = (0..24).map(|i| (i as f64).sin()).collect();
        let c = Mat::from_fn(24, 24, |i, j| beta[i] * beta[j]);
        let a = det_equiv_check(DetEquivTarget::SignalOuter(&beta), &f, &cov, -0.7).unwrap();
        let b = det_equiv_check(DetEquivTarget::Matrix(c.as_ref()), &f, &cov, -0.7).unwrap();
        assert!((a.lhs - b.lhs).abs() < 1e-10 * a.lhs);
        assert!((a.rhs - b.rhs).abs() < 1e-10 * a.rhs);
    }

    #[test]
    fn isotropic_gap_is_small_at_desk_scale() {
        let cov = build_covariance(&CovarianceModel::Isotropic { alpha: 1.0 }, 800).unwrap();
        let d = sample_design(&cov, 400, EntryDist::Gaussian, SeedRecord { master: 6, replicate: 0 });
        let f = DesignFactor::new(&d).unwrap();
        let beta: Vec<f64> = (0..800).map(|i| if i % 10 == 0 { 1.0 / 80f64.sqrt() } else { 0.0 }).collect();
        let r = det_equiv_check(DetEquivTarget::SignalOuter(&beta), &f, &cov, -1.0).unwrap();
        assert!(r.relative_gap < 0.1, "gap {}", r.relative_gap);
    }
}
