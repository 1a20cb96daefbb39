use faer::{Mat, MatRef};

use super::FiniteError;
use crate::linalg;
use crate::spectra::{Covariance, DesignSample, EntryDist};

/// Rank of `X` may fall this far below `min(n, p)` before a Gaussian design is
/// flagged as a numerical failure.
pub const RANK_SLACK: usize = 5;

/// Truncated SVD `X = U diag(s) Vᵀ` restricted to the numerical rank.
///
/// `M = XᵀX` has eigenpairs `(s_i², v_i)` on the row space and `0` on its
/// orthogonal complement; every estimator in this module lives in the row space,
/// so it is stored by its coordinates `c` in the basis `V`.
#[derive(Debug, Clone)]
pub struct DesignFactor {
    n: usize,
    p: usize,
    u: Mat<f64>,
    s: Vec<f64>,
    v: Mat<f64>,
    suspicious: bool,
}

impl DesignFactor {
    pub fn new(design: &DesignSample) -> Result<Self, FiniteError> {
        Self::from_matrix(design.x.as_ref(), design.entry == EntryDist::Gaussian)
    }

    /// Singular values at or below `max(n, p) · ε · s_max` are dropped.
    pub fn from_matrix(x: MatRef<'_, f64>, gaussian: bool) -> Result<Self, FiniteError> {
        let (n, p) = (x.nrows(), x.ncols());
        let (u_full, s_full, v_full) = linalg::thin_svd(x)?;
        let smax = s_full.first().copied().unwrap_or(0.0);
        let cutoff = n.max(p) as f64 * f64::EPSILON * smax;
        let rank = s_full.iter().take_while(|&&s| s > cutoff).count();
        let u = Mat::from_fn(n, rank, |i, j| u_full[(i, j)]);
        let v = Mat::from_fn(p, rank, |i, j| v_full[(i, j)]);
        let suspicious = gaussian && rank + RANK_SLACK < n.min(p);
        Ok(DesignFactor { n, p, u, s: s_full[..rank].to_vec(), v, suspicious })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    /// Nonzero eigenvalues `μ_i = s_i²` of `XᵀX`.
    pub fn gram_eigenvalues(&self) -> Vec<f64> {
        self.s.iter().map(|s| s * s).collect()
    }

    pub fn u(&self) -> MatRef<'_, f64> {
        self.u.as_ref()
    }

    pub fn v(&self) -> MatRef<'_, f64> {
        self.v.as_ref()
    }

    /// Whether a Gaussian design lost more than [`RANK_SLACK`] dimensions of rank.
    pub fn suspicious_rank(&self) -> bool {
        self.suspicious
    }

    pub(crate) fn require_sane_rank(&self) -> Result<(), FiniteError> {
        if self.suspicious {
            return Err(FiniteError::SuspiciousRank { rank: self.rank(), expected: self.n.min(self.p) });
        }
        Ok(())
    }

    /// `Vᵀx`.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        linalg::mat_t_vec(self.v.as_ref(), x)
    }

    /// `Uᵀε`.
    pub fn project(&self, eps: &[f64]) -> Vec<f64> {
        linalg::mat_t_vec(self.u.as_ref(), eps)
    }

    /// `V c`.
    pub fn lift(&self, c: &[f64]) -> Vec<f64> {
        linalg::mat_vec(self.v.as_ref(), c)
    }
}

/// `Σ`-inner products of row-space vectors against a fixed signal `β`.
///
/// Stores `K = VᵀΣV`, `k = VᵀΣ P⊥β`, `‖P⊥β‖²_Σ` and `b = Vᵀβ`, where `P⊥` projects
/// onto the null space of `X`. Then for `β̂ = V c`,
/// `‖β̂ − β‖²_Σ = yᵀKy − 2yᵀk + ‖P⊥β‖²_Σ` with `y = c − b`.
#[derive(Debug, Clone)]
pub struct SigmaGeometry {
    k: Mat<f64>,
    k_perp: Vec<f64>,
    perp_norm: f64,
    b: Vec<f64>,
}

impl SigmaGeometry {
    pub fn new(factor: &DesignFactor, cov: &Covariance, beta: &[f64]) -> Result<Self, FiniteError> {
        let p = factor.p();
        if cov.dim() != p || beta.len() != p {
            return Err(FiniteError::Dimension { expected: p, got: if cov.dim() != p { cov.dim() } else { beta.len() } });
        }
        let v = factor.v();
        let b = factor.coords(beta);
        let vb = factor.lift(&b);
        let perp: Vec<f64> = beta.iter().zip(&vb).map(|(x, y)| x - y).collect();
        let (k, sigma_perp) = match cov.isotropic_scale {
            Some(alpha) => {
                let r = factor.rank();
                (Mat::from_fn(r, r, |i, j| if i == j { alpha } else { 0.0 }), perp.iter().map(|x| alpha * x).collect())
            }
            None => {
                let sv = cov.sigma.as_ref() * v;
                (v.transpose() * sv.as_ref(), linalg::mat_vec(cov.sigma.as_ref(), &perp))
            }
        };
        let k_perp = factor.coords(&sigma_perp);
        let perp_norm = linalg::dot(&perp, &sigma_perp).max(0.0);
        Ok(SigmaGeometry { k, k_perp, perp_norm, b })
    }

    /// `Vᵀβ`.
    pub fn signal_coords(&self) -> &[f64] {
        &self.b
    }

    pub fn k(&self) -> MatRef<'_, f64> {
        self.k.as_ref()
    }

    pub fn k_perp(&self) -> &[f64] {
        &self.k_perp
    }

    /// `‖P⊥β‖²_Σ`, the part of the error no row-space estimator can remove.
    pub fn null_space_bias(&self) -> f64 {
        self.perp_norm
    }

    /// `‖V y − P⊥β‖²_Σ` for an offset `y = c − b`.
    pub fn offset_norm(&self, y: &[f64]) -> f64 {
        let quad = linalg::quad_form(self.k.as_ref(), y);
        (quad - 2.0 * linalg::dot(y, &self.k_perp) + self.perp_norm).max(0.0)
    }

    /// `‖V c − β‖²_Σ`.
    pub fn error_norm(&self, c: &[f64]) -> f64 {
        let y: Vec<f64> = c.iter().zip(&self.b).map(|(c, b)| c - b).collect();
        self.offset_norm(&y)
    }
}
