use std::sync::Arc;

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{build_covariance, Covariance, CovarianceModel, SpectraError};
use crate::rng::{substream, Role, StreamId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryDist {
    #[default]
    Gaussian,
    /// `±1` with equal probability.
    Rademacher,
}

/// Master seed plus the replicate it was drawn for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SeedRecord {
    pub master: u64,
    pub replicate: u64,
}

#[derive(Debug, Clone)]
pub struct DesignSample {
    /// `n × p`.
    pub x: Mat<f64>,
    pub sqrt_sigma: Arc<Mat<f64>>,
    pub entry: EntryDist,
    pub seed: SeedRecord,
}

impl DesignSample {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// `X = Z Σ^{1/2}` with `Z` drawn row by row from the design substream of `seed`.
pub fn sample_design(cov: &Covariance, n: usize, entry: EntryDist, seed: SeedRecord) -> DesignSample {
    let p = cov.dim();
    let mut rng = substream(seed.master, StreamId::new(seed.replicate, Role::Design, 0));
    let mut z = vec![0.0; n * p];
    for v in z.iter_mut() {
        *v = match entry {
            EntryDist::Gaussian => rng.sample(StandardNormal),
            EntryDist::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
    }
    let x = match cov.isotropic_scale {
        Some(alpha) if alpha == 1.0 => Mat::from_fn(n, p, |i, j| z[i * p + j]),
        Some(alpha) => {
            let r = alpha.sqrt();
            Mat::from_fn(n, p, |i, j| r * z[i * p + j])
        }
        None => {
            let zm = Mat::from_fn(n, p, |i, j| z[i * p + j]);
            &zm * cov.sqrt_sigma.as_ref()
        }
    };
    DesignSample { x, sqrt_sigma: Arc::clone(&cov.sqrt_sigma), entry, seed }
}

/// Builds `Σ` for `model` and draws one design from it.
pub fn draw_design(
    model: &CovarianceModel,
    n: usize,
    p: usize,
    entry: EntryDist,
    seed: SeedRecord,
) -> Result<DesignSample, SpectraError> {
    if n == 0 {
        return Err(SpectraError::InvalidParameter("sample size n must be at least 1".into()));
    }
    let cov = build_covariance(model, p)?;
    Ok(sample_design(&cov, n, entry, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(master: u64) -> SeedRecord {
        SeedRecord { master, replicate: 0 }
    }

    #[test]
    fn bit_identical_on_rerun() {
        let model = CovarianceModel::Ar1 { rho: 0.5 };
        let a = draw_design(&model, 20, 30, EntryDist::Gaussian, seed(7)).unwrap();
        let b = draw_design(&model, 20, 30, EntryDist::Gaussian, seed(7)).unwrap();
        assert_eq!(a.x, b.x);
        let c = draw_design(&model, 20, 30, EntryDist::Gaussian, SeedRecord { master: 7, replicate: 1 }).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn gaussian_entry_variance() {
        let n = 4000;
        let d = draw_design(&CovarianceModel::Isotropic { alpha: 1.0 }, n, 1, EntryDist::Gaussian, seed(1)).unwrap();
        let col: Vec<f64> = (0..n).map(|i| d.x[(i, 0)]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
        assert!(mean.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn isotropic_one_is_raw_z() {
        let iso = build_covariance(&CovarianceModel::Isotropic { alpha: 1.0 }, 6).unwrap();
        let d = sample_design(&iso, 5, EntryDist::Gaussian, seed(2));
        let explicit = build_covariance(&CovarianceModel::Explicit(Mat::identity(6, 6)), 6).unwrap();
        let e = sample_design(&explicit, 5, EntryDist::Gaussian, seed(2));
        assert!(crate::linalg::max_abs_diff(d.x.as_ref(), e.x.as_ref()) < 1e-14);
    }

    #[test]
    fn rademacher_entries_are_signs() {
        let d = draw_design(&CovarianceModel::Isotropic { alpha: 1.0 }, 10, 10, EntryDist::Rademacher, seed(3))
            .unwrap();
        for j in 0..10 {
            for i in 0..10 {
                assert_eq!(d.x[(i, j)].abs(), 1.0);
            }
        }
    }

    #[test]
    fn scaled_isotropic() {
        let d4 = draw_design(&CovarianceModel::Isotropic { alpha: 4.0 }, 3, 3, EntryDist::Gaussian, seed(4)).unwrap();
        let d1 = draw_design(&CovarianceModel::Isotropic { alpha: 1.0 }, 3, 3, EntryDist::Gaussian, seed(4)).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                assert_eq!(d4.x[(i, j)], 2.0 * d1.x[(i, j)]);
            }
        }
    }
}
