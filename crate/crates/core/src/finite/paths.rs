use rand::Rng;
use rand_distr::StandardNormal;

use super::{DesignFactor, FiniteError, IterationConfig, NoiseDist};
use crate::rng::{substream, Role, StreamId};
use crate::spectra::{DesignSample, SeedRecord};

/// One noise vector of length `n` with variance `σ²`: real noise `ε_t` for
/// [`Role::RealNoise`] or synthetic noise `ε̃_t` for [`Role::SyntheticNoise`].
pub fn draw_noise(n: usize, sigma2: f64, dist: NoiseDist, seed: SeedRecord, role: Role, t: usize) -> Vec<f64> {
    let index = u32::try_from(t).expect("iteration index fits the stream layout");
    let mut rng = substream(seed.master, StreamId::new(seed.replicate, role, index));
    let sd = sigma2.sqrt();
    (0..n)
        .map(|_| match dist {
            NoiseDist::Gaussian => sd * rng.sample::<f64, _>(StandardNormal),
            NoiseDist::Rademacher => {
                if rng.random::<bool>() {
                    sd
                } else {
                    -sd
                }
            }
        })
        .collect()
}

/// Noise of one replicate projected onto the column space of `X`:
/// `Uᵀε_0, …, Uᵀε_T` and `Uᵀε̃_1, …, Uᵀε̃_T` (`synthetic[0]` is unused and empty).
///
/// The components orthogonal to the column space never reach an estimator, so
/// this is all the path needs. Drawing it once and reusing it gives common random
/// numbers across `w`, `λ` and `t`.
#[derive(Debug, Clone)]
pub struct ProjectedNoise {
    pub real: Vec<Vec<f64>>,
    pub synthetic: Vec<Vec<f64>>,
}

impl ProjectedNoise {
    pub fn draw(factor: &DesignFactor, t_max: usize, sigma2: f64, dist: NoiseDist, seed: SeedRecord) -> Self {
        let n = factor.n();
        let real = (0..=t_max)
            .map(|t| factor.project(&draw_noise(n, sigma2, dist, seed, Role::RealNoise, t)))
            .collect();
        let synthetic = (0..=t_max)
            .map(|t| {
                if t == 0 {
                    Vec::new()
                } else {
                    factor.project(&draw_noise(n, sigma2, dist, seed, Role::SyntheticNoise, t))
                }
            })
            .collect();
        ProjectedNoise { real, synthetic }
    }

    pub fn t_max(&self) -> usize {
        self.real.len() - 1
    }
}

/// Row-space coordinates `c_0, …, c_T` of the iterates, `β̂_t = V c_t`.
///
/// With `g = s/(s² + nλ)` (`1/s` for `λ = 0`) and `b = Vᵀβ`:
///
/// ```text
/// c_0 = g ⊙ (S b + Uᵀε_0)
/// c_t = g ⊙ (w (S b + Uᵀε_t) + (1−w) (S c_{t−1} + Uᵀε̃_t))
/// ```
///
/// which is the update `β̂_t = (XᵀX + nλI)⁻¹Xᵀ(w y_t + (1−w) ỹ_t)` with
/// `y_t = Xβ + ε_t` and `ỹ_t = Xβ̂_{t−1} + ε̃_t`, written in the SVD basis.
pub fn iterate_coords(
    factor: &DesignFactor,
    b: &[f64],
    noise: &ProjectedNoise,
    w: f64,
    lambda: f64,
    t: usize,
) -> Vec<Vec<f64>> {
    assert!(t <= noise.t_max(), "noise drawn for t ≤ {}, asked for {t}", noise.t_max());
    let s = factor.singular_values();
    let nl = factor.n() as f64 * lambda;
    let gain: Vec<f64> = s.iter().map(|&si| si / (si * si + nl)).collect();
    let wt = 1.0 - w;
    let mut out = Vec::with_capacity(t + 1);
    let c0: Vec<f64> = (0..s.len()).map(|i| gain[i] * (s[i] * b[i] + noise.real[0][i])).collect();
    out.push(c0);
    for step in 1..=t {
        let prev = &out[step - 1];
        let real = &noise.real[step];
        let synth = &noise.synthetic[step];
        let c: Vec<f64> = (0..s.len())
            .map(|i| gain[i] * (w * (s[i] * b[i] + real[i]) + wt * (s[i] * prev[i] + synth[i])))
            .collect();
        out.push(c);
    }
    out
}

/// Full-length iterates `β̂_0, …, β̂_T` together with the labels each was fitted to.
#[derive(Debug, Clone)]
pub struct PathTrace {
    pub estimates: Vec<Vec<f64>>,
    /// `y_0` at `t = 0`, then `w y_t + (1−w) ỹ_t`.
    pub targets: Vec<Vec<f64>>,
}

fn noise_seed(design: &DesignSample, config: &IterationConfig) -> SeedRecord {
    SeedRecord { master: config.seed, replicate: design.seed.replicate }
}

fn run(
    design: &DesignSample,
    beta: &[f64],
    config: &IterationConfig,
    lambda: f64,
    seed: SeedRecord,
) -> Result<PathTrace, FiniteError> {
    let n = design.n();
    let factor = DesignFactor::new(design)?;
    if lambda == 0.0 {
        factor.require_sane_rank()?;
    }
    let xb = crate::linalg::mat_vec(design.x.as_ref(), beta);
    let real: Vec<Vec<f64>> =
        (0..=config.t).map(|t| draw_noise(n, config.sigma2, config.noise, seed, Role::RealNoise, t)).collect();
    let synth: Vec<Vec<f64>> = (0..=config.t)
        .map(|t| {
            if t == 0 {
                Vec::new()
            } else {
                draw_noise(n, config.sigma2, config.noise, seed, Role::SyntheticNoise, t)
            }
        })
        .collect();
    let noise = ProjectedNoise {
        real: real.iter().map(|e| factor.project(e)).collect(),
        synthetic: synth.iter().map(|e| if e.is_empty() { Vec::new() } else { factor.project(e) }).collect(),
    };
    let b = factor.coords(beta);
    let coords = iterate_coords(&factor, &b, &noise, config.w, lambda, config.t);
    let estimates: Vec<Vec<f64>> = coords.iter().map(|c| factor.lift(c)).collect();
    let mut targets = Vec::with_capacity(config.t + 1);
    targets.push(xb.iter().zip(&real[0]).map(|(a, e)| a + e).collect::<Vec<f64>>());
    for t in 1..=config.t {
        let fitted = crate::linalg::mat_vec(design.x.as_ref(), &estimates[t - 1]);
        let mixed = (0..n)
            .map(|i| config.w * (xb[i] + real[t][i]) + (1.0 - config.w) * (fitted[i] + synth[t][i]))
            .collect();
        targets.push(mixed);
    }
    Ok(PathTrace { estimates, targets })
}

/// Iterated ridge fit `β̂_{t,λ}` with noise from the replicate substreams of
/// `(config.seed, design.seed.replicate)`.
pub fn ridge_path(design: &DesignSample, beta: &[f64], config: &IterationConfig) -> Result<Vec<f64>, FiniteError> {
    let trace = ridge_trace(design, beta, config, noise_seed(design, config))?;
    Ok(trace.estimates.into_iter().last().expect("t + 1 iterates"))
}

/// Every ridge iterate up to `config.t`, with noise from `seed`.
pub fn ridge_trace(
    design: &DesignSample,
    beta: &[f64],
    config: &IterationConfig,
    seed: SeedRecord,
) -> Result<PathTrace, FiniteError> {
    config.validate(design, beta.len())?;
    if !(config.lambda > 0.0) {
        return Err(FiniteError::InvalidConfig("the ridge path needs λ > 0".into()));
    }
    run(design, beta, config, config.lambda, seed)
}

/// Iterated min-norm interpolator `β̂_t = (XᵀX)†Xᵀ(w y_t + (1−w) ỹ_t)`.
pub fn interpolator_path(
    design: &DesignSample,
    beta: &[f64],
    config: &IterationConfig,
) -> Result<Vec<f64>, FiniteError> {
    let trace = interpolator_trace(design, beta, config, noise_seed(design, config))?;
    Ok(trace.estimates.into_iter().last().expect("t + 1 iterates"))
}

pub fn interpolator_trace(
    design: &DesignSample,
    beta: &[f64],
    config: &IterationConfig,
    seed: SeedRecord,
) -> Result<PathTrace, FiniteError> {
    config.validate(design, beta.len())?;
    config.require_overparametrized()?;
    run(design, beta, config, 0.0, seed)
}
