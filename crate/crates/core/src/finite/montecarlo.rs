use rayon::prelude::*;

use super::{iterate_coords, FiniteError, NoiseDist, ProjectedNoise, RiskEvaluator};
use crate::linalg;
use crate::spectra::{sample_design, Covariance, EntryDist, SeedRecord};

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

/// Mean and `sd/√R` (with the `R − 1` variance), accumulated in input order.
pub fn mean_se(values: &[f64]) -> MeanSe {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return MeanSe { mean, se: f64::NAN };
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    MeanSe { mean, se: (ss / (r - 1.0) / r).sqrt() }
}

/// Mean and SE of `‖β̂_r − β‖²_Σ` over replicates.
pub fn empirical_risk(estimators: &[Vec<f64>], beta: &[f64], cov: &Covariance) -> Result<MeanSe, FiniteError> {
    if estimators.len() < 2 {
        return Err(FiniteError::InvalidConfig("empirical risk needs at least two replicates".into()));
    }
    let p = beta.len();
    if cov.dim() != p {
        return Err(FiniteError::Dimension { expected: p, got: cov.dim() });
    }
    let losses = estimators
        .iter()
        .map(|est| {
            if est.len() != p {
                return Err(FiniteError::Dimension { expected: p, got: est.len() });
            }
            let diff: Vec<f64> = est.iter().zip(beta).map(|(a, b)| a - b).collect();
            Ok(linalg::quad_form(cov.sigma.as_ref(), &diff))
        })
        .collect::<Result<Vec<f64>, FiniteError>>()?;
    Ok(mean_se(&losses))
}

/// One `(w, λ)` combination; `λ = 0` is the interpolator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    pub w: f64,
    pub lambda: f64,
}

/// Monte Carlo bias/variance of `β̂_t` over noise only, with `X` held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMoments {
    /// `‖β̄ − β‖²_Σ − Tr[ŜΣ]/R`, unbiased for the conditional bias.
    pub bias: MeanSe,
    /// `Tr[ŜΣ]` with `Ŝ` the sample covariance of the replicates.
    pub variance: MeanSe,
}

/// Noise-only moments for every setting and every `t ≤ t_max` on one design.
/// Noise is shared across settings and `t` (common random numbers).
/// Result is indexed `[setting][t]`.
pub fn noise_moments(
    eval: &RiskEvaluator,
    settings: &[Setting],
    t_max: usize,
    sigma2: f64,
    noise: NoiseDist,
    master: u64,
    reps: usize,
) -> Result<Vec<Vec<NoiseMoments>>, FiniteError> {
    if reps < 2 {
        return Err(FiniteError::InvalidConfig("noise moments need at least two replicates".into()));
    }
    if settings.iter().any(|s| s.lambda == 0.0) && eval.factor.n() >= eval.factor.p() {
        return Err(FiniteError::InvalidConfig("the interpolator needs p > n".into()));
    }
    let b = eval.geometry.signal_coords();
    // draws[rep][setting][t] = c_t
    let draws: Vec<Vec<Vec<Vec<f64>>>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let seed = SeedRecord { master, replicate: rep };
            let pn = ProjectedNoise::draw(&eval.factor, t_max, sigma2, noise, seed);
            settings.iter().map(|s| iterate_coords(&eval.factor, b, &pn, s.w, s.lambda, t_max)).collect()
        })
        .collect();

    let k = eval.geometry.k();
    let r = b.len();
    let reps_f = reps as f64;
    let mut out = Vec::with_capacity(settings.len());
    for si in 0..settings.len() {
        let mut row = Vec::with_capacity(t_max + 1);
        for t in 0..=t_max {
            let mut mean = vec![0.0; r];
            for d in &draws {
                for (m, c) in mean.iter_mut().zip(&d[si][t]) {
                    *m += c;
                }
            }
            for m in &mut mean {
                *m /= reps_f;
            }
            let mut cov = faer::Mat::<f64>::zeros(r, r);
            let mut q = Vec::with_capacity(reps);
            for d in &draws {
                let dev: Vec<f64> = d[si][t].iter().zip(&mean).map(|(c, m)| c - m).collect();
                q.push(linalg::quad_form(k, &dev));
                for j in 0..r {
                    for i in 0..r {
                        cov[(i, j)] += dev[i] * dev[j];
                    }
                }
            }
            for j in 0..r {
                for i in 0..r {
                    cov[(i, j)] /= reps_f - 1.0;
                }
            }
            let q_stats = mean_se(&q);
            let variance = q_stats.mean * reps_f / (reps_f - 1.0);
            let var_se = q_stats.se * reps_f / (reps_f - 1.0);

            let y: Vec<f64> = mean.iter().zip(b).map(|(m, b)| m - b).collect();
            let bias = eval.geometry.offset_norm(&y) - variance / reps_f;
            // Delta-method SE of ‖β̄ − β‖²_Σ for Gaussian β̄: 4 ℓᵀŜℓ/R + 2 Tr[(ŜK)²]/R².
            let ky = linalg::mat_vec(k, &y);
            let ell: Vec<f64> = ky.iter().zip(eval.geometry.k_perp()).map(|(a, b)| a - b).collect();
            let sk = &cov * k;
            let tr_sq: f64 = (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| sk[(i, j)] * sk[(j, i)]).sum();
            let bias_se = (4.0 * linalg::quad_form(cov.as_ref(), &ell) / reps_f + 2.0 * tr_sq / (reps_f * reps_f)).sqrt();
            row.push(NoiseMoments {
                bias: MeanSe { mean: bias, se: bias_se },
                variance: MeanSe { mean: variance, se: var_se },
            });
        }
        out.push(row);
    }
    Ok(out)
}

/// Replicated experiment: every replicate draws its own design and noise from
/// the substreams of `(seed, replicate)`; `β` is fixed.
#[derive(Debug, Clone)]
pub struct SimulationPlan<'a> {
    pub cov: &'a Covariance,
    pub beta: &'a [f64],
    pub n: usize,
    pub entry: EntryDist,
    pub noise: NoiseDist,
    pub sigma2: f64,
    pub seed: u64,
    pub reps: usize,
    pub settings: Vec<Setting>,
    pub t_max: usize,
}

/// Replicate averages indexed `[setting][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    /// Realized loss `‖β̂_t − β‖²_Σ`.
    pub empirical: Vec<Vec<MeanSe>>,
    /// Exact conditional risk `E[‖β̂_t − β‖²_Σ | X]`, averaged over the designs.
    pub conditional: Vec<Vec<MeanSe>>,
}

pub fn simulate(plan: &SimulationPlan<'_>) -> Result<SimulationSummary, FiniteError> {
    if plan.reps < 2 {
        return Err(FiniteError::InvalidConfig("simulation needs at least two replicates".into()));
    }
    let p = plan.cov.dim();
    if plan.beta.len() != p {
        return Err(FiniteError::Dimension { expected: p, got: plan.beta.len() });
    }
    let needs_interp = plan.settings.iter().any(|s| s.lambda == 0.0);
    if needs_interp && plan.n >= p {
        return Err(FiniteError::InvalidConfig(format!("the interpolator needs p > n (n = {}, p = {p})", plan.n)));
    }
    for s in &plan.settings {
        if !(0.0..=1.0).contains(&s.w) || !(s.lambda >= 0.0 && s.lambda.is_finite()) {
            return Err(FiniteError::InvalidConfig(format!("invalid setting w = {}, λ = {}", s.w, s.lambda)));
        }
    }
    type Rep = (Vec<Vec<f64>>, Vec<Vec<f64>>);
    let per_rep: Vec<Rep> = (0..plan.reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<Rep, FiniteError> {
            let seed = SeedRecord { master: plan.seed, replicate: rep };
            let design = sample_design(plan.cov, plan.n, plan.entry, seed);
            let eval = RiskEvaluator::new(&design, plan.cov, plan.beta)?;
            if needs_interp {
                eval.factor.require_sane_rank()?;
            }
            let pn = ProjectedNoise::draw(&eval.factor, plan.t_max, plan.sigma2, plan.noise, seed);
            let b = eval.geometry.signal_coords();
            let mut emp = Vec::with_capacity(plan.settings.len());
            let mut cond = Vec::with_capacity(plan.settings.len());
            for s in &plan.settings {
                let coords = iterate_coords(&eval.factor, b, &pn, s.w, s.lambda, plan.t_max);
                emp.push(coords.iter().map(|c| eval.geometry.error_norm(c)).collect());
                cond.push((0..=plan.t_max).map(|t| eval.risk(s.w, s.lambda, t, plan.sigma2).total).collect());
            }
            Ok((emp, cond))
        })
        .collect::<Result<Vec<Rep>, FiniteError>>()?;

    let summarize = |pick: &dyn Fn(&Rep) -> &Vec<Vec<f64>>| -> Vec<Vec<MeanSe>> {
        (0..plan.settings.len())
            .map(|si| {
                (0..=plan.t_max)
                    .map(|t| mean_se(&per_rep.iter().map(|r| pick(r)[si][t]).collect::<Vec<f64>>()))
                    .collect()
            })
            .collect()
    };
    Ok(SimulationSummary { empirical: summarize(&|r| &r.0), conditional: summarize(&|r| &r.1) })
}
