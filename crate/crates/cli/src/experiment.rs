//! The `theory`, `simulate` and `optimal-w` drivers.

use std::path::Path;

use collapse_lab::finite::{simulate, NoiseDist, Setting, SimulationPlan};
use collapse_lab::linalg;
use collapse_lab::spectra::{
    build_covariance, draw_signal, empirical_g, empirical_h, Covariance, CovarianceModel, EntryDist, SeedRecord,
    SignalModel, SpikeDirection,
};
use collapse_lab::theory::{optimal_w, MixingWeight, ModelParams, RidgePath, RiskDecomposition};
use faer::Mat;
use rayon::prelude::*;

use crate::config::{CovKind, Dist, ExperimentConfig, SignalKind, Steps};
use crate::curve::{RiskCurve, Row};
use crate::error::CliError;

/// Everything drawn once per configuration.
pub struct Problem {
    pub p: usize,
    pub p_note: String,
    pub cov: Covariance,
    pub beta: Vec<f64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!("{what} {}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn covariance_model(cfg: &ExperimentConfig, p: usize) -> Result<CovarianceModel, CliError> {
    Ok(match cfg.cov {
        CovKind::Isotropic => CovarianceModel::Isotropic { alpha: cfg.alpha },
        CovKind::Ar1 => CovarianceModel::Ar1 { rho: cfg.rho },
        CovKind::Spiked => CovarianceModel::Spiked { strength: cfg.spike, direction: SpikeDirection::FirstBasis },
        CovKind::Equicorr => CovarianceModel::Equicorrelated { rho: cfg.rho },
        CovKind::File => {
            let path = cfg.cov_file.as_ref().expect("validated");
            let rows: Vec<Vec<f64>> = read_json(path, "cov_file")?;
            if rows.len() != p || rows.iter().any(|r| r.len() != p) {
                return Err(CliError::config(format!("cov_file {} must be a {p}x{p} array", path.display())));
            }
            CovarianceModel::Explicit(Mat::from_fn(p, p, |i, j| rows[i][j]))
        }
    })
}

fn signal_model(cfg: &ExperimentConfig, p: usize) -> Result<SignalModel, CliError> {
    Ok(match cfg.signal {
        SignalKind::Bern => SignalModel::NormalizedBernoulli { q: cfg.q },
        SignalKind::RandomEffects => SignalModel::RandomEffects { bstar: cfg.bstar },
        SignalKind::SpikedAligned => SignalModel::SpikedAligned { theta: cfg.theta, direction: SpikeDirection::FirstBasis },
        SignalKind::File => {
            let path = cfg.signal_file.as_ref().expect("validated");
            let beta: Vec<f64> = read_json(path, "signal_file")?;
            if beta.len() != p {
                return Err(CliError::config(format!("signal_file {} has {} entries, expected {p}", path.display(), beta.len())));
            }
            SignalModel::Explicit(beta)
        }
    })
}

/// Builds `Σ` at `p = round(γ n)` and draws `β` from the signal stream of
/// replicate 0. Unit-norm signals are scaled to `‖β‖² = b★`.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem, CliError> {
    let (p, p_note) = cfg.dimension()?;
    let cov = build_covariance(&covariance_model(cfg, p)?, p)?;
    let draw = draw_signal(&signal_model(cfg, p)?, p, SeedRecord { master: cfg.seed, replicate: 0 })?;
    let beta = match cfg.signal {
        SignalKind::Bern | SignalKind::SpikedAligned => {
            let s = cfg.bstar.sqrt();
            draw.beta.iter().map(|b| b * s).collect()
        }
        SignalKind::RandomEffects | SignalKind::File => draw.beta,
    };
    Ok(Problem { p, p_note, cov, beta })
}

/// Limit formula and scalars for the theory columns.
///
/// `plug_in` (simulation) evaluates at the realized `Ĥ_p`, `Ĝ_p` and `b★ = ‖β‖²`;
/// otherwise the model-level objects are used where they exist and `Ĥ_p`, `Ĝ_p`
/// stand in for the rest.
pub fn theory_path(cfg: &ExperimentConfig, problem: &Problem, plug_in: bool) -> Result<(RidgePath, ModelParams), CliError> {
    let norm_sq = linalg::norm_sq(&problem.beta);
    let bstar = if plug_in || cfg.signal == SignalKind::File { norm_sq } else { cfg.bstar };
    let params = ModelParams { gamma: problem.p as f64 / cfg.n as f64, sigma2: cfg.sigma2, bstar };
    let eigs = &problem.cov.eigenvalues;
    let path = match (cfg.cov, cfg.signal) {
        (CovKind::Isotropic, _) => RidgePath::Isotropic { alpha: cfg.alpha },
        (_, SignalKind::RandomEffects) => RidgePath::RandomEffects { h: empirical_h(eigs)? },
        (CovKind::Spiked, SignalKind::SpikedAligned) if !plug_in => {
            RidgePath::Spiked { strength: cfg.spike, theta: cfg.theta }
        }
        _ => RidgePath::Generic {
            h: empirical_h(eigs)?,
            g: empirical_g(eigs, problem.cov.eigenvectors.as_ref(), &problem.beta)?,
        },
    };
    Ok((path, params))
}

/// The sweep implied by the grids: at most one of `w`, `lambda`, `t` may hold
/// more than one value.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: &'static str,
    pub ws: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub steps: Steps,
}

pub fn sweep(cfg: &ExperimentConfig, simulate: bool) -> Result<Sweep, CliError> {
    let ws = cfg.ws()?;
    let lambdas = cfg.lambdas()?;
    let steps = cfg.steps(simulate)?;
    let nt = match &steps {
        Steps::Limit => 1,
        Steps::Finite(ts) => ts.len(),
    };
    let multi: Vec<&'static str> =
        [("w", ws.len()), ("lambda", lambdas.len()), ("t", nt)].into_iter().filter(|(_, k)| *k > 1).map(|(v, _)| v).collect();
    if multi.len() > 1 {
        return Err(CliError::config(format!("only one of w, lambda, t may be a grid; got {}", multi.join(", "))));
    }
    Ok(Sweep { var: multi.first().copied().unwrap_or("w"), ws, lambdas, steps })
}

fn clamp_note(w: f64) -> Result<(MixingWeight, Option<String>), CliError> {
    let mw = MixingWeight::new(w)?;
    let note = mw.was_clamped().then(|| format!("w clamped from {w}"));
    Ok((mw, note))
}

fn theory_point(
    path: &RidgePath,
    params: &ModelParams,
    w: MixingWeight,
    lambda: f64,
    t: Option<usize>,
) -> Result<RiskDecomposition, CliError> {
    Ok(if lambda == 0.0 { path.interpolator_risk(params, w, t)? } else { path.ridge_risk(params, w, lambda)? })
}

/// One (w, λ, t) grid point with its sweep coordinate.
struct Point {
    x: f64,
    w: f64,
    lambda: f64,
    t: Option<usize>,
}

fn points(sw: &Sweep) -> Vec<Point> {
    let ts: Vec<Option<usize>> = match &sw.steps {
        Steps::Limit => vec![None],
        Steps::Finite(ts) => ts.iter().map(|&t| Some(t)).collect(),
    };
    let mut out = Vec::new();
    for &w in &sw.ws {
        for &lambda in &sw.lambdas {
            for &t in &ts {
                let x = match sw.var {
                    "lambda" => lambda,
                    "t" => t.map_or(f64::INFINITY, |t| t as f64),
                    _ => w,
                };
                out.push(Point { x, w, lambda, t });
            }
        }
    }
    out
}

/// Theory curve; ridge values are always the `t → ∞` limit, the interpolator
/// uses the finite-`t` multiplier when `t` is given.
pub fn run_theory(cfg: &ExperimentConfig) -> Result<RiskCurve, CliError> {
    let sw = sweep(cfg, false)?;
    let problem = build_problem(cfg)?;
    let (path, params) = theory_path(cfg, &problem, false)?;
    let rows = points(&sw)
        .par_iter()
        .map(|pt| {
            let (w, note) = clamp_note(pt.w)?;
            let r = theory_point(&path, &params, w, pt.lambda, pt.t)?;
            let x = if sw.var == "w" { w.value() } else { pt.x };
            let mut row = Row::theory(x, r.bias, r.variance, r.total);
            row.note = note;
            Ok(row)
        })
        .collect::<Result<Vec<Row>, CliError>>()?;
    Ok(RiskCurve { sweep_var: sw.var.into(), rows })
}

fn dist(d: Dist) -> (EntryDist, NoiseDist) {
    match d {
        Dist::Gaussian => (EntryDist::Gaussian, NoiseDist::Gaussian),
        Dist::Rademacher => (EntryDist::Rademacher, NoiseDist::Rademacher),
    }
}

/// Finite-`n` replicates beside plug-in theory.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<RiskCurve, CliError> {
    if cfg.reps < 2 {
        return Err(CliError::config(format!("reps must be at least 2 for simulation, got {}", cfg.reps)));
    }
    let sw = sweep(cfg, true)?;
    let Steps::Finite(ts) = &sw.steps else { unreachable!("simulation steps are finite") };
    let problem = build_problem(cfg)?;
    let (path, params) = theory_path(cfg, &problem, true)?;

    let mut settings = Vec::new();
    let mut notes = Vec::new();
    for &w in &sw.ws {
        let (mw, note) = clamp_note(w)?;
        for &lambda in &sw.lambdas {
            settings.push(Setting { w: mw.value(), lambda });
            notes.push((mw, note.clone()));
        }
    }
    let t_max = *ts.iter().max().expect("nonempty");
    let plan = SimulationPlan {
        cov: &problem.cov,
        beta: &problem.beta,
        n: cfg.n,
        entry: dist(cfg.entry).0,
        noise: dist(cfg.noise).1,
        sigma2: cfg.sigma2,
        seed: cfg.seed,
        reps: cfg.reps,
        settings: settings.clone(),
        t_max,
    };
    let summary = simulate(&plan)?;

    let mut rows = Vec::new();
    for (si, s) in settings.iter().enumerate() {
        let (mw, note) = &notes[si];
        for &t in ts {
            let r = theory_point(&path, &params, *mw, s.lambda, Some(t))?;
            let x = match sw.var {
                "lambda" => s.lambda,
                "t" => t as f64,
                _ => s.w,
            };
            let emp = summary.empirical[si][t];
            rows.push(Row {
                risk_emp_mean: Some(emp.mean),
                risk_emp_se: Some(emp.se),
                reps: Some(cfg.reps),
                note: note.clone(),
                ..Row::theory(x, r.bias, r.variance, r.total)
            });
        }
    }
    Ok(RiskCurve { sweep_var: sw.var.into(), rows })
}

/// `w★(λ)` over a positive λ grid from the limit formulas.
pub fn run_optimal_w(cfg: &ExperimentConfig) -> Result<RiskCurve, CliError> {
    let lambdas = cfg.lambdas()?;
    if let Some(l) = lambdas.iter().find(|l| **l <= 0.0) {
        return Err(CliError::config(format!("optimal-w needs a positive lambda grid, got {l}")));
    }
    let problem = build_problem(cfg)?;
    let (path, params) = theory_path(cfg, &problem, false)?;
    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let best = optimal_w(|w| Ok(path.ridge_risk(&params, w, lambda)?.total))?;
            let r = path.ridge_risk(&params, MixingWeight::new(best.w)?, lambda)?;
            Ok(Row { w_star: Some(best.w), ..Row::theory(lambda, r.bias, r.variance, r.total) })
        })
        .collect::<Result<Vec<Row>, CliError>>()?;
    Ok(RiskCurve { sweep_var: "lambda".into(), rows })
}
