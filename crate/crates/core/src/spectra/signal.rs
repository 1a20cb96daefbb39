use rand::Rng;
use rand_distr::StandardNormal;

use super::{SeedRecord, SpectraError, SpikeDirection};
use crate::linalg;
use crate::rng::{substream, Role, StreamId};

/// Bernoulli redraws allowed before giving up.
pub const MAX_SIGNAL_ATTEMPTS: u32 = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalModel {
    /// `β̃_i ~ Bern(q)` i.i.d., then `β = β̃/‖β̃‖`.
    NormalizedBernoulli { q: f64 },
    /// `β_i ~ N(0, b★/p)` i.i.d.
    RandomEffects { bstar: f64 },
    /// `β = θ v + √(1−θ²) v⊥` with `v⊥` a random unit vector orthogonal to `v`.
    SpikedAligned { theta: f64, direction: SpikeDirection },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalDraw {
    pub beta: Vec<f64>,
    /// Extra Bernoulli draws made because earlier ones were all zero.
    pub redraws: u32,
}

pub fn draw_signal(model: &SignalModel, p: usize, seed: SeedRecord) -> Result<SignalDraw, SpectraError> {
    if p == 0 {
        return Err(SpectraError::InvalidParameter("dimension p must be at least 1".into()));
    }
    let stream = |index: u32| substream(seed.master, StreamId::new(seed.replicate, Role::Signal, index));
    match model {
        SignalModel::NormalizedBernoulli { q } => {
            if !(*q > 0.0 && *q < 1.0) {
                return Err(SpectraError::InvalidParameter(format!("Bernoulli rate must lie in (0, 1), got {q}")));
            }
            for attempt in 0..MAX_SIGNAL_ATTEMPTS {
                let mut rng = stream(attempt);
                let raw: Vec<f64> = (0..p).map(|_| if rng.random::<f64>() < *q { 1.0 } else { 0.0 }).collect();
                let count = raw.iter().filter(|&&x| x > 0.0).count();
                if count > 0 {
                    let scale = 1.0 / (count as f64).sqrt();
                    return Ok(SignalDraw { beta: raw.iter().map(|x| x * scale).collect(), redraws: attempt });
                }
            }
            Err(SpectraError::DegenerateSignal(MAX_SIGNAL_ATTEMPTS))
        }
        SignalModel::RandomEffects { bstar } => {
            if !(bstar.is_finite() && *bstar > 0.0) {
                return Err(SpectraError::InvalidParameter(format!("b★ must be positive, got {bstar}")));
            }
            let sd = (bstar / p as f64).sqrt();
            let mut rng = stream(0);
            let beta = (0..p).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
            Ok(SignalDraw { beta, redraws: 0 })
        }
        SignalModel::SpikedAligned { theta, direction } => {
            if !(-1.0..=1.0).contains(theta) {
                return Err(SpectraError::InvalidParameter(format!("alignment must lie in [-1, 1], got {theta}")));
            }
            let v = direction.vector(p)?;
            let rest = (1.0 - theta * theta).max(0.0).sqrt();
            if rest == 0.0 {
                return Ok(SignalDraw { beta: v.iter().map(|x| theta.signum() * x).collect(), redraws: 0 });
            }
            if p == 1 {
                return Err(SpectraError::InvalidParameter("p = 1 admits no orthogonal complement".into()));
            }
            let mut rng = stream(0);
            let mut perp: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            // Two Gram-Schmidt passes keep ⟨v⊥, v⟩ at rounding level.
            for _ in 0..2 {
                let c = linalg::dot(&perp, &v);
                for (x, vi) in perp.iter_mut().zip(&v) {
                    *x -= c * vi;
                }
            }
            let norm = linalg::norm_sq(&perp).sqrt();
            let beta: Vec<f64> = v.iter().zip(&perp).map(|(vi, ui)| theta * vi + rest * ui / norm).collect();
            let norm = linalg::norm_sq(&beta).sqrt();
            Ok(SignalDraw { beta: beta.iter().map(|x| x / norm).collect(), redraws: 0 })
        }
        SignalModel::Explicit(beta) => {
            if beta.len() != p {
                return Err(SpectraError::InvalidParameter(format!(
                    "explicit signal has length {}, expected {p}",
                    beta.len()
                )));
            }
            if beta.iter().any(|x| !x.is_finite()) {
                return Err(SpectraError::InvalidParameter("explicit signal has non-finite entries".into()));
            }
            Ok(SignalDraw { beta: beta.clone(), redraws: 0 })
        }
    }
}
