//! Numerical toolkit for model collapse in overparametrized linear regression.
//!
//! Each training generation mixes fresh real labels (weight `w`) with synthetic
//! labels produced by the previous fit. The crate provides:
//!
//! * [`spectra`]: covariance and signal families, seeded design matrices and the
//!   spectral measures `Ĥ_p` / `Ĝ_p`;
//! * [`stieltjes`]: the self-consistent equation for the companion Stieltjes
//!   transform `m(z)` on the negative axis and at `z → 0⁻`;
//! * [`theory`]: limiting bias/variance formulas, optimal mixing weights and the
//!   dynamic-mixing recursion;
//! * [`finite`]: the iterated estimators themselves, exact conditional risks at
//!   finite `(n, p, t)`, Monte Carlo summaries and a deterministic-equivalent check.
//!
//! All randomness flows through [`rng`], so results are reproducible bit-for-bit
//! regardless of how replicates are scheduled across threads.

pub mod finite;
pub mod linalg;
pub mod rng;
pub mod spectra;
pub mod stieltjes;
pub mod theory;

/// `1/φ`, the golden-ratio mixing weight.
pub const INV_GOLDEN_RATIO: f64 = 0.618_033_988_749_894_8;
