use super::TheoryError;

/// Smallest distance kept between a mixing weight and the endpoints 0 and 1.
pub const W_MIN: f64 = 1e-6;

/// A real-data proportion clamped to `[W_MIN, 1 − W_MIN]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MixingWeight {
    value: f64,
    clamped: bool,
}

impl MixingWeight {
    pub fn new(w: f64) -> Result<Self, TheoryError> {
        if !w.is_finite() {
            return Err(TheoryError::InvalidArgument(format!("mixing weight must be finite, got {w}")));
        }
        let value = w.clamp(W_MIN, 1.0 - W_MIN);
        Ok(MixingWeight { value, clamped: value != w })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    /// Whether the requested value lay outside the admissible interval.
    pub fn was_clamped(self) -> bool {
        self.clamped
    }
}

impl TryFrom<f64> for MixingWeight {
    type Error = TheoryError;

    fn try_from(w: f64) -> Result<Self, TheoryError> {
        MixingWeight::new(w)
    }
}

/// `c(w) = (w² + (1−w)²) / (w(2−w))`.
pub fn c_of_w(w: MixingWeight) -> f64 {
    c_raw(w.value())
}

pub(crate) fn c_raw(w: f64) -> f64 {
    let v = 1.0 - w;
    (w * w + v * v) / (w * (2.0 - w))
}

/// Scalar variance multipliers `f_0, …, f_{t_max}` of the interpolator,
/// `f_0 = 1`, `f_{t+1} = (w² + (1−w)²) + (1−w)² f_t`.
///
/// `f_t → c(w)`; increments are `(1−w)^{2t} (3w−1)(w−1)`, so the sequence
/// decreases for `w > 1/3`, increases below and is constant at `w = 1/3`.
pub fn variance_factors(w: f64, t_max: usize) -> Vec<f64> {
    let v2 = (1.0 - w) * (1.0 - w);
    let a = w * w + v2;
    let mut out = Vec::with_capacity(t_max + 1);
    let mut f = 1.0;
    out.push(f);
    for _ in 0..t_max {
        f = a + v2 * f;
        out.push(f);
    }
    out
}

/// `f_t` alone.
pub fn variance_factor(w: f64, t: usize) -> f64 {
    *variance_factors(w, t).last().expect("nonempty")
}

/// `w_0 = 1`, `w_t = (1 + w_{t−1}) / (2 + w_{t−1})`; length `T + 1`.
pub fn dynamic_weights(steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut w = 1.0;
    out.push(w);
    for _ in 0..steps {
        w = (1.0 + w) / (2.0 + w);
        out.push(w);
    }
    out
}

/// `w_t` as an exact fraction: `F_{2t+1} / F_{2t+2}` with `F_1 = F_2 = 1`.
/// Fits in `u64` for `t ≤ 45`.
pub fn dynamic_weight_fraction(t: usize) -> Option<(u64, u64)> {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 0..t {
        let c = a.checked_add(b)?;
        let d = c.checked_add(b)?;
        a = c;
        b = d;
    }
    Some((a, b))
}
