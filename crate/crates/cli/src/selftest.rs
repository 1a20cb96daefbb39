//! Fast closed-form checks of the installed build.

use collapse_lab::spectra::DiscreteMeasure;
use collapse_lab::stieltjes::{m_at_zero, solve_m};
use collapse_lab::theory::{
    c_of_w, dynamic_weights, interpolator_limit_risk, isotropic_m, variance_factors, LimitModel, MixingWeight,
};
use collapse_lab::INV_GOLDEN_RATIO;

use crate::curve::{RiskCurve, Row};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn run() -> Vec<Check> {
    let mut out = Vec::new();

    let mut worst = 0.0_f64;
    for &(alpha, gamma, z) in &[(1.0, 2.0, -1.0), (0.5, 3.0, -0.1), (2.0, 1.5, -5.0)] {
        let h = DiscreteMeasure::dirac(alpha).expect("valid atom");
        let m = solve_m(z, &h, gamma).map(|s| s.m).unwrap_or(f64::NAN);
        worst = worst.max((m - isotropic_m(alpha, gamma, z)).abs());
    }
    out.push(check("stieltjes quadratic root", worst < 1e-10, format!("max error {worst:.3e}")));

    let h = DiscreteMeasure::dirac(2.0).expect("valid atom");
    let m0 = m_at_zero(&h, 3.0).map(|s| s.m).unwrap_or(f64::NAN);
    let err = (m0 - 0.25).abs();
    out.push(check("stieltjes at zero", err < 1e-10, format!("error {err:.3e}")));

    let unit = DiscreteMeasure::dirac(1.0).expect("valid atom");
    let model = LimitModel::new(unit.clone(), unit, 2.0, 1.0, 1.0);
    let err = match model {
        Ok(model) => {
            let w = MixingWeight::new(0.3).expect("in range");
            let r = interpolator_limit_risk(&model, w).map(|r| r.total).unwrap_or(f64::NAN);
            (r - (c_of_w(w) + 0.5)).abs()
        }
        Err(_) => f64::NAN,
    };
    out.push(check("isotropic interpolator limit", err < 1e-10, format!("error {err:.3e}")));

    let d = dynamic_weights(5);
    let ok = (d[1] - 2.0 / 3.0).abs() < 1e-15 && (d[2] - 0.625).abs() < 1e-15 && (d[5] - INV_GOLDEN_RATIO).abs() < 1e-4;
    out.push(check("dynamic mixing weights", ok, format!("w1 = {}, w2 = {}, w5 = {}", d[1], d[2], d[5])));

    let up = variance_factors(0.2, 5).windows(2).all(|p| p[1] > p[0]);
    let down = variance_factors(0.5, 5).windows(2).all(|p| p[1] < p[0]);
    out.push(check("variance factor monotonicity", up && down, format!("increasing at 0.2: {up}, decreasing at 0.5: {down}")));

    let curve = RiskCurve { sweep_var: "w".into(), rows: vec![Row::theory(0.25, 1.5, 0.125, 1.625)] };
    let ok = RiskCurve::parse(&curve.to_csv()).map(|c| c == curve).unwrap_or(false);
    out.push(check("csv round trip", ok, String::new()));
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run() {
            assert!(c.passed, "{} {}", c.name, c.detail);
        }
    }
}
