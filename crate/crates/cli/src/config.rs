//! Experiment configuration: a JSON file and command-line flags with the same
//! field names, flags taking precedence, resolved into an [`ExperimentConfig`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use collapse_lab::INV_GOLDEN_RATIO;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CovKind {
    Isotropic,
    Ar1,
    Spiked,
    Equicorr,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    Bern,
    RandomEffects,
    SpikedAligned,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Gaussian,
    Rademacher,
}

/// A scalar, an explicit list, or grid text: `lo:hi:count`, `log:lo:hi:count`
/// or `inf` (only meaningful for `t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Value(f64),
    List(Vec<f64>),
    Text(String),
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s.parse::<f64>() {
            Ok(v) if s != "inf" => GridSpec::Value(v),
            _ => GridSpec::Text(s.to_string()),
        })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Value(v) => write!(f, "{v}"),
            GridSpec::List(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", parts.join(" "))
            }
            GridSpec::Text(s) => f.write_str(s),
        }
    }
}

fn parse_num(field: &str, s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| CliError::config(format!("{field}: cannot parse {s:?} as a number")))
}

impl GridSpec {
    /// Expands to a sorted list; `inf` is rejected here.
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let vals = match self {
            GridSpec::Value(v) => vec![*v],
            GridSpec::List(vs) => vs.clone(),
            GridSpec::Text(s) => {
                let parts: Vec<&str> = s.split(':').collect();
                let (log, rest) = match parts.first() {
                    Some(&"log") => (true, &parts[1..]),
                    _ => (false, &parts[..]),
                };
                if rest.len() != 3 {
                    return Err(CliError::config(format!(
                        "{field}: expected a number, lo:hi:count or log:lo:hi:count, got {s:?}"
                    )));
                }
                let lo = parse_num(field, rest[0])?;
                let hi = parse_num(field, rest[1])?;
                let count: usize = rest[2]
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("{field}: grid count must be a positive integer in {s:?}")))?;
                if count == 0 {
                    return Err(CliError::config(format!("{field}: grid count must be positive")));
                }
                if hi < lo {
                    return Err(CliError::config(format!("{field}: grid upper end {hi} is below lower end {lo}")));
                }
                if log && lo <= 0.0 {
                    return Err(CliError::config(format!("{field}: log grid needs a positive lower end, got {lo}")));
                }
                if count == 1 {
                    vec![lo]
                } else {
                    let last = (count - 1) as f64;
                    (0..count)
                        .map(|i| {
                            let u = i as f64 / last;
                            if i == count - 1 {
                                hi
                            } else if log {
                                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
                            } else {
                                lo + (hi - lo) * i as f64 / last
                            }
                        })
                        .collect()
                }
            }
        };
        if vals.is_empty() {
            return Err(CliError::config(format!("{field}: empty grid")));
        }
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(CliError::config(format!("{field}: non-finite value {v}")));
        }
        if vals.windows(2).any(|p| p[1] < p[0]) {
            return Err(CliError::config(format!("{field}: grid must be sorted")));
        }
        Ok(vals)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, GridSpec::Text(s) if s.trim() == "inf")
    }
}

/// Generations to run: a finite list or the `t → ∞` limit.
#[derive(Debug, Clone, PartialEq)]
pub enum Steps {
    Limit,
    Finite(Vec<usize>),
}

/// One layer of settings. Used both as the config-file schema and as the flag set;
/// unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// JSON file with the same keys as the long flags (underscores for dashes).
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub cov: Option<CovKind>,
    #[arg(long, value_enum)]
    pub signal: Option<SignalKind>,
    /// Aspect ratio p/n.
    #[arg(long, value_name = "F")]
    pub gamma: Option<f64>,
    #[arg(long, value_name = "F")]
    pub sigma2: Option<f64>,
    #[arg(long, value_name = "F")]
    pub bstar: Option<f64>,
    /// Ridge penalty or grid; 0 selects the min-norm interpolator.
    #[arg(long, value_name = "F|GRID", allow_hyphen_values = true)]
    pub lambda: Option<GridSpec>,
    /// Mixing weight or grid.
    #[arg(long, value_name = "F|GRID", allow_hyphen_values = true)]
    pub w: Option<GridSpec>,
    /// Generations: N, GRID or `inf` (theory only).
    #[arg(long, value_name = "N")]
    pub t: Option<GridSpec>,
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
    #[arg(long, value_name = "N")]
    pub reps: Option<usize>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to COLLAPSE_LAB_THREADS.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Scale of the isotropic covariance.
    #[arg(long, value_name = "F")]
    pub alpha: Option<f64>,
    /// AR(1) or equicorrelation parameter.
    #[arg(long, value_name = "F")]
    pub rho: Option<f64>,
    /// Spike strength s in Σ = I + s e₁e₁ᵀ.
    #[arg(long, value_name = "F")]
    pub spike: Option<f64>,
    /// Alignment ⟨β, e₁⟩/‖β‖ of the spiked-aligned signal.
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Bernoulli rate of the bern signal.
    #[arg(long, value_name = "F")]
    pub q: Option<f64>,
    /// JSON array of rows for --cov file.
    #[arg(long, value_name = "PATH")]
    pub cov_file: Option<PathBuf>,
    /// JSON array for --signal file.
    #[arg(long, value_name = "PATH")]
    pub signal_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub entry: Option<Dist>,
    #[arg(long, value_enum)]
    pub noise: Option<Dist>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        ConfigLayer { $($f: $top.$f.clone().or_else(|| $base.$f.clone()),)* }
    };
}

impl ConfigLayer {
    /// Fields set in `top` win.
    pub fn overlay(&self, top: &ConfigLayer) -> ConfigLayer {
        let base = self;
        overlay!(
            base, top, config, cov, signal, gamma, sigma2, bstar, lambda, w, t, n, reps, seed, out, threads, alpha,
            rho, spike, theta, q, cov_file, signal_file, entry, noise
        )
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<ConfigLayer, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::config(format!("{}: line {}, column {}: {e}", origin.display(), e.line(), e.column()))
        })
    }

    pub fn read(path: &Path) -> Result<ConfigLayer, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        ConfigLayer::from_json(&text, path)
    }

    /// Flags on top of the file named by `--config`, if any.
    pub fn with_file(&self) -> Result<ConfigLayer, CliError> {
        match &self.config {
            Some(path) => Ok(ConfigLayer::read(path)?.overlay(self)),
            None => Ok(self.clone()),
        }
    }
}

/// Default `w` grid: 101 points in `[0.05, 0.95]`.
pub const DEFAULT_W_GRID: &str = "0.05:0.95:101";

/// Fully resolved settings. `out` and `threads` do not affect results and are
/// kept out of the hashed, serialized form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub cov: CovKind,
    pub signal: SignalKind,
    pub gamma: f64,
    pub sigma2: f64,
    pub bstar: f64,
    pub lambda: GridSpec,
    pub w: GridSpec,
    pub t: Option<GridSpec>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    pub rho: f64,
    pub spike: f64,
    pub theta: f64,
    pub q: f64,
    pub cov_file: Option<PathBuf>,
    pub signal_file: Option<PathBuf>,
    pub entry: Dist,
    pub noise: Dist,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(format!("{field} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn resolve(layer: &ConfigLayer) -> Result<ExperimentConfig, CliError> {
        let cfg = ExperimentConfig {
            cov: layer.cov.unwrap_or(CovKind::Isotropic),
            signal: layer.signal.unwrap_or(SignalKind::Bern),
            gamma: layer.gamma.unwrap_or(2.0),
            sigma2: layer.sigma2.unwrap_or(1.0),
            bstar: layer.bstar.unwrap_or(1.0),
            lambda: layer.lambda.clone().unwrap_or(GridSpec::Value(0.0)),
            w: layer.w.clone().unwrap_or_else(|| GridSpec::Text(DEFAULT_W_GRID.into())),
            t: layer.t.clone(),
            n: layer.n.unwrap_or(200),
            reps: layer.reps.unwrap_or(100),
            seed: layer.seed.unwrap_or(0),
            alpha: layer.alpha.unwrap_or(1.0),
            rho: layer.rho.unwrap_or(0.5),
            spike: layer.spike.unwrap_or(5.0),
            theta: layer.theta.unwrap_or(0.5),
            q: layer.q.unwrap_or(0.1),
            cov_file: layer.cov_file.clone(),
            signal_file: layer.signal_file.clone(),
            entry: layer.entry.unwrap_or(Dist::Gaussian),
            noise: layer.noise.unwrap_or(Dist::Gaussian),
            out: layer.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            threads: layer.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(CliError::config(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(CliError::config(format!("sigma2 must be nonnegative, got {}", self.sigma2)));
        }
        positive("bstar", self.bstar)?;
        positive("alpha", self.alpha)?;
        if self.n == 0 {
            return Err(CliError::config("n must be positive"));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads must be positive"));
        }
        self.lambdas()?;
        self.ws()?;
        if let Some(t) = &self.t {
            if !t.is_infinite() {
                self.finite_steps(t)?;
            }
        }
        if self.cov == CovKind::File && self.cov_file.is_none() {
            return Err(CliError::config("cov = file needs cov_file"));
        }
        if self.signal == SignalKind::File && self.signal_file.is_none() {
            return Err(CliError::config("signal = file needs signal_file"));
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Result<Vec<f64>, CliError> {
        let v = self.lambda.values("lambda")?;
        if let Some(l) = v.iter().find(|l| **l < 0.0) {
            return Err(CliError::config(format!("lambda must be nonnegative, got {l}")));
        }
        Ok(v)
    }

    pub fn ws(&self) -> Result<Vec<f64>, CliError> {
        let v = self.w.values("w")?;
        if let Some(w) = v.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(CliError::config(format!("w must lie in [0, 1], got {w}")));
        }
        Ok(v)
    }

    fn finite_steps(&self, t: &GridSpec) -> Result<Vec<usize>, CliError> {
        t.values("t")?
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 && v <= 1e6 {
                    Ok(v as usize)
                } else {
                    Err(CliError::config(format!("t must be a nonnegative integer, got {v}")))
                }
            })
            .collect()
    }

    /// `t` for the given mode; unset means the limit for theory and 5 for simulation.
    pub fn steps(&self, simulate: bool) -> Result<Steps, CliError> {
        match &self.t {
            None if simulate => Ok(Steps::Finite(vec![5])),
            None => Ok(Steps::Limit),
            Some(t) if t.is_infinite() => {
                if simulate {
                    Err(CliError::config("t = inf is only available in theory mode"))
                } else {
                    Ok(Steps::Limit)
                }
            }
            Some(t) => Ok(Steps::Finite(self.finite_steps(t)?)),
        }
    }

    /// `p = round(γ n)` and a description of the rounding.
    pub fn dimension(&self) -> Result<(usize, String), CliError> {
        let exact = self.gamma * self.n as f64;
        let p = exact.round();
        if p <= self.n as f64 {
            return Err(CliError::config(format!("p = round(gamma * n) = {p} must exceed n = {}", self.n)));
        }
        let note = if (exact - p).abs() < 1e-9 {
            format!("exact (gamma * n = {p})")
        } else {
            format!("rounded from gamma * n = {exact}")
        };
        Ok((p as usize, note))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hash_json(&serde_json::to_string(self).expect("config serializes"))
    }
}

pub(crate) fn hash_json(text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// `1/φ`, for grids and figure defaults.
pub const GOLDEN_W: f64 = INV_GOLDEN_RATIO;

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(s: &str) -> Result<Vec<f64>, CliError> {
        s.parse::<GridSpec>().unwrap().values("x")
    }

    #[test]
    fn grid_syntax() {
        assert_eq!(grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let l = grid("log:1e-2:1e2:5").unwrap();
        assert_eq!(l.len(), 5);
        for (a, b) in l.iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
        assert_eq!(grid("2:2:1").unwrap(), vec![2.0]);
        assert_eq!(grid("0:10:11").unwrap(), (0..=10).map(f64::from).collect::<Vec<_>>());
        for bad in ["1:0:3", "log:0:1:3", "0:1:0", "0:1", "abc", "log:1:x:2"] {
            assert!(matches!(grid(bad), Err(CliError::Config(_))), "{bad}");
        }
        assert!(GridSpec::List(vec![1.0, 0.5]).values("x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigLayer::from_json(r#"{"gamma": 3, "n": 50, "w": "0:1:3"}"#, Path::new("c.json")).unwrap();
        let flags = ConfigLayer { n: Some(80), ..Default::default() };
        let merged = file.overlay(&flags);
        assert_eq!(merged.gamma, Some(3.0));
        assert_eq!(merged.n, Some(80));
        assert_eq!(merged.w, Some(GridSpec::Text("0:1:3".into())));
    }

    #[test]
    fn unknown_fields_report_position() {
        let err = ConfigLayer::from_json("{\n  \"gamma\": 2,\n  \"bogus\": 1\n}", Path::new("c.json")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("bogus"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn resolution_and_validation() {
        let cfg = ExperimentConfig::resolve(&ConfigLayer::default()).unwrap();
        assert_eq!(cfg.ws().unwrap().len(), 101);
        assert_eq!(cfg.dimension().unwrap().0, 400);
        assert_eq!(cfg.steps(false).unwrap(), Steps::Limit);
        assert_eq!(cfg.steps(true).unwrap(), Steps::Finite(vec![5]));
        let odd = ExperimentConfig::resolve(&ConfigLayer { gamma: Some(1.5), n: Some(33), ..Default::default() })
            .unwrap();
        let (p, note) = odd.dimension().unwrap();
        assert_eq!(p, 50);
        assert!(note.starts_with("rounded"));
        for bad in [
            ConfigLayer { gamma: Some(0.5), ..Default::default() },
            ConfigLayer { w: Some(GridSpec::Value(1.5)), ..Default::default() },
            ConfigLayer { lambda: Some(GridSpec::Value(-1.0)), ..Default::default() },
            ConfigLayer { t: Some(GridSpec::Value(2.5)), ..Default::default() },
            ConfigLayer { cov: Some(CovKind::File), ..Default::default() },
        ] {
            assert_eq!(ExperimentConfig::resolve(&bad).unwrap_err().exit_code(), 2);
        }
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = ExperimentConfig::resolve(&ConfigLayer { out: Some("a".into()), threads: Some(1), ..Default::default() })
            .unwrap();
        let b = ExperimentConfig::resolve(&ConfigLayer { out: Some("b".into()), threads: Some(8), ..Default::default() })
            .unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig::resolve(&ConfigLayer { seed: Some(1), ..Default::default() }).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
