//! Figure panels: fixed model families, one CSV per (panel, γ) series and a
//! manifest describing them.

use std::path::Path;

use clap::ValueEnum;

use crate::config::{ConfigLayer, CovKind, ExperimentConfig, GridSpec, SignalKind, DEFAULT_W_GRID, GOLDEN_W};
use crate::curve::{emit_csv, RiskCurve};
use crate::error::CliError;
use crate::experiment::{run_optimal_w, run_simulate, run_theory};
use crate::manifest::Manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureKind {
    /// Interpolator risk against `w` (Σ = I, AR(1)) and against `t`.
    Interpolator,
    /// `w★(λ)` (isotropic, spiked) and ridge risk against `λ` (equicorrelated).
    Mixing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Theory,
    Simulate,
    OptimalW,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Theory => "theory",
            Mode::Simulate => "simulate",
            Mode::OptimalW => "optimal-w",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<RiskCurve, CliError> {
        match self {
            Mode::Theory => run_theory(cfg),
            Mode::Simulate => run_simulate(cfg),
            Mode::OptimalW => run_optimal_w(cfg),
        }
    }
}

/// A panel: defaults that the user layer may override, except `cov`, `signal`,
/// `gamma`, and grids for anything but the panel's x variable.
pub struct Panel {
    pub name: &'static str,
    pub mode: Mode,
    pub x: &'static str,
    pub gammas: Vec<f64>,
    pub defaults: ConfigLayer,
    /// Vertical reference line drawn by the renderer.
    pub reference_line: Option<f64>,
}

fn model(cov: CovKind, signal: SignalKind) -> ConfigLayer {
    ConfigLayer { cov: Some(cov), signal: Some(signal), ..Default::default() }
}

pub fn panels(kind: FigureKind) -> Vec<Panel> {
    let text = |s: &str| Some(GridSpec::Text(s.into()));
    match kind {
        FigureKind::Interpolator => {
            let base = ConfigLayer {
                n: Some(200),
                t: Some(GridSpec::Value(5.0)),
                reps: Some(100),
                lambda: Some(GridSpec::Value(0.0)),
                w: text(DEFAULT_W_GRID),
                q: Some(0.1),
                sigma2: Some(1.0),
                bstar: Some(1.0),
                ..Default::default()
            };
            let gammas = vec![1.5, 2.0, 3.0];
            vec![
                Panel {
                    name: "fig1a",
                    mode: Mode::Simulate,
                    x: "w",
                    gammas: gammas.clone(),
                    defaults: base.overlay(&model(CovKind::Isotropic, SignalKind::Bern)),
                    reference_line: Some(GOLDEN_W),
                },
                Panel {
                    name: "fig1b",
                    mode: Mode::Simulate,
                    x: "w",
                    gammas: gammas.clone(),
                    defaults: base
                        .overlay(&ConfigLayer { rho: Some(0.5), ..model(CovKind::Ar1, SignalKind::Bern) }),
                    reference_line: Some(GOLDEN_W),
                },
                Panel {
                    name: "fig1c",
                    mode: Mode::Simulate,
                    x: "t",
                    gammas,
                    defaults: base.overlay(&ConfigLayer {
                        w: Some(GridSpec::Value(GOLDEN_W)),
                        t: text("0:10:11"),
                        ..model(CovKind::Isotropic, SignalKind::Bern)
                    }),
                    reference_line: None,
                },
            ]
        }
        FigureKind::Mixing => {
            let gammas = vec![1.2, 2.0, 4.0];
            let base = ConfigLayer {
                n: Some(200),
                lambda: text("log:1e-3:1e3:61"),
                bstar: Some(1.0),
                ..Default::default()
            };
            vec![
                Panel {
                    name: "fig2a",
                    mode: Mode::OptimalW,
                    x: "lambda",
                    gammas: gammas.clone(),
                    defaults: base
                        .overlay(&ConfigLayer { sigma2: Some(64.0), ..model(CovKind::Isotropic, SignalKind::Bern) }),
                    reference_line: None,
                },
                Panel {
                    name: "fig2b",
                    mode: Mode::OptimalW,
                    x: "lambda",
                    gammas,
                    defaults: base.overlay(&ConfigLayer {
                        sigma2: Some(1.0),
                        spike: Some(5.0),
                        theta: Some(0.5),
                        ..model(CovKind::Spiked, SignalKind::SpikedAligned)
                    }),
                    reference_line: None,
                },
                Panel {
                    name: "fig2c",
                    mode: Mode::Simulate,
                    x: "lambda",
                    gammas: vec![2.0],
                    defaults: ConfigLayer {
                        n: Some(400),
                        t: Some(GridSpec::Value(10.0)),
                        reps: Some(100),
                        w: Some(GridSpec::Value(GOLDEN_W)),
                        sigma2: Some(1.0),
                        bstar: Some(1.0),
                        rho: Some(0.5),
                        lambda: text("log:1e-2:1e1:10"),
                        ..model(CovKind::Equicorr, SignalKind::RandomEffects)
                    },
                    reference_line: None,
                },
            ]
        }
    }
}

/// Resolved config for one series: panel defaults under the user's settings,
/// with the panel's covariance, signal and `γ` kept.
pub fn series_config(panel: &Panel, user: &ConfigLayer, gamma: f64) -> Result<ExperimentConfig, CliError> {
    let mut layer = panel.defaults.overlay(user);
    // Only the panel's own sweep variable may become a grid.
    let scalar = |g: &Option<GridSpec>| matches!(g, None | Some(GridSpec::Value(_)));
    if panel.x != "w" && !scalar(&user.w) {
        layer.w = panel.defaults.w.clone();
    }
    if panel.x != "lambda" && !scalar(&user.lambda) {
        layer.lambda = panel.defaults.lambda.clone();
    }
    if panel.x != "t" && !scalar(&user.t) {
        layer.t = panel.defaults.t.clone();
    }
    layer.cov = panel.defaults.cov;
    layer.signal = panel.defaults.signal;
    layer.gamma = Some(gamma);
    ExperimentConfig::resolve(&layer)
}

pub fn series_file(panel: &str, gamma: f64) -> String {
    format!("{panel}_gamma{gamma}.csv")
}

/// Runs every panel and writes CSVs plus `manifest.txt` into `out`.
pub fn run_figure(kind: FigureKind, user: &ConfigLayer, out: &Path) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut manifest = Manifest::new(&format!("figure {}", kind.to_possible_value().expect("named").get_name()));
    let panels = panels(kind);
    manifest.set("panels", panels.iter().map(|p| p.name).collect::<Vec<_>>().join(","));
    let mut hashes = Vec::new();
    let mut seed = None;
    for panel in &panels {
        let mut files = Vec::new();
        for &gamma in &panel.gammas {
            let cfg = series_config(panel, user, gamma)?;
            let curve = panel.mode.run(&cfg)?;
            let file = series_file(panel.name, gamma);
            emit_csv(&curve, &out.join(&file))?;
            let (p, p_note) = cfg.dimension()?;
            manifest.set(&format!("{file}.p"), p.to_string());
            manifest.set(&format!("{file}.p_rounding"), p_note);
            manifest.set(&format!("{file}.config_hash"), cfg.hash());
            hashes.push(cfg.hash());
            seed.get_or_insert(cfg.seed);
            files.push(file);
            if panel.x == "w" {
                manifest.set(&format!("{}.w_grid", panel.name), cfg.w.to_string());
            }
        }
        manifest.set(&format!("{}.mode", panel.name), panel.mode.name().into());
        manifest.set(&format!("{}.x", panel.name), panel.x.into());
        manifest.set(&format!("{}.series", panel.name), "gamma".into());
        manifest.set(
            &format!("{}.series_values", panel.name),
            panel.gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(","),
        );
        manifest.set(&format!("{}.files", panel.name), files.join(","));
        if let Some(r) = panel.reference_line {
            manifest.set(&format!("{}.reference_line", panel.name), crate::curve::format_value(r));
        }
    }
    manifest.set("seed", seed.unwrap_or_default().to_string());
    manifest.set("config_hash", crate::config::hash_json(&hashes.join("\n")));
    manifest.write(&out.join("manifest.txt"))?;
    Ok(manifest)
}
