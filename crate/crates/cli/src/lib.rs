//! Command-line front end for `collapse-lab`.
//!
//! Every run writes CSV files with the header in [`curve::HEADER`] together with a
//! `manifest.txt` of `key=value` lines (config hash, seed, `p` and its rounding,
//! file names).

pub mod config;
pub mod curve;
pub mod error;
pub mod experiment;
pub mod figure;
pub mod manifest;
pub mod selftest;

use std::path::Path;

use config::ExperimentConfig;
use curve::emit_csv;
use error::CliError;
use figure::Mode;
use manifest::Manifest;

/// Runs a single-curve mode and writes `<out>/<mode>.csv` and `<out>/manifest.txt`.
pub fn run_single(mode: Mode, cfg: &ExperimentConfig, out: &Path) -> Result<Manifest, CliError> {
    let curve = mode.run(cfg)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let file = format!("{}.csv", mode.name());
    emit_csv(&curve, &out.join(&file))?;
    let (p, p_note) = cfg.dimension()?;
    let mut m = Manifest::new(mode.name());
    m.set("config_hash", cfg.hash());
    m.set("seed", cfg.seed.to_string());
    m.set("n", cfg.n.to_string());
    m.set("p", p.to_string());
    m.set("p_rounding", p_note);
    m.set("w_grid", cfg.w.to_string());
    m.set("lambda_grid", cfg.lambda.to_string());
    m.set("sweep_var", curve.sweep_var.clone());
    m.set("files", file);
    m.write(&out.join("manifest.txt"))?;
    Ok(m)
}

/// `--threads`, else `COLLAPSE_LAB_THREADS`, else rayon's default.
pub fn thread_count(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("COLLAPSE_LAB_THREADS must be a positive integer, got {s:?}"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_resolution() {
        assert_eq!(thread_count(Some(3), Some("8")).unwrap(), Some(3));
        assert_eq!(thread_count(None, Some("8")).unwrap(), Some(8));
        assert_eq!(thread_count(None, None).unwrap(), None);
        assert_eq!(thread_count(None, Some("")).unwrap(), None);
        assert!(thread_count(None, Some("zero")).is_err());
        assert!(thread_count(None, Some("0")).is_err());
    }
}
