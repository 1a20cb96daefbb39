use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

pub const HEADER: &str = "sweep_var,sweep_value,bias_theory,var_theory,risk_theory,risk_emp_mean,risk_emp_se,reps";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_value: f64,
    pub bias_theory: f64,
    pub var_theory: f64,
    pub risk_theory: f64,
    pub risk_emp_mean: Option<f64>,
    pub risk_emp_se: Option<f64>,
    pub reps: Option<usize>,
    /// Only in optimal-w curves.
    pub w_star: Option<f64>,
    pub note: Option<String>,
}

impl Row {
    pub fn theory(sweep_value: f64, bias: f64, variance: f64, total: f64) -> Row {
        Row {
            sweep_value,
            bias_theory: bias,
            var_theory: variance,
            risk_theory: total,
            risk_emp_mean: None,
            risk_emp_se: None,
            reps: None,
            w_star: None,
            note: None,
        }
    }
}

/// A sweep over one variable. Columns `w_star` and `note` are appended after the
/// fixed header only when some row carries them.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub sweep_var: String,
    pub rows: Vec<Row>,
}

/// Rounds to 12 significant digits and prints the shortest decimal form of the result.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("rounded float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

impl RiskCurve {
    fn has_w_star(&self) -> bool {
        self.rows.iter().any(|r| r.w_star.is_some())
    }

    fn has_note(&self) -> bool {
        self.rows.iter().any(|r| r.note.is_some())
    }

    pub fn to_csv(&self) -> String {
        let (ws, note) = (self.has_w_star(), self.has_note());
        let mut out = String::from(HEADER);
        if ws {
            out.push_str(",w_star");
        }
        if note {
            out.push_str(",note");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.sweep_var,
                format_value(r.sweep_value),
                format_value(r.bias_theory),
                format_value(r.var_theory),
                format_value(r.risk_theory),
                opt(r.risk_emp_mean, format_value),
                opt(r.risk_emp_se, format_value),
                opt(r.reps, |n| n.to_string()),
            );
            if ws {
                let _ = write!(out, ",{}", opt(r.w_star, format_value));
            }
            if note {
                let _ = write!(out, ",{}", r.note.as_deref().unwrap_or("").replace([',', '\n'], ";"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<RiskCurve, CliError> {
        let bad = |line: usize, msg: String| CliError::Other(format!("csv line {line}: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
        let extra = header
            .strip_prefix(HEADER)
            .ok_or_else(|| bad(1, format!("unexpected header {header:?}")))?;
        let (ws, note) = match extra {
            "" => (false, false),
            ",w_star" => (true, false),
            ",note" => (false, true),
            ",w_star,note" => (true, true),
            other => return Err(bad(1, format!("unexpected extra columns {other:?}"))),
        };
        let width = 8 + ws as usize + note as usize;
        let mut sweep_var = String::new();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let ln = i + 2;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != width {
                return Err(bad(ln, format!("expected {width} fields, got {}", cells.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, format!("bad number {s:?}")));
            let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            if i == 0 {
                sweep_var = cells[0].to_string();
            } else if cells[0] != sweep_var {
                return Err(bad(ln, "sweep variable changes within the file".into()));
            }
            rows.push(Row {
                sweep_value: num(cells[1])?,
                bias_theory: num(cells[2])?,
                var_theory: num(cells[3])?,
                risk_theory: num(cells[4])?,
                risk_emp_mean: opt_num(cells[5])?,
                risk_emp_se: opt_num(cells[6])?,
                reps: if cells[7].is_empty() {
                    None
                } else {
                    Some(cells[7].parse().map_err(|_| bad(ln, format!("bad count {:?}", cells[7])))?)
                },
                w_star: if ws { opt_num(cells[8])? } else { None },
                note: if note && !cells[width - 1].is_empty() { Some(cells[width - 1].to_string()) } else { None },
            });
        }
        Ok(RiskCurve { sweep_var, rows })
    }
}

pub fn emit_csv(curve: &RiskCurve, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, curve.to_csv()).map_err(|e| CliError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<RiskCurve, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RiskCurve::parse(&text)
}
