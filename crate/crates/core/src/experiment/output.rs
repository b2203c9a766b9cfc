//! Plain-text writers. Every float is printed with 17 significant digits so
//! files round-trip exactly and diff cleanly between runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, SolitonFit};
use crate::dynamics::State;
use crate::error::{KbkError, Result};

pub const DIAGNOSTICS_HEADER: &str = "t,E,delta,H0,I3,mass_eta,mass_v,tail,min_depth";

/// `x` in `{:.16e}` form: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| KbkError::io(path, e))
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from(DIAGNOSTICS_HEADER);
    s.push('\n');
    for r in records {
        let row = [r.t, r.energy, r.delta, r.h0, r.i3, r.mass_eta, r.mass_v, r.tail, r.min_depth];
        let cells: Vec<String> = row.iter().map(|&v| fmt17(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Header line `# t=<t> <config echo>` followed by `x η v` rows.
pub fn snapshot(state: &State, t: f64, echo: &str) -> String {
    let mut s = format!("# t={} {echo}\n", fmt17(t));
    for ((x, e), v) in state.grid().nodes().iter().zip(&state.eta).zip(&state.v) {
        let _ = writeln!(s, "{} {} {}", fmt17(*x), fmt17(*e), fmt17(*v));
    }
    s
}

/// Reads `x η v` rows (comment lines start with `#`).
pub fn read_snapshot(text: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut cols = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| KbkError::Config(format!("snapshot line {}: not numeric", lineno + 1)))?;
        if vals.len() != 3 {
            return Err(KbkError::Config(format!(
                "snapshot line {}: expected 3 columns, got {}",
                lineno + 1,
                vals.len()
            )));
        }
        cols.0.push(vals[0]);
        cols.1.push(vals[1]);
        cols.2.push(vals[2]);
    }
    Ok(cols)
}

/// Time-by-space matrix: one row per sample, first column `t`.
pub fn waterfall(field: &str, x: &[f64], rows: &[(f64, Vec<f64>)]) -> String {
    let mut s = format!("# {field} waterfall: first column t, remaining columns at x =");
    for &xi in x {
        s.push(' ');
        s.push_str(&fmt17(xi));
    }
    s.push('\n');
    for (t, vals) in rows {
        s.push_str(&fmt17(*t));
        for &v in vals {
            s.push(' ');
            s.push_str(&fmt17(v));
        }
        s.push('\n');
    }
    s
}

pub fn fit_record(fit: &std::result::Result<SolitonFit, String>, window: f64) -> String {
    match fit {
        Ok(f) => format!(
            "status=ok\nwindow={}\nc_fit={}\nx0_fit={}\npeak={}\nresidual={}\n",
            fmt17(window),
            fmt17(f.c_fit),
            fmt17(f.x0_fit),
            fmt17(f.peak),
            fmt17(f.residual)
        ),
        Err(msg) => format!("status=failed\nwindow={}\nreason={msg}\n", fmt17(window)),
    }
}

/// Pointwise error file: header with the sup norms, then `x  η−η_exact  v−v_exact`.
pub fn error_record(numeric: &State, exact: &State, t: f64) -> (String, f64) {
    let max_eta = sup_diff(&numeric.eta, &exact.eta);
    let max_v = sup_diff(&numeric.v, &exact.v);
    let mut s = format!(
        "# t={} max_err_eta={} max_err_v={}\n",
        fmt17(t),
        fmt17(max_eta),
        fmt17(max_v)
    );
    let x = numeric.grid().nodes();
    for j in 0..x.len() {
        let _ = writeln!(
            s,
            "{} {} {}",
            fmt17(x[j]),
            fmt17(numeric.eta[j] - exact.eta[j]),
            fmt17(numeric.v[j] - exact.v[j])
        );
    }
    (s, max_eta.max(max_v))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
