use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{KbkError, Result};

use super::config::ScenarioConfig;
use super::run::{run_scenario_in, RunOutcome};

/// Observed temporal order of a group of runs differing only in `Nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub group: String,
    pub reference_nt: usize,
    /// `(Nt, sup-norm distance to the reference)` for the coarser runs.
    pub errors: Vec<(usize, f64)>,
    /// Least-squares slope of `−log(error)` against `log(Nt)`.
    pub slope: f64,
}

#[derive(Debug)]
pub struct BatchReport {
    pub runs: Vec<(String, Result<RunOutcome>)>,
    pub convergence: Vec<ConvergenceFit>,
}

impl BatchReport {
    pub fn all_succeeded(&self) -> bool {
        self.runs
            .iter()
            .all(|(_, r)| r.as_ref().is_ok_and(|o| o.status.is_success()))
    }

    /// Human-readable summary table (includes wall times, so not
    /// reproducible byte for byte).
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<28} {:<11} {:>10} {:>10} {:>10} {:>10} {:>9}  {}\n",
            "run", "status", "delta", "tail", "C_fit", "fit_res", "wall_s", "detail"
        );
        for (label, result) in &self.runs {
            match result {
                Ok(o) => {
                    let (delta, tail) = o
                        .final_record()
                        .map_or((f64::NAN, f64::NAN), |r| (r.delta, r.tail));
                    let (c_fit, res, fit_note) = match &o.fit {
                        Some(Ok(f)) => (format!("{:.6}", f.c_fit), format!("{:.3e}", f.residual), String::new()),
                        Some(Err(msg)) => ("-".into(), "-".into(), format!("fit failed: {msg}")),
                        None => ("-".into(), "-".into(), String::new()),
                    };
                    let status = if o.status.is_success() { "ok" } else { "FAILED" };
                    let mut detail = if o.status.is_success() { fit_note } else { o.status.describe() };
                    if let Some(err) = o.max_error {
                        detail = format!("max_error={err:.3e} {detail}");
                    }
                    let _ = writeln!(
                        s,
                        "{:<28} {:<11} {:>10.3e} {:>10.3e} {:>10} {:>10} {:>9.2}  {}",
                        label,
                        status,
                        delta,
                        tail,
                        c_fit,
                        res,
                        o.wall_time.as_secs_f64(),
                        detail.trim_end()
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "{label:<28} {:<11} {e}", "ERROR");
                }
            }
        }
        for c in &self.convergence {
            let _ = writeln!(
                s,
                "convergence [{}] vs Nt={}: slope {:.3} from {:?}",
                c.group, c.reference_nt, c.slope, c.errors
            );
        }
        s
    }
}

/// Runs every config, in parallel, each in `base_dir/<label>` (or its own
/// `output_dir` when `base_dir` is `None`). Per-run failures are reported in
/// the table without stopping the others.
pub fn run_batch(configs: &[ScenarioConfig], base_dir: Option<&Path>) -> Result<BatchReport> {
    if configs.is_empty() {
        return Err(KbkError::Config("batch contains no runs".into()));
    }
    let labels: Vec<String> = configs.iter().enumerate().map(|(i, c)| c.label(i)).collect();
    let mut seen = std::collections::HashSet::new();
    for l in &labels {
        if !seen.insert(l) {
            return Err(KbkError::Config(format!("duplicate run name '{l}'")));
        }
    }
    let runs: Vec<(String, Result<RunOutcome>)> = configs
        .par_iter()
        .zip(labels.par_iter())
        .map(|(cfg, label)| {
            let dir = match base_dir {
                Some(base) => base.join(label),
                None => cfg.output_dir.clone(),
            };
            (label.clone(), run_scenario_in(cfg, &dir))
        })
        .collect();
    let outcomes: Vec<&RunOutcome> = runs.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let convergence = convergence_fits(&outcomes);
    Ok(BatchReport { runs, convergence })
}

/// Groups runs that differ only in `Nt` (and name/output settings) and, for
/// groups of three or more, measures the error of each coarse run against
/// the finest one.
pub fn convergence_fits(outcomes: &[&RunOutcome]) -> Vec<ConvergenceFit> {
    let mut groups: BTreeMap<String, Vec<&RunOutcome>> = BTreeMap::new();
    for o in outcomes.iter().filter(|o| o.final_state.is_some()) {
        let mut key = o.config.clone();
        key.nt = 1;
        key.name = None;
        key.snapshot_count = 1;
        key.output_dir = Default::default();
        groups.entry(key.echo().replace(" Nt=1", "")).or_default().push(o);
    }
    let mut fits = Vec::new();
    for (group, mut members) in groups {
        members.sort_by_key(|o| o.config.nt);
        members.dedup_by_key(|o| o.config.nt);
        if members.len() < 3 {
            continue;
        }
        let reference = members.pop().expect("len >= 3");
        let ref_state = reference.final_state.as_ref().expect("filtered");
        let errors: Vec<(usize, f64)> = members
            .iter()
            .map(|o| (o.config.nt, o.final_state.as_ref().expect("filtered").max_abs_diff(ref_state)))
            .collect();
        let pts: Vec<(f64, f64)> = errors
            .iter()
            .filter(|(_, e)| *e > 0.0)
            .map(|&(nt, e)| ((nt as f64).ln(), -e.ln()))
            .collect();
        fits.push(ConvergenceFit {
            group,
            reference_nt: reference.config.nt,
            errors,
            slope: least_squares_slope(&pts),
        });
    }
    fits
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
