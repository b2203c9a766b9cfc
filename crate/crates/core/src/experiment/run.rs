use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::diagnostics::{energy, fit_soliton, DiagnosticsRecord, SolitonFit, DEFAULT_FIT_WINDOW};
use crate::dynamics::{KbkModel, ModelParams, State};
use crate::error::{KbkError, Result};
use crate::etd::evolve_observed;
use crate::exact::{gaussian_data, good_soliton, rescaled_soliton, GaussianKind, SolitonParams};
use crate::grid::Grid;

use super::config::{Scenario, ScenarioConfig};
use super::output;

/// Number of intervals in the diagnostics series.
pub const SERIES_INTERVALS: usize = 200;
/// Number of intervals in the waterfall matrices.
pub const WATERFALL_INTERVALS: usize = 100;
/// Waterfall columns are subsampled down to at most this many.
pub const WATERFALL_MAX_COLUMNS: usize = 512;
/// Runs whose DFT tail reaches this level are reported as unresolved.
pub const MAX_TAIL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Unresolved { tail: f64 },
    BlowUp { step: usize, time: f64 },
}

impl RunStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }

    pub fn describe(&self) -> String {
        match self {
            RunStatus::Completed => "ok".into(),
            RunStatus::Unresolved { tail } => format!("unresolved (tail {tail:.3e})"),
            RunStatus::BlowUp { step, time } => format!("blow-up at step {step} (t = {time})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ScenarioConfig,
    pub dir: PathBuf,
    pub status: RunStatus,
    /// `None` after a blow-up.
    pub final_state: Option<State>,
    pub records: Vec<DiagnosticsRecord>,
    pub fit: Option<std::result::Result<SolitonFit, String>>,
    /// Sup-norm error against the exact solution (soliton-test only).
    pub max_error: Option<f64>,
    pub wall_time: Duration,
}

impl RunOutcome {
    pub fn final_record(&self) -> Option<&DiagnosticsRecord> {
        self.records.last()
    }

    pub fn max_delta(&self) -> f64 {
        self.records.iter().map(|r| r.delta).fold(0.0, f64::max)
    }

    pub fn max_tail(&self) -> f64 {
        self.records.iter().map(|r| r.tail).fold(0.0, f64::max)
    }
}

/// Step indices `round(k·nt/intervals)`, `k = 0..=intervals`, deduplicated.
pub fn sample_steps(nt: usize, intervals: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = (0..=intervals)
        .map(|k| ((k as f64) * nt as f64 / intervals as f64).round() as usize)
        .collect();
    steps.dedup();
    steps
}

/// Steps at which snapshots are written: `count` equispaced samples
/// including both ends, or only the final state when `count == 1`.
pub fn snapshot_steps(nt: usize, count: usize) -> Vec<usize> {
    if count <= 1 {
        vec![nt]
    } else {
        sample_steps(nt, count - 1)
    }
}

fn soliton(cfg: &ScenarioConfig, grid: &Grid, t: f64) -> Result<State> {
    let p = SolitonParams::new(cfg.c, 0.0)?;
    if cfg.eps == 1.0 {
        good_soliton(&p, t, grid)
    } else {
        rescaled_soliton(&p.with_eps(cfg.eps)?, t, grid)
    }
}

pub fn initial_state(cfg: &ScenarioConfig, grid: &Grid) -> Result<State> {
    match cfg.scenario {
        Scenario::SolitonTest => soliton(cfg, grid, 0.0),
        Scenario::PerturbedSoliton | Scenario::StationaryPerturbed => {
            let s = soliton(cfg, grid, 0.0)?;
            State::new(
                grid,
                s.eta.iter().map(|e| cfg.mu * e).collect(),
                s.v.iter().map(|v| cfg.lambda * v).collect(),
            )
        }
        Scenario::GaussianV => gaussian_data(GaussianKind::VelocityBump, cfg.a, grid),
        Scenario::GaussianEta | Scenario::Dsw => gaussian_data(GaussianKind::ElevationBump, cfg.a, grid),
        Scenario::Custom => {
            let path = cfg
                .init
                .as_ref()
                .ok_or_else(|| KbkError::Config("scenario custom needs init=<file>".into()))?;
            let text = fs::read_to_string(path).map_err(|e| KbkError::io(path, e))?;
            let (_, eta, v) = output::read_snapshot(&text)?;
            if eta.len() != grid.len() {
                return Err(KbkError::Config(format!(
                    "{} has {} rows but N = {}",
                    path.display(),
                    eta.len(),
                    grid.len()
                )));
            }
            State::new(grid, eta, v)
        }
    }
}

/// Closed-form solution at time `t`, where one is known.
pub fn exact_solution(cfg: &ScenarioConfig, grid: &Grid, t: f64) -> Result<Option<State>> {
    match cfg.scenario {
        Scenario::SolitonTest => soliton(cfg, grid, t).map(Some),
        _ => Ok(None),
    }
}

pub fn model_for(cfg: &ScenarioConfig, grid: &Grid) -> Result<KbkModel> {
    let mut params = ModelParams::new(cfg.eps)?;
    if cfg.dealias {
        params = params.with_two_thirds_dealiasing();
    }
    KbkModel::new(grid, params)
}

/// Runs one scenario, writing all files into `cfg.output_dir`.
///
/// Blow-ups are reported through [`RunStatus`], with everything recorded
/// up to the last finite state still written; configuration and I/O
/// problems are errors.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    run_scenario_in(cfg, &cfg.output_dir)
}

pub fn run_scenario_in(cfg: &ScenarioConfig, dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let grid = Grid::new(cfg.l, cfg.n)?;
    let model = model_for(cfg, &grid)?;
    let initial = initial_state(cfg, &grid)?;
    fs::create_dir_all(dir).map_err(|e| KbkError::io(dir, e))?;

    let echo = cfg.echo();
    let e0 = energy(&initial, cfg.eps)?;
    let series = sample_steps(cfg.nt, SERIES_INTERVALS);
    let snaps = snapshot_steps(cfg.nt, cfg.snapshot_count);
    let waterfall_steps = sample_steps(cfg.nt, WATERFALL_INTERVALS);
    let stride = (cfg.n / WATERFALL_MAX_COLUMNS).max(1);
    let columns: Vec<usize> = (0..cfg.n).step_by(stride).collect();
    let wf_x: Vec<f64> = columns.iter().map(|&j| grid.nodes()[j]).collect();

    let mut records = Vec::with_capacity(series.len());
    let mut wf_v = Vec::with_capacity(waterfall_steps.len());
    let mut wf_eta = Vec::with_capacity(waterfall_steps.len());
    let mut snap_index = 0;

    let wanted = |n: usize| {
        series.binary_search(&n).is_ok()
            || snaps.binary_search(&n).is_ok()
            || waterfall_steps.binary_search(&n).is_ok()
    };
    let result = evolve_observed(&initial, &model, cfg.t, cfg.nt, wanted, |n, t, state| {
        if series.binary_search(&n).is_ok() {
            let rec = DiagnosticsRecord::compute(state, cfg.eps, t, Some(e0))?;
            if !record_is_finite(&rec) {
                // diagnostics overflow just before the fields do
                return Err(KbkError::BlowUp {
                    step: n,
                    time: t,
                    last_finite: Box::new(records.last().cloned()),
                });
            }
            records.push(rec);
        }
        if waterfall_steps.binary_search(&n).is_ok() {
            wf_v.push((t, columns.iter().map(|&j| state.v[j]).collect()));
            wf_eta.push((t, columns.iter().map(|&j| state.eta[j]).collect()));
        }
        if snaps.binary_search(&n).is_ok() {
            let path = dir.join(format!("snapshot_{snap_index:03}.dat"));
            output::write_file(&path, &output::snapshot(state, t, &echo))?;
            snap_index += 1;
        }
        Ok(())
    });

    let (status, final_state) = match result {
        Ok(state) => {
            let tail = records.iter().map(|r| r.tail).fold(0.0, f64::max);
            let status = if tail >= MAX_TAIL {
                RunStatus::Unresolved { tail }
            } else {
                RunStatus::Completed
            };
            (status, Some(state))
        }
        Err(KbkError::BlowUp { step, time, .. }) => (RunStatus::BlowUp { step, time }, None),
        Err(e) => return Err(e),
    };

    output::write_file(&dir.join("diagnostics.csv"), &output::diagnostics_csv(&records))?;
    output::write_file(&dir.join("densities.csv"), &densities_csv(&records))?;
    output::write_file(&dir.join("waterfall_v.dat"), &output::waterfall("v", &wf_x, &wf_v))?;
    output::write_file(&dir.join("waterfall_eta.dat"), &output::waterfall("eta", &wf_x, &wf_eta))?;

    let mut fit = None;
    let mut max_error = None;
    if let Some(state) = &final_state {
        if cfg.scenario.fits_soliton() && cfg.eps == 1.0 {
            let f = fit_soliton(state, DEFAULT_FIT_WINDOW).map_err(|e| e.to_string());
            output::write_file(&dir.join("fit.txt"), &output::fit_record(&f, DEFAULT_FIT_WINDOW))?;
            fit = Some(f);
        }
        if let Some(exact) = exact_solution(cfg, &grid, cfg.t)? {
            let (text, err) = output::error_record(state, &exact, cfg.t);
            output::write_file(&dir.join("error.dat"), &text)?;
            max_error = Some(err);
        }
    }
    output::write_file(
        &dir.join("run.txt"),
        &format!("{echo}\nstatus={}\n", status.describe()),
    )?;

    Ok(RunOutcome {
        config: cfg.clone(),
        dir: dir.to_path_buf(),
        status,
        final_state,
        records,
        fit,
        max_error,
        wall_time: started.elapsed(),
    })
}

fn record_is_finite(r: &DiagnosticsRecord) -> bool {
    [r.t, r.energy, r.delta, r.h0, r.i3, r.mass_eta, r.mass_v, r.tail, r.min_depth]
        .iter()
        .all(|x| x.is_finite())
        && r.rho_integrals.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn densities_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from("t");
    let count = records.first().map_or(0, |r| r.rho_integrals.len());
    for n in 1..=count {
        s.push_str(&format!(",rho{n}_re,rho{n}_im"));
    }
    s.push('\n');
    for r in records {
        s.push_str(&output::fmt17(r.t));
        for z in &r.rho_integrals {
            s.push(',');
            s.push_str(&output::fmt17(z.re));
            s.push(',');
            s.push_str(&output::fmt17(z.im));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_includes_both_ends() {
        assert_eq!(sample_steps(10, 4), vec![0, 3, 5, 8, 10]);
        assert_eq!(sample_steps(3, 10), vec![0, 1, 2, 3]);
        assert_eq!(snapshot_steps(4000, 1), vec![4000]);
        assert_eq!(snapshot_steps(4000, 5), vec![0, 1000, 2000, 3000, 4000]);
    }

    #[test]
    fn perturbation_scales_fields() {
        let mut cfg = ScenarioConfig::defaults(Scenario::PerturbedSoliton);
        cfg.n = 256;
        cfg.lambda = 1.1;
        cfg.mu = 0.5;
        let g = Grid::new(cfg.l, cfg.n).unwrap();
        let s = initial_state(&cfg, &g).unwrap();
        let base = good_soliton(&SolitonParams::new(0.8, 0.0).unwrap(), 0.0, &g).unwrap();
        for j in 0..g.len() {
            assert_eq!(s.v[j], 1.1 * base.v[j]);
            assert_eq!(s.eta[j], 0.5 * base.eta[j]);
        }
    }
}
