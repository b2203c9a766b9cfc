//! Scenario runner: builds initial data, evolves it and writes plain-text
//! results (diagnostics series, snapshots, waterfalls, fits).

mod batch;
mod config;
pub mod output;
mod run;

pub use batch::{convergence_fits, least_squares_slope, run_batch, BatchReport, ConvergenceFit};
pub use config::{parse_config_file, parse_pairs, Scenario, ScenarioConfig, KEYS};
pub use run::{
    exact_solution, initial_state, model_for, run_scenario, run_scenario_in, sample_steps, snapshot_steps,
    RunOutcome, RunStatus, MAX_TAIL, SERIES_INTERVALS, WATERFALL_INTERVALS, WATERFALL_MAX_COLUMNS,
};
