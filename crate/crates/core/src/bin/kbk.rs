use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use kbk_core::experiment::{parse_config_file, run_batch, run_scenario, ScenarioConfig};
use kbk_core::{KbkError, Result};

/// Runs KBK scenarios and writes diagnostics, snapshots and waterfalls.
#[derive(Parser, Debug)]
#[command(name = "kbk", version)]
struct Cli {
    /// soliton-test, perturbed-soliton, stationary-perturbed, gaussian-v,
    /// gaussian-eta, dsw or custom
    #[arg(long)]
    scenario: Option<String>,
    /// Domain scale: x in L·[−π, π)
    #[arg(long = "L")]
    l: Option<f64>,
    /// Number of grid points (power of two)
    #[arg(long = "N")]
    n: Option<usize>,
    /// Final time
    #[arg(long = "T")]
    t: Option<f64>,
    /// Number of time steps
    #[arg(long = "Nt")]
    nt: Option<usize>,
    /// Soliton speed
    #[arg(long = "C", allow_negative_numbers = true)]
    c: Option<f64>,
    /// Factor applied to the soliton velocity
    #[arg(long)]
    lambda: Option<f64>,
    /// Factor applied to the soliton elevation
    #[arg(long)]
    mu: Option<f64>,
    /// Gaussian amplitude
    #[arg(long = "A", allow_negative_numbers = true)]
    a: Option<f64>,
    /// Dispersion scale
    #[arg(long)]
    eps: Option<f64>,
    /// Number of field snapshots
    #[arg(long)]
    snapshots: Option<usize>,
    /// Apply the 2/3 rule to the quadratic products
    #[arg(long)]
    dealias: bool,
    /// Output directory (base directory in batch mode)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Initial-data file for the custom scenario (columns x eta v)
    #[arg(long)]
    init: Option<PathBuf>,
    /// key=value config file; blocks separated by `---` lines run as a batch
    #[arg(long)]
    batch: Option<PathBuf>,
}

impl Cli {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        push("scenario", self.scenario.clone());
        push("L", self.l.map(|x| x.to_string()));
        push("N", self.n.map(|x| x.to_string()));
        push("T", self.t.map(|x| x.to_string()));
        push("Nt", self.nt.map(|x| x.to_string()));
        push("C", self.c.map(|x| x.to_string()));
        push("lambda", self.lambda.map(|x| x.to_string()));
        push("mu", self.mu.map(|x| x.to_string()));
        push("A", self.a.map(|x| x.to_string()));
        push("eps", self.eps.map(|x| x.to_string()));
        push("snapshots", self.snapshots.map(|x| x.to_string()));
        push("dealias", self.dealias.then(|| "true".to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("init", self.init.as_ref().map(|p| p.display().to_string()));
        o
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let overrides = cli.overrides();
    let Some(path) = &cli.batch else {
        let pairs = overrides.iter().map(|(k, v)| (k.as_str(), v.as_str()));
        let cfg = ScenarioConfig::from_pairs(pairs.collect::<Vec<_>>())?;
        let outcome = run_scenario(&cfg)?;
        if let Some(rec) = outcome.final_record() {
            println!(
                "{}: t={} delta={:.3e} tail={:.3e} min_depth={:.6}",
                cfg.scenario, rec.t, rec.delta, rec.tail, rec.min_depth
            );
        }
        if let Some(err) = outcome.max_error {
            println!("max error vs exact solution: {err:.3e}");
        }
        match &outcome.fit {
            Some(Ok(f)) => println!(
                "soliton fit: C={:.6} x0={:.6} residual={:.3e}",
                f.c_fit, f.x0_fit, f.residual
            ),
            Some(Err(msg)) => println!("soliton fit failed: {msg}"),
            None => {}
        }
        println!("status: {}; files in {}", outcome.status.describe(), outcome.dir.display());
        return Ok(outcome.status.is_success());
    };

    let text = fs::read_to_string(path).map_err(|e| KbkError::io(path, e))?;
    // In batch mode --out is the base directory rather than a per-run setting.
    let per_run: Vec<(String, String)> = overrides.iter().filter(|(k, _)| k != "out").cloned().collect();
    let configs = parse_config_file(&text, &per_run)?;
    let base = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let report = run_batch(&configs, Some(&base))?;
    let table = report.table();
    print!("{table}");
    fs::create_dir_all(&base).map_err(|e| KbkError::io(&base, e))?;
    let summary = base.join("summary.txt");
    fs::write(&summary, &table).map_err(|e| KbkError::io(&summary, e))?;
    Ok(report.all_succeeded())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
