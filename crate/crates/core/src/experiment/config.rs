use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{KbkError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Exact soliton, compared against the closed form at the final time.
    SolitonTest,
    /// `v = λ v_C`, `η = μ η_C`.
    PerturbedSoliton,
    /// Same perturbation applied to the `C = 0` soliton.
    StationaryPerturbed,
    /// `η = 0`, `v = A exp(−x²)`.
    GaussianV,
    /// `η = A exp(−x²)`, `v = 0`.
    GaussianEta,
    /// `η = A exp(−x²)`, `v = 0` in the small-dispersion scaling.
    Dsw,
    /// Initial fields read from a snapshot-format file (`init`).
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::SolitonTest,
        Scenario::PerturbedSoliton,
        Scenario::StationaryPerturbed,
        Scenario::GaussianV,
        Scenario::GaussianEta,
        Scenario::Dsw,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SolitonTest => "soliton-test",
            Scenario::PerturbedSoliton => "perturbed-soliton",
            Scenario::StationaryPerturbed => "stationary-perturbed",
            Scenario::GaussianV => "gaussian-v",
            Scenario::GaussianEta => "gaussian-eta",
            Scenario::Dsw => "dsw",
            Scenario::Custom => "custom",
        }
    }

    /// Scenarios whose final state gets a soliton fit.
    pub fn fits_soliton(self) -> bool {
        !matches!(self, Scenario::Dsw | Scenario::Custom)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = KbkError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                KbkError::Config(format!("unknown scenario '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Run label; names the per-run directory in batch mode.
    pub name: Option<String>,
    pub l: f64,
    pub n: usize,
    pub t: f64,
    pub nt: usize,
    pub c: f64,
    pub lambda: f64,
    pub mu: f64,
    pub a: f64,
    pub eps: f64,
    pub snapshot_count: usize,
    pub dealias: bool,
    pub output_dir: PathBuf,
    /// Initial-data file for [`Scenario::Custom`].
    pub init: Option<PathBuf>,
}

/// Keys accepted by [`ScenarioConfig::set`], in echo order.
pub const KEYS: [&str; 15] = [
    "scenario", "name", "L", "N", "T", "Nt", "C", "lambda", "mu", "A", "eps", "snapshots", "dealias", "out", "init",
];

impl ScenarioConfig {
    /// Defaults for `scenario`, following the published experiments.
    pub fn defaults(scenario: Scenario) -> Self {
        let base = ScenarioConfig {
            scenario,
            name: None,
            l: 30.0,
            n: 1 << 12,
            t: 5.0,
            nt: 4000,
            c: 0.8,
            lambda: 1.0,
            mu: 1.0,
            a: 0.0,
            eps: 1.0,
            snapshot_count: 6,
            dealias: false,
            output_dir: PathBuf::from("out"),
            init: None,
        };
        match scenario {
            Scenario::SolitonTest => ScenarioConfig {
                l: 15.0,
                n: 1 << 11,
                t: 1.0,
                ..base
            },
            Scenario::PerturbedSoliton => ScenarioConfig { lambda: 1.01, ..base },
            Scenario::StationaryPerturbed => ScenarioConfig {
                c: 0.0,
                lambda: 1.01,
                ..base
            },
            Scenario::GaussianV => ScenarioConfig { a: 3.0, ..base },
            Scenario::GaussianEta => ScenarioConfig {
                a: -3.0,
                t: 8.0,
                ..base
            },
            Scenario::Dsw => ScenarioConfig {
                l: 3.0,
                n: 1 << 14,
                t: 3.0,
                nt: 10_000,
                a: 1.0,
                eps: 0.1,
                ..base
            },
            Scenario::Custom => base,
        }
    }

    /// Sets one field from its textual `key=value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "scenario" => self.scenario = value.parse()?,
            "name" => self.name = Some(value.to_string()),
            "L" => self.l = parse_num(key, value)?,
            "N" => self.n = parse_num(key, value)?,
            "T" => self.t = parse_num(key, value)?,
            "Nt" => self.nt = parse_num(key, value)?,
            "C" => self.c = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "mu" => self.mu = parse_num(key, value)?,
            "A" => self.a = parse_num(key, value)?,
            "eps" => self.eps = parse_num(key, value)?,
            "snapshots" => self.snapshot_count = parse_num(key, value)?,
            "dealias" => {
                self.dealias = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(KbkError::Config(format!("dealias expects true/false, got '{value}'"))),
                }
            }
            "out" => self.output_dir = PathBuf::from(value),
            "init" => self.init = Some(PathBuf::from(value)),
            _ => return Err(KbkError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Builds a config from `key=value` pairs. A `scenario` entry selects the
    /// defaults and is applied first; later entries override earlier ones.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)> + Clone) -> Result<Self> {
        let scenario = match pairs.clone().into_iter().filter(|(k, _)| *k == "scenario").last() {
            Some((_, v)) => v.trim().parse()?,
            None => Scenario::SolitonTest,
        };
        let mut cfg = ScenarioConfig::defaults(scenario);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KbkError::Config(msg));
        if !(self.l.is_finite() && self.l > 0.0) {
            return bad(format!("L must be positive, got {}", self.l));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return bad(format!("N must be a power of two >= 8, got {}", self.n));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return bad(format!("T must be positive, got {}", self.t));
        }
        if self.nt == 0 {
            return bad("Nt must be positive".into());
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.snapshot_count == 0 {
            return bad("snapshots must be positive".into());
        }
        if ![self.c, self.lambda, self.mu, self.a].iter().all(|x| x.is_finite()) {
            return bad("C, lambda, mu and A must be finite".into());
        }
        match self.scenario {
            Scenario::SolitonTest | Scenario::PerturbedSoliton | Scenario::StationaryPerturbed
                if self.c.abs() >= 1.0 =>
            {
                bad(format!("soliton speed must satisfy |C| < 1, got {}", self.c))
            }
            Scenario::Custom if self.init.is_none() => bad("scenario custom needs init=<file>".into()),
            _ => Ok(()),
        }
    }

    /// Directory name used for this run inside a batch.
    pub fn label(&self, index: usize) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("run{index:03}-{}", self.scenario))
    }

    /// `key=value` rendering of every field, in [`KEYS`] order.
    pub fn echo(&self) -> String {
        let mut parts = vec![
            format!("scenario={}", self.scenario),
            format!("L={}", self.l),
            format!("N={}", self.n),
            format!("T={}", self.t),
            format!("Nt={}", self.nt),
            format!("C={}", self.c),
            format!("lambda={}", self.lambda),
            format!("mu={}", self.mu),
            format!("A={}", self.a),
            format!("eps={}", self.eps),
            format!("snapshots={}", self.snapshot_count),
            format!("dealias={}", self.dealias),
        ];
        if let Some(name) = &self.name {
            parts.insert(1, format!("name={name}"));
        }
        if let Some(init) = &self.init {
            parts.push(format!("init={}", init.display()));
        }
        parts.join(" ")
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| KbkError::Config(format!("cannot parse {key}='{value}'")))
}

/// Splits `key=value` text into pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| KbkError::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(KbkError::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses a config file: one block, or several separated by `---` lines.
/// `overrides` (typically command-line flags) are applied to every block.
pub fn parse_config_file(text: &str, overrides: &[(String, String)]) -> Result<Vec<ScenarioConfig>> {
    let mut blocks = vec![String::new()];
    for line in text.lines() {
        if line.trim() == "---" {
            blocks.push(String::new());
        } else {
            let b = blocks.last_mut().expect("non-empty");
            b.push_str(line);
            b.push('\n');
        }
    }
    let mut configs = Vec::new();
    for block in blocks {
        let pairs = parse_pairs(&block)?;
        if pairs.is_empty() {
            continue;
        }
        let all: Vec<(&str, &str)> = pairs
            .iter()
            .chain(overrides)
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        configs.push(ScenarioConfig::from_pairs(all)?);
    }
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("soliton".parse::<Scenario>().is_err());
    }

    #[test]
    fn published_defaults() {
        let s = ScenarioConfig::defaults(Scenario::SolitonTest);
        assert_eq!((s.l, s.n, s.nt, s.t, s.c), (15.0, 2048, 4000, 1.0, 0.8));
        let d = ScenarioConfig::defaults(Scenario::Dsw);
        assert_eq!((d.l, d.n, d.nt, d.t, d.eps), (3.0, 16384, 10_000, 3.0, 0.1));
        assert_eq!(ScenarioConfig::defaults(Scenario::GaussianEta).t, 8.0);
        assert_eq!(ScenarioConfig::defaults(Scenario::GaussianV).t, 5.0);
        assert_eq!(ScenarioConfig::defaults(Scenario::StationaryPerturbed).c, 0.0);
        for s in Scenario::ALL.into_iter().filter(|&s| s != Scenario::Custom) {
            ScenarioConfig::defaults(s).validate().unwrap();
        }
    }

    #[test]
    fn scenario_key_selects_defaults_regardless_of_position() {
        let cfg = ScenarioConfig::from_pairs([("Nt", "100"), ("scenario", "dsw")]).unwrap();
        assert_eq!(cfg.scenario, Scenario::Dsw);
        assert_eq!(cfg.nt, 100);
        assert_eq!(cfg.l, 3.0);
    }

    #[test]
    fn file_blocks_and_overrides() {
        let text = "# sweep\nscenario=perturbed-soliton\nlambda=0.99\n---\nscenario = perturbed-soliton\nmu=1.01 # comment\nname=mu101\n---\n\n";
        let overrides = vec![("Nt".to_string(), "200".to_string())];
        let cfgs = parse_config_file(text, &overrides).unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[0].lambda, 0.99);
        assert_eq!(cfgs[1].mu, 1.01);
        assert_eq!(cfgs[1].lambda, 1.01);
        assert!(cfgs.iter().all(|c| c.nt == 200));
        assert_eq!(cfgs[1].label(1), "mu101");
        assert_eq!(cfgs[0].label(0), "run000-perturbed-soliton");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_pairs("L 3").is_err());
        assert!(parse_pairs("foo=1").is_err());
        assert!(ScenarioConfig::from_pairs([("N", "abc")]).is_err());
        assert!(ScenarioConfig::from_pairs([("dealias", "maybe")]).is_err());
        let mut cfg = ScenarioConfig::defaults(Scenario::SolitonTest);
        cfg.n = 1000;
        assert!(cfg.validate().is_err());
        cfg.n = 1024;
        cfg.c = 1.0;
        assert!(cfg.validate().is_err());
        assert!(ScenarioConfig::defaults(Scenario::Custom).validate().is_err());
    }

    #[test]
    fn echo_parses_back() {
        let mut cfg = ScenarioConfig::defaults(Scenario::GaussianEta);
        cfg.name = Some("g".into());
        cfg.dealias = true;
        let text = cfg.echo().replace(' ', "\n");
        let back = parse_config_file(&text, &[]).unwrap().remove(0);
        assert_eq!(back, cfg);
    }
}
