//! Experiment configuration: built-in defaults, then an optional TOML file,
//! then command-line flags, each layer overriding the previous one.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mbandit_core::{Algorithm, PriorConfig, ScenarioName, DEFAULT_STATE_CAP};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::instance_file::parse_prior;

pub const DESK_EPISODES: usize = 300;
pub const DESK_SEEDS: usize = 10;
pub const PAPER_EPISODES: usize = 3000;
pub const PAPER_SEEDS: usize = 80;
pub const DEFAULT_MASTER_SEED: u64 = 2021;
pub const DEFAULT_ROLLOUTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretMode {
    Exact,
    MonteCarlo,
}

impl FromStr for RegretMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Self::Exact),
            "mc" | "monte_carlo" => Ok(Self::MonteCarlo),
            _ => Err(format!("unknown regret method `{s}` (expected exact or mc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    Builtin(ScenarioName),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Seeds {
    /// `count` seeds derived from `master`.
    Derived { master: u64, count: usize },
    Explicit(Vec<u64>),
}

impl Seeds {
    pub fn len(&self) -> usize {
        match self {
            Self::Derived { count, .. } => *count,
            Self::Explicit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub environment: Environment,
    pub algorithms: Vec<Algorithm>,
    pub episodes: usize,
    pub seeds: Seeds,
    /// Overrides the environment's discount.
    pub discount: Option<f64>,
    /// `None` picks exact regret when the global MDP fits under `state_cap`.
    pub regret: Option<RegretMode>,
    /// Monte-Carlo rollouts per episode.
    pub replicas: usize,
    pub out: PathBuf,
    pub jobs: usize,
    /// Overrides the instance file's prior; MB-PSRL only.
    pub prior: Option<PriorConfig>,
    pub state_cap: u128,
    pub lower_bound: (usize, usize, usize),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            environment: Environment::Builtin(ScenarioName::RandomWalk),
            algorithms: Algorithm::ALL.to_vec(),
            episodes: DESK_EPISODES,
            seeds: Seeds::Derived {
                master: DEFAULT_MASTER_SEED,
                count: DESK_SEEDS,
            },
            discount: None,
            regret: None,
            replicas: DEFAULT_ROLLOUTS,
            out: PathBuf::from("results"),
            jobs: 1,
            prior: None,
            state_cap: DEFAULT_STATE_CAP,
            lower_bound: (4, 3, 300),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: &str| Err(CliError::Usage(m.into()));
        if self.algorithms.is_empty() {
            return usage("algorithm list is empty");
        }
        if self.episodes == 0 {
            return usage("episode count must be >= 1");
        }
        if self.seeds.is_empty() {
            return usage("seed count must be >= 1");
        }
        if self.replicas == 0 {
            return usage("replica count must be >= 1");
        }
        if self.jobs == 0 {
            return usage("jobs must be >= 1");
        }
        Ok(())
    }
}

/// Every key of the TOML config file; all optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub instance: Option<PathBuf>,
    pub algorithms: Option<Vec<String>>,
    pub episodes: Option<usize>,
    pub seeds: Option<usize>,
    pub seed: Option<u64>,
    pub seed_list: Option<Vec<u64>>,
    pub beta: Option<f64>,
    pub regret: Option<String>,
    pub replicas: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub paper_scale: Option<bool>,
    pub state_cap: Option<u128>,
    pub lower_bound: Option<LowerBoundSection>,
    pub prior: Option<PriorTable>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundSection {
    pub states: usize,
    pub arms: usize,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorTable {
    pub transitions: String,
    pub rewards: String,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    /// Field-wise override: values set in `other` win.
    pub fn overridden_by(self, other: ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFile { $($f: other.$f.or(self.$f)),* } };
        }
        let (new_scenario, new_instance) = (other.scenario.is_some(), other.instance.is_some());
        let mut merged = pick!(
            scenario, instance, algorithms, episodes, seeds, seed, seed_list, beta, regret, replicas, out,
            jobs, paper_scale, state_cap, lower_bound, prior
        );
        // an explicit environment on the winning layer replaces the other kind
        if new_scenario && !new_instance {
            merged.instance = None;
        }
        if new_instance && !new_scenario {
            merged.scenario = None;
        }
        merged
    }

    /// Applies the layer on top of the defaults.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let usage = |m: String| CliError::Usage(m);
        let mut cfg = ExperimentConfig::default();
        match (&self.scenario, &self.instance) {
            (Some(_), Some(_)) => return Err(usage("give either a scenario or an instance file, not both".into())),
            (Some(s), None) => {
                cfg.environment = Environment::Builtin(s.parse().map_err(|e: mbandit_core::Error| usage(e.to_string()))?)
            }
            (None, Some(p)) => cfg.environment = Environment::File(p.clone()),
            (None, None) => {}
        }
        if let Some(algs) = &self.algorithms {
            cfg.algorithms = algs
                .iter()
                .map(|a| a.parse().map_err(|e: mbandit_core::Error| usage(e.to_string())))
                .collect::<Result<_>>()?;
        }
        if self.paper_scale == Some(true) {
            cfg.episodes = PAPER_EPISODES;
            cfg.seeds = Seeds::Derived {
                master: DEFAULT_MASTER_SEED,
                count: PAPER_SEEDS,
            };
        }
        if let Some(k) = self.episodes {
            cfg.episodes = k;
        }
        let (mut master, mut count) = match cfg.seeds {
            Seeds::Derived { master, count } => (master, count),
            Seeds::Explicit(_) => unreachable!("defaults derive seeds"),
        };
        master = self.seed.unwrap_or(master);
        count = self.seeds.unwrap_or(count);
        cfg.seeds = match &self.seed_list {
            Some(list) => Seeds::Explicit(list.clone()),
            None => Seeds::Derived { master, count },
        };
        cfg.discount = self.beta;
        if let Some(r) = &self.regret {
            cfg.regret = Some(r.parse().map_err(usage)?);
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        if let Some(c) = self.state_cap {
            cfg.state_cap = c;
        }
        if let Some(lb) = &self.lower_bound {
            cfg.lower_bound = (lb.states, lb.arms, lb.episodes);
        }
        if let Some(p) = &self.prior {
            cfg.prior = Some(parse_prior(&p.transitions, &p.rewards).map_err(usage)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
