//! TOML instance files.
//!
//! ```toml
//! discount = 0.99
//!
//! [prior]                     # optional, MB-PSRL only
//! transitions = "dirichlet(1.0)"
//! rewards = "beta(1,1)"       # or "gauss_gamma"
//!
//! [initial]                   # optional, defaults to every arm in state 0
//! kind = "fixed"              # "fixed" | "product" | "coupled"
//! state = [0, 0]
//!
//! [[arms]]
//! reward_mean = [0.2, 0.0]
//! transition = [[0.8, 0.2], [0.1, 0.9]]
//! reward = "bernoulli"        # "bernoulli" | "gaussian" | "on_transition"
//! ```
//!
//! `gaussian` arms take `variance = <real>`; `on_transition` arms take a
//! matrix `rewards` paid on each transition, and their `reward_mean` is
//! derived from it (any value given is ignored).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mbandit_core::{
    ArmModel, BanditInstance, GlobalState, InitialDistribution, PriorConfig, RewardKind, RewardPrior,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub discount: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    pub arms: Vec<ArmSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    #[serde(default = "default_transition_prior")]
    pub transitions: String,
    #[serde(default = "default_reward_prior")]
    pub rewards: String,
}

fn default_transition_prior() -> String {
    "dirichlet(1.0)".into()
}

fn default_reward_prior() -> String {
    "beta(1,1)".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Fixed { state: Vec<usize> },
    Product { distributions: Vec<Vec<f64>> },
    Coupled { states: Vec<Vec<usize>>, probabilities: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSection {
    #[serde(default)]
    pub reward_mean: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    #[serde(default = "default_reward_kind")]
    pub reward: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewards: Option<Vec<Vec<f64>>>,
}

fn default_reward_kind() -> String {
    "bernoulli".into()
}

/// Parses `dirichlet(c)`, `beta(a,b)` and `gauss_gamma`.
pub fn parse_prior(transitions: &str, rewards: &str) -> std::result::Result<PriorConfig, String> {
    fn args<'a>(s: &'a str, name: &str) -> Option<Vec<&'a str>> {
        let inner = s.trim().strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
        Some(inner.split(',').map(str::trim).collect())
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let concentration = match args(transitions, "dirichlet").as_deref() {
        Some([c]) => num(c)?,
        _ => return Err(format!("transition prior `{transitions}` is not dirichlet(<c>)")),
    };
    let rewards = if rewards.trim() == "gauss_gamma" {
        RewardPrior::GaussGamma
    } else {
        match args(rewards, "beta").as_deref() {
            Some([a, b]) => RewardPrior::Beta {
                alpha: num(a)?,
                beta: num(b)?,
            },
            _ => return Err(format!("reward prior `{rewards}` is neither beta(<a>,<b>) nor gauss_gamma")),
        }
    };
    Ok(PriorConfig {
        transition_concentration: concentration,
        rewards,
    })
}

pub fn format_prior(prior: &PriorConfig) -> PriorSection {
    PriorSection {
        transitions: format!("dirichlet({:?})", prior.transition_concentration),
        rewards: match prior.rewards {
            RewardPrior::Beta { alpha, beta } => format!("beta({alpha:?},{beta:?})"),
            RewardPrior::GaussGamma => "gauss_gamma".into(),
        },
    }
}

impl InstanceFile {
    pub fn from_instance(instance: &BanditInstance, prior: Option<&PriorConfig>) -> Self {
        let arms = instance
            .arms
            .iter()
            .map(|arm| {
                let (reward, variance, rewards) = match &arm.reward_kind {
                    RewardKind::Bernoulli => ("bernoulli", None, None),
                    RewardKind::Gaussian { variance } => ("gaussian", Some(*variance), None),
                    RewardKind::OnTransition { rewards } => ("on_transition", None, Some(rewards.clone())),
                };
                ArmSection {
                    reward_mean: arm.reward_mean.clone(),
                    transition: arm.transition.clone(),
                    reward: reward.into(),
                    variance,
                    rewards,
                }
            })
            .collect();
        let initial = match &instance.initial {
            InitialDistribution::Product(d) => InitialSection::Product {
                distributions: d.clone(),
            },
            InitialDistribution::Coupled { states, probabilities } if states.len() == 1 => {
                let _ = probabilities;
                InitialSection::Fixed {
                    state: states[0].0.clone(),
                }
            }
            InitialDistribution::Coupled { states, probabilities } => InitialSection::Coupled {
                states: states.iter().map(|s| s.0.clone()).collect(),
                probabilities: probabilities.clone(),
            },
        };
        Self {
            discount: instance.discount,
            prior: prior.map(format_prior),
            initial: Some(initial),
            arms,
        }
    }

    /// Builds and validates the instance; warnings are returned, errors fail.
    pub fn to_instance(&self) -> std::result::Result<(BanditInstance, Vec<String>), String> {
        let arms = self
            .arms
            .iter()
            .enumerate()
            .map(|(a, arm)| match arm.reward.as_str() {
                "bernoulli" => Ok(ArmModel::bernoulli(arm.reward_mean.clone(), arm.transition.clone())),
                "gaussian" => {
                    let variance = arm.variance.ok_or(format!("arm {a}: gaussian reward needs `variance`"))?;
                    Ok(ArmModel::new(
                        arm.reward_mean.clone(),
                        arm.transition.clone(),
                        RewardKind::Gaussian { variance },
                    ))
                }
                "on_transition" => {
                    let rewards = arm.rewards.clone().ok_or(format!("arm {a}: on_transition needs `rewards`"))?;
                    if rewards.len() != arm.transition.len() {
                        return Err(format!("arm {a}: `rewards` must match the transition shape"));
                    }
                    Ok(ArmModel::with_transition_rewards(arm.transition.clone(), rewards))
                }
                other => Err(format!("arm {a}: unknown reward kind `{other}`")),
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        let initial = match &self.initial {
            None => InitialDistribution::fixed(GlobalState(vec![0; arms.len()])),
            Some(InitialSection::Fixed { state }) => InitialDistribution::fixed(GlobalState(state.clone())),
            Some(InitialSection::Product { distributions }) => InitialDistribution::Product(distributions.clone()),
            Some(InitialSection::Coupled { states, probabilities }) => InitialDistribution::Coupled {
                states: states.iter().cloned().map(GlobalState).collect(),
                probabilities: probabilities.clone(),
            },
        };
        let instance = BanditInstance::new(arms, self.discount, initial);
        let warnings = instance.validate().iter().map(ToString::to_string).collect();
        let instance = instance.validated().map_err(|e| e.to_string())?;
        Ok((instance, warnings))
    }

    pub fn prior(&self) -> std::result::Result<Option<PriorConfig>, String> {
        self.prior
            .as_ref()
            .map(|p| parse_prior(&p.transitions, &p.rewards))
            .transpose()
    }

    pub fn to_toml(&self) -> String {
        // arrays of arrays read better one row per line
        let mut out = String::new();
        writeln!(out, "discount = {:?}", self.discount).unwrap();
        if let Some(p) = &self.prior {
            writeln!(out, "\n[prior]\ntransitions = {:?}\nrewards = {:?}", p.transitions, p.rewards).unwrap();
        }
        if let Some(init) = &self.initial {
            out.push_str("\n[initial]\n");
            out.push_str(&toml::to_string(init).expect("initial section serializes"));
        }
        for arm in &self.arms {
            out.push_str("\n[[arms]]\n");
            writeln!(out, "reward = {:?}", arm.reward).unwrap();
            if let Some(v) = arm.variance {
                writeln!(out, "variance = {v:?}").unwrap();
            }
            writeln!(out, "reward_mean = {}", float_list(&arm.reward_mean)).unwrap();
            writeln!(out, "transition = {}", matrix(&arm.transition)).unwrap();
            if let Some(r) = &arm.rewards {
                writeln!(out, "rewards = {}", matrix(r)).unwrap();
            }
        }
        out
    }
}

fn float_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn matrix(m: &[Vec<f64>]) -> String {
    let rows: Vec<String> = m.iter().map(|r| format!("    {},", float_list(r))).collect();
    format!("[\n{}\n]", rows.join("\n"))
}

pub fn parse_instance_str(text: &str, path: &Path) -> Result<InstanceFile> {
    toml::from_str(text).map_err(|e| CliError::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

/// Reads an instance file; returns the validated instance, its optional
/// prior and any validation warnings.
pub fn load_instance(path: &Path) -> Result<(BanditInstance, Option<PriorConfig>, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file = parse_instance_str(&text, path)?;
    let parse_err = |message: String| CliError::Parse {
        path: path.into(),
        message,
    };
    let (instance, warnings) = file.to_instance().map_err(parse_err)?;
    let prior = file.prior().map_err(parse_err)?;
    Ok((instance, prior, warnings))
}
