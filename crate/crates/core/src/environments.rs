//! Built-in benchmark instances.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::confidence::{build_counterexample, COUNTEREXAMPLE_RADIUS};
use crate::error::{Error, Result};
use crate::evaluation::{lower_bound_instance, RewardGap};
use crate::model::{ArmModel, BanditInstance};
use crate::seeding::stream;

pub const SCENARIO1_DISCOUNT: f64 = 0.99;
pub const SCENARIO2_DISCOUNT: f64 = 0.99;
pub const SCENARIO2_DECAY: f64 = 0.8;
pub const SCENARIO2_ARMS: usize = 9;
pub const SCENARIO2_TASK_STATES: usize = 10;

/// Parameters of one random-walk chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWalk {
    pub p_left: f64,
    pub p_right: f64,
    pub p_return: f64,
    pub r_left: f64,
    pub r_right: f64,
}

impl RandomWalk {
    /// 4-state chain: the leftmost state moves right with `p_right`, interior
    /// states step left/right with `p_left`/`p_right`, and the rightmost state
    /// steps back with `p_return`. Only the two end states pay.
    pub fn arm(&self) -> ArmModel {
        let (l, r, back) = (self.p_left, self.p_right, self.p_return);
        let transition = vec![
            vec![1.0 - r, r, 0.0, 0.0],
            vec![l, 1.0 - l - r, r, 0.0],
            vec![0.0, l, 1.0 - l - r, r],
            vec![0.0, 0.0, back, 1.0 - back],
        ];
        ArmModel::bernoulli(vec![self.r_left, 0.0, 0.0, self.r_right], transition)
    }
}

pub const SCENARIO1_CHAINS: [RandomWalk; 3] = [
    RandomWalk { p_left: 0.1, p_right: 0.2, p_return: 0.3, r_left: 0.2, r_right: 1.0 },
    RandomWalk { p_left: 0.1, p_right: 0.5, p_return: 0.7, r_left: 0.35, r_right: 0.7 },
    RandomWalk { p_left: 0.1, p_right: 0.4, p_return: 0.5, r_left: 0.4, r_right: 0.65 },
];

/// Three 4-state random walks, all starting in their leftmost state.
pub fn scenario1_instance() -> BanditInstance {
    scenario1_with_discount(SCENARIO1_DISCOUNT)
}

pub fn scenario1_with_discount(discount: f64) -> BanditInstance {
    random_walk_instance(&SCENARIO1_CHAINS, discount)
}

pub fn random_walk_instance(chains: &[RandomWalk], discount: f64) -> BanditInstance {
    BanditInstance::starting_at_zero(chains.iter().map(RandomWalk::arm).collect(), discount)
}

/// `P(tau = i)` for `i = 1..=len` under the task-duration law with first
/// hazard `rho1` and decay `lambda`.
pub fn task_duration_law(rho1: f64, lambda: f64, len: usize) -> Vec<f64> {
    (1..=len)
        .map(|i| {
            let k = (i - 1) as f64;
            (1.0 - (1.0 - rho1) * libm::pow(lambda, k))
                * libm::pow(1.0 - rho1, k)
                * libm::pow(lambda, k * (k - 1.0) / 2.0)
        })
        .collect()
}

/// Hazard rates `P(tau = i | tau >= i)` derived from [`task_duration_law`].
pub fn hazard_rates(rho1: f64, lambda: f64, len: usize) -> Vec<f64> {
    let law = task_duration_law(rho1, lambda, len);
    let mut survival = 1.0;
    law.iter()
        .map(|&p| {
            let h = if survival > 0.0 { (p / survival).clamp(0.0, 1.0) } else { 1.0 };
            survival -= p;
            h
        })
        .collect()
}

/// One task arm: task states `0..len` and the absorbing finished state
/// `len`. Reward 1 on the transition into the finished state.
pub fn task_arm(hazards: &[f64]) -> ArmModel {
    let n = hazards.len();
    let states = n + 1;
    let mut transition = vec![vec![0.0; states]; states];
    let mut rewards = vec![vec![0.0; states]; states];
    for (i, &rho) in hazards.iter().enumerate() {
        let rho = if i + 1 == n { 1.0 } else { rho };
        transition[i][n] = rho;
        if i + 1 < n {
            transition[i][i + 1] = 1.0 - rho;
        }
        rewards[i][n] = 1.0;
    }
    transition[n][n] = 1.0;
    ArmModel::with_transition_rewards(transition, rewards)
}

/// Nine task-scheduling arms with first hazard `0.1 a` for arm `a = 1..9`.
pub fn scenario2_instance() -> BanditInstance {
    scenario2_with(SCENARIO2_DISCOUNT, SCENARIO2_DECAY)
}

pub fn scenario2_with(discount: f64, lambda: f64) -> BanditInstance {
    let arms = (1..=SCENARIO2_ARMS)
        .map(|a| task_arm(&hazard_rates(0.1 * a as f64, lambda, SCENARIO2_TASK_STATES)))
        .collect();
    BanditInstance::starting_at_zero(arms, discount)
}

fn dirichlet_ones<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(1.0, 1.0).expect("unit gamma");
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|g| g / total).collect()
}

/// Random walk with `(r_L, r_R)` uniform on the square, `(p_L, p_R)` the
/// first two coordinates of a flat 3-component Dirichlet and `p_RL` the
/// first coordinate of a flat 2-component Dirichlet.
pub fn sample_random_walk<R: Rng + ?Sized>(rng: &mut R) -> RandomWalk {
    let r_left = rng.random::<f64>();
    let r_right = rng.random::<f64>();
    let moves = dirichlet_ones(3, rng);
    let back = dirichlet_ones(2, rng);
    RandomWalk {
        p_left: moves[0],
        p_right: moves[1],
        p_return: back[0],
        r_left,
        r_right,
    }
}

/// A random 3-arm instance with the scenario-1 topology.
pub fn scenario3_sampler<R: Rng + ?Sized>(rng: &mut R) -> BanditInstance {
    let chains: Vec<RandomWalk> = (0..3).map(|_| sample_random_walk(rng)).collect();
    random_walk_instance(&chains, SCENARIO1_DISCOUNT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioName {
    RandomWalk,
    TaskScheduling,
    PriorSensitivity,
    Counterexample,
    LowerBound,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        Self::RandomWalk,
        Self::TaskScheduling,
        Self::PriorSensitivity,
        Self::Counterexample,
        Self::LowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::RandomWalk => "scenario1_random_walk",
            Self::TaskScheduling => "scenario2_task_scheduling",
            Self::PriorSensitivity => "scenario3_prior_sensitivity",
            Self::Counterexample => "counterexample",
            Self::LowerBound => "lower_bound",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Self::RandomWalk => "3 random-walk chains, 4 states each, 64 global states",
            Self::TaskScheduling => "9 task arms, 11 states each, 11^9 global states",
            Self::PriorSensitivity => "random 3-arm random-walk instance drawn from a seed",
            Self::Counterexample => "true model M1 of the local-optimism counterexample",
            Self::LowerBound => "S coupled n-armed stochastic bandits",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let short = match s {
            "scenario1" => Some(Self::RandomWalk),
            "scenario2" => Some(Self::TaskScheduling),
            "scenario3" => Some(Self::PriorSensitivity),
            _ => None,
        };
        short
            .or_else(|| Self::ALL.into_iter().find(|n| n.name() == s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario `{s}`")))
    }
}

/// A scenario with its overridable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    /// Replaces the scenario's default discount.
    pub discount: Option<f64>,
    /// Seed for randomly drawn scenarios.
    pub seed: u64,
    /// `(S, n, K)` for the lower-bound environment.
    pub lower_bound: (usize, usize, usize),
}

impl ScenarioSpec {
    pub fn new(name: ScenarioName) -> Self {
        Self {
            name,
            discount: None,
            seed: 0,
            lower_bound: (4, 3, 300),
        }
    }

    pub fn build(&self) -> Result<BanditInstance> {
        let instance = match self.name {
            ScenarioName::RandomWalk => scenario1_with_discount(self.discount.unwrap_or(SCENARIO1_DISCOUNT)),
            ScenarioName::TaskScheduling => {
                scenario2_with(self.discount.unwrap_or(SCENARIO2_DISCOUNT), SCENARIO2_DECAY)
            }
            ScenarioName::PriorSensitivity => {
                let mut inst = scenario3_sampler(&mut stream(self.seed, &["scenario3"]));
                if let Some(d) = self.discount {
                    inst.discount = d;
                }
                inst
            }
            ScenarioName::Counterexample => {
                let mut inst = build_counterexample(COUNTEREXAMPLE_RADIUS, 0.0).m1;
                if let Some(d) = self.discount {
                    inst.discount = d;
                }
                inst
            }
            ScenarioName::LowerBound => {
                let (s, n, k) = self.lower_bound;
                let discount = self.discount.unwrap_or(SCENARIO1_DISCOUNT);
                let gap = RewardGap::default_for(s, n, k, discount);
                lower_bound_instance(s, n, discount, gap, &mut stream(self.seed, &["lower_bound"]))?
                    .instance
            }
        };
        instance.validated()
    }
}

impl From<ScenarioName> for ScenarioSpec {
    fn from(name: ScenarioName) -> Self {
        Self::new(name)
    }
}

/// Short label used in file names.
pub fn scenario_label(name: ScenarioName) -> String {
    String::from(name.name())
}
