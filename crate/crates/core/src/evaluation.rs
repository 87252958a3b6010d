//! Regret evaluation (exact and Monte-Carlo), the lower-bound environment and
//! its episode-occupancy statistics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gittins::gittins_policy;
use crate::learners::{run_learner, sample_horizon, LearnerConfig, LearnerRun};
use crate::model::{
    ArmModel, BanditInstance, GlobalMdp, GlobalState, InitialDistribution, Policy,
};
use crate::planning::policy_value_tabular;
use crate::seeding::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretMethod {
    Exact,
    MonteCarlo,
}

impl RegretMethod {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

/// Per-episode regret and its running sum.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub label: String,
    pub seed: u64,
    pub method: RegretMethod,
    pub deltas: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn new(label: impl Into<String>, seed: u64, method: RegretMethod, deltas: Vec<f64>) -> Self {
        let cumulative = deltas
            .iter()
            .scan(0.0, |acc, d| {
                *acc += d;
                Some(*acc)
            })
            .collect();
        Self {
            label: label.into(),
            seed,
            method,
            deltas,
            cumulative,
        }
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Sum by recursive halving; the result depends only on the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Exact episode regret `V*(x) - V^{pi_k}(x)` by linear solves on the
/// assembled global MDP, with values cached per distinct action table.
pub struct ExactRegret {
    mdp: GlobalMdp,
    discount: f64,
    optimal: Vec<f64>,
    cache: BTreeMap<Vec<usize>, Vec<f64>>,
}

impl ExactRegret {
    /// Fails with [`Error::StateCapExceeded`] on instances too large to
    /// assemble; use Monte-Carlo regret there.
    pub fn new(instance: &BanditInstance, cap: u128) -> Result<Self> {
        let mdp = GlobalMdp::assemble(instance, cap)?;
        let oracle: Policy = gittins_policy(instance)?.into();
        let optimal = policy_value_tabular(&mdp, &oracle.tabulate(mdp.space()), instance.discount)?;
        Ok(Self {
            mdp,
            discount: instance.discount,
            optimal,
            cache: BTreeMap::new(),
        })
    }

    pub fn optimal_values(&self) -> &[f64] {
        &self.optimal
    }

    pub fn policy_values(&mut self, policy: &Policy) -> Result<&[f64]> {
        let tab = policy.tabulate(self.mdp.space());
        if !self.cache.contains_key(&tab.actions) {
            let values = policy_value_tabular(&self.mdp, &tab, self.discount)?;
            self.cache.insert(tab.actions.clone(), values);
        }
        Ok(&self.cache[&tab.actions])
    }

    pub fn delta(&mut self, policy: &Policy, state: &GlobalState) -> Result<f64> {
        let id = self.mdp.space().encode(&state.0);
        let v_star = self.optimal[id];
        Ok(v_star - self.policy_values(policy)?[id])
    }

    pub fn trace(&mut self, run: &LearnerRun) -> Result<RegretTrace> {
        let deltas = run
            .records
            .iter()
            .map(|rec| self.delta(run.policy_of(rec), &rec.start_state))
            .collect::<Result<Vec<_>>>()?;
        Ok(RegretTrace::new(run.algorithm.name(), run.seed, RegretMethod::Exact, deltas))
    }
}

pub fn regret_exact(instance: &BanditInstance, run: &LearnerRun, cap: u128) -> Result<RegretTrace> {
    ExactRegret::new(instance, cap)?.trace(run)
}

/// Difference of mean rewards collected by `oracle` and `agent` over
/// `horizon` steps from `start`. Both trajectories consume copies of the same
/// random stream, so identical policies give identical trajectories.
pub fn paired_rollout_gap<R: Rng + Clone>(
    instance: &BanditInstance,
    oracle: &Policy,
    agent: &Policy,
    start: &GlobalState,
    horizon: u64,
    rng: &mut R,
) -> f64 {
    let mean_rewards = |policy: &Policy, rng: &mut R| {
        let mut state = start.clone();
        let mut total = 0.0;
        for _ in 0..horizon {
            let arm = policy.act(&state);
            total += instance.arms[arm].reward_mean[state.0[arm]];
            instance.advance(&mut state, arm, rng);
        }
        total
    };
    let mut oracle_rng = rng.clone();
    mean_rewards(oracle, &mut oracle_rng) - mean_rewards(agent, rng)
}

/// Mean and standard error of a Monte-Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = pairwise_sum(samples) / n as f64;
        let var = if n > 1 {
            let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
            pairwise_sum(&dev) / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_error: libm::sqrt(var / n as f64),
            samples: n,
        }
    }
}

/// Estimates `V^oracle(start) - V^agent(start)` with `replicas` paired
/// rollouts, each with its own geometric horizon.
pub fn monte_carlo_gap(
    instance: &BanditInstance,
    oracle: &Policy,
    agent: &Policy,
    start: &GlobalState,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    if replicas == 0 {
        return Err(Error::InvalidParameter(String::from("replica count must be >= 1")));
    }
    let mut rng = stream(seed, &["monte_carlo"]);
    let samples = (0..replicas)
        .map(|_| {
            let h = sample_horizon(instance.discount, &mut rng)?;
            Ok(paired_rollout_gap(instance, oracle, agent, start, h, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::from_samples(&samples))
}

/// Monte-Carlo regret of one learner run: for each episode, `rollouts`
/// oracle/agent pairs from the episode's start state with fresh horizons.
/// Never assembles the global MDP.
pub fn monte_carlo_deltas(
    instance: &BanditInstance,
    run: &LearnerRun,
    rollouts: usize,
    seed: u64,
) -> Result<RegretTrace> {
    if rollouts == 0 {
        return Err(Error::InvalidParameter(String::from("rollout count must be >= 1")));
    }
    let oracle: Policy = gittins_policy(instance)?.into();
    let mut rng = stream(seed, &["monte_carlo", run.algorithm.name()]);
    let mut samples = vec![0.0; rollouts];
    let deltas = run
        .records
        .iter()
        .map(|rec| {
            let agent = run.policy_of(rec);
            for slot in samples.iter_mut() {
                let h = sample_horizon(instance.discount, &mut rng)?;
                *slot = paired_rollout_gap(instance, &oracle, agent, &rec.start_state, h, &mut rng);
            }
            Ok(pairwise_sum(&samples) / rollouts as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegretTrace::new(
        run.algorithm.name(),
        run.seed,
        RegretMethod::MonteCarlo,
        deltas,
    ))
}

/// Averages over `replicas` independent learner runs the reward gap between
/// each run's agent and an oracle sharing its realized horizon and start
/// state: `Delta_k = (1/J) sum_j sum_{t < H_k^j} [r(oracle) - r(agent)]`.
pub fn regret_monte_carlo(
    instance: &BanditInstance,
    config: &LearnerConfig,
    replicas: usize,
) -> Result<RegretTrace> {
    if replicas == 0 {
        return Err(Error::InvalidParameter(String::from("replica count must be >= 1")));
    }
    let oracle: Policy = gittins_policy(instance)?.into();
    let mut per_episode = vec![Vec::with_capacity(replicas); config.episodes];
    for j in 0..replicas {
        let replica_seed = derive_seed(config.seed, &["replica", &format!("{j}")]);
        let cfg = LearnerConfig {
            seed: replica_seed,
            ..config.clone()
        };
        let run = run_learner(instance, &cfg)?;
        let mut rng = stream(replica_seed, &["monte_carlo", config.algorithm.name()]);
        for (k, rec) in run.records.iter().enumerate() {
            let gap = paired_rollout_gap(
                instance,
                &oracle,
                run.policy_of(rec),
                &rec.start_state,
                rec.horizon,
                &mut rng,
            );
            per_episode[k].push(gap);
        }
    }
    let deltas = per_episode
        .iter()
        .map(|gaps| pairwise_sum(gaps) / replicas as f64)
        .collect();
    Ok(RegretTrace::new(
        config.algorithm.name(),
        config.seed,
        RegretMethod::MonteCarlo,
        deltas,
    ))
}

/// Reward means of the lower-bound environment: `gamma` everywhere except
/// the best arm of each coordinate, which gets `gamma_best`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardGap {
    pub gamma: f64,
    pub gamma_best: f64,
}

impl RewardGap {
    /// `gamma = 1/2`, `gamma_best = 1/2 + min(1/4, sqrt(n / tau) / 4)` with
    /// `tau = K / (2 S (1 - b))`.
    pub fn default_for(states: usize, arms: usize, episodes: usize, discount: f64) -> Self {
        let tau = episodes as f64 / (2.0 * states as f64 * (1.0 - discount));
        let eps = (libm::sqrt(arms as f64 / tau) / 4.0).min(0.25);
        Self {
            gamma: 0.5,
            gamma_best: 0.5 + eps,
        }
    }
}

/// A drawn lower-bound environment and its hidden best arms.
#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub instance: BanditInstance,
    /// Best arm of each coordinate `i`.
    pub best_arms: Vec<usize>,
    pub gap: RewardGap,
}

/// `S` independent `n`-armed stochastic bandits folded into one Markovian
/// bandit: identity transitions, Bernoulli rewards, and an initial
/// distribution uniform over the coupled states `(i, i, ..., i)`.
pub fn lower_bound_instance<R: Rng + ?Sized>(
    states: usize,
    arms: usize,
    discount: f64,
    gap: RewardGap,
    rng: &mut R,
) -> Result<LowerBoundInstance> {
    if !(0.0 <= gap.gamma && gap.gamma < gap.gamma_best && gap.gamma_best <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "reward gap needs 0 <= gamma < gamma_best <= 1, got ({}, {})",
            gap.gamma, gap.gamma_best
        )));
    }
    if states == 0 || arms == 0 {
        return Err(Error::InvalidParameter(String::from("need S >= 1 and n >= 1")));
    }
    let arm_ids: Vec<usize> = (0..arms).collect();
    let best_arms: Vec<usize> = (0..states)
        .map(|_| *arm_ids.choose(rng).expect("n >= 1"))
        .collect();
    let identity: Vec<Vec<f64>> = (0..states)
        .map(|i| (0..states).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let arm_models = (0..arms)
        .map(|a| {
            let means = best_arms
                .iter()
                .map(|&best| if best == a { gap.gamma_best } else { gap.gamma })
                .collect();
            ArmModel::bernoulli(means, identity.clone())
        })
        .collect();
    let initial = InitialDistribution::Coupled {
        states: (0..states).map(|i| GlobalState(vec![i; arms])).collect(),
        probabilities: vec![1.0 / states as f64; states],
    };
    let instance = BanditInstance::new(arm_models, discount, initial).validated()?;
    Ok(LowerBoundInstance {
        instance,
        best_arms,
        gap,
    })
}

/// Empirical occupancy of one coupled state in the lower-bound environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma5Report {
    pub states: usize,
    pub episodes: usize,
    pub discount: f64,
    pub replicas: usize,
    /// `K / (S (1 - b))`.
    pub expected_mean: f64,
    pub mean: f64,
    pub std_error: f64,
    /// Empirical `P(T >= expected_mean / 2)`.
    pub prob_half: f64,
    /// `1 - 8 S / K`.
    pub bound: f64,
}

impl Lemma5Report {
    pub fn mean_within_3se(&self) -> bool {
        (self.mean - self.expected_mean).abs() <= 3.0 * self.std_error
    }

    pub fn bound_holds(&self) -> bool {
        self.prob_half >= self.bound
    }

    pub fn passed(&self) -> bool {
        self.mean_within_3se() && self.bound_holds()
    }
}

/// Simulates `K` episodes of the lower-bound environment `replicas` times and
/// counts the steps `T` spent in the coupled state `(0, ..., 0)`. Transitions
/// are the identity, so an episode contributes its whole horizon when it
/// starts there.
pub fn check_lemma5(
    states: usize,
    arms: usize,
    episodes: usize,
    discount: f64,
    replicas: usize,
    seed: u64,
) -> Result<Lemma5Report> {
    if replicas == 0 {
        return Err(Error::InvalidParameter(String::from("replica count must be >= 1")));
    }
    if episodes == 0 {
        return Err(Error::InvalidParameter(String::from("episode count must be >= 1")));
    }
    let gap = RewardGap::default_for(states, arms, episodes, discount);
    let env = lower_bound_instance(states, arms, discount, gap, &mut stream(seed, &["lower_bound"]))?;
    let tracked = GlobalState(vec![0; arms]);
    let mut rng = stream(seed, &["lemma5"]);
    let expected_mean = episodes as f64 / (states as f64 * (1.0 - discount));
    let mut occupancy = Vec::with_capacity(replicas);
    for _ in 0..replicas {
        let mut t = 0u64;
        for _ in 0..episodes {
            let start = env.instance.initial.sample(&mut rng);
            let h = sample_horizon(discount, &mut rng)?;
            if start == tracked {
                t += h;
            }
        }
        occupancy.push(t as f64);
    }
    let est = Estimate::from_samples(&occupancy);
    let half_hits = occupancy.iter().filter(|&&t| t >= expected_mean / 2.0).count();
    Ok(Lemma5Report {
        states,
        episodes,
        discount,
        replicas,
        expected_mean,
        mean: est.mean,
        std_error: est.std_error,
        prob_half: half_hits as f64 / replicas as f64,
        bound: 1.0 - 8.0 * states as f64 / episodes as f64,
    })
}
