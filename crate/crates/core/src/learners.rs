//! The episodic learning loop and the three policy-construction strategies.
//!
//! Every episode draws a start state from the initial distribution and a
//! horizon `H ~ Geom(1 - b)`, computes a policy from everything observed so
//! far, and plays that policy for `H` steps.
//!
//! Three independent random streams drive a run, all derived from the run
//! seed: `episodes` (start states and horizons), `environment` (rewards and
//! transitions) and `algorithm/<name>` (posterior sampling). The first two do
//! not depend on the algorithm, so algorithms run with the same seed face the
//! same sequence of start states and horizons.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use core::time::Duration;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::confidence::{
    evi_optimistic_plan, ucbvi_bonus, ucrl2_radii, ConfidenceSet, EviOptions, RadiusParams,
    SufficientStats, LEARNING_EVI_TOLERANCE,
};
use crate::error::{check_discount, Error, Result};
use crate::gittins::gittins_policy;
use crate::model::{BanditInstance, GlobalState, Policy, DEFAULT_STATE_CAP};
use crate::posterior::{Observation, PosteriorState, PriorConfig};
use crate::seeding::{stream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    MbPsrl,
    MbUcrl2,
    MbUcbvi,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::MbPsrl, Algorithm::MbUcrl2, Algorithm::MbUcbvi];

    pub fn name(self) -> &'static str {
        match self {
            Self::MbPsrl => "mb_psrl",
            Self::MbUcrl2 => "mb_ucrl2",
            Self::MbUcbvi => "mb_ucbvi",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "mb_psrl" | "psrl" => Ok(Self::MbPsrl),
            "mb_ucrl2" | "ucrl2" => Ok(Self::MbUcrl2),
            "mb_ucbvi" | "ucbvi" => Ok(Self::MbUcbvi),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Settings of one learner run. The discount factor is the instance's.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    pub episodes: usize,
    pub seed: u64,
    /// Prior of MB-PSRL; ignored by the optimistic algorithms.
    pub prior: PriorConfig,
    /// Largest global state space MB-UCRL2 accepts.
    pub evi_state_cap: u128,
    pub evi_tolerance: f64,
    /// Start each EVI from the previous episode's optimistic value.
    pub evi_warm_start: bool,
}

impl LearnerConfig {
    pub fn new(algorithm: Algorithm, episodes: usize, seed: u64) -> Self {
        Self {
            algorithm,
            episodes,
            seed,
            prior: PriorConfig::default(),
            evi_state_cap: DEFAULT_STATE_CAP,
            evi_tolerance: LEARNING_EVI_TOLERANCE,
            evi_warm_start: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::InvalidParameter(String::from("episode count must be >= 1")));
        }
        if !(self.evi_tolerance > 0.0) {
            return Err(Error::InvalidParameter(String::from("EVI tolerance must be positive")));
        }
        Ok(())
    }
}

/// What happened in one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode index `k`.
    pub episode: usize,
    /// 1-based start time `t_k`.
    pub start_time: u64,
    pub start_state: GlobalState,
    pub horizon: u64,
    /// Index into [`LearnerRun::policies`].
    pub policy_id: usize,
    /// Sum of realized rewards over the episode.
    pub reward: f64,
    /// Wall-clock time spent computing the policy.
    pub policy_time: Duration,
}

/// Monotonic clock used to time policy computation.
pub trait Clock {
    fn now(&self) -> Duration;
}

/// Clock that never advances; recorded policy times are zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}

/// `H ~ Geom(1 - b)` on `{1, 2, ...}`.
pub fn sample_horizon<R: Rng + ?Sized>(discount: f64, rng: &mut R) -> Result<u64> {
    check_discount(discount)?;
    let failures = Geometric::new(1.0 - discount)
        .map_err(|e| Error::InvalidParameter(alloc::format!("{e}")))?
        .sample(rng);
    Ok(failures.saturating_add(1))
}

/// State of one learner between episodes.
#[derive(Debug, Clone)]
pub struct Learner {
    algorithm: Algorithm,
    template: BanditInstance,
    episodes: usize,
    stats: SufficientStats,
    posterior: Option<PosteriorState>,
    evi_state_cap: u128,
    evi_tolerance: f64,
    evi_warm_start: bool,
    last_value: Option<Vec<f64>>,
}

impl Learner {
    pub fn new(instance: &BanditInstance, config: &LearnerConfig) -> Result<Self> {
        config.validate()?;
        check_discount(instance.discount)?;
        let counts = instance.state_counts();
        if config.algorithm == Algorithm::MbUcrl2 {
            let states = instance.global_state_count();
            if states > config.evi_state_cap {
                return Err(Error::ExponentialBarrier {
                    states,
                    cap: config.evi_state_cap,
                });
            }
        }
        let posterior = match config.algorithm {
            Algorithm::MbPsrl => Some(PosteriorState::new(&counts, config.prior)?),
            _ => None,
        };
        Ok(Self {
            algorithm: config.algorithm,
            template: instance.clone(),
            episodes: config.episodes,
            stats: SufficientStats::new(&counts),
            posterior,
            evi_state_cap: config.evi_state_cap,
            evi_tolerance: config.evi_tolerance,
            evi_warm_start: config.evi_warm_start,
            last_value: None,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut SufficientStats {
        &mut self.stats
    }

    pub fn posterior(&self) -> Option<&PosteriorState> {
        self.posterior.as_ref()
    }

    pub fn posterior_mut(&mut self) -> Option<&mut PosteriorState> {
        self.posterior.as_mut()
    }

    /// Policy for the episode starting at time `time` (1-based):
    ///
    /// - MB-PSRL: Gittins policy of a model drawn from the posterior;
    /// - MB-UCBVI: Gittins policy of the empirical bandit with the reward bonus;
    /// - MB-UCRL2: greedy policy of extended value iteration.
    pub fn compute_policy<R: Rng + ?Sized>(&mut self, time: u64, rng: &mut R) -> Result<Policy> {
        let discount = self.template.discount;
        let params = RadiusParams::for_stats(&self.stats, self.episodes, time.max(1));
        match self.algorithm {
            Algorithm::MbPsrl => {
                let posterior = self
                    .posterior
                    .as_ref()
                    .expect("MB-PSRL learner always holds a posterior");
                let model = posterior.sample_model(&self.template, rng)?;
                Ok(gittins_policy(&model)?.into())
            }
            Algorithm::MbUcbvi => {
                let bonus = ucbvi_bonus(&self.stats, discount, &params)?;
                let optimistic = self
                    .stats
                    .shifted_instance(&self.template, |a, x| bonus[a][x]);
                Ok(gittins_policy(&optimistic)?.into())
            }
            Algorithm::MbUcrl2 => {
                let set = ConfidenceSet::from_stats(&self.stats, ucrl2_radii(&self.stats, &params));
                let warm = if self.evi_warm_start {
                    self.last_value.as_deref()
                } else {
                    None
                };
                let sol = evi_optimistic_plan(
                    &set,
                    discount,
                    EviOptions {
                        tolerance: self.evi_tolerance,
                        state_cap: self.evi_state_cap,
                        warm_start: warm,
                    },
                )?;
                if self.evi_warm_start {
                    self.last_value = Some(sol.value);
                }
                Ok(sol.policy.into())
            }
        }
    }

    pub fn observe(&mut self, obs: Observation) -> Result<()> {
        if let Some(p) = self.posterior.as_mut() {
            p.update(obs)?;
        }
        self.stats.record(obs);
        Ok(())
    }
}

/// Output of [`run_learner`].
#[derive(Debug, Clone)]
pub struct LearnerRun {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub records: Vec<EpisodeRecord>,
    /// Distinct consecutive policies; records point into this list.
    pub policies: Vec<Policy>,
    pub stats: SufficientStats,
    pub posterior: Option<PosteriorState>,
}

impl LearnerRun {
    pub fn policy_of(&self, record: &EpisodeRecord) -> &Policy {
        &self.policies[record.policy_id]
    }

    pub fn total_steps(&self) -> u64 {
        self.records.iter().map(|r| r.horizon).sum()
    }
}

/// Random streams of a run.
pub struct RunStreams {
    pub episodes: StreamRng,
    pub environment: StreamRng,
    pub algorithm: StreamRng,
}

impl RunStreams {
    pub fn new(seed: u64, algorithm: Algorithm) -> Self {
        Self {
            episodes: stream(seed, &["episodes"]),
            environment: stream(seed, &["environment"]),
            algorithm: stream(seed, &["algorithm", algorithm.name()]),
        }
    }
}

/// Start state and horizon of every episode for a given seed; identical for
/// all algorithms.
pub fn episode_schedule(
    instance: &BanditInstance,
    seed: u64,
    episodes: usize,
) -> Result<Vec<(GlobalState, u64)>> {
    let mut rng = stream(seed, &["episodes"]);
    (0..episodes)
        .map(|_| {
            let start = instance.initial.sample(&mut rng);
            let h = sample_horizon(instance.discount, &mut rng)?;
            Ok((start, h))
        })
        .collect()
}

pub fn run_learner(instance: &BanditInstance, config: &LearnerConfig) -> Result<LearnerRun> {
    run_learner_timed(instance, config, &NoClock)
}

/// Runs the episodic loop, timing each policy computation with `clock`.
pub fn run_learner_timed<C: Clock + ?Sized>(
    instance: &BanditInstance,
    config: &LearnerConfig,
    clock: &C,
) -> Result<LearnerRun> {
    let instance = instance.clone().validated()?;
    let mut learner = Learner::new(&instance, config)?;
    let mut streams = RunStreams::new(config.seed, config.algorithm);
    let mut records = Vec::with_capacity(config.episodes);
    let mut policies: Vec<Policy> = Vec::new();
    let mut time = 1u64;

    for k in 1..=config.episodes {
        let started = clock.now();
        let policy = learner.compute_policy(time, &mut streams.algorithm)?;
        let policy_time = clock.now().saturating_sub(started);
        if policies.last() != Some(&policy) {
            policies.push(policy);
        }
        let policy_id = policies.len() - 1;
        let policy = &policies[policy_id];

        let start = instance.initial.sample(&mut streams.episodes);
        let horizon = sample_horizon(instance.discount, &mut streams.episodes)?;
        let mut state = start.clone();
        let mut reward = 0.0;
        for _ in 0..horizon {
            let arm = policy.act(&state);
            let from = state.0[arm];
            let r = instance.advance(&mut state, arm, &mut streams.environment);
            reward += r;
            learner.observe(Observation {
                arm,
                state: from,
                reward: r,
                next: state.0[arm],
            })?;
        }
        records.push(EpisodeRecord {
            episode: k,
            start_time: time,
            start_state: start,
            horizon,
            policy_id,
            reward,
            policy_time,
        });
        time += horizon;
    }

    Ok(LearnerRun {
        algorithm: config.algorithm,
        seed: config.seed,
        records,
        policies,
        stats: learner.stats,
        posterior: learner.posterior,
    })
}
