//! Conjugate posteriors over arm parameters and model sampling for MB-PSRL.
//!
//! Transitions: each row `Q(x, .)` has a Dirichlet posterior whose
//! concentration is the prior concentration plus next-state counts.
//!
//! Rewards: either a Beta posterior (Bernoulli rewards) or a Gaussian-Gamma
//! posterior (Gaussian rewards). With `N` observations of empirical mean `m`
//! and empirical variance `v` (divided by `N`), the Gaussian-Gamma posterior is
//!
//! ```text
//! precision       ~ Gamma(shape = (N + 1) / 2, rate = 1/2 + N v / 2 + N m^2 / (2 (N + 1)))
//! mean | precision ~ Normal(N m / (N + 1), 1 / (precision (N + 1)))
//! ```
//!
//! Samples are drawn with `rand_distr`'s Gamma, Beta and Normal samplers from
//! whatever generator the caller passes (the learners use `ChaCha8Rng`).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};

use crate::error::{Error, Result};
use crate::model::{ArmModel, BanditInstance, RewardKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardPrior {
    Beta { alpha: f64, beta: f64 },
    GaussGamma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    /// Symmetric Dirichlet concentration for every transition row.
    pub transition_concentration: f64,
    pub rewards: RewardPrior,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            transition_concentration: 1.0,
            rewards: RewardPrior::Beta {
                alpha: 1.0,
                beta: 1.0,
            },
        }
    }
}

impl PriorConfig {
    pub fn gauss_gamma() -> Self {
        Self {
            rewards: RewardPrior::GaussGamma,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletRow {
    pub concentration: Vec<f64>,
}

impl DirichletRow {
    pub fn mean(&self) -> Vec<f64> {
        let total: f64 = self.concentration.iter().sum();
        self.concentration.iter().map(|c| c / total).collect()
    }

    /// Normalized independent `Gamma(c_y, 1)` draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut draws: Vec<f64> = self
            .concentration
            .iter()
            .map(|&c| Gamma::new(c, 1.0).map(|g| g.sample(rng)).unwrap_or(0.0))
            .collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            draws.iter_mut().for_each(|d| *d /= total);
        } else {
            // All draws underflowed; fall back to the posterior mode direction.
            let best = argmax(&self.concentration);
            draws.iter_mut().enumerate().for_each(|(y, d)| *d = (y == best) as u8 as f64);
        }
        draws
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Streaming sufficient statistics of a Gaussian-Gamma posterior.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussGammaParams {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations from the running mean.
    pub sum_sq_dev: f64,
}

impl GaussGammaParams {
    pub fn observe(&mut self, reward: f64) {
        self.count += 1;
        let delta = reward - self.mean;
        self.mean += delta / self.count as f64;
        self.sum_sq_dev += delta * (reward - self.mean);
    }

    /// Empirical variance (divided by `N`), 0 before any observation.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.sum_sq_dev / self.count as f64).max(0.0)
        }
    }

    pub fn gamma_shape(&self) -> f64 {
        (self.count as f64 + 1.0) / 2.0
    }

    pub fn gamma_rate(&self) -> f64 {
        let n = self.count as f64;
        0.5 + n * self.variance() / 2.0 + n * self.mean * self.mean / (2.0 * (n + 1.0))
    }

    pub fn normal_mean(&self) -> f64 {
        let n = self.count as f64;
        n * self.mean / (n + 1.0)
    }

    /// Variance of the mean given the precision: `1 / (precision (N + 1))`.
    pub fn normal_variance(&self, precision: f64) -> f64 {
        1.0 / (precision * (self.count as f64 + 1.0))
    }

    /// Draws `(mean, precision)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let precision = Gamma::new(self.gamma_shape(), 1.0 / self.gamma_rate())
            .map(|g| g.sample(rng))
            .unwrap_or(1.0)
            .max(f64::MIN_POSITIVE);
        let sd = libm::sqrt(self.normal_variance(precision));
        let mean = Normal::new(self.normal_mean(), sd)
            .map(|d| d.sample(rng))
            .unwrap_or(self.normal_mean());
        (mean, precision)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardPosterior {
    Beta(BetaParams),
    GaussGamma(GaussGammaParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmPosterior {
    pub transitions: Vec<DirichletRow>,
    pub rewards: Vec<RewardPosterior>,
}

/// One observed activation: arm, local state, realized reward, next local state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub arm: usize,
    pub state: usize,
    pub reward: f64,
    pub next: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    pub arms: Vec<ArmPosterior>,
    pub prior: PriorConfig,
}

impl PosteriorState {
    pub fn new(state_counts: &[usize], prior: PriorConfig) -> Result<Self> {
        if !(prior.transition_concentration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Dirichlet concentration {} must be positive",
                prior.transition_concentration
            )));
        }
        let reward_prior = match prior.rewards {
            RewardPrior::Beta { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Beta prior ({alpha}, {beta}) must be positive"
                    )));
                }
                RewardPosterior::Beta(BetaParams { alpha, beta })
            }
            RewardPrior::GaussGamma => RewardPosterior::GaussGamma(GaussGammaParams::default()),
        };
        let arms = state_counts
            .iter()
            .map(|&s| ArmPosterior {
                transitions: vec![
                    DirichletRow {
                        concentration: vec![prior.transition_concentration; s],
                    };
                    s
                ],
                rewards: vec![reward_prior; s],
            })
            .collect();
        Ok(Self { arms, prior })
    }

    pub fn for_instance(instance: &BanditInstance, prior: PriorConfig) -> Result<Self> {
        Self::new(&instance.state_counts(), prior)
    }

    pub fn state_counts(&self) -> Vec<usize> {
        self.arms.iter().map(|a| a.transitions.len()).collect()
    }

    /// Conjugate update with one observation. Leaves every other entry as is.
    pub fn update(&mut self, obs: Observation) -> Result<()> {
        let arm = self
            .arms
            .get_mut(obs.arm)
            .ok_or(Error::ActionOutOfRange {
                action: obs.arm,
                arms: 0,
            })?;
        let s = arm.transitions.len();
        if obs.state >= s || obs.next >= s {
            return Err(Error::StateOutOfRange {
                arm: obs.arm,
                state: obs.state.max(obs.next),
                states: s,
            });
        }
        match &mut arm.rewards[obs.state] {
            RewardPosterior::Beta(p) => {
                if obs.reward == 1.0 {
                    p.alpha += 1.0;
                } else if obs.reward == 0.0 {
                    p.beta += 1.0;
                } else {
                    return Err(Error::NonBinaryReward(obs.reward));
                }
            }
            RewardPosterior::GaussGamma(p) => p.observe(obs.reward),
        }
        arm.transitions[obs.state].concentration[obs.next] += 1.0;
        Ok(())
    }

    /// Draws one bandit model from the posterior. Shape, discount and initial
    /// distribution come from `template`. Beta posteriors yield Bernoulli arms;
    /// Gaussian-Gamma posteriors yield Gaussian arms whose variance is the
    /// average sampled variance of the arm, with means used as drawn.
    pub fn sample_model<R: Rng + ?Sized>(
        &self,
        template: &BanditInstance,
        rng: &mut R,
    ) -> Result<BanditInstance> {
        if template.state_counts() != self.state_counts() {
            return Err(Error::ShapeMismatch(format!(
                "posterior shape {:?} vs instance shape {:?}",
                self.state_counts(),
                template.state_counts()
            )));
        }
        let arms = self
            .arms
            .iter()
            .map(|arm| {
                let transition: Vec<Vec<f64>> =
                    arm.transitions.iter().map(|row| row.sample(rng)).collect();
                let mut means = Vec::with_capacity(arm.rewards.len());
                let mut variance_sum = 0.0;
                let mut gaussian = false;
                for post in &arm.rewards {
                    match post {
                        RewardPosterior::Beta(p) => {
                            let draw = Beta::new(p.alpha, p.beta)
                                .map(|d| d.sample(rng))
                                .unwrap_or(p.alpha / (p.alpha + p.beta));
                            means.push(draw);
                        }
                        RewardPosterior::GaussGamma(p) => {
                            let (mean, precision) = p.sample(rng);
                            means.push(mean);
                            variance_sum += 1.0 / precision;
                            gaussian = true;
                        }
                    }
                }
                let kind = if gaussian {
                    RewardKind::Gaussian {
                        variance: variance_sum / means.len() as f64,
                    }
                } else {
                    RewardKind::Bernoulli
                };
                ArmModel::new(means, transition, kind)
            })
            .collect();
        Ok(BanditInstance::new(
            arms,
            template.discount,
            template.initial.clone(),
        ))
    }
}
