//! Empirical statistics, confidence radii, extended value iteration (EVI) and
//! the counterexample showing that per-arm optimistic indices cannot be
//! optimistic for the whole bandit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_discount, Error, Result};
use crate::model::{
    global_state_count, ArmModel, BanditInstance, GlobalMdp, GlobalState, IndexPolicy,
    InitialDistribution, Policy, RewardKind, StateSpace, TabularPolicy, DEFAULT_STATE_CAP,
};
use crate::planning::{optimal_value, policy_value_exact, vi_stop_threshold};
use crate::posterior::Observation;

/// EVI accuracy used by the learners.
pub const LEARNING_EVI_TOLERANCE: f64 = 1e-4;

/// EVI accuracy used for the counterexample values.
pub const COUNTEREXAMPLE_EVI_TOLERANCE: f64 = 1e-6;

/// L1 radius of arm a's transition rows in the counterexample. A radius of
/// 0.1 cannot contain the second witness instance, whose rows sit at L1
/// distance 0.2 from the estimate.
pub const COUNTEREXAMPLE_RADIUS: f64 = 0.2;

/// Visit count, running mean reward and next-state counts of one local state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateStats {
    pub count: u64,
    pub mean_reward: f64,
    pub next_counts: Vec<u64>,
}

impl StateStats {
    fn new(states: usize) -> Self {
        Self {
            count: 0,
            mean_reward: 0.0,
            next_counts: vec![0; states],
        }
    }

    /// Empirical transition row, uniform before the first visit.
    pub fn transition_row(&self) -> Vec<f64> {
        let s = self.next_counts.len();
        if self.count == 0 {
            return vec![1.0 / s as f64; s];
        }
        let n = self.count as f64;
        self.next_counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Per-(arm, local state) sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub arms: Vec<Vec<StateStats>>,
}

impl SufficientStats {
    pub fn new(state_counts: &[usize]) -> Self {
        Self {
            arms: state_counts
                .iter()
                .map(|&s| (0..s).map(|_| StateStats::new(s)).collect())
                .collect(),
        }
    }

    pub fn state_counts(&self) -> Vec<usize> {
        self.arms.iter().map(Vec::len).collect()
    }

    pub fn get(&self, arm: usize, state: usize) -> &StateStats {
        &self.arms[arm][state]
    }

    /// Overwrites one entry, e.g. to inject known parameters in tests.
    pub fn set(&mut self, arm: usize, state: usize, stats: StateStats) {
        self.arms[arm][state] = stats;
    }

    pub fn record(&mut self, obs: Observation) {
        let st = &mut self.arms[obs.arm][obs.state];
        st.count += 1;
        st.mean_reward += (obs.reward - st.mean_reward) / st.count as f64;
        st.next_counts[obs.next] += 1;
    }

    pub fn total_count(&self) -> u64 {
        self.arms.iter().flatten().map(|s| s.count).sum()
    }

    /// Empirical bandit `(r_hat, Q_hat)` with the shape of `template`.
    pub fn empirical_instance(&self, template: &BanditInstance) -> BanditInstance {
        self.shifted_instance(template, |_, _| 0.0)
    }

    /// Empirical bandit with `bonus(arm, state)` added to every mean reward.
    pub fn shifted_instance(
        &self,
        template: &BanditInstance,
        bonus: impl Fn(usize, usize) -> f64,
    ) -> BanditInstance {
        let arms = self
            .arms
            .iter()
            .enumerate()
            .map(|(a, states)| {
                let means = states
                    .iter()
                    .enumerate()
                    .map(|(x, s)| s.mean_reward + bonus(a, x))
                    .collect();
                let rows = states.iter().map(StateStats::transition_row).collect();
                ArmModel::bernoulli(means, rows)
            })
            .collect();
        BanditInstance::new(arms, template.discount, template.initial.clone())
    }
}

/// The quantities entering the radius formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusParams {
    /// States per arm `S`.
    pub states: usize,
    /// Number of arms `n`.
    pub arms: usize,
    /// Total number of episodes `K`.
    pub episodes: usize,
    /// Start time `t_k` of the current episode (1-based).
    pub time: u64,
}

impl RadiusParams {
    /// `S` is the largest arm size when arms differ.
    pub fn for_stats(stats: &SufficientStats, episodes: usize, time: u64) -> Self {
        Self {
            states: stats.state_counts().into_iter().max().unwrap_or(1),
            arms: stats.arms.len(),
            episodes,
            time,
        }
    }

    fn log_sn_kt(&self) -> f64 {
        libm::log(self.states as f64)
            + libm::log(self.arms as f64)
            + libm::log(self.episodes as f64)
            + libm::log(self.time as f64)
    }
}

/// `sqrt(log(2 S n K t_k) / (2 max(1, N)))`.
pub fn reward_radius(params: &RadiusParams, count: u64) -> f64 {
    let log = core::f64::consts::LN_2 + params.log_sn_kt();
    libm::sqrt(log / (2.0 * count.max(1) as f64))
}

/// `sqrt(2 log(S n K 2^S t_k) / max(1, N))`.
pub fn transition_radius(params: &RadiusParams, count: u64) -> f64 {
    let log = params.states as f64 * core::f64::consts::LN_2 + params.log_sn_kt();
    libm::sqrt(2.0 * log / count.max(1) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceRadii {
    pub reward: Vec<Vec<f64>>,
    pub transition: Vec<Vec<f64>>,
}

impl ConfidenceRadii {
    pub fn zeros(state_counts: &[usize]) -> Self {
        Self {
            reward: state_counts.iter().map(|&s| vec![0.0; s]).collect(),
            transition: state_counts.iter().map(|&s| vec![0.0; s]).collect(),
        }
    }
}

pub fn ucrl2_radii(stats: &SufficientStats, params: &RadiusParams) -> ConfidenceRadii {
    let map = |f: fn(&RadiusParams, u64) -> f64| -> Vec<Vec<f64>> {
        stats
            .arms
            .iter()
            .map(|states| states.iter().map(|s| f(params, s.count)).collect())
            .collect()
    };
    ConfidenceRadii {
        reward: map(reward_radius),
        transition: map(transition_radius),
    }
}

/// Reward-only bonus `reward_radius / (1 - b)` per (arm, state).
pub fn ucbvi_bonus(
    stats: &SufficientStats,
    discount: f64,
    params: &RadiusParams,
) -> Result<Vec<Vec<f64>>> {
    check_discount(discount)?;
    Ok(stats
        .arms
        .iter()
        .map(|states| {
            states
                .iter()
                .map(|s| reward_radius(params, s.count) / (1.0 - discount))
                .collect()
        })
        .collect())
}

/// All bandits whose rewards and transition rows lie within the radii of a
/// center `(r_hat, Q_hat)`; rows are compared in L1 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSet {
    pub reward_center: Vec<Vec<f64>>,
    pub transition_center: Vec<Vec<Vec<f64>>>,
    pub radii: ConfidenceRadii,
}

impl ConfidenceSet {
    pub fn new(center: &BanditInstance, radii: ConfidenceRadii) -> Self {
        Self {
            reward_center: center.arms.iter().map(|a| a.reward_mean.clone()).collect(),
            transition_center: center.arms.iter().map(|a| a.transition.clone()).collect(),
            radii,
        }
    }

    pub fn from_stats(stats: &SufficientStats, radii: ConfidenceRadii) -> Self {
        Self {
            reward_center: stats
                .arms
                .iter()
                .map(|states| states.iter().map(|s| s.mean_reward).collect())
                .collect(),
            transition_center: stats
                .arms
                .iter()
                .map(|states| states.iter().map(StateStats::transition_row).collect())
                .collect(),
            radii,
        }
    }

    pub fn state_counts(&self) -> Vec<usize> {
        self.reward_center.iter().map(Vec::len).collect()
    }

    pub fn contains(&self, instance: &BanditInstance) -> bool {
        const SLACK: f64 = 1e-12;
        if instance.state_counts() != self.state_counts() {
            return false;
        }
        instance.arms.iter().enumerate().all(|(a, arm)| {
            (0..arm.state_count()).all(|x| {
                let dr = (arm.reward_mean[x] - self.reward_center[a][x]).abs();
                let dq: f64 = arm.transition[x]
                    .iter()
                    .zip(&self.transition_center[a][x])
                    .map(|(p, q)| (p - q).abs())
                    .sum();
                dr <= self.radii.reward[a][x] + SLACK && dq <= self.radii.transition[a][x] + SLACK
            })
        })
    }
}

/// Row within L1 distance `radius` of `center` (and on the simplex)
/// maximizing `sum_y q(y) values[y]`.
///
/// Mass `min(1, center[best] + radius / 2)` goes to the highest-value
/// successor, then mass is removed from successors in increasing order of
/// value until the row sums to one.
pub fn optimistic_row(center: &[f64], radius: f64, values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..center.len()).collect();
    // Stable on index for equal values.
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    optimistic_row_sorted(center, radius, &order)
}

fn optimistic_row_sorted(center: &[f64], radius: f64, order: &[usize]) -> Vec<f64> {
    let mut row = center.to_vec();
    let best = order[0];
    row[best] = (center[best] + radius / 2.0).min(1.0);
    let mut excess: f64 = row.iter().sum::<f64>() - 1.0;
    for &j in order.iter().rev() {
        if excess <= 0.0 {
            break;
        }
        if j == best {
            continue;
        }
        let take = row[j].min(excess);
        row[j] -= take;
        excess -= take;
    }
    row
}

/// Output of extended value iteration.
#[derive(Debug, Clone)]
pub struct EviSolution {
    pub policy: TabularPolicy,
    pub value: Vec<f64>,
    /// Sup-norm update of every sweep.
    pub updates: Vec<f64>,
}

/// Options for [`evi_optimistic_plan`].
#[derive(Debug, Clone, Copy)]
pub struct EviOptions<'a> {
    pub tolerance: f64,
    pub state_cap: u128,
    pub warm_start: Option<&'a [f64]>,
}

impl Default for EviOptions<'_> {
    fn default() -> Self {
        Self {
            tolerance: LEARNING_EVI_TOLERANCE,
            state_cap: DEFAULT_STATE_CAP,
            warm_start: None,
        }
    }
}

struct Evi<'a> {
    set: &'a ConfidenceSet,
    space: StateSpace,
    discount: f64,
}

impl<'a> Evi<'a> {
    fn new(set: &'a ConfidenceSet, discount: f64, cap: u128) -> Result<Self> {
        check_discount(discount)?;
        let counts = set.state_counts();
        let states = global_state_count(&counts);
        let space = StateSpace::new(counts, cap)
            .map_err(|_| Error::ExponentialBarrier { states, cap })?;
        Ok(Self {
            set,
            space,
            discount,
        })
    }

    /// Optimistic Q-value of playing `arm` at global state `id`.
    fn q_value(&self, value: &[f64], id: usize, arm: usize, scratch: &mut Vec<f64>) -> f64 {
        let xa = self.space.digit(id, arm);
        let stride = self.space.stride(arm);
        let base = id - xa * stride;
        let s = self.space.radices()[arm];
        scratch.clear();
        scratch.extend((0..s).map(|y| value[base + y * stride]));
        let row = optimistic_row(
            &self.set.transition_center[arm][xa],
            self.set.radii.transition[arm][xa],
            scratch,
        );
        let future: f64 = row.iter().zip(scratch.iter()).map(|(p, v)| p * v).sum();
        self.set.reward_center[arm][xa] + self.set.radii.reward[arm][xa] + self.discount * future
    }

    fn run(
        &self,
        tolerance: f64,
        warm_start: Option<&[f64]>,
        fixed: Option<&TabularPolicy>,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.space.count();
        let arms = self.space.arms();
        let threshold = vi_stop_threshold(tolerance, self.discount);
        let mut value = match warm_start {
            Some(v) if v.len() == n => v.to_vec(),
            _ => vec![0.0; n],
        };
        let mut next = vec![0.0; n];
        let mut scratch = Vec::new();
        let mut updates = Vec::new();
        loop {
            let mut delta: f64 = 0.0;
            for (id, slot) in next.iter_mut().enumerate() {
                let v = match fixed {
                    Some(p) => self.q_value(&value, id, p.act_id(id), &mut scratch),
                    None => (0..arms)
                        .map(|a| self.q_value(&value, id, a, &mut scratch))
                        .fold(f64::NEG_INFINITY, f64::max),
                };
                delta = delta.max((v - value[id]).abs());
                *slot = v;
            }
            core::mem::swap(&mut value, &mut next);
            updates.push(delta);
            if delta <= threshold {
                break;
            }
        }
        (value, updates)
    }

    fn greedy(&self, value: &[f64]) -> TabularPolicy {
        let mut scratch = Vec::new();
        let actions = (0..self.space.count())
            .map(|id| {
                let mut best = 0;
                let mut best_q = f64::NEG_INFINITY;
                for a in 0..self.space.arms() {
                    let q = self.q_value(value, id, a, &mut scratch);
                    if q > best_q {
                        best = a;
                        best_q = q;
                    }
                }
                best
            })
            .collect();
        TabularPolicy::new(self.space.clone(), actions)
    }
}

/// Discounted extended value iteration over the confidence set: every sweep
/// maximizes jointly over arms, rewards within their radius and transition
/// rows within their L1 ball. Stops once the sup-norm update is at most
/// `tolerance (1 - b) / (2 b)`; returns the greedy policy and the value.
///
/// Fails with [`Error::ExponentialBarrier`] when the global state space
/// exceeds `options.state_cap`.
pub fn evi_optimistic_plan(
    set: &ConfidenceSet,
    discount: f64,
    options: EviOptions<'_>,
) -> Result<EviSolution> {
    let evi = Evi::new(set, discount, options.state_cap)?;
    let (value, updates) = evi.run(options.tolerance, options.warm_start, None);
    let policy = evi.greedy(&value);
    Ok(EviSolution {
        policy,
        value,
        updates,
    })
}

/// Largest value of `policy` over the confidence set: EVI with the action at
/// each global state fixed by the policy.
pub fn evi_policy_value(
    set: &ConfidenceSet,
    policy: &Policy,
    discount: f64,
    tolerance: f64,
    state_cap: u128,
) -> Result<Vec<f64>> {
    let evi = Evi::new(set, discount, state_cap)?;
    let tab = policy.tabulate(&evi.space);
    Ok(evi.run(tolerance, None, Some(&tab)).0)
}

/// Every object of the optimism counterexample.
///
/// Arm `a` (states A1, A2, A3) is only known through an estimate and an L1
/// radius per row; arm `b` (B1, B2, B3) and arm `c` (C1) are known exactly.
/// The global bandit is `(a, b)`.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub discount: f64,
    pub set: ConfidenceSet,
    pub m1: BanditInstance,
    pub m2: BanditInstance,
    pub arm_b: ArmModel,
    pub arm_c: ArmModel,
    /// A1 ranked above B1 and B3.
    pub pi1: IndexPolicy,
    /// B1 and B3 ranked above A1.
    pub pi2: IndexPolicy,
}

/// Rewards of the counterexample exceed 1, so they are modelled as
/// zero-variance Gaussians.
fn deterministic(reward_mean: Vec<f64>, transition: Vec<Vec<f64>>) -> ArmModel {
    ArmModel::new(reward_mean, transition, RewardKind::Gaussian { variance: 0.0 })
}

/// Builds the counterexample with L1 radius `radius` on every row of arm a
/// and reward `mu` for arm c.
pub fn build_counterexample(radius: f64, mu: f64) -> Counterexample {
    let discount = 0.5;
    let reward_a = vec![3.0, 4.0, 0.0];
    let estimate_a = deterministic(
        reward_a.clone(),
        vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
    );
    let arm_b = deterministic(
        vec![3.21, 0.0, 3.21],
        vec![vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
    );
    let arm_c = deterministic(vec![mu], vec![vec![1.0]]);
    let a1 = deterministic(
        reward_a.clone(),
        vec![vec![0.4, 0.6, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
    );
    let a2 = deterministic(
        reward_a,
        vec![vec![0.6, 0.4, 0.0], vec![0.1, 0.0, 0.9], vec![0.1, 0.0, 0.9]],
    );
    let start = InitialDistribution::fixed(GlobalState(vec![0, 0]));
    let center = BanditInstance::new(vec![estimate_a, arm_b.clone()], discount, start.clone());
    let radii = ConfidenceRadii {
        reward: vec![vec![0.0; 3], vec![0.0; 3]],
        transition: vec![vec![radius; 3], vec![0.0; 3]],
    };
    let set = ConfidenceSet::new(&center, radii);
    let m1 = BanditInstance::new(vec![a1, arm_b.clone()], discount, start.clone());
    let m2 = BanditInstance::new(vec![a2, arm_b.clone()], discount, start);

    // Priority levels: A2 > B1 = B3 > A3 > B2, with A1 placed above or below B1/B3.
    let b_levels = vec![4.0, 1.0, 4.0];
    let pi1 = IndexPolicy::new(vec![vec![4.5, 5.0, 2.0], b_levels.clone()]);
    let pi2 = IndexPolicy::new(vec![vec![3.0, 5.0, 2.0], b_levels]);
    Counterexample {
        discount,
        set,
        m1,
        m2,
        arm_b,
        arm_c,
        pi1,
        pi2,
    }
}

/// `v1 = sup_M V^{pi2}_M(A1, B3)`, `v2 = sup_pi V^pi_{M1}(A1, B3)`,
/// `v3 = sup_M V^{pi1}_M(A1, B1)`, `v4 = sup_pi V^pi_{M2}(A1, B1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleValues {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v4: f64,
}

impl CounterexampleValues {
    /// Both strict inequalities `v1 < v2` and `v3 < v4`.
    pub fn holds(&self) -> bool {
        self.v1 < self.v2 && self.v3 < self.v4
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.v1, self.v2, self.v3, self.v4]
    }
}

pub fn counterexample_values(ce: &Counterexample) -> Result<CounterexampleValues> {
    let space = StateSpace::new(ce.set.state_counts(), DEFAULT_STATE_CAP)?;
    let a1_b3 = space.encode(&[0, 2]);
    let a1_b1 = space.encode(&[0, 0]);
    let tol = COUNTEREXAMPLE_EVI_TOLERANCE;
    let v1 = evi_policy_value(&ce.set, &ce.pi2.clone().into(), ce.discount, tol, DEFAULT_STATE_CAP)?;
    let v3 = evi_policy_value(&ce.set, &ce.pi1.clone().into(), ce.discount, tol, DEFAULT_STATE_CAP)?;
    let mdp1 = GlobalMdp::assemble(&ce.m1, DEFAULT_STATE_CAP)?;
    let mdp2 = GlobalMdp::assemble(&ce.m2, DEFAULT_STATE_CAP)?;
    let (_, p1) = optimal_value(&mdp1, ce.discount, 1e-10)?;
    let (_, p2) = optimal_value(&mdp2, ce.discount, 1e-10)?;
    let v2 = policy_value_exact(&mdp1, &p1.into(), ce.discount)?;
    let v4 = policy_value_exact(&mdp2, &p2.into(), ce.discount)?;
    Ok(CounterexampleValues {
        v1: v1[a1_b3],
        v2: v2[a1_b3],
        v3: v3[a1_b1],
        v4: v4[a1_b1],
    })
}

/// Computes the four values on the default counterexample and fails unless
/// both strict inequalities hold.
pub fn verify_counterexample() -> Result<CounterexampleValues> {
    let values = counterexample_values(&build_counterexample(COUNTEREXAMPLE_RADIUS, 0.0))?;
    if values.holds() {
        Ok(values)
    } else {
        Err(Error::CounterexampleFailed {
            values: values.as_array(),
        })
    }
}
