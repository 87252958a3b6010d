//! Arms, bandit instances, the explicit global MDP and the policies acting on it.
//!
//! A global state is a vector with one local state per arm. When the global
//! state space is enumerated, ids use a mixed-radix encoding with arm 0 as the
//! least significant digit: `id = x_0 + S_0 * (x_1 + S_1 * (x_2 + ...))`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{check_discount, Error, Result};

/// Tolerance on row sums of arm transition matrices and initial distributions.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Default cap on the number of enumerated global states.
pub const DEFAULT_STATE_CAP: u128 = 1_000_000;

/// How the random reward of an activation is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardKind {
    /// `Bernoulli(r(x))`.
    Bernoulli,
    /// `Normal(r(x), variance)`; samples may leave `[0, 1]`. Zero variance is deterministic.
    Gaussian { variance: f64 },
    /// Deterministic reward `rewards[x][y]` paid on the transition `x -> y`.
    /// The mean reward of state `x` is then `sum_y Q(x, y) rewards[x][y]`.
    OnTransition { rewards: Vec<Vec<f64>> },
}

/// One arm: a Markov reward process with `S` local states.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub reward_mean: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    pub reward_kind: RewardKind,
}

impl ArmModel {
    pub fn new(reward_mean: Vec<f64>, transition: Vec<Vec<f64>>, reward_kind: RewardKind) -> Self {
        Self {
            reward_mean,
            transition,
            reward_kind,
        }
    }

    pub fn bernoulli(reward_mean: Vec<f64>, transition: Vec<Vec<f64>>) -> Self {
        Self::new(reward_mean, transition, RewardKind::Bernoulli)
    }

    /// Arm paying a deterministic reward on each transition. The mean reward
    /// vector is derived from the transition matrix.
    pub fn with_transition_rewards(transition: Vec<Vec<f64>>, rewards: Vec<Vec<f64>>) -> Self {
        let reward_mean = transition
            .iter()
            .zip(&rewards)
            .map(|(q, r)| q.iter().zip(r).map(|(p, v)| p * v).sum())
            .collect();
        Self::new(reward_mean, transition, RewardKind::OnTransition { rewards })
    }

    pub fn state_count(&self) -> usize {
        self.reward_mean.len()
    }

    /// Draws the reward and next local state of one activation in state `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> (f64, usize) {
        let next = sample_categorical(&self.transition[x], rng);
        let reward = match &self.reward_kind {
            RewardKind::Bernoulli => {
                if rng.random::<f64>() < self.reward_mean[x] {
                    1.0
                } else {
                    0.0
                }
            }
            RewardKind::Gaussian { variance } => {
                let sd = libm::sqrt(*variance);
                match Normal::new(self.reward_mean[x], sd) {
                    Ok(normal) => normal.sample(rng),
                    Err(_) => self.reward_mean[x],
                }
            }
            RewardKind::OnTransition { rewards } => rewards[x][next],
        };
        (reward, next)
    }

    fn violations(&self, arm: usize, out: &mut Vec<Violation>) {
        let s = self.state_count();
        if s == 0 {
            out.push(Violation::error(Some(arm), None, ViolationKind::EmptyArm));
            return;
        }
        if self.transition.len() != s {
            out.push(Violation::error(
                Some(arm),
                None,
                ViolationKind::Shape(format!(
                    "{} transition rows for {} states",
                    self.transition.len(),
                    s
                )),
            ));
            return;
        }
        for (x, row) in self.transition.iter().enumerate() {
            if row.len() != s {
                out.push(Violation::error(
                    Some(arm),
                    Some(x),
                    ViolationKind::Shape(format!("row has {} entries, expected {}", row.len(), s)),
                ));
                continue;
            }
            if let Some(&p) = row.iter().find(|p| !(**p >= 0.0)) {
                out.push(Violation::error(
                    Some(arm),
                    Some(x),
                    ViolationKind::NegativeProbability(p),
                ));
            }
            let sum: f64 = row.iter().sum();
            if !((sum - 1.0).abs() <= STOCHASTIC_TOL) {
                out.push(Violation::error(Some(arm), Some(x), ViolationKind::RowSum(sum)));
            }
        }
        for (x, &r) in self.reward_mean.iter().enumerate() {
            if !r.is_finite() {
                out.push(Violation::error(Some(arm), Some(x), ViolationKind::RewardOutOfRange(r)));
                continue;
            }
            if !(0.0..=1.0).contains(&r) {
                match self.reward_kind {
                    RewardKind::Bernoulli => out.push(Violation::error(
                        Some(arm),
                        Some(x),
                        ViolationKind::RewardOutOfRange(r),
                    )),
                    _ => out.push(Violation::warning(
                        Some(arm),
                        Some(x),
                        ViolationKind::RewardOutOfRange(r),
                    )),
                }
            }
        }
        match &self.reward_kind {
            RewardKind::Gaussian { variance } if !(*variance >= 0.0) => {
                out.push(Violation::error(
                    Some(arm),
                    None,
                    ViolationKind::Shape(format!("gaussian variance {variance} must be nonnegative")),
                ));
            }
            RewardKind::OnTransition { rewards }
                if rewards.len() != s || rewards.iter().any(|row| row.len() != s) =>
            {
                out.push(Violation::error(
                    Some(arm),
                    None,
                    ViolationKind::Shape(String::from("transition reward matrix is not S x S")),
                ));
            }
            _ => {}
        }
    }
}

/// Draws an index from a probability row by inverse-CDF on one uniform.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (y, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = y;
            if u < acc {
                return y;
            }
        }
    }
    last_positive
}

/// Distribution of the global state at the start of each episode.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDistribution {
    /// Independent per-arm distributions.
    Product(Vec<Vec<f64>>),
    /// A distribution over an explicit list of global states.
    Coupled {
        states: Vec<GlobalState>,
        probabilities: Vec<f64>,
    },
}

impl InitialDistribution {
    /// Point mass on one global state.
    pub fn fixed(state: GlobalState) -> Self {
        Self::Coupled {
            states: vec![state],
            probabilities: vec![1.0],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GlobalState {
        match self {
            Self::Product(per_arm) => {
                GlobalState(per_arm.iter().map(|p| sample_categorical(p, rng)).collect())
            }
            Self::Coupled {
                states,
                probabilities,
            } => states[sample_categorical(probabilities, rng)].clone(),
        }
    }
}

/// The unknown Markovian bandit: arms, discount factor and initial distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    pub arms: Vec<ArmModel>,
    pub discount: f64,
    pub initial: InitialDistribution,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmModel>, discount: f64, initial: InitialDistribution) -> Self {
        Self {
            arms,
            discount,
            initial,
        }
    }

    /// Instance whose episodes all start with every arm in local state 0.
    pub fn starting_at_zero(arms: Vec<ArmModel>, discount: f64) -> Self {
        let start = GlobalState(vec![0; arms.len()]);
        Self::new(arms, discount, InitialDistribution::fixed(start))
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn state_counts(&self) -> Vec<usize> {
        self.arms.iter().map(ArmModel::state_count).collect()
    }

    /// `prod_a S_a`, saturating.
    pub fn global_state_count(&self) -> u128 {
        global_state_count(&self.state_counts())
    }

    /// Every invariant violation of the instance. Warnings (Gaussian means
    /// outside `[0, 1]`) are included and tagged as such.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.arms.is_empty() {
            out.push(Violation::error(None, None, ViolationKind::NoArms));
        }
        if check_discount(self.discount).is_err() {
            out.push(Violation::error(None, None, ViolationKind::Discount(self.discount)));
        }
        for (a, arm) in self.arms.iter().enumerate() {
            arm.violations(a, &mut out);
        }
        self.initial_violations(&mut out);
        out
    }

    /// `Ok(self)` when no error-severity violation exists.
    pub fn validated(self) -> Result<Self> {
        let errors: Vec<String> = self
            .validate()
            .into_iter()
            .filter(|v| v.severity == Severity::Error)
            .map(|v| format!("{v}"))
            .collect();
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidInstance(errors.join("; ")))
        }
    }

    fn initial_violations(&self, out: &mut Vec<Violation>) {
        let counts = self.state_counts();
        let check_sum = |probs: &[f64], out: &mut Vec<Violation>, arm: Option<usize>| {
            if probs.iter().any(|p| !(*p >= 0.0)) {
                out.push(Violation::error(
                    arm,
                    None,
                    ViolationKind::Initial(String::from("negative probability")),
                ));
            }
            let sum: f64 = probs.iter().sum();
            if !((sum - 1.0).abs() <= STOCHASTIC_TOL) {
                out.push(Violation::error(
                    arm,
                    None,
                    ViolationKind::Initial(format!("probabilities sum to {sum}")),
                ));
            }
        };
        match &self.initial {
            InitialDistribution::Product(per_arm) => {
                if per_arm.len() != counts.len() {
                    out.push(Violation::error(
                        None,
                        None,
                        ViolationKind::Initial(format!(
                            "{} per-arm distributions for {} arms",
                            per_arm.len(),
                            counts.len()
                        )),
                    ));
                    return;
                }
                for (a, (p, &s)) in per_arm.iter().zip(&counts).enumerate() {
                    if p.len() != s {
                        out.push(Violation::error(
                            Some(a),
                            None,
                            ViolationKind::Initial(format!("{} entries for {} states", p.len(), s)),
                        ));
                    } else {
                        check_sum(p, out, Some(a));
                    }
                }
            }
            InitialDistribution::Coupled {
                states,
                probabilities,
            } => {
                if states.len() != probabilities.len() || states.is_empty() {
                    out.push(Violation::error(
                        None,
                        None,
                        ViolationKind::Initial(String::from(
                            "coupled distribution needs one probability per listed state",
                        )),
                    ));
                    return;
                }
                for state in states {
                    if let Err(e) = state.check(&counts) {
                        out.push(Violation::error(None, None, ViolationKind::Initial(format!("{e}"))));
                    }
                }
                check_sum(probabilities, out, None);
            }
        }
    }

    /// Simulates one activation of `action` from `state`.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &GlobalState,
        action: usize,
        rng: &mut R,
    ) -> Result<(f64, GlobalState)> {
        if action >= self.arms.len() {
            return Err(Error::ActionOutOfRange {
                action,
                arms: self.arms.len(),
            });
        }
        state.check(&self.state_counts())?;
        let mut next = state.clone();
        let reward = self.advance(&mut next, action, rng);
        Ok((reward, next))
    }

    /// In-place step without range checks; returns the sampled reward.
    pub(crate) fn advance<R: Rng + ?Sized>(
        &self,
        state: &mut GlobalState,
        action: usize,
        rng: &mut R,
    ) -> f64 {
        let (reward, next) = self.arms[action].sample(state.0[action], rng);
        state.0[action] = next;
        reward
    }
}

/// Product of the per-arm state counts, saturating at `u128::MAX`.
pub fn global_state_count(state_counts: &[usize]) -> u128 {
    state_counts
        .iter()
        .fold(1u128, |acc, &s| acc.saturating_mul(s as u128))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    NoArms,
    EmptyArm,
    Discount(f64),
    Shape(String),
    NegativeProbability(f64),
    RowSum(f64),
    RewardOutOfRange(f64),
    Initial(String),
}

/// One broken invariant, located by arm and row (local state) when relevant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub arm: Option<usize>,
    pub row: Option<usize>,
    pub kind: ViolationKind,
    pub severity: Severity,
}

impl Violation {
    fn error(arm: Option<usize>, row: Option<usize>, kind: ViolationKind) -> Self {
        Self {
            arm,
            row,
            kind,
            severity: Severity::Error,
        }
    }

    fn warning(arm: Option<usize>, row: Option<usize>, kind: ViolationKind) -> Self {
        Self {
            arm,
            row,
            kind,
            severity: Severity::Warning,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.severity == Severity::Warning {
            write!(f, "warning: ")?;
        }
        if let Some(a) = self.arm {
            write!(f, "arm {a}")?;
            if let Some(x) = self.row {
                write!(f, ", row {x}")?;
            }
            write!(f, ": ")?;
        }
        match &self.kind {
            ViolationKind::NoArms => write!(f, "instance has no arms"),
            ViolationKind::EmptyArm => write!(f, "arm has no states"),
            ViolationKind::Discount(b) => write!(f, "discount {b} outside (0, 1)"),
            ViolationKind::Shape(msg) => write!(f, "{msg}"),
            ViolationKind::NegativeProbability(p) => write!(f, "negative probability {p}"),
            ViolationKind::RowSum(s) => write!(f, "row sum {s} ≠ 1"),
            ViolationKind::RewardOutOfRange(r) => write!(f, "reward {r} outside [0,1]"),
            ViolationKind::Initial(msg) => write!(f, "initial distribution: {msg}"),
        }
    }
}

/// One local state per arm.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalState(pub Vec<usize>);

impl GlobalState {
    pub fn check(&self, state_counts: &[usize]) -> Result<()> {
        if self.0.len() != state_counts.len() {
            return Err(Error::StateArity {
                expected: state_counts.len(),
                got: self.0.len(),
            });
        }
        for (arm, (&x, &s)) in self.0.iter().zip(state_counts).enumerate() {
            if x >= s {
                return Err(Error::StateOutOfRange {
                    arm,
                    state: x,
                    states: s,
                });
            }
        }
        Ok(())
    }
}

impl From<Vec<usize>> for GlobalState {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Mixed-radix enumeration of the global state space (arm 0 least significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    radices: Vec<usize>,
    strides: Vec<usize>,
    count: usize,
}

impl StateSpace {
    pub fn new(radices: Vec<usize>, cap: u128) -> Result<Self> {
        let states = global_state_count(&radices);
        if states > cap || states > usize::MAX as u128 {
            return Err(Error::StateCapExceeded { states, cap });
        }
        let mut strides = Vec::with_capacity(radices.len());
        let mut stride = 1usize;
        for &r in &radices {
            strides.push(stride);
            stride *= r;
        }
        Ok(Self {
            radices,
            strides,
            count: states as usize,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn arms(&self) -> usize {
        self.radices.len()
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn stride(&self, arm: usize) -> usize {
        self.strides[arm]
    }

    pub fn encode(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.strides).map(|(x, s)| x * s).sum()
    }

    pub fn decode(&self, mut id: usize) -> GlobalState {
        let mut out = Vec::with_capacity(self.radices.len());
        for &r in &self.radices {
            out.push(id % r);
            id /= r;
        }
        GlobalState(out)
    }

    /// Local state of `arm` within the encoded state `id`.
    pub fn digit(&self, id: usize, arm: usize) -> usize {
        (id / self.strides[arm]) % self.radices[arm]
    }
}

/// The explicit global MDP: `S^n` states, `n` actions, sparse transitions.
#[derive(Debug, Clone)]
pub struct GlobalMdp {
    space: StateSpace,
    rewards: Vec<f64>,
    transitions: Vec<Vec<(usize, f64)>>,
}

impl GlobalMdp {
    /// Builds the global MDP where only the active arm moves. Fails when the
    /// number of global states exceeds `cap`.
    pub fn assemble(instance: &BanditInstance, cap: u128) -> Result<Self> {
        let space = StateSpace::new(instance.state_counts(), cap)?;
        let n = instance.arm_count();
        let count = space.count();
        let mut rewards = Vec::with_capacity(count * n);
        let mut transitions = Vec::with_capacity(count * n);
        for id in 0..count {
            for (a, arm) in instance.arms.iter().enumerate() {
                let xa = space.digit(id, a);
                rewards.push(arm.reward_mean[xa]);
                let base = id - xa * space.stride(a);
                let row = arm.transition[xa]
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(y, &p)| (base + y * space.stride(a), p))
                    .collect();
                transitions.push(row);
            }
        }
        Ok(Self {
            space,
            rewards,
            transitions,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn state_count(&self) -> usize {
        self.space.count()
    }

    pub fn action_count(&self) -> usize {
        self.space.arms()
    }

    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.rewards[state * self.action_count() + action]
    }

    /// Sparse successor row `(next state id, probability)`.
    pub fn transition(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.transitions[state * self.action_count() + action]
    }
}

/// Convenience wrapper for [`GlobalMdp::assemble`].
pub fn assemble_global_mdp(instance: &BanditInstance, cap: u128) -> Result<GlobalMdp> {
    GlobalMdp::assemble(instance, cap)
}

/// Acts by the largest `(arm, local state)` index; ties go to the lowest arm.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexPolicy {
    pub tables: Vec<Vec<f64>>,
}

impl IndexPolicy {
    pub fn new(tables: Vec<Vec<f64>>) -> Self {
        Self { tables }
    }

    pub fn index(&self, arm: usize, state: usize) -> f64 {
        self.tables[arm][state]
    }

    pub fn act(&self, local: &[usize]) -> usize {
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (a, (&x, table)) in local.iter().zip(&self.tables).enumerate() {
            let v = table[x];
            if v > best_value {
                best = a;
                best_value = v;
            }
        }
        best
    }
}

/// One action per enumerated global state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabularPolicy {
    pub space: StateSpace,
    pub actions: Vec<usize>,
}

impl TabularPolicy {
    pub fn new(space: StateSpace, actions: Vec<usize>) -> Self {
        debug_assert_eq!(space.count(), actions.len());
        Self { space, actions }
    }

    pub fn act(&self, local: &[usize]) -> usize {
        self.actions[self.space.encode(local)]
    }

    pub fn act_id(&self, id: usize) -> usize {
        self.actions[id]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Index(IndexPolicy),
    Tabular(TabularPolicy),
}

impl Policy {
    pub fn act(&self, state: &GlobalState) -> usize {
        match self {
            Self::Index(p) => p.act(&state.0),
            Self::Tabular(p) => p.act(&state.0),
        }
    }

    /// Action table over an enumerated state space.
    pub fn tabulate(&self, space: &StateSpace) -> TabularPolicy {
        match self {
            Self::Tabular(p) if p.space == *space => p.clone(),
            _ => {
                let actions = (0..space.count())
                    .map(|id| self.act(&space.decode(id)))
                    .collect();
                TabularPolicy::new(space.clone(), actions)
            }
        }
    }
}

impl From<IndexPolicy> for Policy {
    fn from(p: IndexPolicy) -> Self {
        Self::Index(p)
    }
}

impl From<TabularPolicy> for Policy {
    fn from(p: TabularPolicy) -> Self {
        Self::Tabular(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state(r: [f64; 2], q: [[f64; 2]; 2]) -> ArmModel {
        ArmModel::bernoulli(r.to_vec(), q.iter().map(|row| row.to_vec()).collect())
    }

    #[test]
    fn degenerate_single_state_arm_is_valid() {
        let inst = BanditInstance::starting_at_zero(
            vec![ArmModel::bernoulli(vec![0.5], vec![vec![1.0]])],
            0.9,
        );
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn bad_row_sum_is_reported() {
        let inst = BanditInstance::starting_at_zero(vec![two_state([0.1, 0.2], [[0.5, 0.4], [0.0, 1.0]])], 0.9);
        let v = inst.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].arm, Some(0));
        assert_eq!(v[0].row, Some(0));
        assert!(matches!(v[0].kind, ViolationKind::RowSum(s) if (s - 0.9).abs() < 1e-12));
        assert!(format!("{}", v[0]).contains("row sum 0.9"));
    }

    #[test]
    fn bernoulli_reward_out_of_range() {
        let inst = BanditInstance::starting_at_zero(
            vec![ArmModel::bernoulli(vec![1.2], vec![vec![1.0]])],
            0.9,
        );
        let v = inst.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Error);
        assert!(format!("{}", v[0]).contains("reward 1.2 outside [0,1]"));
    }

    #[test]
    fn gaussian_reward_out_of_range_is_a_warning() {
        let arm = ArmModel::new(vec![1.2], vec![vec![1.0]], RewardKind::Gaussian { variance: 1.0 });
        let inst = BanditInstance::starting_at_zero(vec![arm], 0.9);
        let v = inst.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Warning);
        assert!(inst.validated().is_ok());
    }

    #[test]
    fn single_arm_mdp_is_the_arm() {
        let arm = two_state([0.3, 0.8], [[0.25, 0.75], [1.0, 0.0]]);
        let inst = BanditInstance::starting_at_zero(vec![arm.clone()], 0.9);
        let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(mdp.state_count(), 2);
        for x in 0..2 {
            assert_eq!(mdp.reward(x, 0), arm.reward_mean[x]);
            let mut row = vec![0.0; 2];
            for &(y, p) in mdp.transition(x, 0) {
                row[y] += p;
            }
            assert_eq!(row, arm.transition[x]);
        }
    }

    #[test]
    fn passive_arm_is_frozen_in_assembled_rows() {
        let arm = two_state([0.3, 0.8], [[0.25, 0.75], [0.5, 0.5]]);
        let inst = BanditInstance::starting_at_zero(vec![arm.clone(), arm], 0.9);
        let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(mdp.state_count(), 4);
        assert_eq!(mdp.action_count(), 2);
        let id = mdp.space().encode(&[0, 1]);
        for &(y, _) in mdp.transition(id, 0) {
            assert_eq!(mdp.space().digit(y, 1), 1);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let arm = ArmModel::bernoulli(vec![0.0; 11], {
            let mut q = vec![vec![0.0; 11]; 11];
            for (i, row) in q.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            q
        });
        let inst = BanditInstance::starting_at_zero(vec![arm; 9], 0.99);
        match GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP) {
            Err(Error::StateCapExceeded { states, .. }) => assert_eq!(states, 11u128.pow(9)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn encoding_round_trips() {
        let space = StateSpace::new(vec![2, 3, 4], DEFAULT_STATE_CAP).unwrap();
        for id in 0..space.count() {
            assert_eq!(space.encode(&space.decode(id).0), id);
        }
        assert_eq!(space.encode(&[1, 0, 0]), 1);
        assert_eq!(space.encode(&[0, 1, 0]), 2);
    }

    #[test]
    fn deterministic_row_and_reward() {
        let arm = ArmModel::bernoulli(
            vec![1.0, 0.0, 0.0],
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        );
        let inst = BanditInstance::starting_at_zero(vec![arm], 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (r, next) = inst.step(&GlobalState(vec![0]), 0, &mut rng).unwrap();
            assert_eq!(r, 1.0);
            assert_eq!(next.0, vec![1]);
        }
    }

    #[test]
    fn step_rejects_bad_action() {
        let inst = BanditInstance::starting_at_zero(
            vec![ArmModel::bernoulli(vec![0.5], vec![vec![1.0]])],
            0.9,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            inst.step(&GlobalState(vec![0]), 1, &mut rng),
            Err(Error::ActionOutOfRange { action: 1, arms: 1 })
        ));
    }

    #[test]
    fn bernoulli_sample_mean() {
        let inst = BanditInstance::starting_at_zero(
            vec![ArmModel::bernoulli(vec![0.3], vec![vec![1.0]])],
            0.9,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let total: f64 = (0..n)
            .map(|_| inst.step(&GlobalState(vec![0]), 0, &mut rng).unwrap().0)
            .sum();
        assert!((total / n as f64 - 0.3).abs() < 0.01);
    }

    #[test]
    fn index_policy_ties_go_to_lowest_arm() {
        let p = IndexPolicy::new(vec![vec![0.5, 0.1], vec![0.5, 0.9]]);
        assert_eq!(p.act(&[0, 0]), 0);
        assert_eq!(p.act(&[0, 1]), 1);
        assert_eq!(p.act(&[1, 0]), 1);
    }
}
