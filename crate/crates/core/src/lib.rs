//! Rested Markovian bandits with discounted reward: Gittins-index planning,
//! episodic learners (posterior sampling, extended value iteration over
//! confidence sets, reward bonuses) and regret evaluation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod confidence;
pub mod environments;
pub mod error;
pub mod evaluation;
pub mod gittins;
pub mod learners;
pub mod model;
pub mod planning;
pub mod posterior;
pub mod seeding;

pub use confidence::{
    build_counterexample, evi_optimistic_plan, evi_policy_value, ucbvi_bonus, ucrl2_radii,
    verify_counterexample, ConfidenceRadii, ConfidenceSet, CounterexampleValues, EviOptions,
    SufficientStats,
};
pub use environments::{scenario1_instance, scenario2_instance, scenario3_sampler, ScenarioName, ScenarioSpec};
pub use error::{Error, Result};
pub use evaluation::{
    check_lemma5, lower_bound_instance, monte_carlo_deltas, regret_exact, regret_monte_carlo,
    ExactRegret, Lemma5Report, RegretMethod, RegretTrace,
};
pub use gittins::{gittins_indices, gittins_policy, IndexTable};
pub use learners::{
    run_learner, run_learner_timed, Algorithm, Clock, EpisodeRecord, LearnerConfig, LearnerRun,
};
pub use model::{
    ArmModel, BanditInstance, GlobalMdp, GlobalState, IndexPolicy, InitialDistribution, Policy,
    RewardKind, StateSpace, TabularPolicy, Violation, DEFAULT_STATE_CAP,
};
pub use planning::{optimal_value, policy_value_exact};
pub use posterior::{Observation, PosteriorState, PriorConfig, RewardPrior};
pub use seeding::{derive_seed, stream, StreamRng};
