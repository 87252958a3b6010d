use alloc::string::String;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("discount factor {0} outside (0, 1)")]
    InvalidDiscount(f64),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("action {action} out of range for {arms} arms")]
    ActionOutOfRange { action: usize, arms: usize },

    #[error("state {state} out of range for arm {arm} with {states} states")]
    StateOutOfRange { arm: usize, state: usize, states: usize },

    #[error("global state has {got} coordinates, instance has {expected} arms")]
    StateArity { expected: usize, got: usize },

    #[error("global MDP has {states} states, above the cap of {cap}")]
    StateCapExceeded { states: u128, cap: u128 },

    #[error(
        "exponential barrier: extended value iteration needs all {states} global states, cap is {cap}"
    )]
    ExponentialBarrier { states: u128, cap: u128 },

    #[error("linear system is singular or ill-conditioned (residual {residual:e})")]
    SingularSystem { residual: f64 },

    #[error("Beta posterior needs binary rewards, got {0}")]
    NonBinaryReward(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(
        "optimism counterexample not reproduced: v1={} v2={} v3={} v4={}",
        .values[0], .values[1], .values[2], .values[3]
    )]
    CounterexampleFailed { values: [f64; 4] },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_discount(discount: f64) -> Result<()> {
    if discount > 0.0 && discount < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDiscount(discount))
    }
}
