use thiserror::Error;

/// Errors raised by model construction and the scheduling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probability {value} for {what}")]
    InvalidProbability { what: &'static str, value: f64 },

    #[error("attack table must be nondecreasing, but p({t}) = {next} < p({prev_t}) = {prev}", prev_t = .t - 1)]
    NonMonotoneTable { t: usize, prev: f64, next: f64 },

    #[error("attack table must contain at least one value")]
    EmptyTable,

    #[error("cost must be finite and nonnegative, got {0}")]
    InvalidCost(f64),

    #[error("invalid arm state ({i}, {t})")]
    InvalidArmState { i: u8, t: u32 },

    #[error("an active arm needs an observation and a passive arm must not have one")]
    ObservationActionMismatch,

    #[error("cannot select {k} arms out of {n}")]
    InvalidBudget { k: usize, n: usize },

    #[error("expected {expected} entries, got {got} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("arm {arm} is out of range for {n} arms")]
    ArmOutOfRange { arm: usize, n: usize },

    #[error("queue order is not a permutation of 0..{n}")]
    NotAPermutation { n: usize },

    #[error("observations do not match the probed arms")]
    ObservationSetMismatch,

    #[error("{what} must be at least {min}, got {got}")]
    TooSmall {
        what: &'static str,
        min: u64,
        got: u64,
    },

    #[error(
        "search space too large: {states} reachable joint states over {horizon} slots exceeds the bound {bound}"
    )]
    GuardExceeded { states: u64, horizon: u32, bound: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
