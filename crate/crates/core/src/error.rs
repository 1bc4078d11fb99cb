use thiserror::Error;

/// Everything that can go wrong while building, solving or simulating a contest.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContestError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("profitability is infinite: denominator c - (λ̲P̄ + λ̄P̲) = {denominator} is not positive")]
    InfiniteProfitability { denominator: f64 },

    #[error("contest not profitable: φ̄ = {phi} ≤ 1, even the leader cannot recover the cost")]
    NotProfitable { phi: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),

    #[error("degenerate medium regime: switching point k** = {k_star_star} is not positive")]
    DegenerateRegime { k_star_star: f64 },

    #[error("operation requires the {expected} regime, parameters classify as {actual}")]
    WrongRegime {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("grid specification is unstable: {0}")]
    StabilityViolation(String),

    #[error("value iteration did not converge after {iterations} iterations (last sup-norm change {last_change:e})")]
    OracleNonConvergence { iterations: usize, last_change: f64 },

    #[error("simulation resolution guard violated: {0}")]
    SimResolution(String),

    #[error("design assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("knife-edge budget: (λ̄+λ̲)B/2 = c exactly")]
    KnifeEdge,

    #[error("infinite continuation region: φ̄ = ∞, the follower never drops out")]
    InfiniteContinuation,
}

impl ContestError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ContestError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = ContestError> = std::result::Result<T, E>;
