use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid number `{0}`")]
    ParseNumber(String),
    #[error("invalid signal `{0}`")]
    ParseSignal(String),
    #[error("receiver utilities must satisfy v_ah_h > v_al_h and v_al_l > v_ah_l")]
    UtilityOrdering,
    #[error("{name} must lie strictly between 0 and 1, got {value}")]
    OutOfUnitInterval { name: &'static str, value: String },
    #[error("receiver must be pessimistic (mu < pi_star): mu = {mu}, pi_star = {pi_star}")]
    NotPessimistic { mu: String, pi_star: String },
    #[error("receiver must be optimistic (mu >= pi_star): mu = {mu}, pi_star = {pi_star}")]
    NotOptimistic { mu: String, pi_star: String },
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("invalid acceptance set: {0}")]
    InvalidAcceptanceSet(String),
    #[error("price {0} outside [0, 1]")]
    PriceOutOfRange(String),
    #[error("closed form requires e_h > 1 > e_l > 0")]
    BinaryOrdering,
    #[error("conditions not met: {0}")]
    ConditionsNotMet(String),
    #[error("{what} supports at most {max} signals, got {got}")]
    EnvelopeExceeded { what: &'static str, max: usize, got: usize },
    #[error("cannot place residual mass off the acceptance set: {0}")]
    ResidualPlacement(String),
    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
