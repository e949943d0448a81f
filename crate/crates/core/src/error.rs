use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate geometry")]
    DegenerateGeometry,
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid conflict zone: {0}")]
    InvalidZone(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("map fully blocked")]
    MapFullyBlocked,
    #[error("no path")]
    NoPath,
    #[error("endpoint blocked")]
    EndpointBlocked,
    #[error("empty path")]
    EmptyPath,
    #[error("empty auction")]
    EmptyAuction,
    #[error("turn {turn} out of range 1..={count}")]
    TurnOutOfRange { turn: usize, count: usize },
    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("valuation must be positive and finite")]
    NonPositiveValuation,
    #[error("invalid bid: {0}")]
    InvalidBid(&'static str),
    #[error("invalid reward schedule: {0}")]
    InvalidRewardSchedule(&'static str),
    #[error("invalid alt scaling")]
    InvalidAltScaling,
    #[error("invalid scenario: {field}: {reason}")]
    InvalidScenario { field: String, reason: String },
}

impl Error {
    pub(crate) fn scenario(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidScenario { field: field.into(), reason: reason.into() }
    }
}
