use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bid vector is empty")]
    EmptyBids,
    #[error("bid {value} at position {position} is not a finite non-negative number")]
    InvalidBid { position: usize, value: f64 },
    #[error("partition has {got} labels for {expected} bids")]
    PartitionLength { expected: usize, got: usize },
    #[error("user {user} is out of range for {n} bids")]
    UserOutOfRange { user: usize, n: usize },
    #[error("epsilon {0} is outside [0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("fee {fee} charged to user {user} exceeds that user's bid {bid}")]
    FeeExceedsBid { user: usize, fee: f64, bid: f64 },
    #[error("eta {0} is outside (0, 1)")]
    EtaOutOfRange(f64),
    #[error("bid {bid} exceeds the support bound {bound}")]
    AboveSupport { bid: f64, bound: f64 },
    #[error("max_splits must be at least 1")]
    NoSplits,
    #[error("invalid distribution `{token}`: {reason}")]
    Distribution { token: String, reason: String },
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("writing results: {0}")]
    Export(String),
}
