use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants are grouped so a front end can map them onto exit codes:
/// malformed input, resource guards, and internal arithmetic contract
/// violations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed decimal {0:?}")]
    MalformedDecimal(String),
    #[error("{value:?} has more than {scale} fractional digits")]
    TooManyDigits { value: String, scale: u32 },
    #[error("negative value {0:?} where a nonnegative one is required")]
    Negative(String),
    #[error("scale mismatch: {0} vs {1}")]
    ScaleMismatch(u32, u32),
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("support of {needed} entries exceeds the guard of {cap}")]
    SupportTooLarge { needed: usize, cap: usize },
    #[error("sampled tree exceeds the node guard of {cap}")]
    TooManyNodes { cap: usize },
    #[error("exact depth {depth} exceeds the configured cap ({cap} tree vertices); use the fixed backend or raise the cap")]
    ExactDepthCap { depth: usize, cap: u128 },
    #[error("depth {requested} exceeds available depth {available}")]
    DepthExceeded { requested: usize, available: usize },
}

impl Error {
    /// True for the resource guards (support size, node count, exact depth).
    pub fn is_resource_guard(&self) -> bool {
        matches!(
            self,
            Error::SupportTooLarge { .. }
                | Error::TooManyNodes { .. }
                | Error::ExactDepthCap { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
