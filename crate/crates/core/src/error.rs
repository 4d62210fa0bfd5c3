use thiserror::Error;

/// Errors raised by the channel, probability and region machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} is out of range for an alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,

    #[error("table needs {cells} cells, above the limit of {limit} (set DIRINFO_MAC_MAX_CELLS to override)")]
    Sizing { cells: u128, limit: u128 },

    #[error("{what}: row sums to {sum}, expected 1")]
    NotNormalized { what: String, sum: f64 },

    #[error("{what}: invalid probability {value}")]
    InvalidProbability { what: String, value: f64 },

    #[error("{0}")]
    NoStationary(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("mux does not behave as a multiplexer for user {user}: {witness}")]
    MuxProperty { user: u8, witness: String },

    #[error("unsupported causal-conditioning request: {0}")]
    UnsupportedRequest(String),

    #[error("policy grid has {requested} pairs, above the budget of {budget}")]
    Budget { requested: u128, budget: u128 },

    #[error("region is empty")]
    EmptyRegion,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a table or grid outgrowing its resource bound.
    pub fn is_resource_bound(&self) -> bool {
        matches!(self, Error::Sizing { .. } | Error::Budget { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
