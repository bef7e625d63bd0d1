use thiserror::Error;

/// Errors raised while building, validating or solving ISAC channels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("row {row} not stochastic (sum = {sum})")]
    NotStochastic { row: String, sum: f64 },

    #[error("invalid entry in {what}: {value}")]
    InvalidEntry { what: String, value: f64 },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("no feasible input symbol: every g(x) is -inf")]
    NoFeasibleSymbol,

    #[error(
        "discretized tables need ~{estimate_mb} MiB, above the {ceiling_mb} MiB ceiling; \
         try q = {suggested_q}"
    )]
    MemoryCeiling {
        estimate_mb: u64,
        ceiling_mb: u64,
        suggested_q: f64,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("missing section [{0}]")]
    MissingSection(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
