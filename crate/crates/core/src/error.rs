//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid symbol {symbol:?} for alphabet of size {alphabet_size}")]
    InvalidSymbol { symbol: char, alphabet_size: usize },

    #[error("sequence index {index} out of range for alphabet of size {alphabet_size}")]
    IndexOutOfRange { index: u8, alphabet_size: usize },

    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("replicator list {path} is empty; a landscape must be nonempty")]
    EmptyLandscape { path: String },

    #[error("operation requires a nonempty replicator set")]
    EmptySet,

    #[error("invalid MiniRep config: {0}")]
    InvalidVmConfig(String),

    #[error("enumeration guard exceeded: {space} programs > limit {limit}; use a smaller --k/--len")]
    EnumerationGuard { space: u128, limit: u128 },

    #[error("model shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("forward cache mode ({cached:?}) does not match requested mode ({requested:?})")]
    ModeMismatch { cached: String, requested: String },

    #[error("non-finite gradient in parameter block {block}")]
    NonFiniteGradient { block: &'static str },

    #[error("non-finite loss at epoch {epoch}, batch {batch}: {loss}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },

    #[error("negative sampling exhausted after {attempts} attempts; the landscape is too dense (override the rejection limit)")]
    NegativeSpaceExhausted { attempts: u64 },

    #[error("cannot evaluate an empty example list")]
    EmptyEvaluation,

    #[error("checkpoint {checkpoint} exceeds query budget {budget}")]
    CheckpointBeyondBudget { checkpoint: u32, budget: u32 },

    #[error("no trajectories to aggregate")]
    EmptyTrajectories,

    #[error("cannot compute positional frequencies of an empty sequence list")]
    EmptySequences,

    #[error("checkpoint file {path}: {reason}")]
    BadCheckpoint { path: String, reason: String },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("synthetic landscape sampler could not reach {target} distinct members after {attempts} draws")]
    SyntheticExhausted { target: usize, attempts: u64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics (non-finite loss or gradients), as
    /// opposed to bad inputs or I/O. The CLI maps these to a distinct exit
    /// code.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFiniteGradient { .. } | Error::NonFiniteLoss { .. } => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
