use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not a probability table: {0}")]
    NotAProbability(String),

    #[error("degenerate marginal: {axis} index {index} has zero mass")]
    DegenerateMarginal { axis: usize, index: usize },

    #[error("invalid Gaussian target: {0}")]
    InvalidGaussian(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `M00 != {0}`: some nonzero function depends on `x1` alone and on `x2` alone.
    #[error("reducible target: M00 = {{0}} violated (dim M00 = {dim})")]
    ReducibleTarget { dim: usize },

    #[error("independent components: M = {{0}}")]
    IndependentComponents,

    #[error("not geometric: ||C|| = {norm_c} is not below 1")]
    NotGeometric { norm_c: f64 },

    #[error("series truncation insufficient: tail bound {tail_bound:e} after {terms} terms")]
    TruncationInsufficient { terms: usize, tail_bound: f64 },

    #[error("no sharpness witness: {0}")]
    NoWitness(String),

    #[error("function is not in H1: residual norm {residual:e}")]
    NotInH1 { residual: f64 },

    #[error("unsupported initial distribution: {0}")]
    UnsupportedInitial(String),

    #[error("degenerate distance curve: {0}")]
    DegenerateCurve(String),

    #[error("too few batches: {n_batches} batches of length {batch_len} (need >= 20 batches of length >= 100)")]
    TooFewBatches { n_batches: usize, batch_len: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Errors raised when the target breaks `M00 = {0}` or `M != {0}`.
    pub fn is_assumption_violation(&self) -> bool {
        matches!(self, Error::ReducibleTarget { .. } | Error::IndependentComponents)
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
