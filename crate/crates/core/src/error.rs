use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rational frequency: expansion terminates at level {level}")]
    RationalFrequency { level: usize },

    #[error("frequency must lie in (0, 1), got {0}")]
    FrequencyOutOfRange(String),

    #[error("invalid number literal `{0}`")]
    Parse(String),

    #[error("construction needs a positive beta target, got {0}")]
    NonPositiveBeta(f64),

    #[error("depth {requested} exceeds the big-integer budget; maximal attainable depth is {attainable}")]
    DepthBudget { requested: usize, attainable: usize },

    #[error("beta estimate needs {needed} levels, frequency has {available}")]
    TooFewLevels { needed: usize, available: usize },

    #[error("inconsistent frequency data: {0}")]
    InconsistentFrequency(String),

    #[error("potential coefficients are not conjugate-symmetric at k = {k}")]
    NotReal { k: i32 },

    #[error("potential evaluation left an imaginary residue {residue:e} at x = {x}")]
    ImaginaryResidue { x: f64, residue: f64 },

    #[error("conjugacy is not unimodular at x = {x}: det = {det}")]
    NotUnimodular { x: f64, det: f64 },

    #[error("truncation size {size} too large for the dense method (cap {cap}); use the Herglotz method")]
    DenseTooLarge { size: usize, cap: usize },

    #[error("partition [{lo}, {hi}] does not cover the operator range [{need_lo}, {need_hi}]")]
    PartitionTooNarrow {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("grid spacing {spacing} is too coarse for eps = {eps} (needs <= eps/4)")]
    GridTooCoarse { spacing: f64, eps: f64 },

    #[error("energy {energy} is not in the numerical spectrum (distance {distance})")]
    NotInSpectrum { energy: f64, distance: f64 },

    #[error("normalization degenerate; refine grid")]
    DegenerateNormalization,

    #[error("no spectral samples found")]
    NoSpectralSamples,

    #[error("the dual operator needs real Fourier coefficients (even potential); v̂_{k} has imaginary part")]
    ComplexDual { k: i32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
