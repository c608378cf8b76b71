use thiserror::Error;

/// Errors raised by state construction, measurement and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count must be at least 1")]
    NoModes,

    #[error("state norm is {norm}, expected 1 within {tolerance}")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("amplitude vector has length {got}, basis has {expected} states")]
    LengthMismatch { expected: usize, got: usize },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("mode pair ({0}, {1}) must name two distinct modes")]
    DegenerateModePair(usize, usize),

    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),

    #[error("kept modes must be a non-empty proper subset of the {0} modes")]
    InvalidBipartition(usize),

    #[error("states have {0} and {1} modes")]
    ModeCountMismatch(usize, usize),

    #[error("invalid beamsplitter parameters: alpha={alpha}, beta={beta}")]
    InvalidBeamsplitter { alpha: f64, beta: f64 },

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("output occupations ({n}, {m}) do not sum to sector total {total}")]
    SectorMismatch { n: usize, m: usize, total: usize },

    #[error("invalid ensemble weights: {0}")]
    InvalidWeights(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("probability {0:e} is negative beyond rounding noise")]
    NegativeProbability(f64),

    #[error("projection onto {particles} particles on Alice's side has probability {probability:e}")]
    ZeroProjection { particles: usize, probability: f64 },

    #[error("squeezing parameter undefined: <Sx>^2 + <Sy>^2 = {0:e}")]
    UndefinedSqueezing(f64),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
