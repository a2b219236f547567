use thiserror::Error;

/// Errors raised by grid construction, energy evaluation, surgeries and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("field length {got} does not match grid ({expected} = {components} x {nodes})")]
    ShapeMismatch {
        expected: usize,
        got: usize,
        components: usize,
        nodes: usize,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("plateau of {cells} cells beyond node {anchor} exceeds the grid extent")]
    PlateauExceedsExtent { anchor: usize, cells: usize },

    #[error("bump does not fit: best achievable energy upper bound {achieved_i_hi:.6e} exceeds epsilon {epsilon:.6e}")]
    BumpDoesNotFit { achieved_i_hi: f64, epsilon: f64 },

    #[error("no sign change of the mass curve on [{lo}, {hi}] (m(lo) = {m_lo:.6e}, m(hi) = {m_hi:.6e})")]
    NoSignChange { lo: f64, hi: f64, m_lo: f64, m_hi: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
