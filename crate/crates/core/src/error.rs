use thiserror::Error;

/// Errors raised by the numerical pipelines.
///
/// Mathematical findings (a hypothesis that fails, a residual above target)
/// are report fields, not errors. Errors mean an operation could not produce
/// a meaningful result at all.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("index {index} outside the family range [{first}, {last}]")]
    Range { index: i64, first: i64, last: i64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence: {what} (last iterate {last:e}, previous {previous:e})")]
    Convergence {
        what: String,
        last: f64,
        previous: f64,
    },

    #[error("pole: {0}")]
    Pole(String),

    #[error("structural violation: {0}")]
    Structural(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("pivot a_0 vanishes; the pairing normalization b_0 = 1/a_0 is impossible")]
    Pivot,

    #[error("degenerate interval k = {k}: D_k = 0")]
    DegenerateInterval { k: i64 },

    #[error("fixed-point map is not contracting (observed ratio {ratio:.6}); drop more leading intervals")]
    NonContraction { ratio: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("certificate failure: {0}")]
    Certificate(String),

    #[error("weight degeneracy: {0}")]
    WeightDegeneracy(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
