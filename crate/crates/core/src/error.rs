use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate node: rows {first} and {second} share the same node")]
    DuplicateNode { first: usize, second: usize },

    #[error("unknown builtin problem `{0}`")]
    UnknownProblem(String),

    #[error("bad size for `{name}`: {msg}")]
    BadSize { name: String, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Arnoldi breakdown at column {column}: nodes cannot support degree {deg} under these weights")]
    RankBreakdown { column: usize, deg: usize },

    #[error("weight support {support} is smaller than the required {required}")]
    SupportTooSmall { support: usize, required: usize },

    #[error("denominator vanishes on the active support; cannot normalize")]
    DegenerateDenominator,

    #[error("dual function is not differentiable here: {0}")]
    NotDifferentiable(String),

    #[error("all weighted residuals are zero (exact weighted interpolation)")]
    AllResidualsZero,

    #[error("maximum error is zero (exact fit)")]
    ExactFit,

    #[error("lower bound undefined: gamma_beta = 0")]
    DegenerateBound,

    #[error("index set {{j : w_j r_j > 0}} is empty")]
    EmptySupport,

    #[error("numerator and denominator coefficients are both zero")]
    ZeroPolynomial,

    #[error("matrix restricted to the weight support is rank deficient")]
    RankDeficient,

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("finite-difference step {0:e} is below 1e-10")]
    StepUnderflow(f64),

    #[error("record schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
