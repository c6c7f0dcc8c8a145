use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("restriction carries zero probability mass")]
    ZeroMass,

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("eigendecomposition did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    /// All quadratic and linear coefficients vanish; the region is either
    /// everything or nothing.
    #[error("constant polynomial (region is {})", if *accepts { "everything" } else { "empty" })]
    ConstantPolynomial { accepts: bool },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too large: {size} points exceeds limit {limit}")]
    GridTooLarge { size: f64, limit: f64 },

    #[error("probability {estimate:e} is below the counting floor {floor:e}")]
    BelowFloor { estimate: f64, floor: f64 },

    #[error("both bisection branches fell below the floor at depth {depth}")]
    AllBranchesZero { depth: usize },

    #[error("bisection exceeded the depth bound {max_depth}")]
    DepthExceeded { max_depth: usize },

    #[error("exact filter rejected {retries} consecutive samples")]
    FilterExhausted { retries: usize },

    #[error("rejection sampler exceeded {retries} retries")]
    RetryLimit { retries: usize },

    #[error("point lies outside the unit cube")]
    OutOfCube,

    #[error("mistake budget {budget} exhausted before termination")]
    BudgetExhausted { budget: usize },

    #[error("positive-sample generation starved: {0}")]
    Starved(String),

    #[error("malformed instance: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
