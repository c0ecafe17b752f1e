use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma function pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular potential at y = {y} (|y - i eps| below {tol:e})")]
    Singularity { y: f64, tol: f64 },

    #[error("no convergence in {context} after {iterations} iterations")]
    Convergence {
        context: &'static str,
        iterations: usize,
    },

    #[error("grid [{lower}, {upper}] is not mirror-symmetric about 0")]
    GridAsymmetry { lower: f64, upper: f64 },

    #[error("level n = {n} outside the bound-state range n < (s+t-1)/2 = {limit}")]
    OutOfBoundStateRange { n: usize, limit: f64 },

    #[error("zero vector has no defined residual")]
    ZeroVector,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
