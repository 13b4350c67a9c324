use thiserror::Error;

use crate::exactnum::Prime;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime number")]
    NotPrime(u64),

    #[error("invalid series parameter `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("cannot parse rational {input:?} at position {position}: {reason}")]
    ParseRational {
        input: String,
        position: usize,
        reason: &'static str,
    },

    #[error(
        "x = {x} lies outside the {prime}-adic convergence domain (need v_{prime}(x) >= {v_min})"
    )]
    OutsideDomain { x: String, prime: Prime, v_min: i64 },

    #[error("precision must be at least 1, got {0}")]
    InvalidPrecision(i64),

    #[error("the polynomial telescoping path needs q = 0 and all lambda >= 0: {0}")]
    NotPolynomial(String),

    #[error(
        "coefficient system for k = {k} is singular: a second pair (u', v') would make \
         sum n! = (v - v')/(u - u') a rational number"
    )]
    NonUniquePair { k: u64 },

    #[error("linear system: {0}")]
    Linalg(#[from] crate::linalg::LinalgError),

    #[error("identity {id}: {reason}")]
    Inadmissible { id: String, reason: String },

    #[error("invalid json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
