//! Exact p-adic evaluation of factorial power series.

pub mod adele;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod exactnum;
pub mod linalg;
pub mod par;
pub mod series_model;
pub mod telescope;
pub mod ukvk;

pub use error::{Error, Result};
pub use exactnum::{Prime, Rational, Valuation};
