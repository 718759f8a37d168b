//! The residue field k, multivariate Laurent polynomials over k, the
//! coefficient field K = k(x₁,…,x_m), and root finding over k.

mod element;
mod multipoly;
pub mod parse;
mod scalar;
mod unipoly;

use thiserror::Error;

pub use element::FieldElement;
pub use multipoly::MultiPoly;
pub use parse::parse_element;
pub use scalar::{ResidueField, Scalar};
pub use unipoly::{roots_in_k, RootSplit, UniPoly};


#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("parse error: {0}")]
    Parse(String),
}
