//! Base valuations V₀ on the coefficient field K.

mod genseq;
mod monomial;

use std::sync::Arc;

use thiserror::Error;

pub use genseq::{ExponentRule, GenSeqRule, GenSeqValuation};
pub use monomial::MonomialValuation;

use crate::coeffield::{FieldElement, FieldError, ResidueField, Scalar};
use crate::ordgroup::{GroupElement, GroupError, GroupSpec, Subgroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaseError {
    #[error("generating-sequence depth {depth} is too shallow for this query; raise depth to at least {needed}")]
    DepthExceeded { depth: usize, needed: usize },
    #[error("no recursion rule was declared, the sequence cannot be extended")]
    NoRecursionRule,
    #[error("initial form of {0} is not a monomial, its residue is not in k")]
    ResidueNotInK(String),
    #[error("{0} is not a unit of the valuation ring")]
    NotAUnit(String),
    #[error("invalid base valuation: {0}")]
    Invalid(String),
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaseValuation {
    Monomial(MonomialValuation),
    GenSeq(GenSeqValuation),
}

impl BaseValuation {
    pub fn field(&self) -> ResidueField {
        match self {
            BaseValuation::Monomial(m) => m.field(),
            BaseValuation::GenSeq(g) => g.field(),
        }
    }

    pub fn names(&self) -> &[String] {
        match self {
            BaseValuation::Monomial(m) => m.names(),
            BaseValuation::GenSeq(g) => g.names(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.names().len()
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        match self {
            BaseValuation::Monomial(m) => m.spec(),
            BaseValuation::GenSeq(g) => g.spec(),
        }
    }

    /// The value group G_{V₀}.
    pub fn group(&self) -> &Subgroup {
        match self {
            BaseValuation::Monomial(m) => m.group(),
            BaseValuation::GenSeq(g) => g.group(),
        }
    }

    pub fn value(&self, a: &FieldElement) -> Result<GroupElement, BaseError> {
        match self {
            BaseValuation::Monomial(m) => Ok(m.value(a)),
            BaseValuation::GenSeq(g) => g.value(a),
        }
    }

    /// Residue of an element of value 0.
    pub fn residue(&self, a: &FieldElement) -> Result<Scalar, BaseError> {
        match self {
            BaseValuation::Monomial(m) => m.residue(a),
            BaseValuation::GenSeq(g) => g.residue(a),
        }
    }

    /// Residue of `a/b` for `a`, `b` of equal value, computed without forming the quotient.
    pub fn residue_ratio(&self, a: &FieldElement, b: &FieldElement) -> Result<Scalar, BaseError> {
        let num = a.num().mul(b.den());
        let den = a.den().mul(b.num());
        let r = match self {
            BaseValuation::Monomial(m) => m.residue_pair(&num, &den),
            BaseValuation::GenSeq(g) => g.residue_pair(&num, &den),
        };
        r.map_err(|e| match e {
            BaseError::NotAUnit(_) => BaseError::NotAUnit(format!(
                "({}) / ({})",
                a.fmt_with(self.names()),
                b.fmt_with(self.names())
            )),
            BaseError::ResidueNotInK(_) => BaseError::ResidueNotInK(format!(
                "({}) / ({})",
                a.fmt_with(self.names()),
                b.fmt_with(self.names())
            )),
            e => e,
        })
    }

    /// A canonical element of K with the given value and initial coefficient 1.
    pub fn element_of_value(&self, g: &GroupElement) -> Result<FieldElement, BaseError> {
        match self {
            BaseValuation::Monomial(m) => m.element_of_value(g),
            BaseValuation::GenSeq(s) => s.element_of_value(g),
        }
    }

    pub fn depth(&self) -> Option<usize> {
        match self {
            BaseValuation::Monomial(_) => None,
            BaseValuation::GenSeq(g) => Some(g.depth()),
        }
    }

    /// Same valuation, generating sequence materialized to `depth`.
    pub fn with_depth(&self, depth: usize) -> Result<BaseValuation, BaseError> {
        match self {
            BaseValuation::Monomial(_) => Ok(self.clone()),
            BaseValuation::GenSeq(g) => {
                if depth <= g.depth() {
                    Ok(self.clone())
                } else {
                    Ok(BaseValuation::GenSeq(g.extend(depth - g.depth())?))
                }
            }
        }
    }
}
