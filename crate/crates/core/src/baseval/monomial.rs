use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use super::BaseError;
use crate::coeffield::{FieldElement, MultiPoly, ResidueField, Scalar};
use crate::ordgroup::{GroupElement, GroupSpec, Lattice, Subgroup};

/// V₀(x^e) = Σ eᵢ·wᵢ, extended by the minimum over terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialValuation {
    field: ResidueField,
    names: Vec<String>,
    spec: Arc<GroupSpec>,
    weights: Vec<GroupElement>,
    group: Subgroup,
    lattice: Lattice,
    combos: Vec<Vec<BigInt>>,
}

impl MonomialValuation {
    pub fn new(
        field: ResidueField,
        names: Vec<String>,
        spec: Arc<GroupSpec>,
        weights: Vec<GroupElement>,
    ) -> Result<MonomialValuation, BaseError> {
        if names.len() != weights.len() {
            return Err(BaseError::Invalid(format!(
                "{} variables but {} weights",
                names.len(),
                weights.len()
            )));
        }
        let mut gens = Vec::new();
        for w in &weights {
            if w.spec() != Some(&spec) {
                return Err(BaseError::Invalid(format!("weight {w} is infinite or from another group")));
            }
            gens.push(w.coords().unwrap().to_vec());
        }
        let (lattice, combos) = Lattice::from_generators_tracked(spec.dim(), &gens);
        let group = Subgroup::new(&spec, &weights)?;
        Ok(MonomialValuation {
            field,
            names,
            spec,
            weights,
            group,
            lattice,
            combos,
        })
    }

    pub fn field(&self) -> ResidueField {
        self.field
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn weights(&self) -> &[GroupElement] {
        &self.weights
    }

    pub fn group(&self) -> &Subgroup {
        &self.group
    }

    pub fn monomial_value(&self, e: &[i64]) -> GroupElement {
        let mut acc = GroupElement::zero(&self.spec);
        for (x, w) in e.iter().zip(&self.weights) {
            if *x != 0 {
                acc = &acc + &w.scale_int(*x);
            }
        }
        acc
    }

    /// Minimal terms of a nonzero polynomial: value and the list of attaining terms.
    fn min_terms<'a>(&self, p: &'a MultiPoly) -> (GroupElement, Vec<(&'a Vec<i64>, &'a Scalar)>) {
        let mut best: Option<GroupElement> = None;
        let mut terms = Vec::new();
        for (e, c) in p.terms() {
            let v = self.monomial_value(e);
            match best.as_ref().map(|b| v.cmp(b)) {
                None | Some(std::cmp::Ordering::Less) => {
                    best = Some(v);
                    terms = vec![(e, c)];
                }
                Some(std::cmp::Ordering::Equal) => terms.push((e, c)),
                _ => {}
            }
        }
        (best.unwrap_or(GroupElement::Infinity), terms)
    }

    pub fn poly_value(&self, p: &MultiPoly) -> GroupElement {
        self.min_terms(p).0
    }

    pub fn value(&self, a: &FieldElement) -> GroupElement {
        if a.is_zero() {
            return GroupElement::Infinity;
        }
        &self.poly_value(a.num()) - &self.poly_value(a.den())
    }

    /// Residue class of a unit; the initial forms must be single monomials.
    pub fn residue(&self, a: &FieldElement) -> Result<Scalar, BaseError> {
        let label = || a.fmt_with(&self.names);
        match self.residue_pair(a.num(), a.den()) {
            Err(BaseError::ResidueNotInK(_)) => Err(BaseError::ResidueNotInK(label())),
            Err(BaseError::NotAUnit(_)) => Err(BaseError::NotAUnit(label())),
            r => r,
        }
    }

    /// Residue of `num/den` without reducing the fraction.
    pub fn residue_pair(&self, num: &MultiPoly, den: &MultiPoly) -> Result<Scalar, BaseError> {
        let (vn, tn) = self.min_terms(num);
        let (vd, td) = self.min_terms(den);
        if tn.len() != 1 || td.len() != 1 {
            return Err(BaseError::ResidueNotInK(String::new()));
        }
        if vn != vd || tn[0].0 != td[0].0 {
            return Err(BaseError::NotAUnit(String::new()));
        }
        Ok(tn[0].1 * &td[0].1.inv()?)
    }

    /// A monomial with coefficient 1 and the given value.
    pub fn element_of_value(&self, g: &GroupElement) -> Result<FieldElement, BaseError> {
        let not_in = || BaseError::Group(crate::ordgroup::GroupError::NotInGroup(g.to_string()));
        let c = g.coords().ok_or_else(not_in)?;
        let coords = self.lattice.coordinates(c).ok_or_else(not_in)?;
        if !coords.iter().all(|x| x.is_integer()) {
            return Err(not_in());
        }
        let mut e = vec![BigInt::zero(); self.weights.len()];
        for (a, combo) in coords.iter().zip(&self.combos) {
            let a = a.to_integer();
            for (x, k) in e.iter_mut().zip(combo) {
                *x += &a * k;
            }
        }
        let e: Vec<i64> = e
            .iter()
            .map(|x| i64::try_from(x).map_err(|_| BaseError::Invalid("exponent overflow".into())))
            .collect::<Result<_, _>>()?;
        debug_assert_eq!(&self.monomial_value(&e), g);
        Ok(FieldElement::monomial(self.field, e, Scalar::one(self.field)))
    }

    /// True when the weights are ℚ-linearly independent, so initial forms are monomials.
    pub fn weights_independent(&self) -> bool {
        self.lattice.rank() == self.weights.len()
    }
}
