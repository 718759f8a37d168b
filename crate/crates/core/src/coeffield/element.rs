use super::multipoly::MultiPoly;
use super::scalar::{ResidueField, Scalar};
use super::FieldError;

/// An element of K = k(x₁,…,x_m) as a reduced fraction.
///
/// Canonical form: `den` has non-negative exponents, no monomial factor and
/// leading coefficient 1; monomial factors live in `num`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    num: MultiPoly,
    den: MultiPoly,
}

impl FieldElement {
    pub fn zero(field: ResidueField, nvars: usize) -> FieldElement {
        FieldElement {
            num: MultiPoly::zero(field, nvars),
            den: MultiPoly::one(field, nvars),
        }
    }

    pub fn one(field: ResidueField, nvars: usize) -> FieldElement {
        FieldElement::from_poly(MultiPoly::one(field, nvars))
    }

    pub fn from_poly(p: MultiPoly) -> FieldElement {
        let den = MultiPoly::one(p.field(), p.nvars());
        FieldElement { num: p, den }
    }

    pub fn from_scalar(field: ResidueField, nvars: usize, c: Scalar) -> FieldElement {
        FieldElement::from_poly(MultiPoly::constant(field, nvars, c))
    }

    pub fn from_i64(field: ResidueField, nvars: usize, n: i64) -> FieldElement {
        FieldElement::from_scalar(field, nvars, Scalar::from_i64(field, n))
    }

    pub fn var(field: ResidueField, nvars: usize, i: usize) -> FieldElement {
        FieldElement::from_poly(MultiPoly::var(field, nvars, i))
    }

    pub fn monomial(field: ResidueField, exps: Vec<i64>, c: Scalar) -> FieldElement {
        FieldElement::from_poly(MultiPoly::monomial(field, exps, c))
    }

    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<FieldElement, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(normalize(num, den))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn field(&self) -> ResidueField {
        self.num.field()
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn as_poly(&self) -> Option<&MultiPoly> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn add(&self, o: &FieldElement) -> FieldElement {
        if self.den == o.den {
            if self.den.is_one() {
                return FieldElement::from_poly(self.num.add(&o.num));
            }
            return normalize(self.num.add(&o.num), self.den.clone());
        }
        normalize(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &FieldElement) -> FieldElement {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &FieldElement) -> FieldElement {
        if self.den.is_one() && o.den.is_one() {
            return FieldElement::from_poly(self.num.mul(&o.num));
        }
        normalize(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, c: &Scalar) -> FieldElement {
        FieldElement {
            num: self.num.scale(c),
            den: if c.is_zero() { MultiPoly::one(self.field(), self.nvars()) } else { self.den.clone() },
        }
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        FieldElement::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<FieldElement, FieldError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let n = e.unsigned_abs() as u32;
        if base.den.is_one() {
            return Ok(FieldElement::from_poly(base.num.pow(n)));
        }
        Ok(normalize(base.num.pow(n), base.den.pow(n)))
    }

    /// Multiply by x^e for an integer exponent vector.
    pub fn mul_monomial(&self, exps: &[i64]) -> FieldElement {
        FieldElement {
            num: self.num.mul_monomial(exps),
            den: self.den.clone(),
        }
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.den.is_one() {
            return self.num.fmt_with(names);
        }
        let n = self.num.fmt_with(names);
        let n = if self.num.len() > 1 { format!("({n})") } else { n };
        let d = self.den.fmt_with(names);
        let d = if self.den.len() > 1 { format!("({d})") } else { d };
        format!("{n}/{d}")
    }

    /// Wrap in parentheses when the rendering has more than one summand.
    pub fn fmt_factor(&self, names: &[String]) -> String {
        let s = self.fmt_with(names);
        if self.den.is_one() && self.num.len() > 1 {
            format!("({s})")
        } else {
            s
        }
    }
}

fn normalize(num: MultiPoly, den: MultiPoly) -> FieldElement {
    let field = num.field();
    let nvars = num.nvars();
    if num.is_zero() {
        return FieldElement::zero(field, nvars);
    }
    let dm: Vec<i64> = den.min_exponents().iter().map(|x| -x).collect();
    let den = den.mul_monomial(&dm);
    let num = num.mul_monomial(&dm);
    if let Some(c) = den.as_constant() {
        let inv = c.inv().expect("zero denominator");
        return FieldElement::from_poly(num.scale(&inv));
    }
    let nm = num.min_exponents();
    let neg_nm: Vec<i64> = nm.iter().map(|x| -x).collect();
    let mut n = num.mul_monomial(&neg_nm);
    let mut d = den;
    let g = n.gcd(&d);
    if !g.is_one() {
        n = n.div_exact(&g).expect("gcd divides numerator");
        d = d.div_exact(&g).expect("gcd divides denominator");
    }
    let lc = d.leading_term().unwrap().1.inv().unwrap();
    let n = n.mul_monomial(&nm).scale(&lc);
    let d = d.scale(&lc);
    if d.is_one() {
        return FieldElement::from_poly(n);
    }
    FieldElement { num: n, den: d }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> ResidueField {
        ResidueField::Rationals
    }

    fn v(i: usize) -> FieldElement {
        FieldElement::var(k(), 2, i)
    }

    #[test]
    fn additive_inverse() {
        assert!(v(0).add(&v(0).neg()).is_zero());
    }

    #[test]
    fn quotient_reduces() {
        let x = v(0);
        let y = v(1);
        let a = x.mul(&x).sub(&y.mul(&y));
        let b = x.sub(&y);
        assert_eq!(a.div(&b).unwrap(), x.add(&y));
    }

    #[test]
    fn char_two_cancellation() {
        let f2 = ResidueField::prime(2).unwrap();
        let z = FieldElement::var(f2, 3, 2);
        let m = FieldElement::monomial(f2, vec![2, 1, 0], Scalar::one(f2));
        let s = z.mul(&z).add(&m).add(&m);
        assert_eq!(s, z.mul(&z));
    }

    #[test]
    fn monomial_denominators_absorbed() {
        let x = v(0);
        let inv = x.inv().unwrap();
        assert!(inv.den().is_one());
        assert_eq!(inv.num().min_exponents(), vec![-1, 0]);
        assert!(x.mul(&inv).is_one());
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(v(0).div(&FieldElement::zero(k(), 2)), Err(FieldError::DivisionByZero));
    }
}
