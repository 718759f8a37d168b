use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::scalar::{ResidueField, Scalar};

/// Laurent polynomial in `nvars` variables over k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    field: ResidueField,
    nvars: usize,
    terms: BTreeMap<Vec<i64>, Scalar>,
}

impl MultiPoly {
    pub fn zero(field: ResidueField, nvars: usize) -> MultiPoly {
        MultiPoly {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: ResidueField, nvars: usize, c: Scalar) -> MultiPoly {
        MultiPoly::monomial(field, vec![0; nvars], c)
    }

    pub fn one(field: ResidueField, nvars: usize) -> MultiPoly {
        MultiPoly::constant(field, nvars, Scalar::one(field))
    }

    pub fn monomial(field: ResidueField, exps: Vec<i64>, c: Scalar) -> MultiPoly {
        let nvars = exps.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        MultiPoly { field, nvars, terms }
    }

    pub fn var(field: ResidueField, nvars: usize, i: usize) -> MultiPoly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        MultiPoly::monomial(field, e, Scalar::one(field))
    }

    pub fn from_terms(field: ResidueField, nvars: usize, terms: impl IntoIterator<Item = (Vec<i64>, Scalar)>) -> MultiPoly {
        let mut p = MultiPoly::zero(field, nvars);
        for (e, c) in terms {
            p.add_term(e, &c);
        }
        p
    }

    pub fn field(&self) -> ResidueField {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, Scalar> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero(self.field));
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|x| *x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// Single term, if the polynomial is a monomial.
    pub fn as_monomial(&self) -> Option<(&Vec<i64>, &Scalar)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Lex-largest term.
    pub fn leading_term(&self) -> Option<(&Vec<i64>, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, e: Vec<i64>, c: &Scalar) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                *x = &*x + c;
                if x.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let (mut big, small) = if self.len() >= other.len() { (self.clone(), other) } else { (other.clone(), self) };
        for (e, c) in &small.terms {
            big.add_term(e.clone(), c);
        }
        big
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), &-c);
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.field, self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, &(c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.field, self.nvars);
        }
        MultiPoly {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, exps: &[i64]) -> MultiPoly {
        MultiPoly {
            field: self.field,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(exps).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(self.field, self.nvars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Componentwise minimum exponent (the monomial content).
    pub fn min_exponents(&self) -> Vec<i64> {
        let mut m: Option<Vec<i64>> = None;
        for e in self.terms.keys() {
            m = Some(match m {
                None => e.clone(),
                Some(m) => m.iter().zip(e).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        m.unwrap_or_else(|| vec![0; self.nvars])
    }

    pub fn degree_in(&self, var: usize) -> i64 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] != 0)
    }

    /// Coefficients with respect to `var`; the returned polynomials do not involve it.
    fn coeffs_in(&self, var: usize) -> BTreeMap<i64, MultiPoly> {
        let mut out: BTreeMap<i64, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[var] = 0;
            out.entry(e[var])
                .or_insert_with(|| MultiPoly::zero(self.field, self.nvars))
                .add_term(e2, c);
        }
        out
    }

    /// Exact division of polynomials with non-negative exponents.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        let (de, dc) = d.leading_term()?;
        let dc_inv = dc.inv().ok()?;
        let mut r = self.clone();
        let mut q = MultiPoly::zero(self.field, self.nvars);
        while let Some((re, rc)) = r.leading_term() {
            let e: Vec<i64> = re.iter().zip(de).map(|(a, b)| a - b).collect();
            if e.iter().any(|x| *x < 0) {
                return None;
            }
            let c = rc * &dc_inv;
            let t = MultiPoly::monomial(self.field, e, c);
            r = r.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Over ℚ: integer coefficients without common factor; over 𝔽_p: monic.
    fn scalar_primitive(&self) -> MultiPoly {
        if self.field != ResidueField::Rationals || self.is_zero() {
            return self.monic();
        }
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            let r = c.as_rational().unwrap();
            den = den.lcm(r.denom());
            num = num.gcd(r.numer());
        }
        let f = BigRational::new(den, num);
        self.scale(&Scalar::Q(f))
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> MultiPoly {
        match self.leading_term() {
            Some((_, c)) => self.scale(&c.inv().unwrap()),
            None => self.clone(),
        }
    }

    /// Monic gcd of polynomials with non-negative exponents.
    pub fn gcd(&self, other: &MultiPoly) -> MultiPoly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let var = (0..self.nvars)
            .filter(|&v| self.uses_var(v) || other.uses_var(v))
            .min_by_key(|&v| (self.degree_in(v).max(other.degree_in(v)), std::cmp::Reverse(v)));
        let Some(v) = var else {
            return MultiPoly::one(self.field, self.nvars);
        };
        if !self.uses_var(v) {
            return self.gcd(&other.content_in(v));
        }
        if !other.uses_var(v) {
            return other.gcd(&self.content_in(v));
        }
        let ca = self.content_in(v);
        let cb = other.content_in(v);
        let pa = self.div_exact(&ca).unwrap();
        let pb = other.div_exact(&cb).unwrap();
        let g = interpolated_gcd(&pa, &pb, v).unwrap_or_else(|| primitive_prs(pa, pb, v));
        ca.gcd(&cb).mul(&g).monic()
    }

    /// Substitute `t` for variable `var`; exponents must be non-negative.
    fn eval_var(&self, var: usize, t: &Scalar) -> MultiPoly {
        let mut out = MultiPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[var] = 0;
            out.add_term(e2, &(c * &t.pow(e[var] as u64)));
        }
        out
    }

    fn content_in(&self, var: usize) -> MultiPoly {
        let mut g = MultiPoly::zero(self.field, self.nvars);
        for c in self.coeffs_in(var).values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn primitive_part_in(&self, var: usize) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.div_exact(&self.content_in(var)).unwrap()
    }

    /// Render with the given variable names.
    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = fmt_monomial(e, names);
            match (abs.is_one(), mono.is_empty()) {
                (true, true) => out.push('1'),
                (true, false) => out.push_str(&mono),
                (false, true) => write!(out, "{abs}").unwrap(),
                (false, false) => write!(out, "{abs}*{mono}").unwrap(),
            }
        }
        out
    }
}

pub(crate) fn fmt_monomial(e: &[i64], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (x, n) in e.iter().zip(names) {
        match *x {
            0 => {}
            1 => parts.push(n.clone()),
            k => parts.push(format!("{n}^{k}")),
        }
    }
    parts.join("*")
}

/// Gcd of polynomials primitive in `v`, from images at points of another
/// variable `x` and interpolation in `x`. `None` for univariate input or when
/// the field runs out of points.
fn interpolated_gcd(a: &MultiPoly, b: &MultiPoly, v: usize) -> Option<MultiPoly> {
    let x = (0..a.nvars)
        .filter(|&i| i != v && (a.uses_var(i) || b.uses_var(i)))
        .min_by_key(|&i| a.degree_in(i).min(b.degree_in(i)))?;
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    let lca = a.coeffs_in(v).remove(&da).unwrap();
    let lcb = b.coeffs_in(v).remove(&db).unwrap();
    let gamma = lca.gcd(&lcb);
    let need = (a.degree_in(x).min(b.degree_in(x)) + gamma.degree_in(x) + 1) as usize;
    let limit = match a.field {
        ResidueField::Prime(p) => Some(p as i64),
        ResidueField::Rationals => None,
    };
    let mut deg = da.min(db);
    let mut pts: Vec<(Scalar, MultiPoly)> = Vec::new();
    for t in 0i64.. {
        if limit.is_some_and(|p| t >= p) {
            return None;
        }
        let s = Scalar::from_i64(a.field, t);
        if lca.eval_var(x, &s).is_zero() || lcb.eval_var(x, &s).is_zero() {
            continue;
        }
        let gt = a.eval_var(x, &s).gcd(&b.eval_var(x, &s));
        let dt = gt.degree_in(v);
        if dt == 0 {
            return Some(MultiPoly::one(a.field, a.nvars));
        }
        if dt > deg {
            continue;
        }
        if dt < deg {
            deg = dt;
            pts.clear();
        }
        let gt = gt.primitive_part_in(v);
        let lc = gt.coeffs_in(v).remove(&dt).unwrap();
        let Some(gt) = gt.mul(&gamma.eval_var(x, &s)).div_exact(&lc) else {
            continue;
        };
        pts.push((s, gt));
        if pts.len() == need {
            let g = interpolate(x, &pts).primitive_part_in(v);
            if a.div_exact(&g).is_some() && b.div_exact(&g).is_some() {
                return Some(g);
            }
            pts.clear();
        }
    }
    None
}

/// The polynomial of degree below `pts.len()` in `x` taking the given values.
fn interpolate(x: usize, pts: &[(Scalar, MultiPoly)]) -> MultiPoly {
    let (field, nvars) = (pts[0].1.field, pts[0].1.nvars);
    let xv = MultiPoly::var(field, nvars, x);
    let mut acc = MultiPoly::zero(field, nvars);
    let mut basis = MultiPoly::one(field, nvars);
    for (t, g) in pts {
        let at = acc.eval_var(x, t);
        let bt = basis.eval_var(x, t).as_constant().unwrap();
        acc = acc.add(&basis.mul(&g.sub(&at).scale(&bt.inv().unwrap())));
        basis = basis.mul(&xv.sub(&MultiPoly::constant(field, nvars, t.clone())));
    }
    acc
}

fn primitive_prs(a: MultiPoly, b: MultiPoly, v: usize) -> MultiPoly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        if b.is_zero() {
            return a.primitive_part_in(v).monic();
        }
        if b.degree_in(v) == 0 {
            return MultiPoly::one(a.field, a.nvars);
        }
        let r = pseudo_rem(&a, &b, v);
        a = b;
        b = r.primitive_part_in(v).scalar_primitive();
    }
}

fn pseudo_rem(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let db = b.degree_in(v);
    let lcb = b.coeffs_in(v).remove(&db).unwrap();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lcr = r.coeffs_in(v).remove(&dr).unwrap();
        let mut shift = vec![0; a.nvars];
        shift[v] = dr - db;
        r = lcb.mul(&r).sub(&lcr.mul(&b.mul_monomial(&shift)));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> ResidueField {
        ResidueField::Rationals
    }

    fn x() -> MultiPoly {
        MultiPoly::var(k(), 2, 0)
    }

    fn y() -> MultiPoly {
        MultiPoly::var(k(), 2, 1)
    }

    #[test]
    fn gcd_difference_of_squares() {
        let a = x().mul(&x()).sub(&y().mul(&y()));
        let b = x().sub(&y());
        assert_eq!(a.gcd(&b), b.monic());
        assert_eq!(a.div_exact(&b).unwrap(), x().add(&y()));
    }

    #[test]
    fn gcd_coprime() {
        let a = x().add(&MultiPoly::one(k(), 2));
        let b = y().add(&MultiPoly::one(k(), 2));
        assert!(a.gcd(&b).is_one());
    }

    #[test]
    fn gcd_with_content() {
        let xy = x().mul(&y());
        let a = xy.mul(&x().add(&y()));
        let b = xy.mul(&x().sub(&y()));
        assert_eq!(a.gcd(&b), xy);
    }

    #[test]
    fn gcd_three_variables() {
        let z = MultiPoly::var(k(), 3, 2);
        let v = |i| MultiPoly::var(k(), 3, i);
        let one = MultiPoly::one(k(), 3);
        let g = v(0).mul(&v(1)).mul(&z).add(&v(0).pow(3)).sub(&one);
        let a = g.mul(&z.pow(2).add(&v(1)));
        let b = g.mul(&v(0).mul(&z).sub(&v(1).pow(2)).add(&one));
        assert_eq!(a.gcd(&b), g.monic());
        assert!(a.gcd(&b.add(&one)).is_one());
    }

    #[test]
    fn gcd_over_f2_with_few_points() {
        let f2 = ResidueField::Prime(2);
        let x = MultiPoly::var(f2, 2, 0);
        let y = MultiPoly::var(f2, 2, 1);
        let one = MultiPoly::one(f2, 2);
        let g = x.pow(3).mul(&y).add(&x).add(&one);
        let a = g.mul(&y.pow(2).add(&x.pow(2).mul(&y)).add(&one));
        let b = g.mul(&x.mul(&y).add(&x.pow(4)).add(&one));
        assert_eq!(a.gcd(&b), g.monic());
    }

    #[test]
    fn formatting() {
        let names = vec!["x1".to_string(), "x2".to_string()];
        let p = x().pow(4).mul(&y().pow(2)).add(&y().pow(31));
        assert_eq!(p.fmt_with(&names), "x1^4*x2^2 + x2^31");
        let q = MultiPoly::monomial(k(), vec![-1, 15], Scalar::from_i64(k(), -2));
        assert_eq!(q.fmt_with(&names), "-2*x1^-1*x2^15");
    }
}
