use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::scalar::{ResidueField, Scalar};

/// Dense univariate polynomial over k, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    field: ResidueField,
    coeffs: Vec<Scalar>,
}

impl UniPoly {
    pub fn new(field: ResidueField, mut coeffs: Vec<Scalar>) -> UniPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { field, coeffs }
    }

    pub fn from_i64(field: ResidueField, cs: &[i64]) -> UniPoly {
        UniPoly::new(field, cs.iter().map(|c| Scalar::from_i64(field, *c)).collect())
    }

    pub fn one(field: ResidueField) -> UniPoly {
        UniPoly::new(field, vec![Scalar::one(field)])
    }

    /// `t − a`.
    pub fn linear(a: &Scalar) -> UniPoly {
        let k = a.field();
        UniPoly::new(k, vec![-a, Scalar::one(k)])
    }

    pub fn field(&self) -> ResidueField {
        self.field
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// -1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lead(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero(self.field);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn add(&self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Scalar::zero(self.field);
        let c = (0..n)
            .map(|i| &*self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
            .collect();
        UniPoly::new(self.field, c)
    }

    pub fn sub(&self, o: &UniPoly) -> UniPoly {
        self.add(&UniPoly::new(self.field, o.coeffs.iter().map(|c| -c).collect()))
    }

    pub fn mul(&self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::new(self.field, vec![]);
        }
        let mut c = vec![Scalar::zero(self.field); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        UniPoly::new(self.field, c)
    }

    pub fn scale(&self, s: &Scalar) -> UniPoly {
        UniPoly::new(self.field, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> UniPoly {
        match self.lead() {
            Some(l) => self.scale(&l.inv().unwrap()),
            None => self.clone(),
        }
    }

    pub fn divrem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let inv = d.lead().unwrap().inv().unwrap();
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        if r.len() <= dd {
            return (UniPoly::new(self.field, vec![]), self.clone());
        }
        let mut q = vec![Scalar::zero(self.field); r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = &r[i] * &inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[i - dd + j] = &r[i - dd + j] - &(&c * dc);
            }
            q[i - dd] = c;
        }
        r.truncate(dd);
        (UniPoly::new(self.field, q), UniPoly::new(self.field, r))
    }

    pub fn gcd(&self, o: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    fn powmod(&self, mut e: BigInt, m: &UniPoly) -> UniPoly {
        let mut acc = UniPoly::one(self.field);
        let mut base = self.divrem(m).1;
        while e.is_positive() {
            if e.is_odd() {
                acc = acc.mul(&base).divrem(m).1;
            }
            base = base.mul(&base).divrem(m).1;
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{i}"),
            };
            parts.push(match (c.is_one(), mono.is_empty()) {
                (true, false) => mono,
                (_, true) => c.to_string(),
                _ => format!("{c}*{mono}"),
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Roots in k with multiplicities, plus the part without roots in k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSplit {
    pub roots: Vec<(Scalar, u32)>,
    pub cofactor: UniPoly,
}

impl RootSplit {
    pub fn splits(&self) -> bool {
        self.cofactor.degree() == 0
    }
}

pub fn roots_in_k(poly: &UniPoly) -> RootSplit {
    assert!(!poly.is_zero(), "roots of the zero polynomial");
    let candidates = match poly.field() {
        ResidueField::Prime(p) if p <= 1 << 16 => (0..p).map(|v| Scalar::Fp { v, p }).collect(),
        ResidueField::Prime(p) => large_prime_roots(poly, p),
        ResidueField::Rationals => rational_candidates(poly),
    };
    let mut rest = poly.clone();
    let mut roots = Vec::new();
    for a in candidates {
        let lin = UniPoly::linear(&a);
        let mut m = 0;
        while rest.degree() >= 1 && rest.eval(&a).is_zero() {
            rest = rest.divrem(&lin).0;
            m += 1;
        }
        if m > 0 {
            roots.push((a, m));
        }
    }
    roots.sort_by(|a, b| cmp_scalar(&a.0, &b.0));
    RootSplit { roots, cofactor: rest }
}

fn cmp_scalar(a: &Scalar, b: &Scalar) -> std::cmp::Ordering {
    match (a, b) {
        (Scalar::Q(x), Scalar::Q(y)) => x.cmp(y),
        (Scalar::Fp { v: x, .. }, Scalar::Fp { v: y, .. }) => x.cmp(y),
        _ => unreachable!(),
    }
}

/// Distinct roots over a large 𝔽_p: gcd with t^p − t, then equal-degree splitting.
fn large_prime_roots(poly: &UniPoly, p: u64) -> Vec<Scalar> {
    let k = poly.field();
    let t = UniPoly::from_i64(k, &[0, 1]);
    let tp = t.powmod(BigInt::from(p), &poly.monic());
    let g = tp.sub(&t).gcd(poly);
    let mut out = Vec::new();
    let mut stack = vec![g];
    let half = BigInt::from((p - 1) / 2);
    while let Some(g) = stack.pop() {
        match g.degree() {
            d if d <= 0 => {}
            1 => out.push(-&g.monic().coeffs()[0]),
            _ => {
                for a in 0u64.. {
                    let shift = UniPoly::new(k, vec![Scalar::Fp { v: a % p, p }, Scalar::one(k)]);
                    let w = shift.powmod(half.clone(), &g).sub(&UniPoly::one(k));
                    let h = w.gcd(&g);
                    if h.degree() > 0 && h.degree() < g.degree() {
                        stack.push(g.divrem(&h).0);
                        stack.push(h);
                        break;
                    }
                }
            }
        }
    }
    out
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= n && d < BigInt::from(1_000_000) {
        let mut e = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e > 0 {
            primes.push((d.clone(), e));
        }
        d += 1;
    }
    if n > BigInt::one() {
        primes.push((n, 1));
    }
    let mut out = vec![BigInt::one()];
    for (p, e) in primes {
        let mut next = Vec::new();
        for x in &out {
            let mut pw = BigInt::one();
            for _ in 0..=e {
                next.push(x * &pw);
                pw *= &p;
            }
        }
        out = next;
    }
    out
}

/// Candidates ±a/b with a | constant term and b | leading term of the primitive integer form.
fn rational_candidates(poly: &UniPoly) -> Vec<Scalar> {
    let rats: Vec<BigRational> = poly.coeffs().iter().map(|c| c.as_rational().unwrap().clone()).collect();
    let den = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = rats.iter().map(|r| (r * BigRational::from_integer(den.clone())).to_integer()).collect();
    let mut out = Vec::new();
    let low = ints.iter().position(|c| !c.is_zero()).unwrap();
    if low > 0 {
        out.push(Scalar::Q(BigRational::zero()));
    }
    let a0 = &ints[low];
    let an = ints.last().unwrap();
    if ints.len() - low < 2 {
        return out;
    }
    let mut seen = std::collections::BTreeSet::new();
    for a in divisors(a0) {
        for b in divisors(an) {
            for s in [1i64, -1] {
                let r = BigRational::new(&a * BigInt::from(s), b.clone());
                if seen.insert(r.clone()) {
                    out.push(Scalar::Q(r));
                }
            }
        }
    }
    out
}
