use crate::coeffield::{parse_element, FieldElement, FieldError, MultiPoly, ResidueField};

/// Dense polynomial in z over K, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZPoly {
    field: ResidueField,
    nvars: usize,
    coeffs: Vec<FieldElement>,
}

impl ZPoly {
    pub fn new(field: ResidueField, nvars: usize, mut coeffs: Vec<FieldElement>) -> ZPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { field, nvars, coeffs }
    }

    pub fn zero(field: ResidueField, nvars: usize) -> ZPoly {
        ZPoly::new(field, nvars, vec![])
    }

    pub fn one(field: ResidueField, nvars: usize) -> ZPoly {
        ZPoly::constant(FieldElement::one(field, nvars))
    }

    pub fn z(field: ResidueField, nvars: usize) -> ZPoly {
        ZPoly::new(
            field,
            nvars,
            vec![FieldElement::zero(field, nvars), FieldElement::one(field, nvars)],
        )
    }

    pub fn constant(c: FieldElement) -> ZPoly {
        ZPoly::new(c.field(), c.nvars(), vec![c])
    }

    pub fn field(&self) -> ResidueField {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| FieldElement::zero(self.field, self.nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// -1 for zero.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<FieldElement> {
        match self.coeffs.len() {
            0 => Some(FieldElement::zero(self.field, self.nvars)),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn add(&self, o: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ZPoly::new(self.field, self.nvars, (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn neg(&self) -> ZPoly {
        ZPoly::new(self.field, self.nvars, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn sub(&self, o: &ZPoly) -> ZPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &ZPoly) -> ZPoly {
        if self.is_zero() || o.is_zero() {
            return ZPoly::zero(self.field, self.nvars);
        }
        let mut c = vec![FieldElement::zero(self.field, self.nvars); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] = c[i + j].add(&a.mul(b));
                }
            }
        }
        ZPoly::new(self.field, self.nvars, c)
    }

    pub fn scale(&self, c: &FieldElement) -> ZPoly {
        ZPoly::new(self.field, self.nvars, self.coeffs.iter().map(|x| x.mul(c)).collect())
    }

    pub fn pow(&self, n: u32) -> ZPoly {
        let mut acc = ZPoly::one(self.field, self.nvars);
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

    /// Division by a monic polynomial.
    pub fn divrem(&self, d: &ZPoly) -> (ZPoly, ZPoly) {
        assert!(d.is_monic(), "divisor must be monic");
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (ZPoly::zero(self.field, self.nvars), self.clone());
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![FieldElement::zero(self.field, self.nvars); r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = r[i].clone();
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate().take(dd) {
                if !dc.is_zero() {
                    r[i - dd + j] = r[i - dd + j].sub(&c.mul(dc));
                }
            }
            r[i] = FieldElement::zero(self.field, self.nvars);
            q[i - dd] = c;
        }
        r.truncate(dd);
        (ZPoly::new(self.field, self.nvars, q), ZPoly::new(self.field, self.nvars, r))
    }

    /// Digits of `self` in base `phi`, lowest first.
    pub fn digits(&self, phi: &ZPoly) -> Vec<ZPoly> {
        let mut digits = Vec::new();
        let mut rest = self.clone();
        while !rest.is_zero() {
            let (q, r) = rest.divrem(phi);
            digits.push(r);
            rest = q;
        }
        digits
    }

    /// Parse a polynomial in `zvar` with coefficients in k(names).
    pub fn parse(s: &str, names: &[String], zvar: &str, field: ResidueField) -> Result<ZPoly, FieldError> {
        let mut all = names.to_vec();
        all.push(zvar.to_string());
        let e = parse_element(s, &all, field)?;
        let m = names.len();
        if e.den().terms().keys().any(|k| k[m] != 0) {
            return Err(FieldError::Parse(format!("{zvar} appears in a denominator")));
        }
        if e.num().terms().keys().any(|k| k[m] < 0) {
            return Err(FieldError::Parse(format!("negative power of {zvar}")));
        }
        let strip = |p: &MultiPoly, pick: Option<i64>| {
            MultiPoly::from_terms(
                field,
                m,
                p.terms()
                    .iter()
                    .filter(|(k, _)| pick.map_or(true, |d| k[m] == d))
                    .map(|(k, c)| (k[..m].to_vec(), c.clone())),
            )
        };
        let den = strip(e.den(), None);
        let deg = e.num().degree_in(m).max(0) as usize;
        let mut coeffs = Vec::with_capacity(deg + 1);
        for d in 0..=deg {
            coeffs.push(FieldElement::new(strip(e.num(), Some(d as i64)), den.clone())?);
        }
        Ok(ZPoly::new(field, m, coeffs))
    }

    pub fn fmt_with(&self, names: &[String], zvar: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let zp = match i {
                0 => String::new(),
                1 => zvar.to_string(),
                _ => format!("{zvar}^{i}"),
            };
            if i == 0 {
                parts.push(c.fmt_with(names));
            } else if c.is_one() {
                parts.push(zp);
            } else if let Some(p) = c.as_poly() {
                for t in p.terms().iter().rev() {
                    let m = MultiPoly::monomial(self.field, t.0.clone(), t.1.clone()).fmt_with(names);
                    match m.as_str() {
                        "1" => parts.push(zp.clone()),
                        "-1" => parts.push(format!("-{zp}")),
                        _ => parts.push(format!("{m}*{zp}")),
                    }
                }
            } else {
                parts.push(format!("{}*{zp}", c.fmt_factor(names)));
            }
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}
