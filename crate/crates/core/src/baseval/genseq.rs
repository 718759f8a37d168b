//! Valuations on k(u, v) given by a generating sequence
//! P₀ = u, P₁ = v, P_{i+1} = P_i^r − u^{aᵢ}·P_{i−1}, truncated at a finite depth.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::BaseError;
use crate::coeffield::{FieldElement, MultiPoly, ResidueField, Scalar};
use crate::ordgroup::{GroupElement, GroupSpec, Subgroup};

/// Values are known this many levels past the materialized polynomials.
const VALUE_LOOKAHEAD: usize = 40;

/// `aᵢ = coef · base^(mul·i + add)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentRule {
    pub coef: u64,
    pub base: u64,
    pub mul: i64,
    pub add: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSeqRule {
    /// deg P_{i+1} = ratio · deg P_i for i ≥ 1.
    pub ratio: u64,
    /// a₁, a₂, … before the tail rule applies.
    #[serde(default)]
    pub u_exponents: Vec<u64>,
    #[serde(default)]
    pub tail: Option<ExponentRule>,
}

impl GenSeqRule {
    pub fn exponent(&self, i: usize) -> Result<BigInt, BaseError> {
        if i >= 1 && i <= self.u_exponents.len() {
            return Ok(BigInt::from(self.u_exponents[i - 1]));
        }
        let t = self
            .tail
            .as_ref()
            .ok_or_else(|| BaseError::Invalid(format!("no u-exponent for index {i}")))?;
        let e = t.mul * i as i64 + t.add;
        if e < 0 {
            return Err(BaseError::Invalid(format!("negative power in exponent rule at {i}")));
        }
        Ok(BigInt::from(t.coef) * num_traits::pow(BigInt::from(t.base), e as usize))
    }
}

type UPoly = BTreeMap<i64, Scalar>;
type VPoly = BTreeMap<i64, UPoly>;

fn u_add(target: &mut UPoly, e: i64, c: &Scalar) {
    if c.is_zero() {
        return;
    }
    let done = match target.get_mut(&e) {
        Some(x) => {
            *x = &*x + c;
            x.is_zero()
        }
        None => {
            target.insert(e, c.clone());
            false
        }
    };
    if done {
        target.remove(&e);
    }
}

fn u_mul(a: &UPoly, b: &UPoly) -> UPoly {
    let mut out = UPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            u_add(&mut out, ea + eb, &(ca * cb));
        }
    }
    out
}

/// target += sign · coeff · v^shift · src
fn v_axpy(target: &mut VPoly, coeff: &UPoly, shift: i64, src: &VPoly, negate: bool) {
    for (ev, cu) in src {
        let prod = u_mul(coeff, cu);
        let slot = target.entry(ev + shift).or_default();
        for (eu, c) in prod {
            let c = if negate { -&c } else { c };
            u_add(slot, eu, &c);
        }
        if slot.is_empty() {
            target.remove(&(ev + shift));
        }
    }
}

fn v_mul(a: &VPoly, b: &VPoly) -> VPoly {
    let mut out = VPoly::new();
    for (ea, ca) in a {
        v_axpy(&mut out, ca, *ea, b, false);
    }
    out
}

fn v_pow(a: &VPoly, n: u64) -> VPoly {
    let mut acc: VPoly = BTreeMap::from([(0, UPoly::from([(0, one_of(a))]))]);
    let mut base = a.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = v_mul(&acc, &base);
        }
        n >>= 1;
        if n > 0 {
            base = v_mul(&base, &base);
        }
    }
    acc
}

fn one_of(a: &VPoly) -> Scalar {
    let c = a.values().next().and_then(|u| u.values().next()).expect("empty polynomial");
    Scalar::one(c.field())
}

fn v_deg(a: &VPoly) -> i64 {
    a.keys().next_back().copied().unwrap_or(-1)
}

/// Quotient and remainder by a polynomial monic in v.
fn v_divrem(mut g: VPoly, p: &VPoly) -> (VPoly, VPoly) {
    let d = v_deg(p);
    let mut q = VPoly::new();
    while let Some((&top, _)) = g.iter().next_back() {
        if top < d {
            break;
        }
        let c = g.remove(&top).unwrap();
        for (ev, cu) in p.iter().filter(|(e, _)| **e != d) {
            let prod = u_mul(&c, cu);
            let slot = g.entry(ev + top - d).or_default();
            for (eu, x) in prod {
                u_add(slot, eu, &-&x);
            }
            if slot.is_empty() {
                g.remove(&(ev + top - d));
            }
        }
        q.insert(top - d, c);
    }
    (q, g)
}

fn to_vpoly(p: &MultiPoly) -> VPoly {
    let mut out = VPoly::new();
    for (e, c) in p.terms() {
        u_add(out.entry(e[1]).or_default(), e[0], c);
    }
    out
}

fn from_vpoly(field: ResidueField, p: &VPoly) -> MultiPoly {
    MultiPoly::from_terms(
        field,
        2,
        p.iter().flat_map(|(ev, cu)| cu.iter().map(move |(eu, c)| (vec![*eu, *ev], c.clone()))),
    )
}

/// Truncated generating-sequence valuation on k(u, v).
#[derive(Debug, Clone)]
pub struct GenSeqValuation {
    field: ResidueField,
    names: Vec<String>,
    spec: Arc<GroupSpec>,
    rule: Option<GenSeqRule>,
    depth: usize,
    /// P₀,…,P_depth.
    polys: Vec<VPoly>,
    /// ν(P₀),…,ν(P_M) with M ≥ depth.
    values: Vec<GroupElement>,
    /// deg P_{i+1} / deg P_i, index i = 1..=M (index 0 unused).
    ratios: Vec<u64>,
    group: Subgroup,
    pchain: Subgroup,
}

impl PartialEq for GenSeqValuation {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field
            && self.names == o.names
            && self.rule == o.rule
            && self.depth == o.depth
            && self.values == o.values
            && self.polys == o.polys
    }
}

impl GenSeqValuation {
    /// Build from a recursion rule, materializing P₀,…,P_depth.
    pub fn from_rule(
        field: ResidueField,
        names: Vec<String>,
        p0_value: BigRational,
        rule: GenSeqRule,
        depth: usize,
    ) -> Result<GenSeqValuation, BaseError> {
        if names.len() != 2 {
            return Err(BaseError::Invalid("generating sequences use exactly two variables".into()));
        }
        if rule.ratio < 2 {
            return Err(BaseError::Invalid("ratio must be at least 2".into()));
        }
        if p0_value <= BigRational::zero() {
            return Err(BaseError::Invalid("ν(P₀) must be positive".into()));
        }
        let spec = Arc::new(GroupSpec::Rational);
        let m = depth + VALUE_LOOKAHEAD;
        let mut values = vec![GroupElement::rational(&spec, p0_value)];
        let r = BigRational::from_integer(BigInt::from(rule.ratio));
        for i in 1..=m {
            let a = BigRational::from_integer(rule.exponent(i)?);
            let prev = values[i - 1].coords().unwrap()[0].clone();
            let base = values[0].coords().unwrap()[0].clone();
            values.push(GroupElement::rational(&spec, (a * base + prev) / &r));
        }
        let ratios = std::iter::once(0).chain(std::iter::repeat(rule.ratio).take(m)).collect();
        let mut v = GenSeqValuation::assemble(field, names, spec, Some(rule), values, ratios)?;
        v.materialize(depth)?;
        Ok(v)
    }

    /// Build from an explicit list P₀ = u, P₁ = v, P₂, … with their values; no deepening.
    pub fn from_sequence(
        field: ResidueField,
        names: Vec<String>,
        polys: Vec<MultiPoly>,
        values: Vec<GroupElement>,
    ) -> Result<GenSeqValuation, BaseError> {
        if names.len() != 2 || polys.len() < 2 || polys.len() != values.len() {
            return Err(BaseError::Invalid("need P₀ = u, P₁ = v, … with one value each".into()));
        }
        let spec = values[0]
            .spec()
            .cloned()
            .ok_or_else(|| BaseError::Invalid("infinite value".into()))?;
        let vp: Vec<VPoly> = polys.iter().map(to_vpoly).collect();
        if vp[0] != BTreeMap::from([(0, UPoly::from([(1, Scalar::one(field))]))])
            || vp[1] != BTreeMap::from([(1, UPoly::from([(0, Scalar::one(field))]))])
        {
            return Err(BaseError::Invalid("P₀ must be u and P₁ must be v".into()));
        }
        let mut ratios = vec![0u64];
        for i in 1..vp.len() - 1 {
            let (a, b) = (v_deg(&vp[i]), v_deg(&vp[i + 1]));
            if a <= 0 || b % a != 0 || b / a < 2 {
                return Err(BaseError::Invalid(format!("deg P{} does not divide deg P{}", i, i + 1)));
            }
            ratios.push((b / a) as u64);
        }
        let depth = vp.len() - 1;
        ratios.push(1);
        let mut v = GenSeqValuation::assemble(field, names, spec, None, values, ratios)?;
        v.polys = vp;
        v.depth = depth;
        Ok(v)
    }

    fn assemble(
        field: ResidueField,
        names: Vec<String>,
        spec: Arc<GroupSpec>,
        rule: Option<GenSeqRule>,
        values: Vec<GroupElement>,
        ratios: Vec<u64>,
    ) -> Result<GenSeqValuation, BaseError> {
        let mut pchain = Subgroup::new(&spec, &values[..1])?;
        for i in 1..values.len() {
            let expected = if i < ratios.len() && ratios[i] > 1 {
                ratios[i]
            } else {
                0
            };
            let n = pchain.order_mod(&values[i], u64::MAX)?;
            if expected != 0 && n != expected {
                return Err(BaseError::Invalid(format!(
                    "ν(P{i}) = {} has order {n} over the previous values, expected {expected}",
                    values[i]
                )));
            }
            if i + 1 < values.len() && expected != 0 {
                let lower = values[i].scale_int(expected as i64);
                if values[i + 1] <= lower {
                    return Err(BaseError::Invalid(format!("values do not climb at P{}", i + 1)));
                }
            }
            pchain = pchain.push(&values[i], u64::MAX)?;
        }
        let group = Subgroup::new(&spec, &values)?;
        Ok(GenSeqValuation {
            field,
            names,
            spec,
            rule,
            depth: 0,
            polys: vec![BTreeMap::from([(0, UPoly::from([(1, Scalar::one(field))]))])],
            values,
            ratios,
            group,
            pchain,
        })
    }

    fn materialize(&mut self, depth: usize) -> Result<(), BaseError> {
        let rule = self.rule.clone().ok_or(BaseError::NoRecursionRule)?;
        let one = Scalar::one(self.field);
        while self.polys.len() <= depth {
            let i = self.polys.len();
            let next = if i == 1 {
                BTreeMap::from([(1, UPoly::from([(0, one.clone())]))])
            } else {
                let a = rule
                    .exponent(i - 1)?
                    .to_i64()
                    .ok_or_else(|| BaseError::Invalid("u-exponent overflow".into()))?;
                let mut p = v_pow(&self.polys[i - 1], rule.ratio);
                v_axpy(&mut p, &UPoly::from([(a, one.clone())]), 0, &self.polys[i - 2], true);
                p
            };
            self.polys.push(next);
        }
        self.depth = depth;
        Ok(())
    }

    /// Deepen the truncation by `extra` levels.
    pub fn extend(&self, extra: usize) -> Result<GenSeqValuation, BaseError> {
        if extra == 0 {
            return Ok(self.clone());
        }
        let rule = self.rule.clone().ok_or(BaseError::NoRecursionRule)?;
        let p0 = self.values[0].coords().unwrap()[0].clone();
        GenSeqValuation::from_rule(self.field, self.names.clone(), p0, rule, self.depth + extra)
    }

    pub fn depth(&self) -> usize {
        self.depth
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

    pub fn rule(&self) -> Option<&GenSeqRule> {
        self.rule.as_ref()
    }

    /// ν(P₀),…,ν(P_depth).
    pub fn values(&self) -> &[GroupElement] {
        &self.values[..=self.depth]
    }

    pub fn poly(&self, i: usize) -> Option<MultiPoly> {
        self.polys.get(i).map(|p| from_vpoly(self.field, p))
    }

    pub fn group(&self) -> &Subgroup {
        &self.group
    }

    fn deg_p(&self, i: usize) -> u64 {
        if i == 0 {
            return 0;
        }
        self.ratios[1..i].iter().product()
    }

    /// Queries of v-degree below this bound are certified.
    pub fn certified_degree(&self) -> u64 {
        self.deg_p(self.depth + 1)
    }

    fn needed_depth(&self, deg: i64) -> usize {
        let mut n = self.depth + 1;
        while n + 1 < self.ratios.len() && (self.deg_p(n + 1) as i64) <= deg {
            n += 1;
        }
        n
    }

    /// Minimal term of the P-adic expansion: (value, exponent key, coefficient).
    fn min_term(&self, g: &VPoly, level: usize) -> Result<(GroupElement, Vec<i64>, Scalar), BaseError> {
        if level == 0 {
            if g.len() != 1 || !g.contains_key(&0) {
                return Err(BaseError::Internal("v-dependent digit at level 0".into()));
            }
            let (ord, c) = g[&0].iter().next().unwrap();
            return Ok((self.values[0].scale_int(*ord), vec![*ord], c.clone()));
        }
        let digits: Vec<(i64, VPoly)> = if level == 1 {
            g.iter().map(|(j, u)| (*j, BTreeMap::from([(0, u.clone())]))).collect()
        } else {
            let mut out = Vec::new();
            let mut rest = g.clone();
            let mut j = 0;
            while !rest.is_empty() {
                let (q, r) = v_divrem(rest, &self.polys[level]);
                if !r.is_empty() {
                    out.push((j, r));
                }
                rest = q;
                j += 1;
            }
            out
        };
        let mut best: Option<(GroupElement, Vec<i64>, Scalar)> = None;
        let mut tie = false;
        for (j, d) in digits {
            let (v, mut key, c) = self.min_term(&d, level - 1)?;
            let v = &v + &self.values[level].scale_int(j);
            key.push(j);
            match best.as_ref().map(|b| v.cmp(&b.0)) {
                None | Some(std::cmp::Ordering::Less) => {
                    best = Some((v, key, c));
                    tie = false;
                }
                Some(std::cmp::Ordering::Equal) => tie = true,
                _ => {}
            }
        }
        if tie {
            return Err(BaseError::Internal("tie in generating-sequence expansion".into()));
        }
        best.ok_or_else(|| BaseError::Internal("empty expansion".into()))
    }

    fn poly_min_term(&self, p: &MultiPoly, vshift: i64) -> Result<(GroupElement, Vec<i64>, Scalar), BaseError> {
        let mut g = to_vpoly(p);
        if vshift != 0 {
            g = g.into_iter().map(|(e, u)| (e + vshift, u)).collect();
        }
        let deg = v_deg(&g);
        if deg >= self.certified_degree() as i64 {
            return Err(BaseError::DepthExceeded {
                depth: self.depth,
                needed: self.needed_depth(deg),
            });
        }
        let (v, key, c) = self.min_term(&g, self.depth)?;
        let v = &v - &self.values[1].scale_int(vshift);
        Ok((v, key, c))
    }

    fn shift_for(p: &MultiPoly) -> i64 {
        (-p.min_exponents()[1]).max(0)
    }

    pub fn value(&self, a: &FieldElement) -> Result<GroupElement, BaseError> {
        if a.is_zero() {
            return Ok(GroupElement::Infinity);
        }
        let vn = self.poly_min_term(a.num(), Self::shift_for(a.num()))?.0;
        let vd = self.poly_min_term(a.den(), Self::shift_for(a.den()))?.0;
        Ok(&vn - &vd)
    }

    pub fn residue(&self, a: &FieldElement) -> Result<Scalar, BaseError> {
        self.residue_pair(a.num(), a.den())
            .map_err(|e| relabel(e, || a.fmt_with(&self.names)))
    }

    /// Residue of `num/den` without reducing the fraction.
    pub fn residue_pair(&self, num: &MultiPoly, den: &MultiPoly) -> Result<Scalar, BaseError> {
        let s = Self::shift_for(num).max(Self::shift_for(den));
        let (vn, kn, cn) = self.poly_min_term(num, s)?;
        let (vd, kd, cd) = self.poly_min_term(den, s)?;
        if vn != vd || kn != kd {
            return Err(BaseError::NotAUnit(String::new()));
        }
        Ok(&cn * &cd.inv()?)
    }

    /// u^t·Π P_i^{jᵢ} with the given value.
    pub fn element_of_value(&self, g: &GroupElement) -> Result<FieldElement, BaseError> {
        let (g0, js) = self.pchain.decompose(g)?;
        if let Some(top) = js.iter().rposition(|j| *j != 0) {
            if top + 1 > self.depth {
                return Err(BaseError::DepthExceeded {
                    depth: self.depth,
                    needed: top + 1,
                });
            }
        }
        let t = (&g0.coords().unwrap()[0] / &self.values[0].coords().unwrap()[0]).to_integer();
        let t = t.to_i64().ok_or_else(|| BaseError::Invalid("exponent overflow".into()))?;
        let one = Scalar::one(self.field);
        let mut acc = FieldElement::monomial(self.field, vec![t, 0], one);
        for (i, j) in js.iter().enumerate() {
            if *j > 0 {
                let p = FieldElement::from_poly(from_vpoly(self.field, &self.polys[i + 1]));
                acc = acc.mul(&p.pow(*j as i64)?);
            }
        }
        Ok(acc)
    }
}

fn relabel(e: BaseError, label: impl FnOnce() -> String) -> BaseError {
    match e {
        BaseError::NotAUnit(_) => BaseError::NotAUnit(label()),
        e => e,
    }
}
