//! Totally ordered abelian groups: rank-1 groups spanned by `1` (and optionally
//! `√d`) over ℚ, and finite lexicographic products of those.
//!
//! Elements live in the divisible hull, so coordinates are rationals.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group elements belong to different group specs")]
    MixedSpecs,
    #[error("no multiple n <= {bound} of {value} lies in the subgroup")]
    NoFiniteOrder { value: String, bound: u64 },
    #[error("degenerate segment (zero width)")]
    DegenerateSegment,
    #[error("{0} is not in the group")]
    NotInGroup(String),
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    #[error("cannot parse group element {0:?}")]
    Parse(String),
    #[error("operation undefined for infinity")]
    Infinite,
}

/// Shape of a value group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupSpec {
    Rational,
    Quadratic { d: u64 },
    /// Outer component first.
    Lex { members: Vec<GroupSpec> },
}

impl GroupSpec {
    pub fn quadratic(d: u64) -> Result<GroupSpec, GroupError> {
        if d == 0 || d.sqrt() * d.sqrt() == d {
            return Err(GroupError::InvalidSpec(format!("{d} is a perfect square")));
        }
        Ok(GroupSpec::Quadratic { d })
    }

    pub fn lex(members: Vec<GroupSpec>) -> Result<GroupSpec, GroupError> {
        if members.is_empty() {
            return Err(GroupError::InvalidSpec("empty lex product".into()));
        }
        for m in &members {
            match m {
                GroupSpec::Rational => {}
                GroupSpec::Quadratic { d } => {
                    GroupSpec::quadratic(*d)?;
                }
                GroupSpec::Lex { .. } => {
                    return Err(GroupError::InvalidSpec("lex members must be rank 1".into()))
                }
            }
        }
        Ok(GroupSpec::Lex { members })
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        match self {
            GroupSpec::Rational => Ok(()),
            GroupSpec::Quadratic { d } => GroupSpec::quadratic(*d).map(|_| ()),
            GroupSpec::Lex { members } => GroupSpec::lex(members.clone()).map(|_| ()),
        }
    }

    /// Number of rational coordinates.
    pub fn dim(&self) -> usize {
        match self {
            GroupSpec::Rational => 1,
            GroupSpec::Quadratic { .. } => 2,
            GroupSpec::Lex { members } => members.iter().map(|m| m.dim()).sum(),
        }
    }

    fn rank1_blocks(&self) -> Vec<(usize, Option<u64>)> {
        match self {
            GroupSpec::Rational => vec![(1, None)],
            GroupSpec::Quadratic { d } => vec![(2, Some(*d))],
            GroupSpec::Lex { members } => members.iter().flat_map(|m| m.rank1_blocks()).collect(),
        }
    }
}

/// Element of a value group (or its divisible hull), or ∞.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Finite {
        spec: Arc<GroupSpec>,
        coords: Vec<BigRational>,
    },
    Infinity,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Sign of `a + b√d` without leaving ℚ.
fn sign_quadratic(a: &BigRational, b: &BigRational, d: u64) -> Ordering {
    let sa = a.cmp(&BigRational::zero());
    let sb = b.cmp(&BigRational::zero());
    if sb == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    let a2 = a * a;
    let db2 = b * b * BigRational::from_integer(BigInt::from(d));
    if a2 > db2 {
        sa
    } else {
        sb
    }
}

fn sign_coords(spec: &GroupSpec, coords: &[BigRational]) -> Ordering {
    let mut off = 0;
    for (len, d) in spec.rank1_blocks() {
        let s = match d {
            None => coords[off].cmp(&BigRational::zero()),
            Some(d) => sign_quadratic(&coords[off], &coords[off + 1], d),
        };
        if s != Ordering::Equal {
            return s;
        }
        off += len;
    }
    Ordering::Equal
}

impl GroupElement {
    pub fn zero(spec: &Arc<GroupSpec>) -> GroupElement {
        GroupElement::Finite {
            spec: spec.clone(),
            coords: vec![BigRational::zero(); spec.dim()],
        }
    }

    pub fn from_coords(spec: &Arc<GroupSpec>, coords: Vec<BigRational>) -> GroupElement {
        assert_eq!(coords.len(), spec.dim(), "coordinate count mismatch");
        GroupElement::Finite {
            spec: spec.clone(),
            coords,
        }
    }

    /// The rational number `r` in the outermost rational slot.
    pub fn rational(spec: &Arc<GroupSpec>, r: BigRational) -> GroupElement {
        let mut coords = vec![BigRational::zero(); spec.dim()];
        coords[0] = r;
        GroupElement::Finite {
            spec: spec.clone(),
            coords,
        }
    }

    pub fn int(spec: &Arc<GroupSpec>, n: i64) -> GroupElement {
        GroupElement::rational(spec, BigRational::from_integer(n.into()))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, GroupElement::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn spec(&self) -> Option<&Arc<GroupSpec>> {
        match self {
            GroupElement::Finite { spec, .. } => Some(spec),
            GroupElement::Infinity => None,
        }
    }

    pub fn coords(&self) -> Option<&[BigRational]> {
        match self {
            GroupElement::Finite { coords, .. } => Some(coords),
            GroupElement::Infinity => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GroupElement::Finite { coords, .. } => coords.iter().all(|c| c.is_zero()),
            GroupElement::Infinity => false,
        }
    }

    pub fn signum(&self) -> Ordering {
        match self {
            GroupElement::Finite { spec, coords } => sign_coords(spec, coords),
            GroupElement::Infinity => Ordering::Greater,
        }
    }

    /// Exact comparison; errors if the operands come from different specs.
    pub fn compare(&self, other: &GroupElement) -> Result<Ordering, GroupError> {
        match (self, other) {
            (GroupElement::Infinity, GroupElement::Infinity) => Ok(Ordering::Equal),
            (GroupElement::Infinity, _) => Ok(Ordering::Greater),
            (_, GroupElement::Infinity) => Ok(Ordering::Less),
            (
                GroupElement::Finite { spec: s1, coords: c1 },
                GroupElement::Finite { spec: s2, coords: c2 },
            ) => {
                if s1 != s2 {
                    return Err(GroupError::MixedSpecs);
                }
                let diff: Vec<BigRational> = c1.iter().zip(c2).map(|(a, b)| a - b).collect();
                Ok(sign_coords(s1, &diff))
            }
        }
    }

    pub fn checked_add(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        match (self, other) {
            (GroupElement::Infinity, _) | (_, GroupElement::Infinity) => Ok(GroupElement::Infinity),
            (
                GroupElement::Finite { spec: s1, coords: c1 },
                GroupElement::Finite { spec: s2, coords: c2 },
            ) => {
                if s1 != s2 {
                    return Err(GroupError::MixedSpecs);
                }
                Ok(GroupElement::Finite {
                    spec: s1.clone(),
                    coords: c1.iter().zip(c2).map(|(a, b)| a + b).collect(),
                })
            }
        }
    }

    pub fn checked_sub(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        if other.is_infinite() {
            return Err(GroupError::Infinite);
        }
        self.checked_add(&other.neg_finite()?)
    }

    fn neg_finite(&self) -> Result<GroupElement, GroupError> {
        match self {
            GroupElement::Finite { spec, coords } => Ok(GroupElement::Finite {
                spec: spec.clone(),
                coords: coords.iter().map(|c| -c).collect(),
            }),
            GroupElement::Infinity => Err(GroupError::Infinite),
        }
    }

    /// Multiply by a rational. ∞ times a positive rational stays ∞.
    pub fn scale(&self, r: &BigRational) -> GroupElement {
        match self {
            GroupElement::Finite { spec, coords } => GroupElement::Finite {
                spec: spec.clone(),
                coords: coords.iter().map(|c| c * r).collect(),
            },
            GroupElement::Infinity => {
                assert!(r.is_positive(), "infinity scaled by non-positive rational");
                GroupElement::Infinity
            }
        }
    }

    pub fn scale_int(&self, n: i64) -> GroupElement {
        self.scale(&BigRational::from_integer(n.into()))
    }

    pub fn div_int(&self, n: i64) -> GroupElement {
        self.scale(&q(1, n))
    }

    /// Approximate real value of a rank-1 element; display and extrapolation only.
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            GroupElement::Finite { spec, coords } => match spec.as_ref() {
                GroupSpec::Rational => coords[0].to_f64(),
                GroupSpec::Quadratic { d } => {
                    Some(coords[0].to_f64()? + coords[1].to_f64()? * (*d as f64).sqrt())
                }
                GroupSpec::Lex { .. } => None,
            },
            GroupElement::Infinity => Some(f64::INFINITY),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            GroupElement::Infinity => json!("inf"),
            GroupElement::Finite { spec, coords } => element_json(spec, coords),
        }
    }

    pub fn from_json(spec: &Arc<GroupSpec>, v: &serde_json::Value) -> Result<GroupElement, GroupError> {
        if v.as_str() == Some("inf") {
            return Ok(GroupElement::Infinity);
        }
        let coords = coords_from_json(spec, v)?;
        Ok(GroupElement::from_coords(spec, coords))
    }

    /// Parse `"1 + 1/2*sqrt37"`, `"(91/4)√37 - 1"`, `"inf"`, or `"(0, 1)"` for lex specs.
    pub fn parse(spec: &Arc<GroupSpec>, s: &str) -> Result<GroupElement, GroupError> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(GroupElement::Infinity);
        }
        match spec.as_ref() {
            GroupSpec::Lex { members } => {
                let inner = t
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| GroupError::Parse(s.into()))?;
                let parts: Vec<&str> = inner.split(',').collect();
                if parts.len() != members.len() {
                    return Err(GroupError::Parse(s.into()));
                }
                let mut coords = Vec::new();
                for (p, m) in parts.iter().zip(members) {
                    let d = match m {
                        GroupSpec::Quadratic { d } => Some(*d),
                        _ => None,
                    };
                    coords.extend(parse_rank1(p, d).ok_or_else(|| GroupError::Parse(s.into()))?);
                }
                Ok(GroupElement::from_coords(spec, coords))
            }
            GroupSpec::Quadratic { d } => {
                let c = parse_rank1(t, Some(*d)).ok_or_else(|| GroupError::Parse(s.into()))?;
                Ok(GroupElement::from_coords(spec, c))
            }
            GroupSpec::Rational => {
                let c = parse_rank1(t, None).ok_or_else(|| GroupError::Parse(s.into()))?;
                Ok(GroupElement::from_coords(spec, c))
            }
        }
    }
}

fn element_json(spec: &GroupSpec, coords: &[BigRational]) -> serde_json::Value {
    use serde_json::json;
    match spec {
        GroupSpec::Rational => json!({ "rat": coords[0].to_string() }),
        GroupSpec::Quadratic { d } => json!({
            "quad": { "a": coords[0].to_string(), "b": coords[1].to_string(), "d": d }
        }),
        GroupSpec::Lex { members } => {
            let mut off = 0;
            let mut parts = Vec::new();
            for m in members {
                parts.push(element_json(m, &coords[off..off + m.dim()]));
                off += m.dim();
            }
            json!({ "lex": parts })
        }
    }
}

fn parse_rat(s: &str) -> Option<BigRational> {
    s.trim().parse::<BigRational>().ok()
}

fn coords_from_json(spec: &GroupSpec, v: &serde_json::Value) -> Result<Vec<BigRational>, GroupError> {
    let bad = || GroupError::Parse(v.to_string());
    match spec {
        GroupSpec::Rational => {
            let r = v.get("rat").and_then(|r| r.as_str()).and_then(parse_rat).ok_or_else(bad)?;
            Ok(vec![r])
        }
        GroupSpec::Quadratic { d } => {
            let qd = v.get("quad").ok_or_else(bad)?;
            if qd.get("d").and_then(|x| x.as_u64()) != Some(*d) {
                return Err(bad());
            }
            let a = qd.get("a").and_then(|r| r.as_str()).and_then(parse_rat).ok_or_else(bad)?;
            let b = qd.get("b").and_then(|r| r.as_str()).and_then(parse_rat).ok_or_else(bad)?;
            Ok(vec![a, b])
        }
        GroupSpec::Lex { members } => {
            let parts = v.get("lex").and_then(|l| l.as_array()).ok_or_else(bad)?;
            if parts.len() != members.len() {
                return Err(bad());
            }
            let mut out = Vec::new();
            for (p, m) in parts.iter().zip(members) {
                out.extend(coords_from_json(m, p)?);
            }
            Ok(out)
        }
    }
}

/// Rank-1 grammar: signed sum of terms `c`, `c*sqrtD`, `(c)√D`, `√D`.
fn parse_rank1(s: &str, d: Option<u64>) -> Option<Vec<BigRational>> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.replace('−', "-").replace('√', "sqrt");
    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    let bytes = s.as_bytes();
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    for (i, &ch) in bytes.iter().enumerate() {
        let c = ch as char;
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if (c == '+' || c == '-') && depth == 0 {
            if !cur.is_empty() {
                terms.push((neg, std::mem::take(&mut cur)));
            } else if i != 0 {
                return None;
            }
            neg = c == '-';
            continue;
        }
        cur.push(c);
    }
    if cur.is_empty() {
        return None;
    }
    terms.push((neg, cur));
    for (neg, t) in terms {
        let (coef, is_sqrt) = match t.find("sqrt") {
            Some(pos) => {
                let dd: u64 = t[pos + 4..].parse().ok()?;
                if Some(dd) != d {
                    return None;
                }
                let c = t[..pos].trim_end_matches('*');
                let c = c.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(c);
                let c = if c.is_empty() { BigRational::one() } else { parse_rat(c)? };
                (c, true)
            }
            None => {
                let c = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(&t);
                (parse_rat(c)?, false)
            }
        };
        let coef = if neg { -coef } else { coef };
        if is_sqrt {
            b += coef;
        } else {
            a += coef;
        }
    }
    Some(match d {
        Some(_) => vec![a, b],
        None => {
            if !b.is_zero() {
                return None;
            }
            vec![a]
        }
    })
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Panics on mixed specs; use [`GroupElement::compare`] for a checked comparison.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other).expect("comparison of elements from different group specs")
    }
}

impl std::ops::Add for &GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: &GroupElement) -> GroupElement {
        self.checked_add(rhs).expect("mixed group specs")
    }
}

impl std::ops::Sub for &GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: &GroupElement) -> GroupElement {
        self.checked_sub(rhs).expect("subtraction undefined")
    }
}

impl std::ops::Neg for &GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        self.neg_finite().expect("negation of infinity")
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_sqrt_term(b: &BigRational, d: u64) -> String {
    let abs = b.abs();
    if abs.is_one() {
        format!("√{d}")
    } else if abs.is_integer() {
        format!("{}√{d}", abs.numer())
    } else {
        format!("({})√{d}", fmt_rat(&abs))
    }
}

fn fmt_rank1(coords: &[BigRational], d: Option<u64>) -> String {
    let a = &coords[0];
    let b = match d {
        Some(_) if !coords[1].is_zero() => &coords[1],
        _ => return fmt_rat(a),
    };
    let d = d.unwrap();
    let bt = fmt_sqrt_term(b, d);
    if a.is_zero() {
        return if b.is_negative() { format!("-{bt}") } else { bt };
    }
    if a.is_negative() && b.is_positive() {
        return format!("{bt} - {}", fmt_rat(&-a));
    }
    let sign = if b.is_negative() { "-" } else { "+" };
    format!("{} {sign} {bt}", fmt_rat(a))
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Infinity => write!(f, "∞"),
            GroupElement::Finite { spec, coords } => match spec.as_ref() {
                GroupSpec::Rational => write!(f, "{}", fmt_rank1(coords, None)),
                GroupSpec::Quadratic { d } => write!(f, "{}", fmt_rank1(coords, Some(*d))),
                GroupSpec::Lex { members } => {
                    let mut off = 0;
                    let mut parts = Vec::new();
                    for m in members {
                        let d = match m {
                            GroupSpec::Quadratic { d } => Some(*d),
                            _ => None,
                        };
                        parts.push(fmt_rank1(&coords[off..off + m.dim()], d));
                        off += m.dim();
                    }
                    write!(f, "({})", parts.join(", "))
                }
            },
        }
    }
}

/// A finitely generated ℤ-submodule of ℚ^r, kept as an echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<BigRational>>,
}

fn lcm_denoms<'a>(it: impl Iterator<Item = &'a BigRational>) -> BigInt {
    it.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

impl Lattice {
    pub fn from_generators(dim: usize, gens: &[Vec<BigRational>]) -> Lattice {
        Lattice::from_generators_tracked(dim, gens).0
    }

    /// Also returns, for each basis vector, integer coefficients expressing it
    /// in terms of `gens`.
    pub fn from_generators_tracked(dim: usize, gens: &[Vec<BigRational>]) -> (Lattice, Vec<Vec<BigInt>>) {
        let den = lcm_denoms(gens.iter().flatten());
        let ng = gens.len();
        let mut rows: Vec<(Vec<BigInt>, Vec<BigInt>)> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let row = g.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
                let mut unit = vec![BigInt::zero(); ng];
                unit[i] = BigInt::one();
                (row, unit)
            })
            .filter(|(r, _): &(Vec<BigInt>, Vec<BigInt>)| r.iter().any(|c| !c.is_zero()))
            .collect();
        let mut r = 0;
        for col in 0..dim {
            if r == rows.len() {
                break;
            }
            loop {
                let mut best: Option<usize> = None;
                for i in r..rows.len() {
                    if !rows[i].0[col].is_zero()
                        && best.map_or(true, |b| rows[i].0[col].abs() < rows[b].0[col].abs())
                    {
                        best = Some(i);
                    }
                }
                let Some(b) = best else { break };
                rows.swap(r, b);
                let mut done = true;
                for i in r + 1..rows.len() {
                    if rows[i].0[col].is_zero() {
                        continue;
                    }
                    let qt = rows[i].0[col].div_floor(&rows[r].0[col]);
                    let (pr, pu) = rows[r].clone();
                    for (x, p) in rows[i].0.iter_mut().zip(&pr) {
                        *x -= &qt * p;
                    }
                    for (x, p) in rows[i].1.iter_mut().zip(&pu) {
                        *x -= &qt * p;
                    }
                    if !rows[i].0[col].is_zero() {
                        done = false;
                    }
                }
                if done {
                    if rows[r].0[col].is_negative() {
                        let (row, unit) = &mut rows[r];
                        for x in row.iter_mut().chain(unit.iter_mut()) {
                            *x = -x.clone();
                        }
                    }
                    r += 1;
                    break;
                }
            }
        }
        rows.truncate(r);
        let mut basis = Vec::new();
        let mut combos = Vec::new();
        for (row, unit) in rows {
            basis.push(row.into_iter().map(|x| BigRational::new(x, den.clone())).collect());
            combos.push(unit);
        }
        (Lattice { dim, basis }, combos)
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigRational>] {
        &self.basis
    }

    /// Rational coordinates of `v` in the basis, if `v` lies in the ℚ-span.
    pub fn coordinates(&self, v: &[BigRational]) -> Option<Vec<BigRational>> {
        let mut res: Vec<BigRational> = v.to_vec();
        let mut out = Vec::with_capacity(self.basis.len());
        for row in &self.basis {
            let p = row.iter().position(|c| !c.is_zero()).expect("zero basis row");
            let a = &res[p] / &row[p];
            for (x, c) in res.iter_mut().zip(row) {
                *x -= &a * c;
            }
            out.push(a);
        }
        if res.iter().all(|x| x.is_zero()) {
            Some(out)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        self.coordinates(v).is_some_and(|c| c.iter().all(|x| x.is_integer()))
    }

    /// `[self : sub]` when `sub ⊆ self` has full rank in `self`.
    pub fn index_of(&self, sub: &Lattice) -> Option<BigInt> {
        if sub.rank() != self.rank() {
            return None;
        }
        let mut m: Vec<Vec<BigRational>> = Vec::new();
        for row in &sub.basis {
            let c = self.coordinates(row)?;
            if !c.iter().all(|x| x.is_integer()) {
                return None;
            }
            m.push(c);
        }
        Some(det(m).abs().to_integer())
    }
}

fn det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            let pr = m[c].clone();
            for (x, y) in m[r].iter_mut().zip(&pr) {
                *x -= &f * y;
            }
        }
    }
    d
}

/// A base lattice G₀ together with the chain μ₁,…,μ_k and orders n₁,…,n_k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    spec: Arc<GroupSpec>,
    levels: Vec<Lattice>,
    mus: Vec<GroupElement>,
    orders: Vec<u64>,
}

impl Subgroup {
    pub fn new(spec: &Arc<GroupSpec>, base_gens: &[GroupElement]) -> Result<Subgroup, GroupError> {
        let mut gens = Vec::new();
        for g in base_gens {
            if g.spec() != Some(spec) {
                return Err(GroupError::MixedSpecs);
            }
            gens.push(g.coords().unwrap().to_vec());
        }
        Ok(Subgroup {
            spec: spec.clone(),
            levels: vec![Lattice::from_generators(spec.dim(), &gens)],
            mus: Vec::new(),
            orders: Vec::new(),
        })
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.mus.len()
    }

    pub fn mus(&self) -> &[GroupElement] {
        &self.mus
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn lattice(&self, level: usize) -> &Lattice {
        &self.levels[level]
    }

    pub fn top(&self) -> &Lattice {
        self.levels.last().unwrap()
    }

    /// The same data truncated to `G_level`.
    pub fn truncate(&self, level: usize) -> Subgroup {
        Subgroup {
            spec: self.spec.clone(),
            levels: self.levels[..=level].to_vec(),
            mus: self.mus[..level].to_vec(),
            orders: self.orders[..level].to_vec(),
        }
    }

    fn finite_coords<'a>(&self, g: &'a GroupElement) -> Result<&'a [BigRational], GroupError> {
        match g {
            GroupElement::Infinity => Err(GroupError::Infinite),
            GroupElement::Finite { spec, coords } => {
                if spec != &self.spec {
                    Err(GroupError::MixedSpecs)
                } else {
                    Ok(coords)
                }
            }
        }
    }

    pub fn contains(&self, g: &GroupElement) -> Result<bool, GroupError> {
        Ok(self.top().contains(self.finite_coords(g)?))
    }

    /// Least `n ≥ 1` with `n·s` in the subgroup.
    pub fn order_mod(&self, s: &GroupElement, bound: u64) -> Result<u64, GroupError> {
        let c = self.finite_coords(s)?;
        let no = || GroupError::NoFiniteOrder {
            value: s.to_string(),
            bound,
        };
        let coords = self.top().coordinates(c).ok_or_else(no)?;
        let n = lcm_denoms(coords.iter());
        let n = n.to_u64().filter(|n| *n <= bound).ok_or_else(no)?;
        Ok(n)
    }

    /// Append `μ`, recording its order over the current top group.
    pub fn push(&self, mu: &GroupElement, bound: u64) -> Result<Subgroup, GroupError> {
        let n = self.order_mod(mu, bound)?;
        let mut gens = self.top().basis().to_vec();
        gens.push(self.finite_coords(mu)?.to_vec());
        let mut out = self.clone();
        out.levels.push(Lattice::from_generators(self.spec.dim(), &gens));
        out.mus.push(mu.clone());
        out.orders.push(n);
        Ok(out)
    }

    /// `(m̄, b̄)`: `m̄` the largest divisor of `d` with `γ/m̄` in the group, `b̄ = d/m̄`.
    pub fn mbar(&self, d: u64, gamma: &GroupElement) -> Result<(u64, u64), GroupError> {
        if d == 0 {
            return Err(GroupError::DegenerateSegment);
        }
        for m in (1..=d).rev().filter(|m| d % m == 0) {
            if self.contains(&gamma.div_int(m as i64))? {
                return Ok((m, d / m));
            }
        }
        Err(GroupError::NotInGroup(gamma.to_string()))
    }

    /// `γ = γ₀ + Σ jᵢμᵢ` with `γ₀ ∈ G₀` and `0 ≤ jᵢ < nᵢ`.
    pub fn decompose(&self, gamma: &GroupElement) -> Result<(GroupElement, Vec<u64>), GroupError> {
        self.finite_coords(gamma)?;
        let mut rest = gamma.clone();
        let mut js = vec![0u64; self.mus.len()];
        for l in (0..self.mus.len()).rev() {
            let lower = &self.levels[l];
            let mut found = false;
            for j in 0..self.orders[l] {
                let cand = &rest - &self.mus[l].scale_int(j as i64);
                if lower.contains(cand.coords().unwrap()) {
                    rest = cand;
                    js[l] = j;
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(GroupError::NotInGroup(gamma.to_string()));
            }
        }
        if !self.levels[0].contains(rest.coords().unwrap()) {
            return Err(GroupError::NotInGroup(gamma.to_string()));
        }
        Ok((rest, js))
    }

    pub fn recompose(&self, gamma0: &GroupElement, js: &[u64]) -> GroupElement {
        js.iter()
            .zip(&self.mus)
            .fold(gamma0.clone(), |acc, (j, m)| &acc + &m.scale_int(*j as i64))
    }

    /// `[G_k : G_0]` computed from the lattices.
    pub fn index_over_base(&self) -> Option<BigInt> {
        self.top().index_of(&self.levels[0])
    }
}
