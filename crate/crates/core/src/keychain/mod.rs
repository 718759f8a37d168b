//! Chains of key polynomials and the inductive valuations they define.

mod zpoly;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use zpoly::ZPoly;

use crate::baseval::{BaseError, BaseValuation};
use crate::coeffield::{roots_in_k, FieldElement, FieldError, Scalar, UniPoly};
use crate::ordgroup::{GroupElement, GroupError, Subgroup};

/// Which key-polynomial condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyCondition {
    Irreducible,
    Minimal,
    Monic,
    ValueIncrease,
    Degree,
    NotEquivalentToPrevious,
    Relation,
}

impl fmt::Display for KeyCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KeyCondition::Irreducible => "equivalence-irreducible",
            KeyCondition::Minimal => "minimal",
            KeyCondition::Monic => "monic of positive degree",
            KeyCondition::ValueIncrease => "value increase",
            KeyCondition::Degree => "degree growth",
            KeyCondition::NotEquivalentToPrevious => "not equivalent to the previous key polynomial",
            KeyCondition::Relation => "declared relation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("not a key polynomial at level {level}: condition '{cond}' fails ({detail})")]
    NotAKeyPolynomial {
        level: usize,
        cond: KeyCondition,
        detail: String,
    },
    #[error("value {mu} does not exceed V_{level}(φ) = {current}")]
    NonIncreasingValue {
        level: usize,
        mu: String,
        current: String,
    },
    #[error("initial form of {0} is not a single term")]
    NotUnique(String),
    #[error("level {0} is outside the chain")]
    LevelOutOfRange(usize),
    #[error("the chain is already terminated by a node of infinite value")]
    Terminated,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `φ_k = φ_{k−1}^{n_{k−1}} − c·Π_{l<k−1} φ_l^{j_l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub c: FieldElement,
    pub j: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationNode {
    pub phi: ZPoly,
    pub mu: GroupElement,
    /// Order of μ modulo the previous value group; 1 for the terminal node.
    pub n: u64,
    pub relation: Option<Relation>,
}

/// Terms `a·Π φ_l^{m_l}` of a full expansion, keyed by `(m_1,…,m_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiExpansion {
    pub terms: BTreeMap<Vec<u32>, FieldElement>,
}

/// A single attained minimum of a full expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct MinTerm {
    pub value: GroupElement,
    pub exps: Vec<u32>,
    pub coeff: FieldElement,
}

#[derive(Debug, Clone)]
pub struct Chain {
    base: Arc<BaseValuation>,
    nodes: Vec<ValuationNode>,
    groups: Subgroup,
    order_bound: u64,
}

impl Chain {
    /// The empty chain, i.e. V₀ itself.
    pub fn new(base: Arc<BaseValuation>, order_bound: u64) -> Chain {
        let groups = base.group().clone();
        Chain {
            base,
            nodes: Vec::new(),
            groups,
            order_bound,
        }
    }

    pub fn base(&self) -> &Arc<BaseValuation> {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[ValuationNode] {
        &self.nodes
    }

    /// 1-based.
    pub fn node(&self, k: usize) -> &ValuationNode {
        &self.nodes[k - 1]
    }

    pub fn groups(&self) -> &Subgroup {
        &self.groups
    }

    pub fn order_bound(&self) -> u64 {
        self.order_bound
    }

    pub fn is_terminated(&self) -> bool {
        self.nodes.last().is_some_and(|n| n.mu.is_infinite())
    }

    pub fn truncate(&self, level: usize) -> Chain {
        let finite = self.nodes[..level].iter().filter(|n| n.mu.is_finite()).count();
        Chain {
            base: self.base.clone(),
            nodes: self.nodes[..level].to_vec(),
            groups: self.groups.truncate(finite),
            order_bound: self.order_bound,
        }
    }

    fn zero(&self) -> ZPoly {
        ZPoly::zero(self.base.field(), self.base.nvars())
    }

    fn check_level(&self, level: usize) -> Result<(), ChainError> {
        if level > self.nodes.len() {
            Err(ChainError::LevelOutOfRange(level))
        } else {
            Ok(())
        }
    }

    /// Digits of `g` in base `φ_level`.
    pub fn expand_top(&self, g: &ZPoly, level: usize) -> Result<Vec<ZPoly>, ChainError> {
        self.check_level(level)?;
        if level == 0 {
            return Err(ChainError::LevelOutOfRange(0));
        }
        Ok(g.digits(&self.node(level).phi))
    }

    /// `Π_l φ_l^{j_l}` for `l = 1..=j.len()`.
    pub fn phi_monomial(&self, j: &[u32]) -> ZPoly {
        let mut acc = ZPoly::one(self.base.field(), self.base.nvars());
        for (l, e) in j.iter().enumerate() {
            if *e > 0 {
                acc = acc.mul(&self.nodes[l].phi.pow(*e));
            }
        }
        acc
    }

    pub fn phi_expand(&self, g: &ZPoly, level: usize) -> Result<PhiExpansion, ChainError> {
        self.check_level(level)?;
        let mut terms = BTreeMap::new();
        self.expand_into(g, level, &mut vec![0; level], &mut terms)?;
        Ok(PhiExpansion { terms })
    }

    fn expand_into(
        &self,
        g: &ZPoly,
        level: usize,
        prefix: &mut Vec<u32>,
        out: &mut BTreeMap<Vec<u32>, FieldElement>,
    ) -> Result<(), ChainError> {
        if g.is_zero() {
            return Ok(());
        }
        if level == 0 {
            let c = g
                .as_constant()
                .ok_or_else(|| ChainError::Unsupported("nonconstant remainder at level 0".into()))?;
            out.insert(prefix.clone(), c);
            return Ok(());
        }
        for (i, d) in self.expand_top(g, level)?.iter().enumerate() {
            prefix[level - 1] = i as u32;
            self.expand_into(d, level - 1, prefix, out)?;
        }
        prefix[level - 1] = 0;
        Ok(())
    }

    pub fn reconstruct(&self, e: &PhiExpansion) -> ZPoly {
        let mut acc = self.zero();
        for (j, c) in &e.terms {
            acc = acc.add(&self.phi_monomial(j).scale(c));
        }
        acc
    }

    fn mu_times(&self, level: usize, i: usize) -> GroupElement {
        if i == 0 {
            GroupElement::zero(self.base.spec())
        } else {
            self.node(level).mu.scale_int(i as i64)
        }
    }

    /// V_level(g).
    pub fn value(&self, g: &ZPoly, level: usize) -> Result<GroupElement, ChainError> {
        self.check_level(level)?;
        if g.is_zero() {
            return Ok(GroupElement::Infinity);
        }
        if level == 0 {
            let c = g
                .as_constant()
                .ok_or_else(|| ChainError::Unsupported("V₀ is only defined on K".into()))?;
            return Ok(self.base.value(&c)?);
        }
        let mut best = GroupElement::Infinity;
        for (i, d) in self.expand_top(g, level)?.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            let v = &self.value(d, level - 1)? + &self.mu_times(level, i);
            if v < best {
                best = v;
            }
        }
        Ok(best)
    }

    /// Value of `g` and the terms of its full expansion attaining it.
    pub fn min_terms(&self, g: &ZPoly, level: usize) -> Result<(GroupElement, Vec<MinTerm>), ChainError> {
        self.check_level(level)?;
        let mut best = GroupElement::Infinity;
        let mut out: Vec<MinTerm> = Vec::new();
        for (j, c) in self.phi_expand(g, level)?.terms {
            let mut v = self.base.value(&c)?;
            for (l, e) in j.iter().enumerate() {
                if *e > 0 {
                    v = &v + &self.mu_times(l + 1, *e as usize);
                }
            }
            match v.cmp(&best) {
                Ordering::Less => {
                    best = v.clone();
                    out = vec![MinTerm { value: v, exps: j, coeff: c }];
                }
                Ordering::Equal if v.is_finite() => out.push(MinTerm { value: v, exps: j, coeff: c }),
                _ => {}
            }
        }
        Ok((best, out))
    }

    /// The unique minimal term of `g`'s full expansion.
    pub fn initial_term(&self, g: &ZPoly, level: usize) -> Result<MinTerm, ChainError> {
        let (_, mut t) = self.min_terms(g, level)?;
        if t.len() != 1 {
            return Err(ChainError::NotUnique(self.fmt_poly(g)));
        }
        Ok(t.pop().unwrap())
    }

    /// Residue in k of `In(a)/In(b)` when both initial forms are single terms of equal shape.
    pub fn residue_ratio(&self, level: usize, a: &ZPoly, b: &ZPoly) -> Result<Scalar, ChainError> {
        let ta = self.initial_term(a, level)?;
        let tb = self.initial_term(b, level)?;
        if ta.exps != tb.exps || ta.value != tb.value {
            return Err(ChainError::Base(BaseError::NotAUnit(format!(
                "({}) / ({})",
                self.fmt_poly(a),
                self.fmt_poly(b)
            ))));
        }
        Ok(self.base.residue_ratio(&ta.coeff, &tb.coeff)?)
    }

    /// A polynomial `c·Π_{l<level} φ_l^{j_l}` of value `γ ∈ G_{level−1}`, together with `(c, j)`.
    pub fn unit_of_value(&self, level: usize, gamma: &GroupElement) -> Result<(ZPoly, FieldElement, Vec<u32>), ChainError> {
        let finite = self.nodes[..level - 1].iter().filter(|n| n.mu.is_finite()).count();
        let g = self.groups.truncate(finite);
        let (g0, js) = g.decompose(gamma)?;
        let c = self.base.element_of_value(&g0)?;
        let j: Vec<u32> = js.iter().map(|x| *x as u32).collect();
        Ok((self.phi_monomial(&j).scale(&c), c, j))
    }

    /// `(j_min, R_g)`: the φ-order of `In(g)` and its residual polynomial at `level`.
    pub fn residual(&self, level: usize, g: &ZPoly) -> Result<(u32, UniPoly), ChainError> {
        self.check_level(level)?;
        if level == 0 {
            return Err(ChainError::LevelOutOfRange(0));
        }
        let node = self.node(level);
        if node.mu.is_infinite() {
            return Err(ChainError::Unsupported("residual polynomial at a terminal node".into()));
        }
        if g.is_zero() {
            return Err(ChainError::Unsupported("residual polynomial of zero".into()));
        }
        let digits = self.expand_top(g, level)?;
        let mut vals = Vec::with_capacity(digits.len());
        for (i, d) in digits.iter().enumerate() {
            vals.push(&self.value(d, level - 1)? + &self.mu_times(level, i));
        }
        let vmin = vals.iter().min().unwrap().clone();
        let attained: Vec<usize> = (0..digits.len()).filter(|i| vals[*i] == vmin).collect();
        let jmin = attained[0];
        let e = node.n as usize;
        let (u, _, _) = self.unit_of_value(level, &node.mu.scale_int(e as i64))?;
        let field = self.base.field();
        let mut coeffs = vec![Scalar::zero(field); (attained.last().unwrap() - jmin) / e + 1];
        coeffs[0] = Scalar::one(field);
        for &i in &attained[1..] {
            if (i - jmin) % e != 0 {
                return Err(ChainError::Unsupported("residual exponent gap not a multiple of n".into()));
            }
            let t = (i - jmin) / e;
            coeffs[t] = self.residue_ratio(level, &digits[i].mul(&u.pow(t as u32)), &digits[jmin])?;
        }
        Ok((jmin as u32, UniPoly::new(field, coeffs)))
    }

    /// `g ∼ h` in V_level.
    pub fn equiv(&self, level: usize, g: &ZPoly, h: &ZPoly) -> Result<bool, ChainError> {
        let vg = self.value(g, level)?;
        let vh = self.value(h, level)?;
        if vg.is_infinite() && vh.is_infinite() {
            return Ok(true);
        }
        let vd = self.value(&g.sub(h), level)?;
        Ok(vd > vg.min(vh))
    }

    /// `In(h)` divides `In(g)` in the graded algebra of V_level.
    pub fn equiv_divides(&self, level: usize, h: &ZPoly, g: &ZPoly) -> Result<bool, ChainError> {
        if level == 0 {
            return Ok(h.degree() <= 0 && g.degree() <= 0 && !h.is_zero());
        }
        let (jh, rh) = self.residual(level, h)?;
        let (jg, rg) = self.residual(level, g)?;
        Ok(jh <= jg && rg.divrem(&rh).1.is_zero())
    }

    /// `V(g) = V(g_m φ^m)` with `g_m ∈ K` the top φ_level-digit.
    pub fn is_minimal(&self, level: usize, g: &ZPoly) -> Result<bool, ChainError> {
        if level == 0 {
            return Ok(g.degree() <= 1);
        }
        let digits = self.expand_top(g, level)?;
        let m = digits.len() - 1;
        let Some(top) = digits[m].as_constant() else {
            return Ok(false);
        };
        let v = self.value(g, level)?;
        let vt = &self.base.value(&top)? + &self.mu_times(level, m);
        Ok(v == vt)
    }

    fn fail(&self, cond: KeyCondition, detail: impl Into<String>) -> ChainError {
        ChainError::NotAKeyPolynomial {
            level: self.len(),
            cond,
            detail: detail.into(),
        }
    }

    /// Checks that `phi` is a key polynomial over the current top valuation.
    pub fn check_key(&self, phi: &ZPoly) -> Result<(), ChainError> {
        let k = self.len();
        if !phi.is_monic() || phi.degree() < 1 {
            return Err(self.fail(KeyCondition::Monic, self.fmt_poly(phi)));
        }
        if k == 0 {
            if phi.degree() != 1 {
                return Err(self.fail(KeyCondition::Degree, "the first key polynomial must be linear"));
            }
            return Ok(());
        }
        let prev = self.node(k);
        let (dp, dq) = (phi.degree(), prev.phi.degree());
        if dp < dq || dp % dq != 0 {
            return Err(self.fail(KeyCondition::Degree, format!("deg {dp} after deg {dq}")));
        }
        if !self.is_minimal(k, phi)? {
            return Err(self.fail(KeyCondition::Minimal, self.fmt_poly(phi)));
        }
        if self.equiv(k, phi, &prev.phi)? {
            return Err(self.fail(KeyCondition::NotEquivalentToPrevious, self.fmt_poly(phi)));
        }
        let (j, r) = self.residual(k, phi)?;
        let irreducible = match (j, r.degree()) {
            (1, 0) => true,
            (0, 1) => true,
            (0, 2) | (0, 3) => roots_in_k(&r).roots.is_empty(),
            (0, d) if d >= 4 => {
                if !roots_in_k(&r).roots.is_empty() {
                    false
                } else {
                    return Err(ChainError::Unsupported(format!(
                        "irreducibility of a degree {d} residual polynomial"
                    )));
                }
            }
            _ => false,
        };
        if !irreducible {
            return Err(self.fail(KeyCondition::Irreducible, format!("residual polynomial {r}, φ-order {j}")));
        }
        Ok(())
    }

    /// `[V_k; V(phi) = mu]`.
    pub fn augment(&self, phi: ZPoly, mu: GroupElement, relation: Option<Relation>) -> Result<Chain, ChainError> {
        if self.is_terminated() {
            return Err(ChainError::Terminated);
        }
        self.check_key(&phi)?;
        let k = self.len();
        if k > 0 && mu.is_finite() {
            let current = self.value(&phi, k)?;
            if mu <= current {
                return Err(ChainError::NonIncreasingValue {
                    level: k,
                    mu: mu.to_string(),
                    current: current.to_string(),
                });
            }
        }
        if let Some(rel) = &relation {
            if k == 0 || rel.j.len() + 1 != k {
                return Err(self.fail(KeyCondition::Relation, "exponent vector has the wrong length"));
            }
            let prev = self.node(k);
            let expect = prev.phi.pow(prev.n as u32).sub(&self.phi_monomial(&rel.j).scale(&rel.c));
            if expect != phi {
                return Err(self.fail(KeyCondition::Relation, "relation does not reproduce φ"));
            }
        }
        let (n, groups) = if mu.is_finite() {
            let n = self.groups.order_mod(&mu, self.order_bound)?;
            (n, self.groups.push(&mu, self.order_bound)?)
        } else {
            (1, self.groups.clone())
        };
        let mut nodes = self.nodes.clone();
        nodes.push(ValuationNode { phi, mu, n, relation });
        Ok(Chain {
            base: self.base.clone(),
            nodes,
            groups,
            order_bound: self.order_bound,
        })
    }

    /// Append `f` with value ∞, after checking `f ∼ φ_k`-shape conditions.
    pub fn augment_infinite(&self, f: ZPoly, relation: Option<Relation>) -> Result<Chain, ChainError> {
        self.augment(f, GroupElement::Infinity, relation)
    }

    pub fn fmt_poly(&self, g: &ZPoly) -> String {
        g.fmt_with(self.base.names(), "z")
    }
}
