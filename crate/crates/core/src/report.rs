//! Graded presentations, invariants and serialized artifacts of a finished run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::baseval::BaseValuation;
use crate::coeffield::{FieldElement, ResidueField};
use crate::engine::{classify, AlgorithmTrace, StepRecord, Verdict};
use crate::keychain::{Chain, Relation, ZPoly};
use crate::ordgroup::{GroupElement, GroupSpec};

pub const SCHEMA: &str = "keypoly-trace/1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent invariants: {0}")]
    Inconsistent(String),
    #[error("malformed trace document: {0}")]
    Malformed(String),
    #[error("unknown output format {0:?}")]
    UnknownFormat(String),
}

/// Unicode subscript digits.
pub fn subscript(n: usize) -> String {
    n.to_string()
        .chars()
        .map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap()).unwrap())
        .collect()
}

fn phi_name(l: usize, zvar: &str) -> String {
    if l == 1 {
        zvar.to_string()
    } else {
        format!("φ{}", subscript(l))
    }
}

fn rat_text(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------- presentation

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// Level k of φ_k.
    pub level: usize,
    pub name: String,
    pub weight: GroupElement,
    /// n_k.
    pub order: u64,
    /// Order of the weight modulo the base value group.
    pub class_order: u64,
}

/// `φ̄_level^lhs_exp = c̄·Π φ̄_l^{j_l}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PresentationRelation {
    pub level: usize,
    pub lhs_exp: u64,
    pub coeff: FieldElement,
    pub coeff_value: GroupElement,
    /// `(l, j_l)` with j_l > 0.
    pub rhs: Vec<(usize, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedPresentation {
    pub generators: Vec<Generator>,
    pub relations: Vec<PresentationRelation>,
    pub partial: bool,
    pub reduced: bool,
}

impl PresentationRelation {
    pub fn lhs_weight(&self, gens: &[Generator]) -> Option<GroupElement> {
        let g = gens.iter().find(|g| g.level == self.level)?;
        Some(g.weight.scale_int(self.lhs_exp as i64))
    }

    /// Weight of the right side; needs the weights of every level it mentions.
    pub fn rhs_weight(&self, weights: &BTreeMap<usize, GroupElement>) -> Option<GroupElement> {
        let mut acc = self.coeff_value.clone();
        for (l, j) in &self.rhs {
            acc = acc.checked_add(&weights.get(l)?.scale_int(*j as i64)).ok()?;
        }
        Some(acc)
    }

    pub fn text(&self, names: &[String]) -> String {
        let mut s = format!("φ̄{}^{} = ", subscript(self.level), self.lhs_exp);
        let mut factors: Vec<String> = self.rhs.iter().map(|(l, j)| bar_power(*l, *j as u64)).collect();
        factors.push(format!("[{}]", self.coeff.fmt_with(names)));
        s.push_str(&factors.join("*"));
        s
    }
}

fn bar_power(l: usize, e: u64) -> String {
    if e == 1 {
        format!("φ̄{}", subscript(l))
    } else {
        format!("φ̄{}^{e}", subscript(l))
    }
}

/// The presentation of the graded algebra recorded by a trace; one generator per finite key.
pub fn presentation(trace: &AlgorithmTrace) -> GradedPresentation {
    let base = trace.chain.base();
    let e: u64 = trace.steps.iter().map(|s| s.n).product::<u64>().max(1);
    let mut generators = Vec::new();
    let mut relations = Vec::new();
    for s in &trace.steps {
        let class_order = base
            .group()
            .order_mod(&s.mu, e.max(2) * 2)
            .unwrap_or(0);
        generators.push(Generator {
            level: s.level,
            name: format!("φ̄{}", subscript(s.level)),
            weight: s.mu.clone(),
            order: s.n,
            class_order,
        });
        relations.push(PresentationRelation {
            level: s.level,
            lhs_exp: s.n,
            coeff: s.relation.c.clone(),
            coeff_value: s.c_value.clone(),
            rhs: s
                .relation
                .j
                .iter()
                .enumerate()
                .filter(|(_, j)| **j > 0)
                .map(|(i, j)| (i + 1, *j))
                .collect(),
        });
    }
    GradedPresentation {
        generators,
        relations,
        partial: !matches!(trace.verdict, Verdict::TerminatedPhiEqualsF),
        reduced: false,
    }
}

/// A monomial `c̄·Π φ̄^{e}` with exponents indexed like the presentation's generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GradedWord {
    pub coeff: FieldElement,
    pub exps: Vec<u64>,
}

impl GradedPresentation {
    /// Drops generators of order 1 together with their relations.
    pub fn reduced(&self) -> GradedPresentation {
        let keep: Vec<usize> = self.generators.iter().filter(|g| g.order > 1).map(|g| g.level).collect();
        GradedPresentation {
            generators: self.generators.iter().filter(|g| keep.contains(&g.level)).cloned().collect(),
            relations: self.relations.iter().filter(|r| keep.contains(&r.level)).cloned().collect(),
            partial: self.partial,
            reduced: true,
        }
    }

    pub fn weights(&self) -> BTreeMap<usize, GroupElement> {
        self.generators.iter().map(|g| (g.level, g.weight.clone())).collect()
    }

    fn index_of(&self, level: usize) -> Option<usize> {
        self.generators.iter().position(|g| g.level == level)
    }

    fn relation_for(&self, idx: usize) -> Option<&PresentationRelation> {
        let level = self.generators[idx].level;
        self.relations.iter().find(|r| r.level == level)
    }

    /// Every relation has equal weights on both sides.
    pub fn is_homogeneous(&self) -> bool {
        let w = self.weights();
        self.relations.iter().all(|r| match (r.lhs_weight(&self.generators), r.rhs_weight(&w)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        })
    }

    pub fn weight_of(&self, word: &GradedWord, base: &BaseValuation) -> Option<GroupElement> {
        let mut acc = base.value(&word.coeff).ok()?;
        for (g, e) in self.generators.iter().zip(&word.exps) {
            acc = acc.checked_add(&g.weight.scale_int(*e as i64)).ok()?;
        }
        Some(acc)
    }

    /// One application of the relation of generator `idx`, when its exponent allows it.
    pub fn rewrite_at(&self, word: &GradedWord, idx: usize) -> Option<GradedWord> {
        self.rewrite_times(word, idx, 1)
    }

    /// `q` applications of the relation of generator `idx` at once.
    pub fn rewrite_times(&self, word: &GradedWord, idx: usize, q: u64) -> Option<GradedWord> {
        let rel = self.relation_for(idx)?;
        if q == 0 || word.exps[idx] < q * rel.lhs_exp {
            return None;
        }
        let mut w = word.clone();
        w.exps[idx] -= q * rel.lhs_exp;
        w.coeff = w.coeff.mul(&rel.coeff.pow(q as i64).ok()?);
        for (l, j) in &rel.rhs {
            let t = self.index_of(*l)?;
            w.exps[t] += q * *j as u64;
        }
        Some(w)
    }

    /// How many times the relation of `idx` applies to `word`.
    pub fn applicable(&self, word: &GradedWord, idx: usize) -> u64 {
        self.relation_for(idx).map_or(0, |r| word.exps[idx] / r.lhs_exp)
    }

    /// Rewrites from the highest generator down until every exponent is below its order.
    pub fn normal_form(&self, word: &GradedWord) -> GradedWord {
        let mut w = word.clone();
        for idx in (0..self.generators.len()).rev() {
            let q = self.applicable(&w, idx);
            if q > 0 {
                w = self.rewrite_times(&w, idx, q).expect("relation applies");
            }
        }
        w
    }

    pub fn is_normal(&self, word: &GradedWord) -> bool {
        (0..self.generators.len()).all(|i| self.relation_for(i).is_none_or(|r| word.exps[i] < r.lhs_exp))
    }

    pub fn word_text(&self, word: &GradedWord, names: &[String]) -> String {
        let mut parts: Vec<String> = self
            .generators
            .iter()
            .zip(&word.exps)
            .filter(|(_, e)| **e > 0)
            .map(|(g, e)| bar_power(g.level, *e))
            .collect();
        parts.push(format!("[{}]", word.coeff.fmt_with(names)));
        parts.join("*")
    }
}

// ---------------------------------------------------------------- semigroup

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupModule {
    pub base_description: String,
    /// Values generating the base semigroup, when known.
    pub base_generators: Vec<GroupElement>,
    /// `(j, Σ j_i μ_i)` with 0 ≤ j_i < n_i.
    pub module_generators: Vec<(Vec<u64>, GroupElement)>,
}

pub fn semigroup(trace: &AlgorithmTrace) -> SemigroupModule {
    let base = trace.chain.base();
    let (base_description, base_generators) = match base.as_ref() {
        BaseValuation::Monomial(m) => (
            format!("monomial semigroup on {}", m.names().join(", ")),
            m.weights().to_vec(),
        ),
        BaseValuation::GenSeq(g) => (
            format!("generated by ν(P_0), …, ν(P_{}) (truncated)", g.depth()),
            g.values().to_vec(),
        ),
    };
    let zero = GroupElement::zero(base.spec());
    let mut gens: Vec<(Vec<u64>, GroupElement)> = vec![(vec![], zero)];
    for s in &trace.steps {
        let mut next = Vec::new();
        for (j, v) in &gens {
            for t in 0..s.n {
                let mut jj = j.clone();
                jj.push(t);
                let w = v.checked_add(&s.mu.scale_int(t as i64)).unwrap_or(GroupElement::Infinity);
                next.push((jj, w));
            }
        }
        gens = next;
    }
    SemigroupModule {
        base_description,
        base_generators,
        module_generators: gens,
    }
}

// ---------------------------------------------------------------- invariants

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub deg_f: u64,
    pub e: u64,
    pub e_lattice: Option<BigInt>,
    /// Always 1: residue fields stay k.
    pub residue_degree: u64,
    pub s_tot: BigRational,
    pub delta: Option<BigRational>,
    /// deg f / Π n_i over the computed prefix of a bounded run.
    pub delta_candidate: Option<BigRational>,
    pub defect_suspected: bool,
    /// `[G_{V_i} : G_{V_{i−1}}]` for i = 1, 2, ….
    pub group_chain: Vec<u64>,
}

impl InvariantReport {
    pub fn text(&self) -> String {
        let mut s = format!(
            "deg f = {}   e = {}   f = {}   s_tot = {}",
            self.deg_f,
            self.e,
            self.residue_degree,
            rat_text(&self.s_tot)
        );
        if let Some(d) = &self.delta {
            let _ = write!(s, "   δ = {}", rat_text(d));
        }
        if let Some(d) = &self.delta_candidate {
            let _ = write!(s, "   δ-candidate = {}", rat_text(d));
        }
        if self.defect_suspected {
            s.push_str("   (defect or limit valuation suspected)");
        }
        let chain: Vec<String> = self.group_chain.iter().map(|n| n.to_string()).collect();
        let _ = write!(s, "\ngroup chain indices: [{}]", chain.join(", "));
        s
    }
}

/// Recomputes and cross-checks the numerical invariants of one trace.
pub fn invariants(trace: &AlgorithmTrace, declared_unique: bool) -> Result<InvariantReport, ReportError> {
    let (verdict, inv) = classify(trace, declared_unique);
    let e: u64 = trace.steps.iter().map(|s| s.n).product();
    if e != inv.e {
        return Err(ReportError::Inconsistent(format!("Π n_i = {e} but the chain records {}", inv.e)));
    }
    if let Some(l) = &inv.e_lattice {
        if *l != BigInt::from(e) {
            return Err(ReportError::Inconsistent(format!("Π n_i = {e} but [G_k : G_0] = {l}")));
        }
    }
    if &BigRational::from_integer(inv.deg_f.into()) != &(&inv.s_tot * BigRational::from_integer(e.into())) {
        return Err(ReportError::Inconsistent("deg f ≠ e·s_tot".into()));
    }
    let bounded = matches!(verdict, Verdict::BoundedInconclusive { .. });
    Ok(InvariantReport {
        deg_f: inv.deg_f,
        e,
        e_lattice: inv.e_lattice.clone(),
        residue_degree: inv.residue_degree,
        delta_candidate: bounded.then(|| inv.s_tot.clone()),
        s_tot: inv.s_tot,
        delta: inv.delta,
        defect_suspected: inv.defect_suspected,
        group_chain: inv.orders,
    })
}

// ---------------------------------------------------------------- text

/// `φ_k = φ_{k−1}^n + …` from a relation; `phi` is printed when there is none.
pub fn key_text(chain: &Chain, level: usize, zvar: &str) -> String {
    let node = chain.node(level);
    let names = chain.base().names();
    match (&node.relation, level) {
        (Some(rel), l) if l >= 2 => relation_text(rel, l, chain.node(l - 1).n, names, zvar),
        _ => node.phi.fmt_with(names, zvar),
    }
}

fn relation_text(rel: &Relation, level: usize, n_prev: u64, names: &[String], zvar: &str) -> String {
    let mut s = phi_name(level - 1, zvar);
    if n_prev > 1 {
        let _ = write!(s, "^{n_prev}");
    }
    let factors: Vec<String> = rel
        .j
        .iter()
        .enumerate()
        .filter(|(_, j)| **j > 0)
        .map(|(i, j)| {
            if *j == 1 {
                phi_name(i + 1, zvar)
            } else {
                format!("{}^{j}", phi_name(i + 1, zvar))
            }
        })
        .collect();
    let t = rel.c.neg();
    if t.is_zero() {
        return s;
    }
    let field = t.field();
    let mono = t.as_poly().and_then(|p| p.as_monomial().map(|(e, c)| (e.clone(), c.clone())));
    let (neg, term) = match mono {
        Some((e, c)) => {
            let neg = c.is_negative();
            let c = if neg { -&c } else { c };
            let mut parts = Vec::new();
            if !c.is_one() {
                parts.push(c.to_string());
            }
            parts.extend(factors);
            let m = crate::coeffield::MultiPoly::monomial(field, e, crate::coeffield::Scalar::one(field)).fmt_with(names);
            if m != "1" || parts.is_empty() {
                parts.push(m);
            }
            (neg, parts.join("*"))
        }
        None if factors.is_empty() => (false, t.fmt_with(names)),
        None => (false, format!("{}*({})", factors.join("*"), t.fmt_with(names))),
    };
    if neg {
        format!("{s} - {term}")
    } else if let Some(rest) = term.strip_prefix('-') {
        format!("{s} - {rest}")
    } else {
        format!("{s} + {term}")
    }
}

/// One line of the step table.
pub fn step_line(chain: &Chain, level: usize, zvar: &str) -> String {
    let node = chain.node(level);
    let sub = subscript(level);
    let mut phi = key_text(chain, level, zvar);
    if node.mu.is_infinite() {
        phi.push_str(" = f");
        return format!("k={level}  φ{sub} = {phi}   μ{sub} = ∞");
    }
    format!("k={level}  φ{sub} = {phi}   μ{sub} = {}   n{sub} = {}", node.mu, node.n)
}

fn base_text(base: &BaseValuation) -> String {
    match base {
        BaseValuation::Monomial(m) => {
            let parts: Vec<String> = m.names().iter().zip(m.weights()).map(|(x, w)| format!("{x} ↦ {w}")).collect();
            format!("monomial, {}", parts.join(", "))
        }
        BaseValuation::GenSeq(g) => {
            let vals: Vec<String> = g.values().iter().map(|v| v.to_string()).collect();
            format!("generating sequence of depth {}, values ({})", g.depth(), vals.join(", "))
        }
    }
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::TerminatedPhiEqualsF => "terminated: the last key is f, its value is ∞".into(),
        Verdict::DivergingLimit { threshold, value } => {
            format!("diverging: μ = {value} exceeds the threshold {threshold}")
        }
        Verdict::BoundedInconclusive { estimate, exact } => {
            let mut s = "bounded: values stay below the threshold".to_string();
            if let Some(x) = exact {
                let _ = write!(s, "; extrapolated supremum {x}");
            }
            if let Some(e) = estimate {
                let _ = write!(s, " (≈ {e:.6})");
            }
            s
        }
        Verdict::Branched(ch) => format!("branched into {} traces", ch.len()),
        Verdict::ResidueRootsNotInField { level, residual } => {
            format!("step {level}: residual polynomial {residual} does not split over k")
        }
        Verdict::DepthExceeded { needed, max } => {
            format!("generating-sequence depth {needed} needed, limit {max}")
        }
        Verdict::MaxIterations { cap } => format!("{cap} consecutive equal-degree steps"),
    }
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub zvar: String,
    pub declared_unique: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            zvar: "z".into(),
            declared_unique: false,
        }
    }
}

pub fn text_report(trace: &AlgorithmTrace, opts: &ReportOptions) -> String {
    let base = trace.chain.base();
    let names = base.names();
    let mut out = String::new();
    let _ = writeln!(out, "keypoly trace ({SCHEMA})");
    let _ = writeln!(out, "field: {}", base.field());
    let _ = writeln!(out, "variables: {}", names.join(", "));
    let _ = writeln!(out, "base valuation: {}", base_text(base));
    let _ = writeln!(out, "f = {}", trace.f.fmt_with(names, &opts.zvar));
    if let Some(d) = trace.depth {
        let _ = writeln!(out, "generating-sequence depth used: {d}");
    }
    text_body(trace, opts, 0, &mut out);
    out
}

fn text_body(trace: &AlgorithmTrace, opts: &ReportOptions, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    let names = trace.chain.base().names();
    let _ = writeln!(out);
    for k in 1..=trace.chain.len() {
        let _ = writeln!(out, "{pad}{}", step_line(&trace.chain, k, &opts.zvar));
    }
    if !trace.steps.is_empty() {
        let _ = writeln!(out, "\n{pad}relations");
        for s in &trace.steps {
            let sub = subscript(s.level);
            let j: Vec<String> = s.relation.j.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                out,
                "{pad}  c{sub} = {}   V₀(c{sub}) = {}   j = ({})   segment {} root {}{}",
                s.relation.c.fmt_with(names),
                s.c_value,
                j.join(", "),
                s.segment_index,
                s.root_index,
                if s.fast_path { "   fast path" } else { "" }
            );
        }
    }
    let _ = writeln!(out, "\n{pad}verdict: {}", verdict_text(&trace.verdict));
    if let Verdict::Branched(children) = &trace.verdict {
        for c in children {
            let p = match c.path.get(trace.path.len()) {
                Some([s, r]) => format!("segment {s}, root {r}"),
                None => "?".into(),
            };
            let _ = writeln!(out, "\n{pad}branch at step {}: {p}", trace.steps.len() + 1);
            text_body(c, opts, indent + 2, out);
        }
        return;
    }
    match invariants(trace, opts.declared_unique) {
        Ok(inv) => {
            for line in inv.text().lines() {
                let _ = writeln!(out, "{pad}{line}");
            }
        }
        Err(e) => {
            let _ = writeln!(out, "{pad}invariants: {e}");
        }
    }
    let pres = presentation(trace);
    let red = pres.reduced();
    let _ = writeln!(
        out,
        "\n{pad}presentation{} ({} generators, reduced {})",
        if pres.partial { " (partial)" } else { "" },
        pres.generators.len(),
        red.generators.len()
    );
    for g in &pres.generators {
        let _ = writeln!(out, "{pad}  {}  weight {}  order {}", g.name, g.weight, g.order);
    }
    for r in &pres.relations {
        let _ = writeln!(out, "{pad}  {}", r.text(names));
    }
    let sg = semigroup(trace);
    let _ = writeln!(
        out,
        "{pad}semigroup: {} plus {} module generators",
        sg.base_description,
        sg.module_generators.len()
    );
}

// ---------------------------------------------------------------- json

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub schema: String,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub field: String,
    pub variables: Vec<String>,
    pub z: String,
    pub f: String,
    pub group: GroupSpec,
    pub base: Value,
    pub declared_unique: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub x: i64,
    pub y: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    pub lo: PointDoc,
    pub hi: PointDoc,
    pub slope: Value,
    pub slope_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub c: String,
    pub j: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootDoc {
    pub root: String,
    pub multiplicity: u32,
    pub next_phi: String,
    pub relation: RelationDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub level: usize,
    pub phi: String,
    pub digits: Vec<String>,
    pub points: Vec<PointDoc>,
    pub segments: Vec<SegmentDoc>,
    pub current: Option<Value>,
    pub principal: usize,
    pub segment_index: usize,
    pub mu: Value,
    pub mu_text: String,
    pub n: u64,
    pub mbar: u64,
    pub bbar: u64,
    pub i0: usize,
    pub i1: usize,
    pub h: String,
    pub h_coeff: String,
    pub h_exps: Vec<u32>,
    pub gammas: Vec<String>,
    pub residual: String,
    pub roots: Vec<RootDoc>,
    pub root_index: usize,
    pub next_phi: String,
    pub relation: RelationDoc,
    pub c_value: Value,
    pub fast_path: bool,
    pub factorization_equiv: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub level: usize,
    pub phi: String,
    pub key: String,
    pub mu: Value,
    pub mu_text: String,
    pub n: u64,
    pub relation: Option<RelationDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub level: usize,
    pub name: String,
    pub weight: Value,
    pub weight_text: String,
    pub order: u64,
    pub class_order: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresRelationDoc {
    pub level: usize,
    pub lhs_exp: u64,
    pub coeff: String,
    pub coeff_value: Value,
    pub rhs: Vec<(usize, u32)>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationDoc {
    pub partial: bool,
    pub generators: Vec<GeneratorDoc>,
    pub relations: Vec<PresRelationDoc>,
    pub reduced_generators: Vec<usize>,
    pub module_generators: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantsDoc {
    pub deg_f: u64,
    pub e: u64,
    pub e_lattice: Option<String>,
    pub residue_degree: u64,
    pub s_tot: String,
    pub delta: Option<String>,
    pub delta_candidate: Option<String>,
    pub defect_suspected: bool,
    pub group_chain: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceBody {
    pub path: Vec<[usize; 2]>,
    pub depth: Option<usize>,
    pub steps: Vec<StepDoc>,
    pub chain: Vec<NodeDoc>,
    pub verdict: Value,
    pub presentation: Option<PresentationDoc>,
    pub invariants: Option<InvariantsDoc>,
    pub branches: Vec<TraceBody>,
}

/// The serialized form of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub meta: Meta,
    pub problem: ProblemDoc,
    #[serde(flatten)]
    pub body: TraceBody,
}

fn rel_doc(r: &Relation, names: &[String]) -> RelationDoc {
    RelationDoc {
        c: r.c.fmt_with(names),
        j: r.j.clone(),
    }
}

fn step_doc(s: &StepRecord, names: &[String], z: &str) -> StepDoc {
    let pt = |p: &crate::polygon::Point| PointDoc {
        x: p.x,
        y: p.y.to_json(),
    };
    StepDoc {
        level: s.level,
        phi: s.phi.fmt_with(names, z),
        digits: s.digits.iter().map(|d| d.fmt_with(names, z)).collect(),
        points: s.polygon.points.iter().map(pt).collect(),
        segments: s
            .polygon
            .segments
            .iter()
            .map(|g| SegmentDoc {
                lo: pt(&g.lo),
                hi: pt(&g.hi),
                slope: g.slope.to_json(),
                slope_text: g.slope.to_string(),
            })
            .collect(),
        current: s.current.as_ref().map(|c| c.to_json()),
        principal: s.principal.len(),
        segment_index: s.segment_index,
        mu: s.mu.to_json(),
        mu_text: s.mu.to_string(),
        n: s.n,
        mbar: s.mbar,
        bbar: s.bbar,
        i0: s.i0,
        i1: s.i1,
        h: s.h.fmt_with(names, z),
        h_coeff: s.h_coeff.fmt_with(names),
        h_exps: s.h_exps.clone(),
        gammas: s.gammas.iter().map(|g| g.to_string()).collect(),
        residual: s.residual.to_string(),
        roots: s
            .roots
            .iter()
            .map(|r| RootDoc {
                root: r.root.to_string(),
                multiplicity: r.multiplicity,
                next_phi: r.next_phi.fmt_with(names, z),
                relation: rel_doc(&r.relation, names),
            })
            .collect(),
        root_index: s.root_index,
        next_phi: s.next_phi.fmt_with(names, z),
        relation: rel_doc(&s.relation, names),
        c_value: s.c_value.to_json(),
        fast_path: s.fast_path,
        factorization_equiv: s.factorization_equiv,
    }
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::TerminatedPhiEqualsF => json!({"kind": v.name()}),
        Verdict::DivergingLimit { threshold, value } => json!({
            "kind": v.name(),
            "threshold": threshold.to_json(),
            "value": value.to_json(),
        }),
        Verdict::BoundedInconclusive { estimate, exact } => json!({
            "kind": v.name(),
            "estimate": estimate.map(|e| format!("{e:.12}")),
            "exact": exact.as_ref().map(|x| x.to_json()),
            "exact_text": exact.as_ref().map(|x| x.to_string()),
        }),
        Verdict::Branched(ch) => json!({"kind": v.name(), "leaves": ch.iter().map(|c| c.leaves().len()).sum::<usize>()}),
        Verdict::ResidueRootsNotInField { level, residual } => json!({
            "kind": v.name(),
            "level": level,
            "residual": residual,
        }),
        Verdict::DepthExceeded { needed, max } => json!({"kind": v.name(), "needed": needed, "max": max}),
        Verdict::MaxIterations { cap } => json!({"kind": v.name(), "cap": cap}),
    }
}

fn base_json(base: &BaseValuation) -> Value {
    match base {
        BaseValuation::Monomial(m) => json!({
            "kind": "monomial",
            "weights": m.weights().iter().map(|w| w.to_json()).collect::<Vec<_>>(),
        }),
        BaseValuation::GenSeq(g) => json!({
            "kind": "genseq",
            "depth": g.depth(),
            "values": g.values().iter().map(|w| w.to_json()).collect::<Vec<_>>(),
        }),
    }
}

fn body(trace: &AlgorithmTrace, opts: &ReportOptions) -> TraceBody {
    let names = trace.chain.base().names();
    let z = &opts.zvar;
    let chain = (1..=trace.chain.len())
        .map(|k| {
            let n = trace.chain.node(k);
            NodeDoc {
                level: k,
                phi: n.phi.fmt_with(names, z),
                key: key_text(&trace.chain, k, z),
                mu: n.mu.to_json(),
                mu_text: n.mu.to_string(),
                n: n.n,
                relation: n.relation.as_ref().map(|r| rel_doc(r, names)),
            }
        })
        .collect();
    let (presentation, invariants_doc, branches) = match &trace.verdict {
        Verdict::Branched(ch) => (None, None, ch.iter().map(|c| body(c, opts)).collect()),
        _ => {
            let p = presentation(trace);
            let red = p.reduced();
            let pd = PresentationDoc {
                partial: p.partial,
                generators: p
                    .generators
                    .iter()
                    .map(|g| GeneratorDoc {
                        level: g.level,
                        name: g.name.clone(),
                        weight: g.weight.to_json(),
                        weight_text: g.weight.to_string(),
                        order: g.order,
                        class_order: g.class_order,
                    })
                    .collect(),
                relations: p
                    .relations
                    .iter()
                    .map(|r| PresRelationDoc {
                        level: r.level,
                        lhs_exp: r.lhs_exp,
                        coeff: r.coeff.fmt_with(names),
                        coeff_value: r.coeff_value.to_json(),
                        rhs: r.rhs.clone(),
                        text: r.text(names),
                    })
                    .collect(),
                reduced_generators: red.generators.iter().map(|g| g.level).collect(),
                module_generators: semigroup(trace).module_generators.len(),
            };
            let inv = invariants(trace, opts.declared_unique).ok().map(|i| InvariantsDoc {
                deg_f: i.deg_f,
                e: i.e,
                e_lattice: i.e_lattice.map(|x| x.to_string()),
                residue_degree: i.residue_degree,
                s_tot: rat_text(&i.s_tot),
                delta: i.delta.as_ref().map(rat_text),
                delta_candidate: i.delta_candidate.as_ref().map(rat_text),
                defect_suspected: i.defect_suspected,
                group_chain: i.group_chain,
            });
            (Some(pd), inv, vec![])
        }
    };
    TraceBody {
        path: trace.path.clone(),
        depth: trace.depth,
        steps: trace.steps.iter().map(|s| step_doc(s, names, z)).collect(),
        chain,
        verdict: verdict_json(&trace.verdict),
        presentation,
        invariants: invariants_doc,
        branches,
    }
}

impl TraceDoc {
    pub fn from_trace(trace: &AlgorithmTrace, opts: &ReportOptions) -> TraceDoc {
        let base = trace.chain.base();
        TraceDoc {
            meta: Meta {
                schema: SCHEMA.into(),
                generator: format!("keypoly {}", env!("CARGO_PKG_VERSION")),
            },
            problem: ProblemDoc {
                field: base.field().to_string(),
                variables: base.names().to_vec(),
                z: opts.zvar.clone(),
                f: trace.f.fmt_with(base.names(), &opts.zvar),
                group: base.spec().as_ref().clone(),
                base: base_json(base),
                declared_unique: opts.declared_unique,
            },
            body: body(trace, opts),
        }
    }

    pub fn field(&self) -> Result<ResidueField, ReportError> {
        match self.problem.field.as_str() {
            "Q" => Ok(ResidueField::Rationals),
            s => {
                let p = s
                    .strip_prefix("F_")
                    .and_then(|p| p.parse::<u64>().ok())
                    .ok_or_else(|| ReportError::Malformed(format!("field {s:?}")))?;
                ResidueField::prime(p).map_err(|e| ReportError::Malformed(e.to_string()))
            }
        }
    }

    /// Chain values parsed back into group elements.
    pub fn values(&self) -> Result<Vec<GroupElement>, ReportError> {
        let spec = Arc::new(self.problem.group.clone());
        self.body
            .chain
            .iter()
            .map(|n| GroupElement::from_json(&spec, &n.mu).map_err(|e| ReportError::Malformed(e.to_string())))
            .collect()
    }

    /// Chain keys parsed back into polynomials.
    pub fn keys(&self) -> Result<Vec<ZPoly>, ReportError> {
        let k = self.field()?;
        self.body
            .chain
            .iter()
            .map(|n| {
                ZPoly::parse(&n.phi, &self.problem.variables, &self.problem.z, k)
                    .map_err(|e| ReportError::Malformed(e.to_string()))
            })
            .collect()
    }
}

pub fn to_json(trace: &AlgorithmTrace, opts: &ReportOptions) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(&TraceDoc::from_trace(trace, opts))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(s: &str) -> Result<TraceDoc, ReportError> {
    Ok(serde_json::from_str(s)?)
}

// ---------------------------------------------------------------- files

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Format {
    Json,
    Text,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Format, ReportError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "text" | "txt" => Ok(Format::Text),
            "svg" => Ok(Format::Svg),
            other => Err(ReportError::UnknownFormat(other.into())),
        }
    }
}

/// Parses `json,text,svg`; the empty string gives no formats.
pub fn parse_formats(s: &str) -> Result<Vec<Format>, ReportError> {
    let mut v: Vec<Format> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.parse())
        .collect::<Result<_, _>>()?;
    v.sort();
    v.dedup();
    Ok(v)
}

/// Per-step SVG documents `(suffix, svg)` for each trace in the tree; branch suffixes name the choice.
pub fn svgs(trace: &AlgorithmTrace) -> Vec<(String, String)> {
    let mut out = Vec::new();
    collect_svgs(trace, "", 0, &mut out);
    out
}

fn collect_svgs(trace: &AlgorithmTrace, prefix: &str, from: usize, out: &mut Vec<(String, String)>) {
    for s in trace.steps.iter().skip(from) {
        let title = format!("N(V{}, φ{})  slope {}", s.level - 1, s.level, s.mu);
        out.push((format!("{prefix}_step{}", s.level), s.polygon.to_svg(&title, &s.principal)));
    }
    if let Verdict::Branched(ch) = &trace.verdict {
        let at = trace.path.len();
        for c in ch {
            let p = match c.path.get(at) {
                Some([s, r]) => format!("{prefix}_b{s}-{r}"),
                None => prefix.to_string(),
            };
            collect_svgs(c, &p, trace.steps.len(), out);
        }
    }
}

fn attr(tag: &str, name: &str) -> Option<u64> {
    let i = tag.find(&format!(" {name}=\""))? + name.len() + 3;
    tag[i..].split('"').next()?.parse().ok()
}

/// All step polygons of a run stacked as panels of one SVG document.
pub fn svg_bundle(trace: &AlgorithmTrace) -> String {
    let mut body = String::new();
    let (mut width, mut y) = (0u64, 0u64);
    for (suffix, doc) in svgs(trace) {
        let doc = doc.lines().filter(|l| !l.starts_with("<?xml")).collect::<Vec<_>>().join("\n");
        let Some(end) = doc.find('>') else { continue };
        let (open, rest) = doc.split_at(end + 1);
        let w = attr(open, "width").unwrap_or(640);
        let h = attr(open, "height").unwrap_or(480);
        let _ = writeln!(
            body,
            r#"<svg id="{}" x="0" y="{y}" width="{w}" height="{h}" viewBox="0 0 {w} {h}">{rest}"#,
            suffix.trim_start_matches('_')
        );
        width = width.max(w);
        y += h;
    }
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{y}\" viewBox=\"0 0 {w} {y}\">\n{body}</svg>\n",
        w = width.max(1),
        y = y.max(1)
    )
}

/// Writes the requested artifacts into `dir` as `<stem>.json`, `<stem>.txt` and `<stem>.svg`.
pub fn emit(
    trace: &AlgorithmTrace,
    opts: &ReportOptions,
    formats: &[Format],
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, ReportError> {
    let mut written = Vec::new();
    if formats.is_empty() {
        return Ok(written);
    }
    std::fs::create_dir_all(dir)?;
    for f in formats {
        match f {
            Format::Json => {
                let p = dir.join(format!("{stem}.json"));
                std::fs::write(&p, to_json(trace, opts)?)?;
                written.push(p);
            }
            Format::Text => {
                let p = dir.join(format!("{stem}.txt"));
                std::fs::write(&p, text_report(trace, opts))?;
                written.push(p);
            }
            Format::Svg => {
                let p = dir.join(format!("{stem}.svg"));
                std::fs::write(&p, svg_bundle(trace))?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseval::MonomialValuation;
    use crate::engine::{run, EngineOptions};

    fn ex52() -> AlgorithmTrace {
        let spec = Arc::new(GroupSpec::Rational);
        let k = ResidueField::Rationals;
        let names = vec!["x".to_string()];
        let base = BaseValuation::Monomial(
            MonomialValuation::new(k, names.clone(), spec.clone(), vec![GroupElement::int(&spec, 1)]).unwrap(),
        );
        let f = ZPoly::parse("z^2 + 2*x*z + x^2 - x^3", &names, "z", k).unwrap();
        let opts = EngineOptions {
            fast_path: true,
            declared_unique: true,
            ..Default::default()
        };
        run(&base, &f, &opts).unwrap()
    }

    #[test]
    fn quadratic_presentation() {
        let t = ex52();
        let p = presentation(&t);
        assert!(!p.partial);
        assert!(p.is_homogeneous());
        let r = p.reduced();
        assert_eq!(r.generators.len(), 1);
        assert_eq!(r.relations.len(), 1);
        assert_eq!(r.relations[0].lhs_exp, 2);
        assert!(r.relations[0].rhs.is_empty());
        assert_eq!(r.generators[0].class_order, 2);
    }

    #[test]
    fn normal_form_applies_relation() {
        let t = ex52();
        let p = presentation(&t).reduced();
        let k = ResidueField::Rationals;
        let one = FieldElement::one(k, 1);
        let c = p.relations[0].coeff.clone();
        let w = GradedWord { coeff: one.clone(), exps: vec![2] };
        assert_eq!(p.normal_form(&w), GradedWord { coeff: c.clone(), exps: vec![0] });
        let w4 = GradedWord { coeff: one, exps: vec![5] };
        let nf = p.normal_form(&w4);
        assert_eq!(nf, GradedWord { coeff: c.mul(&c), exps: vec![1] });
        assert_eq!(p.normal_form(&nf), nf);
        assert_eq!(p.weight_of(&w4, t.chain.base()), p.weight_of(&nf, t.chain.base()));
    }

    #[test]
    fn json_round_trip() {
        let t = ex52();
        let opts = ReportOptions::default();
        let s = to_json(&t, &opts).unwrap();
        let doc = parse_json(&s).unwrap();
        assert_eq!(doc, TraceDoc::from_trace(&t, &opts));
        assert_eq!(doc.values().unwrap(), t.mus());
        let keys: Vec<ZPoly> = t.chain.nodes().iter().map(|n| n.phi.clone()).collect();
        assert_eq!(doc.keys().unwrap(), keys);
        assert_eq!(to_json(&t, &opts).unwrap(), s);
    }

    #[test]
    fn relation_lines() {
        let t = ex52();
        let s = text_report(&t, &ReportOptions::default());
        assert!(s.contains("k=1  φ₁ = z   μ₁ = 1   n₁ = 1"), "{s}");
        assert!(s.contains("k=2  φ₂ = z + x   μ₂ = 3/2   n₂ = 2"), "{s}");
        assert!(s.contains("k=3  φ₃ = φ₂^2 - x^3 = f   μ₃ = ∞"), "{s}");
    }

    #[test]
    fn empty_format_list() {
        assert!(parse_formats("").unwrap().is_empty());
        let dir = std::env::temp_dir().join("keypoly-empty-format");
        let t = ex52();
        assert!(emit(&t, &ReportOptions::default(), &[], &dir, "x").unwrap().is_empty());
        assert!(parse_formats("json,bogus").is_err());
    }

    #[test]
    fn semigroup_count() {
        let t = ex52();
        assert_eq!(semigroup(&t).module_generators.len(), 2);
    }
}
