//! The approximant construction: expansion, polygon, segment factorization, next key.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::baseval::{BaseError, BaseValuation};
use crate::coeffield::{roots_in_k, FieldElement, Scalar, UniPoly};
use crate::keychain::{Chain, ChainError, Relation, ZPoly};
use crate::ordgroup::GroupElement;
use crate::polygon::{NewtonPolygon, Segment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("f must be monic of positive degree")]
    NotMonic,
    #[error("f has the root {0} in K and is reducible")]
    Reducible(String),
    #[error("step {level}: {what}; the extension is not unique, use branch policy enumerate or select")]
    NonUnique { level: usize, what: String },
    #[error("step {level}: selection {index} out of range ({available} available)")]
    SelectionOutOfRange {
        level: usize,
        index: usize,
        available: usize,
    },
    #[error("step {level}: the polygon has no principal segment")]
    NoPrincipalSegment { level: usize },
    #[error("step {level}: self-check failed: {what}")]
    SelfCheck { level: usize, what: String },
    #[error("f is declared integral but its z^{degree} coefficient has value {value}")]
    NotIntegral { degree: usize, value: String },
    #[error("generating-sequence depth {needed} needed but max_depth is {max}")]
    DepthLimit { needed: usize, max: usize },
    #[error(transparent)]
    Chain(#[from] ChainError),
}

impl EngineError {
    fn depth_needed(&self) -> Option<usize> {
        match self {
            EngineError::Chain(ChainError::Base(BaseError::DepthExceeded { needed, .. })) => Some(*needed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchPolicy {
    First,
    Enumerate,
    /// `[segment, root]` per step; missing entries default to a unique choice.
    Select(Vec<[usize; 2]>),
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    /// Maximum number of finite values μ_k to compute.
    pub max_iter: usize,
    pub value_threshold: Option<GroupElement>,
    pub branch: BranchPolicy,
    pub fast_path: bool,
    pub declared_unique: bool,
    /// f has coefficients in the valuation ring of V₀.
    pub declared_integral: bool,
    /// Consecutive steps with n = 1 before giving up.
    pub equal_degree_cap: usize,
    /// Largest generating-sequence depth the engine may materialize.
    pub max_depth: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_iter: 32,
            value_threshold: None,
            branch: BranchPolicy::First,
            fast_path: false,
            declared_unique: false,
            declared_integral: false,
            equal_degree_cap: 24,
            max_depth: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootChoice {
    pub root: Scalar,
    pub multiplicity: u32,
    pub next_phi: ZPoly,
    pub relation: Relation,
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub level: usize,
    pub phi: ZPoly,
    /// φ_k-digits of f, lowest first.
    pub digits: Vec<ZPoly>,
    pub polygon: NewtonPolygon,
    /// V_{k−1}(φ_k); none at the first step.
    pub current: Option<GroupElement>,
    pub principal: Vec<Segment>,
    pub segment_index: usize,
    pub segment: Segment,
    pub mu: GroupElement,
    pub n: u64,
    pub mbar: u64,
    pub bbar: u64,
    pub i0: usize,
    pub i1: usize,
    pub h: ZPoly,
    pub h_coeff: FieldElement,
    pub h_exps: Vec<u32>,
    pub gammas: Vec<Scalar>,
    pub residual: UniPoly,
    pub roots: Vec<RootChoice>,
    pub root_index: usize,
    pub next_phi: ZPoly,
    pub relation: Relation,
    pub fast_path: bool,
    /// f ∼ f_{i₁}·φ^{i₀}·Πψ_j^{a_j} in V_k.
    pub factorization_equiv: bool,
    /// V₀(c) of the relation defining the next key.
    pub c_value: GroupElement,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    TerminatedPhiEqualsF,
    DivergingLimit { threshold: GroupElement, value: GroupElement },
    BoundedInconclusive { estimate: Option<f64>, exact: Option<GroupElement> },
    Branched(Vec<AlgorithmTrace>),
    ResidueRootsNotInField { level: usize, residual: String },
    DepthExceeded { needed: usize, max: usize },
    MaxIterations { cap: usize },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::TerminatedPhiEqualsF => "terminated",
            Verdict::DivergingLimit { .. } => "diverging",
            Verdict::BoundedInconclusive { .. } => "bounded",
            Verdict::Branched(_) => "branched",
            Verdict::ResidueRootsNotInField { .. } => "residue-roots-not-in-field",
            Verdict::DepthExceeded { .. } => "depth-exceeded",
            Verdict::MaxIterations { .. } => "max-iterations",
        }
    }
}

/// Numerical invariants of a finished (branch of a) run.
#[derive(Debug, Clone, PartialEq)]
pub struct Invariants {
    pub deg_f: u64,
    /// Π n_i over the finite-value nodes.
    pub e: u64,
    /// `[G_k : G_0]` from the lattices, when finite.
    pub e_lattice: Option<BigInt>,
    pub residue_degree: u64,
    pub s_tot: BigRational,
    pub delta: Option<BigRational>,
    pub defect_suspected: bool,
    pub orders: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct AlgorithmTrace {
    pub f: ZPoly,
    pub chain: Chain,
    pub steps: Vec<StepRecord>,
    pub verdict: Verdict,
    /// `[segment, root]` choices leading to this trace.
    pub path: Vec<[usize; 2]>,
    pub depth: Option<usize>,
    pub invariants: Invariants,
}

impl AlgorithmTrace {
    pub fn mus(&self) -> Vec<GroupElement> {
        self.chain.nodes().iter().map(|n| n.mu.clone()).collect()
    }

    pub fn orders(&self) -> Vec<u64> {
        self.chain.nodes().iter().filter(|n| n.mu.is_finite()).map(|n| n.n).collect()
    }

    pub fn leaves(&self) -> Vec<&AlgorithmTrace> {
        match &self.verdict {
            Verdict::Branched(ch) => ch.iter().flat_map(|c| c.leaves()).collect(),
            _ => vec![self],
        }
    }
}

/// Default threshold `4·max V₀(coefficient)·deg f`.
pub fn default_threshold(base: &BaseValuation, f: &ZPoly) -> Result<GroupElement, EngineError> {
    let mut best = GroupElement::int(base.spec(), 1);
    for c in f.coeffs() {
        if c.is_zero() {
            continue;
        }
        let v = base.value(c).map_err(ChainError::from)?;
        if v > best {
            best = v;
        }
    }
    Ok(best.scale_int(4 * f.degree()))
}

/// Generic segment data shared by all roots of one segment.
struct SegmentStep {
    chain: Chain,
    mbar: u64,
    bbar: u64,
    i0: usize,
    i1: usize,
    h: ZPoly,
    h_coeff: FieldElement,
    h_exps: Vec<u32>,
    gammas: Vec<Scalar>,
    residual: UniPoly,
    roots: Vec<RootChoice>,
    equiv: bool,
}

enum SegmentOutcome {
    Ok(Box<SegmentStep>),
    NotSplit { residual: UniPoly },
}

fn segment_step(
    prev: &Chain,
    phi: &ZPoly,
    f: &ZPoly,
    digits: &[ZPoly],
    polygon: &NewtonPolygon,
    seg: &Segment,
    relation: Option<Relation>,
) -> Result<SegmentOutcome, EngineError> {
    let k = prev.len() + 1;
    let m = polygon.m;
    let (i0, i1) = seg.indices(m);
    let d = (i1 - i0) as u64;
    let gamma = &seg.hi.y - &seg.lo.y;
    let (mbar, bbar) = prev.groups().mbar(d, &gamma).map_err(ChainError::from)?;
    let chain = prev.augment(phi.clone(), seg.slope.clone(), relation)?;
    let n = chain.node(k).n;
    if n != bbar {
        return Err(EngineError::SelfCheck {
            level: k,
            what: format!("b̄ = {bbar} but the order of μ is {n}"),
        });
    }
    let delta = gamma.div_int(mbar as i64);
    let (h, h_coeff, h_exps) = chain.unit_of_value(k, &delta)?;
    let field = prev.base().field();
    let mut gammas = Vec::with_capacity(mbar as usize + 1);
    for tau in 0..=mbar {
        let i = i0 + (tau * bbar) as usize;
        let on = !digits[i].is_zero()
            && seg.contains(&crate::polygon::Point {
                x: m - i as i64,
                y: prev.value(&digits[i], k - 1)?,
            });
        if tau == mbar {
            gammas.push(Scalar::one(field));
        } else if on {
            let den = h.pow((mbar - tau) as u32).mul(&digits[i1]);
            gammas.push(chain.residue_ratio(k, &digits[i], &den)?);
        } else {
            gammas.push(Scalar::zero(field));
        }
    }
    let residual = UniPoly::new(field, gammas.clone());
    let split = roots_in_k(&residual);
    if !split.splits() {
        return Ok(SegmentOutcome::NotSplit { residual });
    }
    let total: u64 = split.roots.iter().map(|(_, a)| *a as u64).sum();
    if i0 as u64 + bbar * total != i1 as u64 {
        return Err(EngineError::SelfCheck {
            level: k,
            what: format!("degree count i₀ + b̄Σa = {} ≠ i₁ = {i1}", i0 as u64 + bbar * total),
        });
    }
    let top = phi.pow(bbar as u32);
    let mut roots = Vec::new();
    let mut g = digits[i1].mul(&phi.pow(i0 as u32));
    for (alpha, a) in &split.roots {
        let psi = top.sub(&h.scale(&FieldElement::from_scalar(field, f.nvars(), alpha.clone())));
        g = g.mul(&psi.pow(*a));
        let c = h_coeff.scale(alpha);
        roots.push(RootChoice {
            root: alpha.clone(),
            multiplicity: *a,
            next_phi: psi,
            relation: Relation { c, j: h_exps.clone() },
        });
    }
    let equiv = chain.equiv(k, f, &g)?;
    if !equiv {
        return Err(EngineError::SelfCheck {
            level: k,
            what: "f is not equivalent to its segment factorization".into(),
        });
    }
    Ok(SegmentOutcome::Ok(Box::new(SegmentStep {
        chain,
        mbar,
        bbar,
        i0,
        i1,
        h,
        h_coeff,
        h_exps,
        gammas,
        residual,
        roots,
        equiv,
    })))
}

/// Outcome of the c-recovery shortcut.
#[derive(Debug, Clone, PartialEq)]
pub enum FastPath {
    Recovered { c: FieldElement, j: Vec<u32>, next_phi: ZPoly },
    NotApplicable(String),
}

/// Recovers `c` from the coefficient `f_{m−b̄}` of the φ_level-expansion
/// of `f`, for a chain whose top node is `φ_level` with its value.
pub fn fast_path_recover_c(chain: &Chain, f: &ZPoly, level: usize) -> Result<FastPath, EngineError> {
    let na = |s: &str| Ok(FastPath::NotApplicable(s.to_string()));
    let field = chain.base().field();
    let p = field.characteristic();
    let deg = f.degree() as u64;
    if p != 0 && deg % p == 0 {
        return na("the characteristic divides deg f");
    }
    let phi = &chain.node(level).phi;
    let digits = f.digits(phi);
    let m = digits.len() - 1;
    if digits[m].as_constant().is_none_or(|c| !c.is_one()) {
        return na("top digit is not 1");
    }
    let prev = chain.truncate(level - 1);
    let mut vals = Vec::new();
    for d in &digits {
        vals.push(prev.value(d, level - 1)?);
    }
    let np = NewtonPolygon::from_values(&vals);
    let current = if level == 1 { None } else { Some(prev.value(phi, level - 1)?) };
    let principal = np.principal_part(current.as_ref());
    if principal.len() != 1 || np.segments.len() != 1 {
        return na("more than one segment");
    }
    let seg = &principal[0];
    if seg.indices(m as i64) != (0, m) {
        return na("the segment does not span the full width");
    }
    let bbar = chain.node(level).n as usize;
    if m % bbar != 0 {
        return na("b̄ does not divide the width");
    }
    let e = (m / bbar) as u64;
    if p != 0 && e % p == 0 {
        return na("the characteristic divides e");
    }
    let coef = &digits[m - bbar];
    if coef.is_zero() {
        return na("the coefficient f_{m−b̄} vanishes");
    }
    let on = seg.contains(&crate::polygon::Point {
        x: bbar as i64,
        y: vals[m - bbar].clone(),
    });
    if !on {
        return na("f_{m−b̄} is off the segment");
    }
    let t = match prev.initial_term(coef, level - 1) {
        Ok(t) => t,
        Err(ChainError::NotUnique(_)) => return na("the initial form of f_{m−b̄} is not a single term"),
        Err(err) => return Err(err.into()),
    };
    let inv_e = FieldElement::from_scalar(field, f.nvars(), Scalar::from_i64(field, e as i64).inv().map_err(ChainError::from)?);
    let c = t.coeff.mul(&inv_e).neg();
    let mut j = t.exps.clone();
    j.truncate(level - 1);
    let next_phi = phi.pow(bbar as u32).sub(&chain.phi_monomial(&j).scale(&c));
    Ok(FastPath::Recovered { c, j, next_phi })
}

struct Ctx<'a> {
    f: &'a ZPoly,
    opts: &'a EngineOptions,
    threshold: GroupElement,
}

fn choose(
    policy: &BranchPolicy,
    step_no: usize,
    level: usize,
    n_segments: usize,
    what: &str,
    slot: usize,
) -> Result<Vec<usize>, EngineError> {
    match policy {
        BranchPolicy::Enumerate => Ok((0..n_segments).collect()),
        BranchPolicy::First => {
            if n_segments > 1 {
                Err(EngineError::NonUnique {
                    level,
                    what: format!("{n_segments} {what}"),
                })
            } else {
                Ok(vec![0])
            }
        }
        BranchPolicy::Select(sel) => match sel.get(step_no) {
            Some(s) => {
                let i = s[slot];
                if i >= n_segments {
                    Err(EngineError::SelectionOutOfRange {
                        level,
                        index: i,
                        available: n_segments,
                    })
                } else {
                    Ok(vec![i])
                }
            }
            None if n_segments == 1 => Ok(vec![0]),
            None => Err(EngineError::NonUnique {
                level,
                what: format!("{n_segments} {what} and no selection given"),
            }),
        },
    }
}

fn leaf(ctx: &Ctx, chain: Chain, steps: Vec<StepRecord>, path: Vec<[usize; 2]>, verdict: Verdict) -> AlgorithmTrace {
    let mut t = AlgorithmTrace {
        f: ctx.f.clone(),
        invariants: invariants_of(&chain, ctx.f, &verdict, ctx.opts.declared_unique),
        depth: chain.base().depth(),
        chain,
        steps,
        verdict,
        path,
    };
    if let Verdict::BoundedInconclusive { .. } = t.verdict {
        t.verdict = bounded_estimate(&t.mus());
    }
    t
}

fn run_branch(
    ctx: &Ctx,
    prev: Chain,
    phi: ZPoly,
    steps: Vec<StepRecord>,
    path: Vec<[usize; 2]>,
    eq_run: usize,
) -> Result<AlgorithmTrace, EngineError> {
    let f = ctx.f;
    let k = prev.len() + 1;
    if &phi == f {
        let chain = prev.augment_infinite(phi, steps.last().map(|s| s.relation.clone()))?;
        return Ok(leaf(ctx, chain, steps, path, Verdict::TerminatedPhiEqualsF));
    }
    if steps.len() >= ctx.opts.max_iter {
        let v = Verdict::BoundedInconclusive {
            estimate: None,
            exact: None,
        };
        return Ok(leaf(ctx, prev, steps, path, v));
    }
    let (polygon, digits) = NewtonPolygon::build(&prev, k - 1, f, &phi)?;
    if digits[0].is_zero() {
        return Err(EngineError::Reducible(prev.fmt_poly(&phi)));
    }
    let current = if k == 1 { None } else { Some(prev.value(&phi, k - 1)?) };
    let principal = polygon.principal_part(current.as_ref());
    if principal.is_empty() {
        return Err(EngineError::NoPrincipalSegment { level: k });
    }
    let seg_choices = choose(&ctx.opts.branch, steps.len(), k, principal.len(), "principal segments", 0)?;
    let mut children = Vec::new();
    for si in seg_choices {
        let seg = &principal[si];
        let ss = match segment_step(&prev, &phi, f, &digits, &polygon, seg, steps.last().map(|s| s.relation.clone()))? {
            SegmentOutcome::Ok(ss) => ss,
            SegmentOutcome::NotSplit { residual } => {
                let mut p = path.clone();
                p.push([si, 0]);
                let v = Verdict::ResidueRootsNotInField {
                    level: k,
                    residual: residual.to_string(),
                };
                children.push(leaf(ctx, prev.clone(), steps.clone(), p, v));
                continue;
            }
        };
        let root_choices = choose(&ctx.opts.branch, steps.len(), k, ss.roots.len(), "distinct residual roots", 1)?;
        for ri in root_choices {
            let choice = &ss.roots[ri];
            let mut next_phi = choice.next_phi.clone();
            let mut relation = choice.relation.clone();
            let mut used_fast = false;
            if ctx.opts.fast_path && ss.roots.len() == 1 && principal.len() == 1 {
                if let FastPath::Recovered { c, j, next_phi: fp } = fast_path_recover_c(&ss.chain, f, k)? {
                    if ss.chain.equiv(k, &fp, &next_phi)? {
                        next_phi = fp;
                        relation = Relation { c, j };
                        used_fast = true;
                    }
                }
            }
            let c_value = prev.base().value(&relation.c).map_err(ChainError::from)?;
            let mu = seg.slope.clone();
            let rec = StepRecord {
                level: k,
                phi: phi.clone(),
                digits: digits.clone(),
                polygon: polygon.clone(),
                current: current.clone(),
                principal: principal.clone(),
                segment_index: si,
                segment: seg.clone(),
                mu: mu.clone(),
                n: ss.bbar,
                mbar: ss.mbar,
                bbar: ss.bbar,
                i0: ss.i0,
                i1: ss.i1,
                h: ss.h.clone(),
                h_coeff: ss.h_coeff.clone(),
                h_exps: ss.h_exps.clone(),
                gammas: ss.gammas.clone(),
                residual: ss.residual.clone(),
                roots: ss.roots.clone(),
                root_index: ri,
                next_phi: next_phi.clone(),
                relation: relation.clone(),
                fast_path: used_fast,
                factorization_equiv: ss.equiv,
                c_value,
            };
            let mut steps2 = steps.clone();
            steps2.push(rec);
            let mut path2 = path.clone();
            path2.push([si, ri]);
            let chain = ss.chain.clone();
            let t = if &next_phi == f {
                let chain = chain.augment_infinite(next_phi, Some(relation))?;
                leaf(ctx, chain, steps2, path2, Verdict::TerminatedPhiEqualsF)
            } else if mu > ctx.threshold {
                let v = Verdict::DivergingLimit {
                    threshold: ctx.threshold.clone(),
                    value: mu,
                };
                leaf(ctx, chain, steps2, path2, v)
            } else {
                let run = if ss.bbar == 1 { eq_run + 1 } else { 0 };
                if run > ctx.opts.equal_degree_cap {
                    let v = Verdict::MaxIterations {
                        cap: ctx.opts.equal_degree_cap,
                    };
                    leaf(ctx, chain, steps2, path2, v)
                } else {
                    run_branch(ctx, chain, next_phi, steps2, path2, run)?
                }
            };
            children.push(t);
        }
    }
    if children.len() == 1 {
        return Ok(children.pop().unwrap());
    }
    let v = Verdict::Branched(children);
    Ok(leaf(ctx, prev, steps, path, v))
}

/// Runs the construction, deepening a generating-sequence base on demand.
pub fn run(base: &BaseValuation, f: &ZPoly, opts: &EngineOptions) -> Result<AlgorithmTrace, EngineError> {
    if !f.is_monic() || f.degree() < 1 {
        return Err(EngineError::NotMonic);
    }
    if opts.declared_integral {
        check_integral(base, f)?;
    }
    reducibility_screen(base, f)?;
    let mut base = base.clone();
    loop {
        match run_once(&base, f, opts) {
            Err(e) => match e.depth_needed() {
                Some(needed) if needed <= opts.max_depth && Some(needed) > base.depth() => {
                    base = base.with_depth(needed).map_err(ChainError::from)?;
                }
                Some(needed) => {
                    let chain = Chain::new(Arc::new(base.clone()), 2 * f.degree() as u64);
                    let ctx = Ctx {
                        f,
                        opts,
                        threshold: GroupElement::Infinity,
                    };
                    let v = Verdict::DepthExceeded {
                        needed,
                        max: opts.max_depth,
                    };
                    return Ok(leaf(&ctx, chain, vec![], vec![], v));
                }
                None => return Err(e),
            },
            ok => return ok,
        }
    }
}

fn check_integral(base: &BaseValuation, f: &ZPoly) -> Result<(), EngineError> {
    for (i, c) in f.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let v = base.value(c).map_err(ChainError::from)?;
        if v.signum() == std::cmp::Ordering::Less {
            return Err(EngineError::NotIntegral {
                degree: i,
                value: v.to_string(),
            });
        }
    }
    Ok(())
}

fn run_once(base: &BaseValuation, f: &ZPoly, opts: &EngineOptions) -> Result<AlgorithmTrace, EngineError> {
    let threshold = match &opts.value_threshold {
        Some(t) => t.clone(),
        None => default_threshold(base, f)?,
    };
    let ctx = Ctx { f, opts, threshold };
    let chain = Chain::new(Arc::new(base.clone()), 2 * f.degree() as u64);
    if f.degree() == 1 {
        let chain = chain.augment_infinite(f.clone(), None)?;
        return Ok(leaf(&ctx, chain, vec![], vec![], Verdict::TerminatedPhiEqualsF));
    }
    let z = ZPoly::z(base.field(), base.nvars());
    run_branch(&ctx, chain, z, vec![], vec![], 0)
}

/// Rejects f with an obvious root among 0, ±1, ±2 and ±x_i.
fn reducibility_screen(base: &BaseValuation, f: &ZPoly) -> Result<(), EngineError> {
    if f.degree() < 2 {
        return Ok(());
    }
    let (k, n) = (base.field(), base.nvars());
    let mut cands: Vec<FieldElement> = [0, 1, -1, 2, -2].iter().map(|c| FieldElement::from_i64(k, n, *c)).collect();
    for i in 0..n {
        let x = FieldElement::var(k, n, i);
        cands.push(x.neg());
        cands.push(x);
    }
    for c in cands {
        let mut acc = FieldElement::zero(k, n);
        for a in f.coeffs().iter().rev() {
            acc = acc.mul(&c).add(a);
        }
        if acc.is_zero() {
            return Err(EngineError::Reducible(c.fmt_with(base.names())));
        }
    }
    Ok(())
}

/// Geometric extrapolation of the last three values.
fn bounded_estimate(mus: &[GroupElement]) -> Verdict {
    let fin: Vec<&GroupElement> = mus.iter().filter(|m| m.is_finite()).collect();
    let est = |v: &GroupElement| v.to_f64().filter(|x| x.is_finite());
    if fin.len() < 3 {
        return Verdict::BoundedInconclusive {
            estimate: fin.last().and_then(|m| est(m)),
            exact: None,
        };
    }
    let n = fin.len();
    let d1 = fin[n - 2] - fin[n - 3];
    let d2 = fin[n - 1] - fin[n - 2];
    let ratio = exact_ratio(&d2, &d1);
    if let Some(r) = ratio {
        if r.is_positive() && r < BigRational::from_integer(1.into()) {
            let one = BigRational::from_integer(1.into());
            let tail = d2.scale(&(&r / (&one - &r)));
            let sup = fin[n - 1] + &tail;
            return Verdict::BoundedInconclusive {
                estimate: est(&sup),
                exact: Some(sup),
            };
        }
    }
    let estimate = match (d1.to_f64(), d2.to_f64(), fin[n - 1].to_f64()) {
        (Some(a), Some(b), Some(last)) if a > 0.0 && b > 0.0 && b < a => Some(last + b * (b / a) / (1.0 - b / a)),
        (_, _, last) => last,
    };
    Verdict::BoundedInconclusive { estimate, exact: None }
}

/// `r` with `a = r·b`, when it exists.
fn exact_ratio(a: &GroupElement, b: &GroupElement) -> Option<BigRational> {
    let (ca, cb) = (a.coords()?, b.coords()?);
    let mut r: Option<BigRational> = None;
    for (x, y) in ca.iter().zip(cb) {
        if y.is_zero() {
            if !x.is_zero() {
                return None;
            }
            continue;
        }
        let q = x / y;
        match &r {
            Some(r0) if *r0 != q => return None,
            _ => r = Some(q),
        }
    }
    r
}

pub fn invariants_of(chain: &Chain, f: &ZPoly, verdict: &Verdict, declared_unique: bool) -> Invariants {
    let orders: Vec<u64> = chain.nodes().iter().filter(|n| n.mu.is_finite()).map(|n| n.n).collect();
    let e: u64 = orders.iter().product();
    let deg = f.degree() as u64;
    let s_tot = BigRational::new(BigInt::from(deg), BigInt::from(e));
    let terminated = matches!(verdict, Verdict::TerminatedPhiEqualsF);
    let bounded = matches!(verdict, Verdict::BoundedInconclusive { .. });
    let one = BigRational::from_integer(1.into());
    Invariants {
        deg_f: deg,
        e,
        e_lattice: chain.groups().index_over_base(),
        residue_degree: 1,
        delta: (terminated && declared_unique).then(|| s_tot.clone()),
        defect_suspected: bounded && s_tot > one,
        s_tot,
        orders,
    }
}

/// The verdict and invariants of a trace, recomputed from its data.
pub fn classify(trace: &AlgorithmTrace, declared_unique: bool) -> (Verdict, Invariants) {
    let inv = invariants_of(&trace.chain, &trace.f, &trace.verdict, declared_unique);
    let v = match &trace.verdict {
        Verdict::BoundedInconclusive { .. } => bounded_estimate(&trace.mus()),
        v => v.clone(),
    };
    (v, inv)
}
