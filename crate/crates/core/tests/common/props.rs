//! Randomized suites shared by the property tests and the acceptance run.

use std::collections::HashSet;
use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use keypoly_core::baseval::BaseValuation;
use keypoly_core::coeffield::{FieldElement, Scalar};
use keypoly_core::engine::AlgorithmTrace;
use keypoly_core::keychain::{Chain, ZPoly};
use keypoly_core::ordgroup::{GroupElement, GroupSpec, Subgroup};
use keypoly_core::polygon::NewtonPolygon;
use keypoly_core::report::{presentation, GradedPresentation, GradedWord};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use super::{golden, GOLDEN};

pub const CASES: u32 = 500;

/// Runs `body` on `cases` inputs drawn from `strategy`.
pub fn check<S, F>(cases: u32, strategy: S, body: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(cases)
    });
    runner.run(&strategy, body).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- chains

pub struct Fixture {
    pub chain: Chain,
    lo: Vec<i64>,
    hi: Vec<i64>,
    pub zdeg: usize,
}

impl Fixture {
    pub fn top(&self) -> usize {
        self.chain.len()
    }

    fn coeff(&self, terms: &[(i64, Vec<u8>)]) -> FieldElement {
        let base = self.chain.base();
        let mut acc = FieldElement::zero(base.field(), base.nvars());
        for (c, raw) in terms {
            let exps: Vec<i64> = (0..base.nvars())
                .map(|i| self.lo[i] + (raw[i] as i64) % (self.hi[i] - self.lo[i] + 1))
                .collect();
            acc = acc.add(&FieldElement::monomial(base.field(), exps, Scalar::from_i64(base.field(), *c)));
        }
        acc
    }

    /// A polynomial of z-degree below `bound`.
    pub fn poly(&self, raw: &RawPoly, bound: usize) -> ZPoly {
        let base = self.chain.base();
        let mut coeffs = vec![FieldElement::zero(base.field(), base.nvars()); bound];
        for (z, terms) in raw {
            let i = *z as usize % bound;
            coeffs[i] = coeffs[i].add(&self.coeff(terms));
        }
        ZPoly::new(base.field(), base.nvars(), coeffs)
    }
}

pub type RawPoly = Vec<(u8, Vec<(i64, Vec<u8>)>)>;

pub fn raw_poly() -> impl Strategy<Value = RawPoly> {
    let coef = prop_oneof![-3i64..=-1, 1i64..=3];
    let term = (coef, prop::collection::vec(any::<u8>(), 2));
    prop::collection::vec((any::<u8>(), prop::collection::vec(term, 1..=2)), 1..=4)
}

fn finite_part(t: &AlgorithmTrace) -> Chain {
    let n = t.chain.nodes().iter().filter(|n| n.mu.is_finite()).count();
    t.chain.truncate(n)
}

fn fixtures() -> &'static [Fixture] {
    static F: OnceLock<Vec<Fixture>> = OnceLock::new();
    F.get_or_init(|| {
        let mut out = Vec::new();
        let (_, t) = golden("ex46");
        out.push(Fixture { chain: finite_part(&t), lo: vec![-2, -1], hi: vec![3, 2], zdeg: 5 });
        let (_, t) = golden("sec9_p2");
        out.push(Fixture { chain: finite_part(&t), lo: vec![0, 0], hi: vec![2, 3], zdeg: 3 });
        let (_, t) = golden("ex52");
        out.push(Fixture { chain: finite_part(&t), lo: vec![-1], hi: vec![4], zdeg: 4 });
        let (_, t) = golden("ex72");
        for l in t.leaves() {
            out.push(Fixture {
                chain: finite_part(l).truncate(finite_part(l).len().min(4)),
                lo: vec![-1],
                hi: vec![4],
                zdeg: 4,
            });
        }
        out
    })
}

pub fn fixture(i: usize) -> &'static Fixture {
    let f = fixtures();
    &f[i % f.len()]
}

pub fn expansion(cases: u32) -> Result<(), String> {
    check(cases, (0usize..16, 0usize..16, raw_poly()), |(fi, lr, raw)| {
        let fx = fixture(fi);
        let k = 1 + lr % fx.top();
        let g = fx.poly(&raw, fx.zdeg + 1);
        let e = fx.chain.phi_expand(&g, k).unwrap();
        prop_assert_eq!(fx.chain.reconstruct(&e), g.clone());
        let deg = |l: usize| fx.chain.node(l).phi.degree();
        for (m, c) in &e.terms {
            prop_assert!(!c.is_zero());
            prop_assert_eq!(m.len(), k);
            for l in 1..k {
                prop_assert!((m[l - 1] as i64) < deg(l + 1) / deg(l), "exponent {} of φ{}", m[l - 1], l);
            }
            prop_assert!(m[k - 1] as i64 * deg(k) <= g.degree().max(0));
        }
        Ok(())
    })
}

pub fn stability(cases: u32) -> Result<(), String> {
    check(cases, (0usize..16, 0usize..16, raw_poly()), |(fi, ir, raw)| {
        let fx = fixture(fi);
        let i = ir % fx.top();
        let bound = fx.chain.node(i + 1).phi.degree() as usize;
        let g = fx.poly(&raw, bound);
        let vi = fx.chain.value(&g, i).unwrap();
        for k in i..=fx.top() {
            prop_assert_eq!(fx.chain.value(&g, k).unwrap(), vi.clone(), "level {} vs {}", k, i);
        }
        Ok(())
    })
}

pub fn monotonicity(cases: u32) -> Result<(), String> {
    check(cases, (0usize..16, 0usize..16, raw_poly()), |(fi, kr, raw)| {
        let fx = fixture(fi);
        prop_assume!(fx.top() >= 2);
        let k = 2 + kr % (fx.top() - 1);
        let g = fx.poly(&raw, fx.zdeg + 1);
        prop_assume!(!g.is_zero());
        let lower = fx.chain.value(&g, k - 1).unwrap();
        let upper = fx.chain.value(&g, k).unwrap();
        prop_assert!(upper >= lower);
        let divides = fx.chain.equiv_divides(k - 1, &fx.chain.node(k).phi, &g).unwrap();
        prop_assert_eq!(upper > lower, divides);
        Ok(())
    })
}

pub fn multiplicativity(cases: u32) -> Result<(), String> {
    check(cases, (0usize..16, raw_poly(), raw_poly()), |(fi, a, b)| {
        let fx = fixture(fi);
        let g = fx.poly(&a, fx.zdeg + 1);
        let h = fx.poly(&b, 4);
        let gh = g.mul(&h);
        for k in 1..=fx.top() {
            let lhs = fx.chain.value(&gh, k).unwrap();
            let rhs = &fx.chain.value(&g, k).unwrap() + &fx.chain.value(&h, k).unwrap();
            prop_assert_eq!(lhs, rhs, "level {}", k);
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- groups

pub fn specs() -> Vec<Arc<GroupSpec>> {
    vec![
        Arc::new(GroupSpec::Rational),
        Arc::new(GroupSpec::quadratic(37).unwrap()),
        Arc::new(GroupSpec::lex(vec![GroupSpec::Rational, GroupSpec::quadratic(2).unwrap()]).unwrap()),
    ]
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn element(spec: &Arc<GroupSpec>, raw: &[(i64, i64)]) -> GroupElement {
    GroupElement::from_coords(spec, raw[..spec.dim()].iter().map(|(n, d)| q(*n, *d)).collect())
}

pub fn base_group(s: &Arc<GroupSpec>) -> Subgroup {
    let gens: Vec<GroupElement> = (0..s.dim())
        .map(|i| {
            let mut c = vec![BigRational::zero(); s.dim()];
            c[i] = q(1, 1);
            GroupElement::from_coords(s, c)
        })
        .collect();
    Subgroup::new(s, &gens).unwrap()
}

pub fn base_element(s: &Arc<GroupSpec>, raw: &[i64]) -> GroupElement {
    GroupElement::from_coords(s, raw[..s.dim()].iter().map(|n| q(*n, 1)).collect())
}

fn push_raw() -> impl Strategy<Value = Vec<Vec<(i64, i64)>>> {
    prop::collection::vec(prop::collection::vec((-9i64..=9, 1i64..=4), 3), 1..=3)
}

/// Pushes values while the index over the base stays at most 64.
fn tower(s: &Arc<GroupSpec>, pushes: &[Vec<(i64, i64)>]) -> Subgroup {
    let mut g = base_group(s);
    for p in pushes {
        let Ok(next) = g.push(&element(s, p), 64) else { continue };
        if next.orders().iter().product::<u64>() <= 64 {
            g = next;
        }
    }
    g
}

fn all_exponents(orders: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for n in orders {
        out = out
            .into_iter()
            .flat_map(|v| (0..*n).map(move |j| [v.clone(), vec![j]].concat()))
            .collect();
    }
    out
}

pub fn decompose(cases: u32) -> Result<(), String> {
    let strategy = (
        0usize..3,
        push_raw(),
        prop::collection::vec(-20i64..=20, 3),
        prop::collection::vec(any::<u64>(), 3),
    );
    check(cases, strategy, |(si, pushes, base, seeds)| {
        let s = &specs()[si];
        let g = tower(s, &pushes);
        let js: Vec<u64> = g.orders().iter().zip(&seeds).map(|(n, r)| r % n).collect();
        let g0 = base_element(s, &base);
        let gamma = g.recompose(&g0, &js);
        prop_assert_eq!(g.decompose(&gamma).unwrap(), (g0.clone(), js.clone()));
        let base_only = g.truncate(0);
        let hits: Vec<Vec<u64>> = all_exponents(g.orders())
            .into_iter()
            .filter(|j| base_only.contains(&(&gamma - &g.recompose(&GroupElement::zero(s), j))).unwrap())
            .collect();
        prop_assert_eq!(hits, vec![js]);
        Ok(())
    })
}

// ---------------------------------------------------------------- polygons

fn half(n: i64) -> BigRational {
    BigRational::new(n.into(), 2.into())
}

fn raw_values() -> impl Strategy<Value = Vec<Option<(i64, i64)>>> {
    prop::collection::vec(prop::option::weighted(0.8, (-20i64..=20, -6i64..=6)), 1..=8)
}

fn to_values(raw: &[Option<(i64, i64)>]) -> Vec<GroupElement> {
    let s = super::q37();
    raw.iter()
        .map(|v| match v {
            Some((a, b)) => GroupElement::from_coords(&s, vec![half(*a), half(*b)]),
            None => GroupElement::Infinity,
        })
        .collect()
}

/// Sign of `(r − p)` against the line through `p`, `q`, scaled to stay in the group.
fn side(p: &(i64, GroupElement), q: &(i64, GroupElement), r: &(i64, GroupElement)) -> std::cmp::Ordering {
    let lhs = (&r.1 - &p.1).scale_int(q.0 - p.0);
    let rhs = (&q.1 - &p.1).scale_int(r.0 - p.0);
    lhs.cmp(&rhs)
}

/// Edges of the lower hull found by testing every pair against every point.
fn brute_hull(vals: &[GroupElement]) -> Vec<(i64, i64, GroupElement)> {
    let m = vals.len() as i64 - 1;
    let pts: Vec<(i64, GroupElement)> = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, v)| (m - i as i64, v.clone()))
        .collect();
    let mut edges = Vec::new();
    for p in &pts {
        for q in &pts {
            if p.0 >= q.0 {
                continue;
            }
            let supporting = pts.iter().all(|r| side(p, q, r) != std::cmp::Ordering::Less);
            let maximal = pts
                .iter()
                .all(|r| side(p, q, r) != std::cmp::Ordering::Equal || (r.0 >= p.0 && r.0 <= q.0));
            if supporting && maximal {
                edges.push((p.0, q.0, (&q.1 - &p.1).div_int(q.0 - p.0)));
            }
        }
    }
    edges.sort_by_key(|e| e.0);
    edges
}

pub fn hull(cases: u32) -> Result<(), String> {
    check(cases, raw_values(), |raw| {
        let vals = to_values(&raw);
        let np = NewtonPolygon::from_values(&vals);
        let got: Vec<(i64, i64, GroupElement)> =
            np.segments.iter().map(|s| (s.lo.x, s.hi.x, s.slope.clone())).collect();
        prop_assert_eq!(got, brute_hull(&vals));
        prop_assert!(np.is_lower_boundary());
        for w in np.segments.windows(2) {
            prop_assert!(w[0].slope < w[1].slope);
            prop_assert_eq!(&w[0].hi, &w[1].lo);
        }
        for s in &np.segments {
            prop_assert!(np.points.contains(&s.lo) && np.points.contains(&s.hi));
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- graded words

pub fn presentations() -> &'static [(GradedPresentation, Arc<BaseValuation>)] {
    static P: OnceLock<Vec<(GradedPresentation, Arc<BaseValuation>)>> = OnceLock::new();
    P.get_or_init(|| {
        let mut out = Vec::new();
        for name in GOLDEN {
            let (_, t) = golden(name);
            for l in t.leaves() {
                let p = presentation(l);
                out.push((p.reduced(), l.chain.base().clone()));
                out.push((p, l.chain.base().clone()));
            }
        }
        out.retain(|(p, _)| !p.generators.is_empty());
        out
    })
}

/// Every normal form reachable from `w` by single rewrites; `None` past `budget` words.
fn reachable_normal_forms(
    p: &GradedPresentation,
    base: &BaseValuation,
    w: &GradedWord,
    weight: &Option<GroupElement>,
    seen: &mut HashSet<GradedWord>,
    out: &mut HashSet<GradedWord>,
    budget: usize,
) -> Result<Option<()>, TestCaseError> {
    if seen.len() > budget {
        return Ok(None);
    }
    if !seen.insert(w.clone()) {
        return Ok(Some(()));
    }
    let mut stuck = true;
    for idx in 0..p.generators.len() {
        if let Some(next) = p.rewrite_at(w, idx) {
            stuck = false;
            if reachable_normal_forms(p, base, &next, weight, seen, out, budget)?.is_none() {
                return Ok(None);
            }
        }
    }
    if stuck {
        prop_assert!(p.is_normal(w));
        prop_assert_eq!(&p.weight_of(w, base), weight);
        out.insert(w.clone());
    }
    Ok(Some(()))
}

/// Rewrites in an order driven by `seeds` until no relation applies.
fn random_rewrite(
    p: &GradedPresentation,
    base: &BaseValuation,
    w: &GradedWord,
    seeds: &[u64],
) -> Result<GradedWord, TestCaseError> {
    let weight = p.weight_of(w, base);
    let mut w = w.clone();
    for step in 0.. {
        let open: Vec<usize> = (0..p.generators.len()).filter(|&i| p.applicable(&w, i) > 0).collect();
        if open.is_empty() {
            prop_assert_eq!(p.weight_of(&w, base), weight);
            return Ok(w);
        }
        prop_assert!(step < 100_000, "rewriting does not terminate");
        let r = seeds[step % seeds.len()].rotate_left(step as u32 % 64);
        let idx = open[(r % open.len() as u64) as usize];
        let q = 1 + (r >> 32) % p.applicable(&w, idx);
        w = p.rewrite_times(&w, idx, q).unwrap();
    }
    unreachable!()
}

pub fn confluence(cases: u32) -> Result<(), String> {
    let strategy = (
        0usize..64,
        1i64..=5,
        prop::collection::vec(-2i64..=3, 2),
        prop::collection::vec((0usize..64, 1u64..=4), 1..=5),
        prop::collection::vec(prop::collection::vec(any::<u64>(), 1..=8), 4),
    );
    check(cases, strategy, |(pi, c, ce, support, orders)| {
        let all = presentations();
        let (p, base) = &all[pi % all.len()];
        let coeff = FieldElement::monomial(base.field(), ce[..base.nvars()].to_vec(), Scalar::from_i64(base.field(), c));
        prop_assume!(!coeff.is_zero());
        let mut exps = vec![0u64; p.generators.len()];
        for (i, e) in support {
            exps[i % p.generators.len()] = e;
        }
        let w = GradedWord { coeff, exps };
        let nf = p.normal_form(&w);
        prop_assert!(p.is_normal(&nf));
        prop_assert_eq!(p.normal_form(&nf), nf.clone());
        let weight = p.weight_of(&w, base);
        prop_assert_eq!(p.weight_of(&nf, base), weight.clone());
        let mut seen = HashSet::new();
        let mut out = HashSet::new();
        if reachable_normal_forms(p, base, &w, &weight, &mut seen, &mut out, 256)?.is_some() {
            prop_assert_eq!(out, HashSet::from([nf.clone()]));
        }
        for seeds in &orders {
            prop_assert_eq!(random_rewrite(p, base, &w, seeds)?, nf.clone());
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- golden runs

/// Steps of golden runs where `f ∼ G_{k,s}` fails.
pub fn factorization_failures() -> Vec<String> {
    let mut bad = Vec::new();
    for name in GOLDEN {
        let (_, t) = golden(name);
        for (leaf, s) in super::leaf_steps(&t) {
            if !(super::factorization_holds(leaf, s) && s.factorization_equiv) {
                bad.push(format!("{name} {:?} step {}", leaf.path, s.level));
            }
        }
    }
    bad
}

/// Relations of integral golden runs with `V₀(c) ≤ 0`.
pub fn positivity_failures() -> Vec<String> {
    let mut bad = Vec::new();
    for (name, t) in super::integral_goldens() {
        for (path, k, v) in super::relation_values(&t) {
            if v.signum() != std::cmp::Ordering::Greater {
                bad.push(format!("{name} {path} step {k}: V₀(c) = {v}"));
            }
        }
    }
    bad
}
