#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;
use std::sync::Arc;

use keypoly_core::baseval::{BaseValuation, MonomialValuation};
use keypoly_core::cli::{Overrides, Problem, ProblemSpec};
use keypoly_core::coeffield::ResidueField;
use keypoly_core::engine::{run, AlgorithmTrace, EngineOptions, StepRecord};
use keypoly_core::keychain::ZPoly;
use keypoly_core::ordgroup::{GroupElement, GroupSpec};

pub const GOLDEN: [&str; 4] = ["ex46", "sec9_p2", "ex72", "ex52"];

pub fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs").join(format!("{name}.toml"))
}

pub fn problem(name: &str) -> Problem {
    ProblemSpec::load(&spec_path(name))
        .unwrap()
        .resolve(&Overrides::default())
        .unwrap()
}

pub fn golden(name: &str) -> (Problem, AlgorithmTrace) {
    let p = problem(name);
    let t = run(&p.base, &p.f, &p.options).unwrap();
    (p, t)
}

pub fn q37() -> Arc<GroupSpec> {
    Arc::new(GroupSpec::quadratic(37).unwrap())
}

pub fn g37(s: &str) -> GroupElement {
    GroupElement::parse(&q37(), s).unwrap()
}

pub fn rat(s: &str) -> GroupElement {
    GroupElement::parse(&Arc::new(GroupSpec::Rational), s).unwrap()
}

pub fn names(t: &AlgorithmTrace) -> Vec<String> {
    t.chain.base().names().to_vec()
}

pub fn zp(t: &AlgorithmTrace, s: &str) -> ZPoly {
    ZPoly::parse(s, t.chain.base().names(), "z", t.chain.base().field()).unwrap()
}

/// ℚ(x) with V₀(x) = 1.
pub fn x_adic() -> BaseValuation {
    let spec = Arc::new(GroupSpec::Rational);
    BaseValuation::Monomial(
        MonomialValuation::new(
            ResidueField::Rationals,
            vec!["x".into()],
            spec.clone(),
            vec![GroupElement::int(&spec, 1)],
        )
        .unwrap(),
    )
}

pub fn default_opts() -> EngineOptions {
    EngineOptions::default()
}

/// Every (leaf, step) pair of a possibly branched trace.
pub fn leaf_steps(t: &AlgorithmTrace) -> Vec<(&AlgorithmTrace, &StepRecord)> {
    t.leaves().into_iter().flat_map(|l| l.steps.iter().map(move |s| (l, s))).collect()
}

/// `f ∼ f_{i₁}·φ^{i₀}·Π ψ_j^{a_j}` in `V_k`, recomputed from the step data.
pub fn factorization_holds(leaf: &AlgorithmTrace, s: &StepRecord) -> bool {
    let k = s.level;
    let mut g = s.digits[s.i1].mul(&s.phi.pow(s.i0 as u32));
    for r in &s.roots {
        g = g.mul(&r.next_phi.pow(r.multiplicity));
    }
    leaf.chain.truncate(k).equiv(k, &leaf.f, &g).unwrap()
}

/// `V₀(c_k)` of every relation in a trace, in step order.
pub fn relation_values(t: &AlgorithmTrace) -> Vec<(String, usize, GroupElement)> {
    t.leaves()
        .into_iter()
        .flat_map(|l| {
            let path = format!("{:?}", l.path);
            l.steps.iter().map(move |s| {
                let v = l.chain.base().value(&s.relation.c).unwrap();
                (path.clone(), s.level, v)
            })
        })
        .collect()
}

/// Golden runs whose spec declares `f ∈ R_{V₀}[z]`.
pub fn integral_goldens() -> Vec<(String, AlgorithmTrace)> {
    GOLDEN
        .iter()
        .filter_map(|n| {
            let (p, t) = golden(n);
            p.options.declared_integral.then(|| (n.to_string(), t))
        })
        .collect()
}
