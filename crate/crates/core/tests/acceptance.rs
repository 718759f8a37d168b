mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::props::{self, CASES};
use common::*;
use keypoly_core::engine::Verdict;
use keypoly_core::keychain::ZPoly;
use keypoly_core::ordgroup::GroupElement;
use keypoly_core::report::{presentation, to_json, parse_json, ReportOptions, TraceBody};
use num_bigint::BigInt;
use num_rational::BigRational;

type Outcome = Result<(), String>;

fn ensure(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    f()?;
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn ex46() -> Outcome {
    let (_, t) = golden("ex46");
    let keys = [
        "z",
        "z^2 + x1^2*x2",
        "z^2 + x1^2*x2 + x1^-1*x2^15*z",
        "(z^2 + x1^2*x2 + x1^-1*x2^15*z)^2 + x1^-3*x2^45*z",
        "(z^2 + x1^2*x2 + x1^-1*x2^15*z)^2 + x1^-3*x2^45*z + x1^-2*x2^30*(z^2 + x1^2*x2 + x1^-1*x2^15*z)",
    ];
    let mut expected: Vec<ZPoly> = keys.iter().map(|s| zp(&t, s)).collect();
    expected.push(expected[4].add(&zp(&t, "x1^317*z")));
    let got: Vec<ZPoly> = t.chain.nodes().iter().map(|n| n.phi.clone()).collect();
    ensure(got == expected, "key polynomials differ")?;
    ensure(*expected.last().unwrap() == t.f, "last key is not f")?;
    let mus = vec![
        g37("1 + 1/2*sqrt37"),
        g37("31/2*sqrt37"),
        g37("91/4*sqrt37 - 1"),
        g37("-3 + 131/4*sqrt37"),
        g37("318 + 1/2*sqrt37"),
        GroupElement::Infinity,
    ];
    let got = t.mus();
    for (k, (a, b)) in got.iter().zip(&mus).enumerate() {
        ensure(a == b, format!("μ{} = {a}, expected {b}", k + 1))?;
    }
    ensure(matches!(t.verdict, Verdict::TerminatedPhiEqualsF), format!("verdict {:?}", t.verdict))?;
    ensure(t.invariants.e_lattice == Some(BigInt::from(4)), "[G_ω:G_V₀] ≠ 4")?;
    ensure(t.invariants.delta == Some(BigRational::from_integer(1.into())), "δ ≠ 1")
}

fn sec9() -> Outcome {
    let (_, t) = golden("sec9_p2");
    let spec = t.chain.base().spec();
    let mut acc = BigRational::from_integer(0.into());
    for (j, mu) in t.mus().iter().enumerate() {
        acc += BigRational::new(1.into(), BigInt::from(2).pow(4 * j as u32 + 1));
        ensure(*mu == GroupElement::rational(spec, acc.clone()), format!("μ{} = {mu}", j + 1))?;
    }
    ensure(t.mus().len() == 6, "expected six values")?;
    let bound = BigRational::new(16.into(), (2 * 15).into());
    match &t.verdict {
        Verdict::BoundedInconclusive { exact: Some(b), .. } if *b == GroupElement::rational(spec, bound) => {}
        v => return Err(format!("verdict {v:?}")),
    }
    let orders = t.orders();
    ensure(orders == [2, 1, 1, 1, 1, 1], format!("n sequence {orders:?}, expected (2,1,1,1,1,1)"))
}

fn leaves(body: &TraceBody) -> Vec<&TraceBody> {
    if body.branches.is_empty() {
        vec![body]
    } else {
        body.branches.iter().flat_map(leaves).collect()
    }
}

fn ex72() -> Outcome {
    let (_, t) = golden("ex72");
    let doc = parse_json(&to_json(&t, &ReportOptions::default()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let hit = leaves(&doc.body).into_iter().filter_map(|b| b.invariants.as_ref()).find(|i| i.e == 2);
    let inv = hit.ok_or("no leaf with e = 2")?;
    ensure(inv.deg_f == 3 && inv.residue_degree == 1, format!("{inv:?}"))?;
    ensure(inv.s_tot == "3/2", format!("s_tot = {}", inv.s_tot))
}

fn ex52() -> Outcome {
    let (p, t) = golden("ex52");
    ensure(p.options.declared_unique, "spec does not declare a unique extension")?;
    ensure(t.chain.base().field().characteristic() != 2, "characteristic 2")?;
    ensure(t.steps.iter().any(|s| s.fast_path), "fast path not taken")?;
    let pres = presentation(&t).reduced();
    ensure(pres.generators.len() == 1, format!("{} generators", pres.generators.len()))?;
    ensure(pres.relations.len() == 1, format!("{} relations", pres.relations.len()))?;
    let r = &pres.relations[0];
    ensure(r.lhs_exp == 2 && r.rhs.is_empty(), "relation is not φ̄² = c̄")?;
    let order = t.chain.base().group().order_mod(&pres.generators[0].weight, 8).map_err(|e| e.to_string())?;
    ensure(order == 2, format!("order_mod = {order}"))
}

fn suites() -> Outcome {
    let runs: [(&str, fn(u32) -> Outcome); 7] = [
        ("expansion", props::expansion),
        ("stability", props::stability),
        ("monotonicity", props::monotonicity),
        ("multiplicativity", props::multiplicativity),
        ("decompose", props::decompose),
        ("hull", props::hull),
        ("normal form", props::confluence),
    ];
    let mut bad = Vec::new();
    for (name, f) in runs {
        if let Err(e) = f(CASES) {
            bad.push(format!("{name}: {e}"));
        }
    }
    bad.extend(props::factorization_failures().into_iter().map(|s| format!("f ∼ G: {s}")));
    bad.extend(props::positivity_failures().into_iter().map(|s| format!("positivity: {s}")));
    ensure(bad.is_empty(), bad.join("; "))
}

fn readme() -> Outcome {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let lower = text.to_lowercase();
    ensure(lower.contains("not reproducible as computations"), "statement missing")?;
    ensure(lower.contains("realizable") && lower.contains("three-jump"), "claims not named")
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("1 worked char-2 trace", Box::new(|| timed(Duration::from_secs(5), ex46))),
        ("2 defect trace p=2", Box::new(|| timed(Duration::from_secs(10), sec9))),
        ("3 total jump 3/2", Box::new(ex72)),
        ("4 quadratic fast path shape", Box::new(ex52)),
        ("5 property suites", Box::new(|| timed(Duration::from_secs(120), suites))),
        ("6 documented scope", Box::new(readme)),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(()) => println!("PASS {name}"),
            Err(e) => {
                println!("FAIL {name}: {e}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
