mod common;

use std::cmp::Ordering;
use std::sync::Arc;

use keypoly_core::baseval::{ExponentRule, GenSeqRule, GenSeqValuation, MonomialValuation};
use keypoly_core::coeffield::{roots_in_k, FieldElement, MultiPoly, ResidueField, Scalar, UniPoly};
use keypoly_core::ordgroup::{GroupElement, GroupSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use common::props::{self, base_element, base_group, element, q, specs};
use proptest::prelude::*;

fn raw_coords() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-60i64..=60, 1i64..=12), 3)
}

/// Sign of `a + b√d` from a 100-digit enclosure of `√d`.
fn interval_sign(a: &BigRational, b: &BigRational, d: u64) -> Option<Ordering> {
    let scale = BigInt::from(10).pow(100);
    let s = (BigInt::from(d) * &scale * &scale).sqrt();
    let lo = BigRational::new(s.clone(), scale.clone());
    let hi = BigRational::new(s + 1, scale);
    let (x, y) = if b.is_negative() { (a + b * &hi, a + b * &lo) } else { (a + b * &lo, a + b * &hi) };
    let zero = BigRational::zero();
    if x > zero {
        Some(Ordering::Greater)
    } else if y < zero {
        Some(Ordering::Less)
    } else if b.is_zero() && a.is_zero() {
        Some(Ordering::Equal)
    } else {
        None
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn compare_is_transitive_and_translation_invariant(si in 0usize..3, a in raw_coords(), b in raw_coords(), c in raw_coords()) {
        let s = &specs()[si];
        let (a, b, c) = (element(s, &a), element(s, &b), element(s, &c));
        if a < b && b < c {
            prop_assert!(a < c);
        }
        prop_assert_eq!(a.cmp(&b), (&a + &c).cmp(&(&b + &c)));
        prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
        prop_assert_eq!((&a - &b).signum(), a.cmp(&b));
    }

    #[test]
    fn quadratic_sign_agrees_with_interval_enclosure(a in (-10_000i64..=10_000, 1i64..=500), b in (-10_000i64..=10_000, 1i64..=500), d in prop::sample::select(vec![2u64, 3, 5, 37, 1009])) {
        let spec = Arc::new(GroupSpec::quadratic(d).unwrap());
        let (ra, rb) = (q(a.0, a.1), q(b.0, b.1));
        let g = GroupElement::from_coords(&spec, vec![ra.clone(), rb.clone()]);
        prop_assert_eq!(Some(g.signum()), interval_sign(&ra, &rb, d));
    }

    #[test]
    fn mbar_matches_divisor_search(si in 0usize..3, push in raw_coords(), base in prop::collection::vec(-6i64..=6, 3), js in 0u64..8, d in 1u64..=12) {
        let s = &specs()[si];
        let g = base_group(s).push(&element(s, &push), 1 << 20);
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let gamma = &base_element(s, &base) + &g.mus()[0].scale_int(js as i64);
        let (m, b) = g.mbar(d, &gamma).unwrap();
        let oracle = (1..=d).rev().find(|m| d % m == 0 && g.contains(&gamma.div_int(*m as i64)).unwrap()).unwrap();
        prop_assert_eq!((m, b), (oracle, d / oracle));
        prop_assert_eq!(g.order_mod(&gamma.div_int(d as i64), 1 << 20).unwrap(), b);
    }
}

#[test]
fn decompose_inverts_recompose() {
    props::decompose(2 * props::CASES).unwrap();
}

// ---------------------------------------------------------------- coefficient field

fn fields() -> Vec<ResidueField> {
    vec![ResidueField::Rationals, ResidueField::prime(2).unwrap(), ResidueField::prime(5).unwrap()]
}

type RawMulti = Vec<(i64, i64, i64)>;

fn raw_multi() -> impl Strategy<Value = RawMulti> {
    prop::collection::vec((-4i64..=4, -2i64..=3, -1i64..=2), 1..=3)
}

fn multi(k: ResidueField, raw: &RawMulti) -> MultiPoly {
    MultiPoly::from_terms(k, 2, raw.iter().map(|(c, a, b)| (vec![*a, *b], Scalar::from_i64(k, *c))))
}

fn frac(k: ResidueField, n: &RawMulti, d: &RawMulti) -> Option<FieldElement> {
    let den = multi(k, d);
    if den.is_zero() {
        return None;
    }
    FieldElement::new(multi(k, n), den).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn field_axioms(fi in 0usize..3, a in (raw_multi(), raw_multi()), b in (raw_multi(), raw_multi()), c in (raw_multi(), raw_multi())) {
        let k = fields()[fi];
        let (Some(x), Some(y), Some(z)) = (frac(k, &a.0, &a.1), frac(k, &b.0, &b.1), frac(k, &c.0, &c.1)) else {
            return Ok(());
        };
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert!(x.add(&x.neg()).is_zero());
        if !x.is_zero() {
            prop_assert!(x.mul(&x.inv().unwrap()).is_one());
        }
        let again = FieldElement::new(x.num().clone(), x.den().clone()).unwrap();
        prop_assert_eq!(&again, &x);
        prop_assert_eq!(FieldElement::new(again.num().clone(), again.den().clone()).unwrap(), again);
    }

    #[test]
    fn roots_reassemble_the_polynomial(fi in 0usize..3, roots in prop::collection::vec((-3i64..=3, 1u32..=3), 0..=3), extra in prop::collection::vec(-5i64..=5, 1..=4)) {
        let k = fields()[fi];
        let mut p = UniPoly::from_i64(k, &extra);
        prop_assume!(!p.is_zero());
        for (r, m) in &roots {
            for _ in 0..*m {
                p = p.mul(&UniPoly::linear(&Scalar::from_i64(k, *r)));
            }
        }
        let split = roots_in_k(&p);
        let mut back = split.cofactor.clone();
        for (r, m) in &split.roots {
            for _ in 0..*m {
                back = back.mul(&UniPoly::linear(r));
            }
        }
        prop_assert_eq!(back, p.clone());
        for (r, _) in &roots {
            prop_assert!(split.roots.iter().any(|(s, _)| *s == Scalar::from_i64(k, *r)));
        }
        if let ResidueField::Prime(pp) = k {
            for v in 0..pp as i64 {
                prop_assert!(!split.cofactor.eval(&Scalar::from_i64(k, v)).is_zero());
            }
        }
    }
}

// ---------------------------------------------------------------- base valuations

fn monomial(k: ResidueField) -> MonomialValuation {
    let s = Arc::new(GroupSpec::quadratic(37).unwrap());
    MonomialValuation::new(
        k,
        vec!["x1".into(), "x2".into()],
        s.clone(),
        vec![GroupElement::int(&s, 1), GroupElement::parse(&s, "sqrt37").unwrap()],
    )
    .unwrap()
}

fn sec9(depth: usize) -> GenSeqValuation {
    let rule = GenSeqRule {
        ratio: 4,
        u_exponents: vec![0],
        tail: Some(ExponentRule { coef: 1, base: 4, mul: 1, add: -1 }),
    };
    GenSeqValuation::from_rule(ResidueField::prime(2).unwrap(), vec!["u".into(), "v".into()], q(1, 1), rule, depth).unwrap()
}

fn raw_uv() -> impl Strategy<Value = RawMulti> {
    prop::collection::vec((1i64..=1, 0i64..=3, 0i64..=7), 1..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn monomial_valuation_axioms(fi in 0usize..3, a in raw_multi(), b in raw_multi()) {
        let k = fields()[fi];
        let v = monomial(k);
        let (x, y) = (multi(k, &a), multi(k, &b));
        prop_assume!(!x.is_zero() && !y.is_zero());
        let (vx, vy) = (v.poly_value(&x), v.poly_value(&y));
        prop_assert_eq!(v.poly_value(&x.mul(&y)), &vx + &vy);
        let s = x.add(&y);
        let vs = v.poly_value(&s);
        prop_assert!(vs >= vx.clone().min(vy.clone()));
        if vx != vy {
            prop_assert_eq!(vs, vx.clone().min(vy));
        }
        let lead = MultiPoly::from_terms(
            k,
            2,
            x.terms().iter().filter(|(e, _)| v.monomial_value(e) == vx).map(|(e, c)| (e.clone(), c.clone())),
        );
        let rest = x.sub(&lead);
        if !rest.is_zero() {
            prop_assert!(v.poly_value(&rest) > vx);
        }
    }

    #[test]
    fn generating_sequence_valuation_axioms(a in raw_uv(), b in raw_uv()) {
        let k = ResidueField::prime(2).unwrap();
        let v = sec9(2);
        let deeper = v.extend(3).unwrap();
        let x = FieldElement::from_poly(multi(k, &a));
        let y = FieldElement::from_poly(multi(k, &b));
        prop_assume!(!x.is_zero() && !y.is_zero());
        let (vx, vy) = (v.value(&x).unwrap(), v.value(&y).unwrap());
        prop_assert_eq!(deeper.value(&x).unwrap(), vx.clone());
        let xy = x.mul(&y);
        prop_assert_eq!(v.value(&xy).unwrap(), &vx + &vy);
        prop_assert_eq!(deeper.value(&xy).unwrap(), &vx + &vy);
        let s = x.add(&y);
        if !s.is_zero() {
            let vs = v.value(&s).unwrap();
            prop_assert!(vs >= vx.clone().min(vy.clone()));
            if vx != vy {
                prop_assert_eq!(vs, vx.min(vy));
            }
        }
    }
}
