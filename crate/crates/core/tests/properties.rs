use std::collections::{BTreeSet, HashSet};

use folner_core::characters::{AdditiveCharacter, MultiplicativeCharacter};
use folner_core::charsums::{
    folner_kloosterman_series, identically_one, kloosterman_classical, twisted_power_series,
    TwistSpec,
};
use folner_core::cyclotomic::{Cyclotomic, RootOfUnity};
use folner_core::finite::{FiniteField, FqElem, DEFAULT_CAP};
use folner_core::folner::{folner_defect, DefectMode, FolnerRecipe, ZeroPolicy};
use folner_core::identities::{build_power_identity, check_linear_independence};
use folner_core::patterns::{
    hyperbola_triple_search, is_reciprocal_triple, spacetime_direct, spacetime_search,
};
use folner_core::pgl2::{inversion_section_check, q_set};
use folner_core::reconstruct::{
    map_fn, patchwise_exceptions, reduced_model, Group, MapFn, ReducedModelSpec,
};
use folner_core::scalar::{rat, PrimeField, Rationals};
use folner_core::{Field, FieldDescriptor, Rational, Value};
use num_traits::Zero;
use proptest::prelude::*;

fn field(q: u64) -> FiniteField {
    FiniteField::of_order(q).unwrap()
}

const SMALL_Q: [u64; 9] = [3, 4, 5, 7, 8, 9, 25, 27, 49];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_field_axioms(qi in 0usize..SMALL_Q.len(), a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let k = field(SMALL_Q[qi]);
        let q = k.order();
        let (a, b, c) = (FqElem(a % q), FqElem(b % q), FqElem(c % q));
        prop_assert_eq!(k.mul(&a, &k.add(&b, &c)), k.add(&k.mul(&a, &b), &k.mul(&a, &c)));
        prop_assert_eq!(k.add(&a, &k.neg(&a)), k.zero());
        if a.0 != 0 {
            prop_assert_eq!(k.mul(&a, &k.inv(&a).unwrap()), k.one());
        }
        prop_assert_eq!(k.pow_u(&a, q), a);
    }

    #[test]
    fn cyclotomic_ring_laws(m in 1u64..30, e in proptest::collection::vec(-40i64..40, 3)) {
        let r = |i: usize| Cyclotomic::from_root(RootOfUnity::new(m, e[i]));
        let (x, y, z) = (r(0), r(1).add(&r(2)).unwrap(), r(2));
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(
            x.mul(&y.add(&z).unwrap()).unwrap(),
            x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
        );
        let lhs = x.mul(&y).unwrap().embed();
        let rhs = x.embed() * y.embed();
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn kloosterman_symmetries(qi in 0usize..SMALL_Q.len(), b1 in 1u64..1000, b2 in 1u64..1000, c in 1u64..1000) {
        let k = field(SMALL_Q[qi]);
        let q = k.order();
        let (b1, b2, c) = (FqElem(1 + b1 % (q - 1)), FqElem(1 + b2 % (q - 1)), FqElem(1 + c % (q - 1)));
        let k12 = kloosterman_classical(&k, b1, b2, DEFAULT_CAP).unwrap();
        let k21 = kloosterman_classical(&k, b2, b1, DEFAULT_CAP).unwrap();
        prop_assert_eq!(&k12.exact, &k21.exact);
        let kc1 = kloosterman_classical(&k, k.mul(&c, &b1), b2, DEFAULT_CAP).unwrap();
        let kc2 = kloosterman_classical(&k, b1, k.mul(&c, &b2), DEFAULT_CAP).unwrap();
        prop_assert_eq!(&kc1.exact, &kc2.exact);
        prop_assert!(k12.value.norm() <= 2.0 * (q as f64).sqrt() + 1e-9);
    }

    #[test]
    fn defects_are_total_variation(n in 1i64..8, r in 1i64..30, a in -20i64..20) {
        let recipe = FolnerRecipe::parse(None, &format!("addbox:d={n}:R={r}")).unwrap();
        let set = recipe.realize(1, DEFAULT_CAP).unwrap();
        let shift = Value::Rational(rat(a, 1));
        let d = folner_defect(&set, &shift, DefectMode::Additive, ZeroPolicy::Error).unwrap();
        prop_assert!(d >= Rational::zero() && d <= rat(2, 1));
        if a == 0 {
            prop_assert!(d.is_zero());
        }
    }

    #[test]
    fn q_set_size_and_intersections(a in proptest::collection::btree_set(0u64..11, 0..9), b in proptest::collection::btree_set(0u64..11, 0..9)) {
        let f = PrimeField::new(11).unwrap();
        let av: Vec<u64> = a.iter().copied().collect();
        let bv: Vec<u64> = b.iter().copied().collect();
        let both: Vec<u64> = a.intersection(&b).copied().collect();
        let qs = |s: &[u64]| -> HashSet<_> {
            if s.len() < 3 { HashSet::new() } else { q_set(&f, s).unwrap().into_iter().collect() }
        };
        let (qa, qb) = (qs(&av), qs(&bv));
        if av.len() >= 3 {
            prop_assert_eq!(qa.len(), av.len() * (av.len() - 1) * (av.len() - 2));
        }
        let inter: HashSet<_> = qa.intersection(&qb).cloned().collect();
        prop_assert_eq!(inter, qs(&both));
    }

    #[test]
    fn section_identity_on_inverse_closed_sets(seed in proptest::collection::btree_set(1u64..13, 1..7), b in 1u64..13) {
        let f = PrimeField::new(13).unwrap();
        let mut a: BTreeSet<u64> = seed.clone();
        for x in &seed {
            a.insert(f.inv(x).unwrap());
        }
        let a: Vec<u64> = a.into_iter().collect();
        prop_assert!(inversion_section_check(&f, &a, &b).unwrap().equal);
    }

    #[test]
    fn reduced_model_round_trips(seed in any::<u64>(), pick in 0usize..3) {
        let (p, w): (u64, &[i64]) = [(3, &[3, -6, 2][..]), (2, &[2, 3][..]), (5, &[5, -2, 1][..])][pick];
        let spec = ReducedModelSpec::new(p, w).unwrap();
        let (_, report) = reduced_model(&spec, 8, seed).unwrap();
        prop_assert!(report.passed());
    }

    #[test]
    fn corrupted_homomorphism_localizes(bad in proptest::collection::btree_set(2i64..30, 1..4)) {
        let bad_c = bad.clone();
        let eta: MapFn<Rational> = map_fn(move |x: &Rational| {
            if x.is_integer() && bad_c.contains(&x.to_integer().try_into().unwrap_or(0i64)) {
                Some(rat(1, 1))
            } else {
                Some(x.clone())
            }
        });
        let samples: Vec<Rational> = (1..=30).map(|n| rat(n, 1)).collect();
        let pairs: Vec<(Rational, Rational)> = samples
            .iter()
            .flat_map(|a| samples.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        let r = patchwise_exceptions(&Rationals, &eta, Group::Multiplicative, &samples, &pairs);
        let touches = |x: &Rational| bad.iter().any(|&b| *x == rat(b, 1));
        prop_assert!(r
            .product_exceptions
            .iter()
            .all(|(x, y)| touches(x) || touches(y) || touches(&(x * y))));
        prop_assert!(r.inverse_exceptions.iter().all(touches));
    }
}

#[test]
fn power_identities_up_to_twelve() {
    for p in [0u64, 2, 3, 5, 7] {
        for n in 1..=12u64 {
            if p != 0 && n % p == 0 {
                continue;
            }
            let id = build_power_identity(n, p).unwrap();
            assert!(id.holds());
            assert_eq!(id.len(), id.exponents().len() + 1);
            assert!(
                !check_linear_independence(&id, n as i64)
                    .unwrap()
                    .independent
            );
        }
    }
}

#[test]
fn twisted_kloosterman_matches_folner_kloosterman() {
    let recipe = FolnerRecipe::parse(None, "tower:p=3:sched=1,2,4").unwrap();
    let d = recipe.descriptor().unwrap();
    let xi1 = AdditiveCharacter::parse(&d, "trace:beta=g").unwrap();
    let xi2 = AdditiveCharacter::parse(&d, "trace:beta=g^7").unwrap();
    let fk = folner_kloosterman_series(&recipe, &xi1, &xi2, 3, DEFAULT_CAP).unwrap();
    let spec = TwistSpec::new(
        MultiplicativeCharacter::trivial(&d),
        vec![(xi1, 1), (xi2, -1)],
    )
    .unwrap();
    let tw = twisted_power_series(&recipe, &spec, 3, DEFAULT_CAP).unwrap();
    for (a, b) in fk.terms.iter().zip(&tw.terms) {
        assert_eq!(a.value.exact(), b.value.exact());
        assert!(a.value.exact().is_some());
    }
}

#[test]
fn trivial_series_are_one_for_every_recipe() {
    for lit in [
        "tower:p=2:sched=1,2,4",
        "addbox:d=2:R=6",
        "dilbox:P=3:E=1:R=4",
    ] {
        let recipe = FolnerRecipe::parse(None, lit).unwrap();
        let d = recipe.descriptor().unwrap();
        let t = AdditiveCharacter::trivial(&d);
        let s = folner_kloosterman_series(&recipe, &t, &t, 3, DEFAULT_CAP).unwrap();
        assert!(identically_one(&s), "{lit}");
        let spec = TwistSpec::new(MultiplicativeCharacter::trivial(&d), vec![(t, 1)]).unwrap();
        assert!(identically_one(
            &twisted_power_series(&recipe, &spec, 3, DEFAULT_CAP).unwrap()
        ));
    }
    let f2t = FieldDescriptor::parse("F2(t)").unwrap();
    let recipe = FolnerRecipe::parse(Some(&f2t), "addbox:d=t:R=3").unwrap();
    let t = AdditiveCharacter::trivial(&f2t);
    assert!(identically_one(
        &folner_kloosterman_series(&recipe, &t, &t, 3, DEFAULT_CAP).unwrap()
    ));
}

#[test]
fn every_search_hit_rechecks() {
    for q in [4u64, 16] {
        let k = field(q);
        let r = hyperbola_triple_search(&k, DEFAULT_CAP).unwrap();
        assert_eq!(r.hits.len() as u64, 2 * (q - 1));
        assert!(r
            .hits
            .iter()
            .all(|&[x, y, z]| is_reciprocal_triple(&k, x, y, z)));
    }
    let k = field(7);
    let e: Vec<(FqElem, FqElem)> = (0..49)
        .step_by(4)
        .map(|i| (FqElem(i / 7), FqElem(i % 7)))
        .collect();
    for z in 0..7 {
        let r = spacetime_search(&k, FqElem(z), &e);
        assert_eq!(r.hits, spacetime_direct(&k, FqElem(z), &e).hits);
        for (p, q) in &r.hits {
            let dx = k.sub(&p.0, &q.0);
            let dy = k.sub(&p.1, &q.1);
            assert_eq!(k.sub(&k.mul(&dx, &dx), &k.mul(&dy, &dy)), FqElem(z));
        }
    }
}
