use proptest::prelude::*;

use logflatten::blowup::{blow_up, subdivision_to_ideal};
use logflatten::flatten::{flatten, verify_certificate, FlattenOptions, FlatteningCertificate, Overall};
use logflatten::homs::{is_integral, IntegralityStatus};
use logflatten::ideals::{ideal_of_support_function, support_function_of_ideal, MonoidIdeal};
use logflatten::json::{canonical_string, Artifact};
use logflatten::lattice::{dual_basis, extend_to_basis, IntMatrix, IntVector};
use logflatten::monoids::{hilbert_basis, FineMonoid};
use logflatten::polyhedra::{resolve_to_smooth, Cone, Fan};
use logflatten::pool::{flatten_pool, sharp_fs_pool, DEFAULT_SEED};

fn monoids() -> Vec<FineMonoid> {
    sharp_fs_pool(DEFAULT_SEED, 24)
}

/// A monoid from the pool and up to three nonzero elements of degree at most two.
fn ideal_strategy() -> impl Strategy<Value = MonoidIdeal> {
    let pool = monoids();
    (0..pool.len(), prop::collection::vec(any::<prop::sample::Index>(), 1..=3)).prop_map(move |(i, picks)| {
        let m = &pool[i];
        let elems: Vec<IntVector> = m.elements_up_to_degree(2).into_iter().filter(|e| !e.is_zero()).collect();
        let gens: Vec<IntVector> = picks.iter().map(|p| p.get(&elems).clone()).collect();
        MonoidIdeal::minimal_generators(m, &gens).unwrap()
    })
}

fn same_parent_pair() -> impl Strategy<Value = (MonoidIdeal, MonoidIdeal)> {
    ideal_strategy().prop_flat_map(|k| {
        let m = k.parent().clone();
        let elems: Vec<IntVector> = m.elements_up_to_degree(2).into_iter().filter(|e| !e.is_zero()).collect();
        prop::collection::vec(prop::sample::select(elems), 1..=2)
            .prop_map(move |gens| (k.clone(), MonoidIdeal::minimal_generators(&m, &gens).unwrap()))
    })
}

fn primitive_in(rank: usize) -> impl Strategy<Value = IntVector> {
    prop::collection::vec(-4i64..=4, rank)
        .prop_filter_map("nonzero", |c| IntVector::from_i64(&c).primitive().ok())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn basis_extension_is_unimodular(v in primitive_in(3)) {
        let b = extend_to_basis(&v).unwrap();
        prop_assert_eq!(&b[0], &v);
        let m = IntMatrix::from_row_vectors(3, &b).unwrap();
        prop_assert!(m.is_unimodular());
        let d = dual_basis(&b).unwrap();
        for (i, bi) in b.iter().enumerate() {
            for (j, dj) in d.iter().enumerate() {
                prop_assert_eq!(bi.dot(dj), num::BigInt::from((i == j) as i64));
            }
        }
    }

    #[test]
    fn double_dual_is_the_cone(rays in prop::collection::vec(prop::collection::vec(-2i64..=3, 3), 1..=4)) {
        let gens: Vec<IntVector> = rays.iter().map(|r| IntVector::from_i64(r)).collect();
        let c = Cone::new(3, &gens).unwrap();
        prop_assert!(c.dual().dual().same_set(&c));
        for g in &gens {
            prop_assert!(c.contains(g));
        }
    }

    #[test]
    fn saturation_is_idempotent(gens in prop::collection::vec(prop::collection::vec(0i64..=3, 2), 1..=3)) {
        let gens: Vec<IntVector> = gens.iter().map(|g| IntVector::from_i64(g)).collect();
        let m = FineMonoid::new(2, &gens).unwrap();
        let s = m.saturate();
        prop_assert!(s.contains_monoid(&m));
        prop_assert!(s.is_saturated());
        prop_assert!(s.saturate().same_set(&s));
    }

    #[test]
    fn resolution_is_smooth_and_refines(a in 1i64..=5, b in 1i64..=7) {
        let cone = Cone::from_i64(2, &[&[1, 0], &[a, b]]);
        let (smooth, _) = resolve_to_smooth(&Fan::face_fan(&cone).unwrap()).unwrap();
        prop_assert!(smooth.is_smooth());
        prop_assert!(smooth.subdivides(&cone).unwrap());
    }

    #[test]
    fn support_function_round_trip(k in ideal_strategy()) {
        let phi = support_function_of_ideal(&k).unwrap();
        let kk = ideal_of_support_function(&phi, k.parent()).unwrap();
        prop_assert!(kk.contains_ideal(&k));
        let phi2 = support_function_of_ideal(&kk).unwrap();
        prop_assert!(phi.agrees_with(&phi2).unwrap());
        prop_assert_eq!(phi.linearity_fan().unwrap(), phi2.linearity_fan().unwrap());
        // closing twice changes nothing
        prop_assert_eq!(ideal_of_support_function(&phi2, k.parent()).unwrap(), kk);
    }

    #[test]
    fn shift_translates_the_ideal(k in ideal_strategy(), pick in any::<prop::sample::Index>()) {
        let p = k.parent();
        let l = pick.get(p.generators()).clone();
        let phi = support_function_of_ideal(&k).unwrap();
        let kk = ideal_of_support_function(&phi, p).unwrap();
        let shifted = ideal_of_support_function(&phi.add_linear(&l), p).unwrap();
        prop_assert_eq!(shifted, kk.translate(&l).unwrap());
        prop_assert!(support_function_of_ideal(&k.translate(&l).unwrap()).unwrap().agrees_with(&phi.add_linear(&l)).unwrap());
    }

    #[test]
    fn product_adds_support_functions((k1, k2) in same_parent_pair()) {
        let prod = k1.product(&k2).unwrap();
        let lhs = support_function_of_ideal(&prod).unwrap();
        let rhs = support_function_of_ideal(&k1).unwrap().sum(&support_function_of_ideal(&k2).unwrap()).unwrap();
        prop_assert!(lhs.agrees_with(&rhs).unwrap());
    }

    #[test]
    fn principal_iff_linear(k in ideal_strategy()) {
        let phi = support_function_of_ideal(&k).unwrap();
        let linear = phi.linearity_fan().unwrap().maximal_cones().len() == 1;
        let closure = ideal_of_support_function(&phi, k.parent()).unwrap();
        prop_assert_eq!(closure.is_principal().is_some(), linear);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn blow_up_charts_are_invertible_and_dual_to_the_fan(k in ideal_strategy()) {
        let b = blow_up(k.parent(), &k, true).unwrap();
        prop_assert!(b.verify_invertibility().unwrap());
        prop_assert_eq!(b.charts.len(), b.fan.maximal_cones().len());
        let g = k.parent().group();
        // duality is with respect to the lattice of the parent
        let full_lattice = g.rank() == g.ambient() && g.is_saturated();
        for c in &b.charts {
            let dual = hilbert_basis(&b.fan.cone(&c.cone).dual()).unwrap();
            prop_assert!(!full_lattice || dual.same_set(&c.monoid));
            prop_assert!(c.monoid.contains_monoid(k.parent()));
        }
        prop_assert!(b.fan.subdivides(&k.parent().cone_of().unwrap()).unwrap());
    }

    #[test]
    fn subdivisions_are_realised(centres in prop::collection::vec((1i64..=3, 1i64..=3), 1..=3)) {
        let cone = Cone::orthant(2);
        let mut fan = Fan::face_fan(&cone).unwrap();
        for (a, b) in centres {
            let v = IntVector::from_i64(&[a, b]).primitive().unwrap();
            if fan.ray_index(&v).is_none() {
                fan = fan.stellar_subdivision(&v).unwrap();
            }
        }
        let p = hilbert_basis(&cone.dual()).unwrap();
        let k = subdivision_to_ideal(&p, &fan, 64).unwrap();
        let b = blow_up(&p, &k, true).unwrap();
        prop_assert_eq!(b.fan, fan);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn flatten_is_sound_and_deterministic(pick in any::<prop::sample::Index>()) {
        let pool = flatten_pool(DEFAULT_SEED, 20);
        let h = pick.get(&pool);
        let opts = FlattenOptions::default();
        let c = flatten(h, &opts).unwrap();
        prop_assert_eq!(&c, &flatten(h, &opts).unwrap());
        if c.overall == Overall::Verified {
            prop_assert!(verify_certificate(&c));
            if !c.fast_exit {
                prop_assert!(c.base_fan.is_smooth());
                prop_assert!(c.equidimensional);
            }
        }
        if is_integral(h).unwrap().status == IntegralityStatus::Integral {
            prop_assert!(c.fast_exit);
            prop_assert!(c.ideal.is_unit());
        }
        let c2 = FlatteningCertificate::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(c2, c);
    }

    #[test]
    fn json_round_trip_and_injectivity(
        a in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 1..=4),
        b in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 1..=4),
    ) {
        let ma = FineMonoid::new(2, &a.iter().map(|g| IntVector::from_i64(g)).collect::<Vec<_>>()).unwrap();
        let mb = FineMonoid::new(2, &b.iter().map(|g| IntVector::from_i64(g)).collect::<Vec<_>>()).unwrap();
        let ja = canonical_string(&ma.to_json());
        prop_assert_eq!(&FineMonoid::from_json(&ma.to_json()).unwrap(), &ma);
        prop_assert_eq!(ja == canonical_string(&mb.to_json()), ma == mb);
        let ca = Cone::new(2, ma.generators()).unwrap();
        prop_assert_eq!(Cone::from_json(&ca.to_json()).unwrap(), ca);
    }
}
