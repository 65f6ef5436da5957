use num_bigint::BigUint;
use proptest::prelude::*;

use equibound::engine::{bound_alpha_fifth, bound_extremal_k, bound_small_k, dimension_bound, gerzon, Pipeline};
use equibound::rational::{binomial, ell, ell_regime, Angle, Rational, Regime, SignVector};
use equibound::two_distance::{
    best_bound, closed_form_gy, negative_pair_bound, BackendKind, Backends, SdpCache, TwoDistanceQuery,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-500i64..500, 1i64..200).prop_map(|(n, d)| Rational::frac(n, d))
}

/// A value in the open interval `(-1, 1)`.
fn unit_open() -> impl Strategy<Value = Rational> {
    (1i64..200).prop_flat_map(|d| (-(d - 1)..d).prop_map(move |n| Rational::frac(n, d)))
}

fn odd_denom() -> impl Strategy<Value = u64> {
    (1u64..40).prop_map(|m| 2 * m + 1)
}

proptest! {
    #[test]
    fn rational_field_laws(a in rational(), b in rational()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &b, &b * &a);
        if !b.is_zero() {
            prop_assert_eq!(a.checked_div(&b).unwrap() * b.clone(), a.clone());
        }
        let back: Rational = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn floor_brackets(a in rational()) {
        let f = Rational::integer(a.floor());
        prop_assert!(f <= a);
        prop_assert!(a < f + Rational::one());
    }

    #[test]
    fn binomial_pascal(n in 1u64..60, k in 1u64..60) {
        prop_assume!(k <= n);
        prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
        prop_assert_eq!(binomial(n, k), binomial(n, n - k));
    }

    #[test]
    fn canonical_sign_vectors(bits in prop::collection::vec(any::<bool>(), 2..12)) {
        let v = SignVector::new(bits.iter().map(|&b| if b { 1 } else { -1 }).collect()).unwrap();
        let c = v.canonical();
        prop_assert_eq!(c.canonical(), c.clone());
        prop_assert_eq!(v.negated().canonical(), c.clone());
        prop_assert!(c <= v && c <= v.negated());
        prop_assert_eq!(v.class_level(), v.negated().class_level());
        prop_assert!(2 * v.class_level() <= v.len());
    }

    #[test]
    fn ell_symmetric_and_regime_consistent(d in odd_denom(), k_off in 0usize..80, n_off in 0usize..40) {
        let k = 2 + k_off % (d as usize - 1);
        let n = n_off % (k + 1);
        let alpha = Rational::frac(1, d as i64);
        let l = ell(&alpha, k, n).unwrap();
        prop_assert_eq!(ell(&alpha, k, k - n).unwrap(), l.clone());
        prop_assert!(!l.is_negative() && l <= Rational::one());
        if 0 < n && n < k {
            prop_assert!(l < Rational::one());
        }
        let regime = ell_regime(&alpha, k, n).unwrap();
        let expected = match l.cmp(&alpha) {
            std::cmp::Ordering::Less => Regime::BelowAlpha,
            std::cmp::Ordering::Equal => Regime::EqualAlpha,
            std::cmp::Ordering::Greater => Regime::AboveAlpha,
        };
        prop_assert_eq!(regime, expected);
    }

    #[test]
    fn extremal_base_rejected_by_ell(d in odd_denom(), n in 0usize..10) {
        let alpha = Rational::frac(1, d as i64);
        prop_assert!(ell(&alpha, d as usize + 1, n).is_err());
    }

    #[test]
    fn query_is_order_free(r in 1u64..500, x in unit_open(), y in unit_open()) {
        prop_assume!(x != y);
        let a = TwoDistanceQuery::new(r, x.clone(), y.clone()).unwrap();
        let b = TwoDistanceQuery::new(r, y, x).unwrap();
        prop_assert!(a.beta() > a.gamma());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn closed_form_monotone_in_r(r in 2u64..400, x in unit_open(), y in unit_open()) {
        prop_assume!(x != y);
        let lo = closed_form_gy(&TwoDistanceQuery::new(r, x.clone(), y.clone()).unwrap());
        let hi = closed_form_gy(&TwoDistanceQuery::new(r + 1, x, y).unwrap());
        if let Some(h) = hi.value {
            let l = lo.value.expect("positive denominator persists for smaller r");
            prop_assert!(l <= h);
        }
    }

    #[test]
    fn best_bound_is_the_minimum(r in 2u64..400, x in unit_open(), y in unit_open()) {
        prop_assume!(x != y);
        let q = TwoDistanceQuery::new(r, x, y).unwrap();
        let backends = Backends::from_kinds(&[BackendKind::ClosedForm, BackendKind::NegativePair], SdpCache::default(), None);
        let best = best_bound(&q, &backends, false);
        let floor = q.floor_value();
        for each in [closed_form_gy(&q), negative_pair_bound(&q)] {
            if let Some(v) = each.value {
                if floor.as_ref().map_or(true, |f| &v >= f) {
                    prop_assert!(best.value.as_ref().is_some_and(|b| b <= &v));
                }
            }
        }
        let capped = best_bound(&q, &backends, true);
        prop_assert!(capped.value.is_some());
    }

    #[test]
    fn cache_text_round_trip(entries in prop::collection::vec((1u64..300, unit_open(), unit_open(), 0u64..5000), 0..20)) {
        let mut cache = SdpCache::default();
        for (r, x, y, extra) in entries {
            if x == y {
                continue;
            }
            let q = TwoDistanceQuery::new(r, x, y).unwrap();
            let bound = q.floor_value().unwrap_or_default() + BigUint::from(extra);
            cache.insert(q, bound, "prop");
        }
        let back = SdpCache::parse(&cache.to_text()).unwrap();
        prop_assert_eq!(back, cache);
    }

    #[test]
    fn cache_merge_keeps_minimum(r in 20u64..200, a in 0u64..1000, b in 0u64..1000) {
        let q = TwoDistanceQuery::new(r, Rational::frac(1, 13), Rational::frac(-5, 13)).unwrap();
        let mut one = SdpCache::default();
        one.insert(q.clone(), BigUint::from(r + a), "one");
        let mut two = SdpCache::default();
        two.insert(q.clone(), BigUint::from(r + b), "two");
        one.merge(&two);
        prop_assert_eq!(&one.get(&q).unwrap().bound, &BigUint::from(r + a.min(b)));
    }

    #[test]
    fn extremal_bound_monotone(d in odd_denom(), r in 20u64..3000) {
        let angle = Angle::new(d).unwrap();
        prop_assume!(r > angle.extremal_base() as u64);
        let lo = bound_extremal_k(r, angle).unwrap().total.unwrap();
        let hi = bound_extremal_k(r + 1, angle).unwrap().total.unwrap();
        prop_assert!(lo <= hi);
    }

    #[test]
    fn small_base_totals_cover_the_base(d in (2u64..8).prop_map(|m| 2 * m + 1), k_off in 0usize..16, r in 30u64..300) {
        let angle = Angle::new(d).unwrap();
        let k = 2 + k_off % (d as usize - 1);
        let bd = bound_small_k(r, angle, k, &Pipeline::standard()).unwrap();
        if let Some(t) = &bd.total {
            prop_assert!(t >= &BigUint::from(k));
        } else {
            prop_assert!(!bd.missing.is_empty());
        }
        prop_assert_eq!(bd.rows.len(), k / 2);
    }

    #[test]
    fn fifth_beats_gerzon(r in 61u64..=400) {
        let b = bound_alpha_fifth(r, &Pipeline::standard()).unwrap();
        prop_assert!(b.value < gerzon(r));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn overall_at_least_baseline(r in 15u64..120) {
        let rep = dimension_bound(r, &Pipeline::standard()).unwrap();
        prop_assert!(rep.overall >= BigUint::from(2 * r + 3));
        prop_assert!(rep.per_angle.iter().all(|a| a.value <= rep.overall));
    }
}
