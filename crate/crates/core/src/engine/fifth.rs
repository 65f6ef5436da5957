//! Angle `1/5`, where sharper per-base bounds are available for `K = 4, 5, 6`.

use num_bigint::BigUint;

use super::dimension::{AngleBound, AngleSource, Candidate};
use super::pillar::{bound_extremal_k, bound_small_k, direct_bound, max_total, PillarBreakdown};
use super::{EngineError, Pipeline};
use crate::rational::{Angle, Rational};
use crate::two_distance::{BoundResult, TwoDistanceQuery};

fn fifth() -> Angle {
    Angle::new(5).expect("5 is odd")
}

/// The query `s(r, 1/13, -5/13)` behind the `K = 4` classes with two
/// positive signs.
fn k4_query(r: u64) -> TwoDistanceQuery {
    TwoDistanceQuery::new(r, Rational::frac(1, 13), Rational::frac(-5, 13)).expect("valid")
}

fn via_two_distance(s: &BoundResult) -> Option<BigUint> {
    s.value.as_ref().map(|v| BigUint::from(148u32) + 3u32 * v)
}

/// `K = 4`: the pillar sum, or `148 + 3 s(r, 1/13, -5/13)` when smaller.
pub fn fifth_k4_refined(r: u64, pipe: &Pipeline) -> Result<PillarBreakdown, EngineError> {
    let mut b = bound_small_k(r, fifth(), 4, pipe)?;
    let s = b
        .rows
        .iter()
        .find(|row| row.query.as_ref() == Some(&k4_query(r)))
        .map(|row| row.bound.clone())
        .unwrap_or_else(|| pipe.two_distance(&k4_query(r)));
    if let Some(v) = via_two_distance(&s) {
        b.refine("k4-two-distance", v, format!("148 + 3 s(r, 1/13, -5/13) with s from {}", s.provenance));
    }
    Ok(b)
}

fn half_excess(r: u64) -> u64 {
    (r - 5) / 2
}

/// `K = 5`: 290 for `23 <= r <= 185`, `r + 15 + floor((r-5)/2)` beyond.
pub fn fifth_k5_refined(r: u64, pipe: &Pipeline) -> Result<PillarBreakdown, EngineError> {
    let mut b = bound_small_k(r, fifth(), 5, pipe)?;
    if r >= 23 {
        let v = if r <= 185 { 290 } else { r + 15 + half_excess(r) };
        b.refine("k5-refined", v.into(), "290 up to r = 185, then r + 15 + floor((r - 5)/2)");
    }
    Ok(b)
}

/// `K = 6`: 276 for `23 <= r <= 185`, `r + 1 + floor((r-5)/2)` beyond.
pub fn fifth_k6_refined(r: u64) -> Result<PillarBreakdown, EngineError> {
    let mut b = bound_extremal_k(r, fifth())?;
    if r >= 23 {
        let v = if r <= 185 { 276 } else { r + 1 + half_excess(r) };
        b.refine("k6-refined", v.into(), "276 up to r = 185, then r + 1 + floor((r - 5)/2)");
    }
    Ok(b)
}

/// Every base size `2..=6` with the refinements applied.
pub fn fifth_by_base(r: u64, pipe: &Pipeline) -> Result<Vec<PillarBreakdown>, EngineError> {
    Ok(vec![
        bound_small_k(r, fifth(), 2, pipe)?,
        bound_small_k(r, fifth(), 3, pipe)?,
        fifth_k4_refined(r, pipe)?,
        fifth_k5_refined(r, pipe)?,
        fifth_k6_refined(r)?,
    ])
}

/// `floor(148 + 648 r (r + 2) / (47 r + 169))`, the closed-form bound for
/// `r > 60`.
pub fn fifth_closed_form(r: u64) -> BigUint {
    let num = Rational::from(648 * r * (r + 2));
    let den = Rational::from(47 * r + 169);
    (Rational::from(148u64) + num.checked_div(&den).expect("positive")).floor_natural()
}

/// Bound for angle `1/5`. Above 60 dimensions the candidates are
/// `148 + 3 s(r, 1/13, -5/13)`, the closed form, the per-base maximum and
/// the direct bound; at or below 60 only the last two apply.
pub fn bound_alpha_fifth(r: u64, pipe: &Pipeline) -> Result<AngleBound, EngineError> {
    super::require_dimension(r)?;
    let breakdowns = fifth_by_base(r, pipe)?;
    let pillar = max_total(&breakdowns);
    let (direct_q, direct) = direct_bound(r, fifth(), pipe)?;
    let mut candidates = Vec::new();
    if r > 60 {
        let q = k4_query(r);
        let s = pipe.two_distance(&q);
        candidates.push(Candidate {
            source: AngleSource::FifthTwoDistance,
            value: via_two_distance(&s),
            detail: match &s.value {
                Some(v) => format!("148 + 3 s({r}, 1/13, -5/13), s = {v} [{}]", s.provenance),
                None => format!("s({r}, 1/13, -5/13) unavailable"),
            },
            inputs: vec![(q, s.provenance)],
        });
        candidates.push(Candidate {
            source: AngleSource::FifthClosedForm,
            value: Some(fifth_closed_form(r)),
            detail: "floor(148 + 648 r (r + 2)/(47 r + 169))".into(),
            inputs: Vec::new(),
        });
    }
    candidates.push(Candidate::pillar(pillar.as_ref()));
    candidates.push(Candidate::direct(&direct_q, &direct));
    AngleBound::from_candidates(r, fifth(), candidates, breakdowns, pillar.map(|(_, k)| k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_distance::Backends;

    fn total(b: &PillarBreakdown) -> u64 {
        u64::try_from(b.total.clone().unwrap()).unwrap()
    }

    #[test]
    fn closed_form_column() {
        assert_eq!(fifth_closed_form(61), 968u32.into());
        assert_eq!(fifth_closed_form(85), 1298u32.into());
        assert_eq!(fifth_closed_form(100), 1505u32.into());
        assert_eq!(fifth_closed_form(117), 1739u32.into());
        assert_eq!(fifth_closed_form(132), 1946u32.into());
    }

    #[test]
    fn cached_values_give_the_sharper_column() {
        let pipe = Pipeline::standard();
        let b = bound_alpha_fifth(61, &pipe).unwrap();
        assert_eq!(b.value, 586u32.into());
        assert_eq!(b.source, AngleSource::FifthTwoDistance);
        assert!(b.detail.contains("SDP_CACHE"));
        assert_eq!(bound_alpha_fifth(132, &pipe).unwrap().value, 1936u32.into());
    }

    #[test]
    fn without_cache_closed_form_only() {
        let pipe = Pipeline::new(
            Backends { cache: Some(std::sync::RwLock::new(Default::default())), ..Backends::none() },
            false,
        );
        let b = bound_alpha_fifth(137, &pipe).unwrap();
        assert_eq!(b.value, fifth_closed_form(137));
        assert_eq!(b.source, AngleSource::FifthClosedForm);
    }

    #[test]
    fn k5_constant_splits_into_classes_and_rest() {
        // 5 singleton-sign classes of at most 3 each, plus one less than the
        // K = 6 value for the base and the two-sign classes
        for r in [23u64, 100, 185, 186, 400] {
            let b = fifth_k5_refined(r, &Pipeline::standard()).unwrap();
            let ones = b.rows.iter().find(|row| row.n == 1).unwrap();
            let x51 = &ones.count * ones.bound.value.clone().unwrap();
            assert_eq!(x51, 15u32.into());
            let k6 = u64::try_from(fifth_k6_refined(r).unwrap().refinements[0].value.clone()).unwrap();
            assert_eq!(b.refinements[0].value, (15 + k6 - 1).into(), "r = {r}");
        }
    }

    #[test]
    fn refinements_by_base() {
        let pipe = Pipeline::standard();
        assert_eq!(total(&fifth_k6_refined(23).unwrap()), 276);
        assert_eq!(total(&fifth_k6_refined(200).unwrap()), 200 + 1 + 97);
        assert_eq!(total(&fifth_k5_refined(100, &pipe).unwrap()), 290);
        assert_eq!(total(&fifth_k5_refined(300, &pipe).unwrap()), 300 + 15 + 147);
        // below 23 only the pillar sums apply
        assert!(fifth_k6_refined(20).unwrap().refinements.is_empty());
        let k4 = fifth_k4_refined(61, &pipe).unwrap();
        assert_eq!(total(&k4), 586);
    }

    #[test]
    fn low_range_is_at_least_the_known_value() {
        let pipe = Pipeline::standard();
        for r in 23..=41 {
            assert!(bound_alpha_fifth(r, &pipe).unwrap().value >= 276u32.into(), "r = {r}");
        }
    }
}
