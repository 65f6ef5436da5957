use num_bigint::BigUint;
use serde::Serialize;

use super::fifth::bound_alpha_fifth;
use super::pillar::{bound_alpha_generic, PillarBreakdown};
use super::{bound_alpha_third, enumerate_angles, gerzon, require_dimension, EngineError, Pipeline};
use crate::rational::Angle;
use crate::two_distance::{BoundResult, Provenance, TwoDistanceQuery};

/// Which argument produced an angle's bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AngleSource {
    /// Worst base size of the pillar decomposition.
    Pillar,
    /// `best_bound(r, alpha, -alpha)` on the set itself.
    DirectTwoDistance,
    /// `2(r - 1)` at angle `1/3`.
    ThirdAngle,
    /// `148 + 3 s(r, 1/13, -5/13)` at angle `1/5`.
    FifthTwoDistance,
    /// `floor(148 + 648 r (r + 2)/(47 r + 169))` at angle `1/5`.
    FifthClosedForm,
}

impl AngleSource {
    pub fn tag(self) -> &'static str {
        match self {
            AngleSource::Pillar => "PILLAR",
            AngleSource::DirectTwoDistance => "DIRECT_TWO_DISTANCE",
            AngleSource::ThirdAngle => "THIRD_ANGLE",
            AngleSource::FifthTwoDistance => "FIFTH_TWO_DISTANCE",
            AngleSource::FifthClosedForm => "FIFTH_CLOSED_FORM",
        }
    }
}

impl std::fmt::Display for AngleSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub source: AngleSource,
    #[serde(serialize_with = "crate::serialize_opt_big")]
    pub value: Option<BigUint>,
    pub detail: String,
    /// Two-distance values this candidate used directly, with their source.
    pub inputs: Vec<(TwoDistanceQuery, Provenance)>,
}

fn is_sdp(p: Provenance) -> bool {
    matches!(p, Provenance::SdpCache | Provenance::SdpExternal)
}

impl Candidate {
    pub(crate) fn pillar(max: Option<&(BigUint, usize)>) -> Self {
        Candidate {
            source: AngleSource::Pillar,
            value: max.map(|(v, _)| v.clone()),
            detail: match max {
                Some((_, k)) => format!("worst base size K={k}"),
                None => "some base size has no bound".into(),
            },
            inputs: Vec::new(),
        }
    }

    pub(crate) fn direct(q: &TwoDistanceQuery, b: &BoundResult) -> Self {
        Candidate {
            source: AngleSource::DirectTwoDistance,
            value: b.value.clone(),
            detail: format!("[{}] {}", b.provenance, b.detail),
            inputs: vec![(q.clone(), b.provenance)],
        }
    }
}

/// Bound on `s_alpha(r)`: the minimum over all candidates that produced a
/// value, first candidate on ties.
#[derive(Debug, Clone, Serialize)]
pub struct AngleBound {
    pub r: u64,
    pub angle: Angle,
    #[serde(serialize_with = "crate::serialize_big")]
    pub value: BigUint,
    pub source: AngleSource,
    pub detail: String,
    pub winning_k: Option<usize>,
    pub candidates: Vec<Candidate>,
    pub breakdowns: Vec<PillarBreakdown>,
}

impl AngleBound {
    pub(crate) fn from_candidates(
        r: u64,
        angle: Angle,
        candidates: Vec<Candidate>,
        breakdowns: Vec<PillarBreakdown>,
        winning_k: Option<usize>,
    ) -> Result<Self, EngineError> {
        let best = candidates
            .iter()
            .filter_map(|c| c.value.as_ref().map(|v| (v, c)))
            .fold(None::<(&BigUint, &Candidate)>, |acc, (v, c)| match acc {
                Some((bv, _)) if bv <= v => acc,
                _ => Some((v, c)),
            });
        let Some((value, chosen)) = best else {
            let mut missing: Vec<TwoDistanceQuery> = breakdowns.iter().flat_map(|b| b.missing.iter().cloned()).collect();
            missing.sort();
            missing.dedup();
            return Err(EngineError::MissingData(missing));
        };
        Ok(AngleBound {
            r,
            angle,
            value: value.clone(),
            source: chosen.source,
            detail: chosen.detail.clone(),
            winning_k: if chosen.source == AngleSource::Pillar { winning_k } else { None },
            breakdowns: breakdowns.clone(),
            candidates,
        })
    }

    /// Two-distance queries behind the chosen candidate answered without an
    /// SDP value, so the bound may be weaker than a full SDP run would give.
    pub fn non_sdp_queries(&self) -> Vec<TwoDistanceQuery> {
        let mut qs: Vec<TwoDistanceQuery> = match self.source {
            AngleSource::Pillar => self.breakdowns.iter().flat_map(PillarBreakdown::non_sdp_queries).collect(),
            source => self
                .candidates
                .iter()
                .filter(|c| c.source == source)
                .flat_map(|c| c.inputs.iter().filter(|(_, p)| !is_sdp(*p)).map(|(q, _)| q.clone()))
                .collect(),
        };
        qs.sort();
        qs.dedup();
        qs
    }
}

/// Bound for a single angle, routed to the dedicated argument for `1/3`
/// and `1/5` and to the generic pipeline otherwise.
pub fn angle_bound(r: u64, angle: Angle, pipe: &Pipeline) -> Result<AngleBound, EngineError> {
    require_dimension(r)?;
    match angle.denom() {
        3 => AngleBound::from_candidates(
            r,
            angle,
            vec![Candidate {
                source: AngleSource::ThirdAngle,
                value: Some(bound_alpha_third(r)?),
                detail: "2(r - 1)".into(),
                inputs: Vec::new(),
            }],
            Vec::new(),
            None,
        ),
        5 => bound_alpha_fifth(r, pipe),
        _ => {
            let g = bound_alpha_generic(r, angle, pipe)?;
            let pillar = g.pillar_max.clone().zip(g.winning_k);
            AngleBound::from_candidates(
                r,
                angle,
                vec![Candidate::pillar(pillar.as_ref()), Candidate::direct(&g.direct_query, &g.direct)],
                g.breakdowns,
                g.winning_k,
            )
        }
    }
}

/// Bound on `s(r)` over every admissible angle, with the `2r + 3` branch
/// for sets without a common angle restriction.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    pub r: u64,
    pub per_angle: Vec<AngleBound>,
    #[serde(serialize_with = "crate::serialize_big")]
    pub overall: BigUint,
    /// Angles attaining `overall`; empty when only `2r + 3` does.
    pub arg_angles: Vec<Angle>,
    #[serde(serialize_with = "crate::serialize_big")]
    pub gerzon: BigUint,
    #[serde(serialize_with = "crate::serialize_big")]
    pub baseline: BigUint,
}

pub fn dimension_bound(r: u64, pipe: &Pipeline) -> Result<DimensionReport, EngineError> {
    let angles = enumerate_angles(r)?;
    let per_angle = angles.angles.iter().map(|&a| angle_bound(r, a, pipe)).collect::<Result<Vec<_>, _>>()?;
    Ok(DimensionReport::assemble(r, per_angle))
}

impl DimensionReport {
    /// Combines per-angle bounds; callers may pass a filtered angle list.
    pub fn assemble(r: u64, per_angle: Vec<AngleBound>) -> Self {
        let baseline = BigUint::from(2 * r + 3);
        let top = per_angle.iter().map(|a| &a.value).max().cloned();
        let overall = top.clone().map_or(baseline.clone(), |t| t.max(baseline.clone()));
        let arg_angles = per_angle.iter().filter(|a| a.value == overall).map(|a| a.angle).collect();
        DimensionReport { r, per_angle, overall, arg_angles, gerzon: gerzon(r), baseline }
    }

    /// Report restricted to one angle: `overall` is that angle's bound.
    pub fn single_angle(r: u64, bound: AngleBound) -> Self {
        DimensionReport {
            r,
            overall: bound.value.clone(),
            arg_angles: vec![bound.angle],
            per_angle: vec![bound],
            gerzon: gerzon(r),
            baseline: BigUint::from(2 * r + 3),
        }
    }

    pub fn angle(&self, angle: Angle) -> Option<&AngleBound> {
        self.per_angle.iter().find(|a| a.angle == angle)
    }

    /// Whether some angle attaining `overall` rests on non-SDP values.
    pub fn is_weaker(&self) -> bool {
        self.arg_angles.iter().filter_map(|a| self.angle(*a)).any(|b| !b.non_sdp_queries().is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_angle_through_the_router() {
        let pipe = Pipeline::standard();
        let b = angle_bound(236, Angle::new(7).unwrap(), &pipe).unwrap();
        assert_eq!((b.value.clone(), b.source, b.winning_k), (15673u32.into(), AngleSource::Pillar, Some(7)));
        // K = 4, 5, 6 are covered by cache values; K = 7 needs none
        assert!(b.non_sdp_queries().is_empty());
    }

    #[test]
    fn overall_is_at_least_the_baseline() {
        let pipe = Pipeline::standard();
        for r in [15u64, 16, 20, 30] {
            let rep = dimension_bound(r, &pipe).unwrap();
            assert!(rep.overall >= rep.baseline);
            for a in &rep.arg_angles {
                assert!(rep.per_angle.iter().any(|p| p.angle == *a && p.value == rep.overall));
            }
        }
    }

    #[test]
    fn sound_against_the_tabulated_values() {
        let pipe = Pipeline::standard();
        for r in [44u64, 47, 60, 61, 100] {
            match dimension_bound(r, &pipe) {
                Ok(rep) => {
                    let c = super::super::conjecture_formula(r).unwrap();
                    assert!(rep.overall >= c.value.into(), "r = {r}");
                }
                Err(EngineError::MissingData(qs)) => assert!(!qs.is_empty()),
                Err(e) => panic!("{e}"),
            }
        }
    }
}
