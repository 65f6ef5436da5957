use num_bigint::BigUint;
use serde::Serialize;

use super::{EngineError, Pipeline};
use crate::rational::{beta_gamma, binomial, ell, ell_regime, Angle, Rational, Regime};
use crate::two_distance::{ls_theorem41_bound, BoundResult, Provenance, TwoDistanceQuery};

/// Which class bound was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    /// `n = 1`, `ell <= alpha`: orthogonal complements are mutually
    /// orthogonal, at most `r - K` of them.
    OnePositiveRank,
    /// `n = 1`, `ell > alpha`: all members pairwise at `+alpha`.
    OnePositiveEigenvalue,
    /// `n > 1`, `ell > alpha`: both rescaled inner products negative.
    NegativePair,
    /// `ell = alpha`: rescaled inner products `0` and `-2 alpha / (1 - alpha)`.
    BalancedRegime,
    /// `ell < alpha`: a general two-distance set.
    TwoDistance,
    /// `K = 1/alpha + 1`: the single balanced class.
    Extremal,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRow {
    pub n: usize,
    #[serde(serialize_with = "crate::serialize_big")]
    pub count: BigUint,
    pub bound: BoundResult,
    pub case: CaseTag,
    pub query: Option<TwoDistanceQuery>,
}

/// A sharper bound for a whole base size, replacing the pillar sum when
/// smaller.
#[derive(Debug, Clone, Serialize)]
pub struct Refinement {
    pub label: &'static str,
    #[serde(serialize_with = "crate::serialize_big")]
    pub value: BigUint,
    pub detail: String,
}

/// Class-by-class bound for one base size.
#[derive(Debug, Clone, Serialize)]
pub struct PillarBreakdown {
    pub r: u64,
    pub alpha: Angle,
    pub k: usize,
    pub rows: Vec<ClassRow>,
    /// `K + sum count * bound`, absent if some class has no bound.
    #[serde(serialize_with = "crate::serialize_opt_big")]
    pub pillar_total: Option<BigUint>,
    pub refinements: Vec<Refinement>,
    /// Minimum of the pillar total and the refinements.
    #[serde(serialize_with = "crate::serialize_opt_big")]
    pub total: Option<BigUint>,
    /// Two-distance queries that no backend answered.
    pub missing: Vec<TwoDistanceQuery>,
}

impl PillarBreakdown {
    fn new(r: u64, alpha: Angle, k: usize, rows: Vec<ClassRow>) -> Self {
        let mut missing = Vec::new();
        let mut sum = Some(BigUint::from(k));
        for row in &rows {
            match (&row.bound.value, &mut sum) {
                (Some(v), Some(s)) => *s += &row.count * v,
                (None, _) => {
                    if let Some(q) = &row.query {
                        missing.push(q.clone());
                    }
                    sum = None;
                }
                _ => {}
            }
        }
        PillarBreakdown { r, alpha, k, rows, total: sum.clone(), pillar_total: sum, refinements: Vec::new(), missing }
    }

    pub fn refine(&mut self, label: &'static str, value: BigUint, detail: impl Into<String>) {
        if self.total.as_ref().is_none_or(|t| &value < t) {
            self.total = Some(value.clone());
        }
        self.refinements.push(Refinement { label, value, detail: detail.into() });
    }

    pub fn is_complete(&self) -> bool {
        self.total.is_some()
    }

    /// Queries answered by a closed form or the fallback cap rather than an
    /// SDP value.
    pub fn non_sdp_queries(&self) -> Vec<TwoDistanceQuery> {
        self.rows
            .iter()
            .filter(|row| {
                row.query.is_some()
                    && !matches!(row.bound.provenance, Provenance::SdpCache | Provenance::SdpExternal)
            })
            .filter_map(|row| row.query.clone())
            .collect()
    }
}

/// `C(K, n)` ordered patterns with `n` positive signs, halved when `2n = K`
/// because a pattern and its negation then both have `n` positives.
fn class_count(k: usize, n: usize) -> BigUint {
    let c = binomial(k as u64, n as u64);
    if 2 * n == k {
        c / 2u32
    } else {
        c
    }
}

fn floor_u(x: &Rational) -> BigUint {
    x.floor_natural()
}

/// Pillar bound for a non-extremal base size `2 <= K < 1/alpha + 1`.
pub fn bound_small_k(r: u64, alpha: Angle, k: usize, pipe: &Pipeline) -> Result<PillarBreakdown, EngineError> {
    let max = alpha.extremal_base() - 1;
    if k < 2 || k > max {
        return Err(EngineError::InvalidBase { k, max });
    }
    if r <= k as u64 {
        return Err(EngineError::NotAboveBase { r, k });
    }
    let a = alpha.as_rational();
    let mut rows = Vec::with_capacity(k / 2);
    for n in 1..=k / 2 {
        let l = ell(&a, k, n)?;
        let regime = ell_regime(&a, k, n)?;
        let (bound, case, query) = match (n, regime) {
            (1, Regime::BelowAlpha | Regime::EqualAlpha) => (
                BoundResult::some(r - k as u64, Provenance::RankArgument, format!("r - K with ell = {l}")),
                CaseTag::OnePositiveRank,
                None,
            ),
            (1, Regime::AboveAlpha) => {
                let v = (Rational::one() - &a).checked_div(&(&l - &a))?;
                (
                    BoundResult::some(floor_u(&v), Provenance::EigenvalueArgument, format!("floor((1 - alpha)/(ell - alpha)) = floor({v})")),
                    CaseTag::OnePositiveEigenvalue,
                    None,
                )
            }
            (_, Regime::AboveAlpha) => (
                BoundResult::some(r + 1, Provenance::NegativePair, format!("r + 1 with ell = {l}")),
                CaseTag::NegativePair,
                None,
            ),
            (_, Regime::EqualAlpha) => (
                BoundResult::some(ls_theorem41_bound(r, &a, k as u64), Provenance::LsThm41, "r - K + floor(2 alpha (r - K)/(1 - alpha))"),
                CaseTag::BalancedRegime,
                None,
            ),
            (_, Regime::BelowAlpha) => {
                let (b, g) = beta_gamma(&a, &l)?;
                let q = TwoDistanceQuery::new(r, b, g)?;
                (pipe.two_distance(&q), CaseTag::TwoDistance, Some(q))
            }
        };
        rows.push(ClassRow { n, count: class_count(k, n), bound, case, query });
    }
    Ok(PillarBreakdown::new(r, alpha, k, rows))
}

/// Bound for the extremal base size `K = 1/alpha + 1`: a single class of
/// balanced patterns, `C(K, K/2)/2` of them.
pub fn bound_extremal_k(r: u64, alpha: Angle) -> Result<PillarBreakdown, EngineError> {
    let k = alpha.extremal_base();
    if r <= k as u64 {
        return Err(EngineError::NotAboveBase { r, k });
    }
    let per = ls_theorem41_bound(r + 1, &alpha.as_rational(), k as u64);
    let row = ClassRow {
        n: k / 2,
        count: class_count(k, k / 2),
        bound: BoundResult::some(per, Provenance::LsThm41, "r - K + 1 + floor(2 alpha (r - K + 1)/(1 - alpha))"),
        case: CaseTag::Extremal,
        query: None,
    };
    Ok(PillarBreakdown::new(r, alpha, k, vec![row]))
}

/// Outcome of the generic pipeline for one angle.
#[derive(Debug, Clone, Serialize)]
pub struct GenericBound {
    /// Maximum total over all base sizes, when every size has one.
    #[serde(serialize_with = "crate::serialize_opt_big")]
    pub pillar_max: Option<BigUint>,
    pub winning_k: Option<usize>,
    pub breakdowns: Vec<PillarBreakdown>,
    /// `best_bound(r, alpha, -alpha)` on the set itself.
    pub direct: BoundResult,
    pub direct_query: TwoDistanceQuery,
    #[serde(serialize_with = "crate::serialize_big")]
    pub value: BigUint,
    pub from_direct: bool,
}

/// Largest total among `breakdowns`, first maximizer on ties.
pub(crate) fn max_total(breakdowns: &[PillarBreakdown]) -> Option<(BigUint, usize)> {
    let mut best: Option<(BigUint, usize)> = None;
    for b in breakdowns {
        let t = b.total.clone()?;
        if best.as_ref().is_none_or(|(v, _)| &t > v) {
            best = Some((t, b.k));
        }
    }
    best
}

pub(crate) fn direct_bound(r: u64, alpha: Angle, pipe: &Pipeline) -> Result<(TwoDistanceQuery, BoundResult), EngineError> {
    let a = alpha.as_rational();
    let q = TwoDistanceQuery::new(r, a.clone(), -a)?;
    let b = pipe.two_distance(&q);
    Ok((q, b))
}

/// Combines a maximum over base sizes with the direct bound.
pub(crate) fn combine(pillar: Option<(BigUint, usize)>, direct: &BoundResult, breakdowns: &[PillarBreakdown]) -> Result<(BigUint, bool), EngineError> {
    match (pillar, &direct.value) {
        (Some((p, _)), Some(d)) if d < &p => Ok((d.clone(), true)),
        (Some((p, _)), _) => Ok((p, false)),
        (None, Some(d)) => Ok((d.clone(), true)),
        (None, None) => {
            let mut missing: Vec<TwoDistanceQuery> = breakdowns.iter().flat_map(|b| b.missing.iter().cloned()).collect();
            missing.sort();
            missing.dedup();
            Err(EngineError::MissingData(missing))
        }
    }
}

/// Generic pipeline for `1/alpha >= 7`: every base size from 2 up to the
/// extremal one, worst case over sizes, then the direct bound if smaller.
pub fn bound_alpha_generic(r: u64, alpha: Angle, pipe: &Pipeline) -> Result<GenericBound, EngineError> {
    if alpha.denom() < 7 {
        return Err(EngineError::SpecialAngle(alpha));
    }
    let kmax = alpha.extremal_base();
    if r <= kmax as u64 {
        return Err(EngineError::NotAboveBase { r, k: kmax });
    }
    let mut breakdowns = (2..kmax).map(|k| bound_small_k(r, alpha, k, pipe)).collect::<Result<Vec<_>, _>>()?;
    breakdowns.push(bound_extremal_k(r, alpha)?);
    let pillar = max_total(&breakdowns);
    let (direct_query, direct) = direct_bound(r, alpha, pipe)?;
    let (value, from_direct) = combine(pillar.clone(), &direct, &breakdowns)?;
    Ok(GenericBound {
        pillar_max: pillar.as_ref().map(|(v, _)| v.clone()),
        winning_k: pillar.map(|(_, k)| k),
        breakdowns,
        direct,
        direct_query,
        value,
        from_direct,
    })
}
