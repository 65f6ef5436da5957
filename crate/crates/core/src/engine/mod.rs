//! The bound pipeline: for a dimension `r` and angle `alpha` enumerate the
//! possible base sizes `K`, bound every pillar class, sum per `K` and take
//! the worst `K`; then take the worst angle to bound `s(r)`.

mod dimension;
mod fifth;
mod pillar;

pub use dimension::{angle_bound, dimension_bound, AngleBound, AngleSource, Candidate, DimensionReport};
pub use fifth::{bound_alpha_fifth, fifth_by_base, fifth_closed_form, fifth_k4_refined, fifth_k5_refined, fifth_k6_refined};
pub use pillar::{bound_alpha_generic, bound_extremal_k, bound_small_k, CaseTag, ClassRow, GenericBound, PillarBreakdown, Refinement};

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{Angle, RationalError};
use crate::two_distance::{best_bound, BoundResult, Backends, QueryError, TwoDistanceQuery};

/// Smallest dimension handled by the pipeline.
pub const MIN_DIMENSION: u64 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("dimension {r} is below the supported minimum {min}")]
    DimensionTooSmall { r: u64, min: u64 },
    #[error("dimension {r} must exceed the base size {k}")]
    NotAboveBase { r: u64, k: usize },
    #[error("base size {k} outside 2..={max}")]
    InvalidBase { k: usize, max: usize },
    #[error("angle {0} has a dedicated bound and is not handled by the generic pipeline")]
    SpecialAngle(Angle),
    #[error("no valid bound without these two-distance values: {}", format_queries(.0))]
    MissingData(Vec<TwoDistanceQuery>),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

fn format_queries(qs: &[TwoDistanceQuery]) -> String {
    qs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Backends plus the fallback switch, shared read-only by all evaluations.
#[derive(Debug, Default)]
pub struct Pipeline {
    pub backends: Backends,
    pub allow_fallback: bool,
}

impl Pipeline {
    pub fn new(backends: Backends, allow_fallback: bool) -> Self {
        Pipeline { backends, allow_fallback }
    }

    pub fn standard() -> Self {
        Pipeline::new(Backends::standard(), false)
    }

    pub fn two_distance(&self, q: &TwoDistanceQuery) -> BoundResult {
        best_bound(q, &self.backends, self.allow_fallback)
    }
}

fn require_dimension(r: u64) -> Result<(), EngineError> {
    if r < MIN_DIMENSION {
        return Err(EngineError::DimensionTooSmall { r, min: MIN_DIMENSION });
    }
    Ok(())
}

/// All angles `1/d`, `d` odd, `3 <= d`, `d^2 <= 2r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AngleSet {
    pub r: u64,
    pub angles: Vec<Angle>,
}

pub fn enumerate_angles(r: u64) -> Result<AngleSet, EngineError> {
    require_dimension(r)?;
    let angles = (3u64..)
        .step_by(2)
        .take_while(|d| d * d <= 2 * r)
        .map(|d| Angle::new(d).expect("odd and >= 3"))
        .collect();
    Ok(AngleSet { r, angles })
}

/// `2(r - 1)`, valid for angle `1/3` once `r >= 15`.
pub fn bound_alpha_third(r: u64) -> Result<BigUint, EngineError> {
    require_dimension(r)?;
    Ok(BigUint::from(2 * (r - 1)))
}

pub fn gerzon(r: u64) -> BigUint {
    BigUint::from(r) * BigUint::from(r + 1) / 2u32
}

/// Dimensions where the conjectured maximum comes from the next larger
/// odd angle denominator.
pub const EXCEPTIONAL_DIMENSIONS: [u64; 12] = [44, 45, 46, 76, 77, 78, 117, 118, 166, 222, 286, 358];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConjectureBranch {
    Exceptional,
    Plateau,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjectureValue {
    pub value: u64,
    pub angle: Angle,
    pub branch: ConjectureBranch,
}

/// Closed form of the tabulated bounds for `r >= 44`, with `m` the largest
/// integer such that `(2m + 1)^2 <= r + 2`.
pub fn conjecture_formula(r: u64) -> Result<ConjectureValue, EngineError> {
    if r < 44 {
        return Err(EngineError::DimensionTooSmall { r, min: 44 });
    }
    let mut m = 0u64;
    while (2 * m + 3) * (2 * m + 3) <= r + 2 {
        m += 1;
    }
    if EXCEPTIONAL_DIMENSIONS.contains(&r) {
        let d = 2 * m + 3;
        let value = 4 * r * (m + 1) * (m + 2) / (d * d - r);
        Ok(ConjectureValue { value, angle: Angle::new(d)?, branch: ConjectureBranch::Exceptional })
    } else {
        let d = 2 * m + 1;
        let sq = d * d;
        Ok(ConjectureValue { value: (sq - 2) * (sq - 1) / 2, angle: Angle::new(d)?, branch: ConjectureBranch::Plateau })
    }
}
