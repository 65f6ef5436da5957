//! Upper bounds on `s(r, beta, gamma)`, the largest set of unit vectors in
//! `R^r` whose pairwise inner products take only the values `beta` and
//! `gamma`, combined by minimum over whatever backends are enabled.

mod cache;
mod external;

pub use cache::{CacheEntry, CacheError, SdpCache, SHIPPED_CACHE};
pub use external::{external_sdp, ExternalSolver, SolverConfig, SolverError, SDP_CMD_ENV, SOLVER_VARIATION, within_variation};

use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("inner products must differ, got {0} twice")]
    Equal(Rational),
    #[error("inner product {0} must lie strictly between -1 and 1")]
    OutOfRange(Rational),
}

/// A two-distance query with `-1 < gamma < beta < 1`. The constructor
/// accepts the two values in either order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TwoDistanceQuery {
    r: u64,
    beta: Rational,
    gamma: Rational,
}

impl TwoDistanceQuery {
    pub fn new(r: u64, x: Rational, y: Rational) -> Result<Self, QueryError> {
        if r == 0 {
            return Err(QueryError::ZeroDimension);
        }
        let one = Rational::one();
        for v in [&x, &y] {
            if v.abs() >= one {
                return Err(QueryError::OutOfRange(v.clone()));
            }
        }
        let (beta, gamma) = match x.cmp(&y) {
            std::cmp::Ordering::Equal => return Err(QueryError::Equal(x)),
            std::cmp::Ordering::Greater => (x, y),
            std::cmp::Ordering::Less => (y, x),
        };
        Ok(TwoDistanceQuery { r, beta, gamma })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    /// With `beta >= 0` there are always `r` vectors at inner product `beta`,
    /// so no bound below `r` can be right.
    pub fn floor_value(&self) -> Option<BigUint> {
        (!self.beta.is_negative()).then(|| BigUint::from(self.r))
    }
}

impl fmt::Display for TwoDistanceQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s({}, {}, {})", self.r, self.beta, self.gamma)
    }
}

/// Where a bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    ClosedFormGy,
    NegativePair,
    LsThm41,
    SdpCache,
    SdpExternal,
    FallbackCap,
    /// `r - K` for the class with one positive sign when `ell < alpha`.
    RankArgument,
    /// `floor((1 - alpha) / (ell - alpha))` for a class whose members have
    /// pairwise inner products all equal to `alpha`.
    EigenvalueArgument,
}

impl Provenance {
    pub const ALL: [Provenance; 8] = [
        Provenance::ClosedFormGy,
        Provenance::NegativePair,
        Provenance::LsThm41,
        Provenance::SdpCache,
        Provenance::SdpExternal,
        Provenance::FallbackCap,
        Provenance::RankArgument,
        Provenance::EigenvalueArgument,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Provenance::ClosedFormGy => "CLOSED_FORM_GY",
            Provenance::NegativePair => "NEGATIVE_PAIR",
            Provenance::LsThm41 => "LS_THM41",
            Provenance::SdpCache => "SDP_CACHE",
            Provenance::SdpExternal => "SDP_EXTERNAL",
            Provenance::FallbackCap => "FALLBACK_CAP",
            Provenance::RankArgument => "RANK_ARGUMENT",
            Provenance::EigenvalueArgument => "EIGENVALUE_ARGUMENT",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundResult {
    #[serde(serialize_with = "crate::serialize_opt_big")]
    pub value: Option<BigUint>,
    pub provenance: Provenance,
    pub detail: String,
}

impl BoundResult {
    pub fn some(value: impl Into<BigUint>, provenance: Provenance, detail: impl Into<String>) -> Self {
        BoundResult { value: Some(value.into()), provenance, detail: detail.into() }
    }

    pub fn none(provenance: Provenance, detail: impl Into<String>) -> Self {
        BoundResult { value: None, provenance, detail: detail.into() }
    }

    pub fn is_some(&self) -> bool {
        self.value.is_some()
    }
}

/// `floor((r + 2) / (1 - (r - 1) / (r (1 - beta) (1 - gamma))))` when the
/// denominator is positive.
pub fn closed_form_gy(q: &TwoDistanceQuery) -> BoundResult {
    let one = Rational::one();
    let r = Rational::from(q.r);
    let prod = &r * (&one - &q.beta) * (&one - &q.gamma);
    let denom = &one - (&r - &one).checked_div(&prod).expect("(1 - beta)(1 - gamma) > 0");
    if !denom.is_positive() {
        return BoundResult::none(Provenance::ClosedFormGy, format!("denominator {denom} is not positive"));
    }
    let value = (&r + Rational::integer(2)).checked_div(&denom).expect("positive denominator");
    BoundResult::some(value.floor_natural(), Provenance::ClosedFormGy, format!("floor({value})"))
}

/// `r + 1` when both inner products are negative.
pub fn negative_pair_bound(q: &TwoDistanceQuery) -> BoundResult {
    if q.beta.is_negative() && q.gamma.is_negative() {
        BoundResult::some(q.r + 1, Provenance::NegativePair, "both inner products negative")
    } else {
        BoundResult::none(Provenance::NegativePair, "an inner product is nonnegative")
    }
}

/// `m + floor(2 alpha m / (1 - alpha))` with `m = r - K`, the bound for
/// `s(m, 0, -2 alpha / (1 - alpha))`. Gives 0 when `r <= K`.
pub fn ls_theorem41_bound(r: u64, alpha: &Rational, k: u64) -> BigUint {
    let m = Rational::from(r.saturating_sub(k));
    let extra = (Rational::integer(2) * alpha * &m)
        .checked_div(&(Rational::one() - alpha))
        .expect("alpha < 1");
    (m + Rational::integer(extra.floor())).floor_natural()
}

/// The classical absolute bound `r (r + 3) / 2` on any two-distance set.
pub fn fallback_cap(r: u64) -> BigUint {
    BigUint::from(r) * BigUint::from(r + 3) / 2u32
}

pub fn cache_lookup(q: &TwoDistanceQuery, cache: &SdpCache) -> BoundResult {
    match cache.get(q) {
        Some(entry) => BoundResult::some(entry.bound.clone(), Provenance::SdpCache, format!("cache source {}", entry.source)),
        None => BoundResult::none(Provenance::SdpCache, "not in cache"),
    }
}

/// Backend selector as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    ClosedForm,
    NegativePair,
    Cache,
    External,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "closed-form" | "gy" => Ok(BackendKind::ClosedForm),
            "negative-pair" => Ok(BackendKind::NegativePair),
            "cache" => Ok(BackendKind::Cache),
            "external" | "sdp" => Ok(BackendKind::External),
            other => Err(format!("unknown backend `{other}` (expected closed-form, negative-pair, cache or external)")),
        }
    }
}

/// Enabled backends. The cache is shared: lookups take a read lock, results
/// from the external solver are recorded under the write lock.
#[derive(Debug, Default)]
pub struct Backends {
    pub closed_form: bool,
    pub negative_pair: bool,
    pub cache: Option<RwLock<SdpCache>>,
    pub external: Option<ExternalSolver>,
}

impl Backends {
    pub fn none() -> Self {
        Backends::default()
    }

    /// Closed form, negative-pair rule and the shipped cache.
    pub fn standard() -> Self {
        Backends {
            closed_form: true,
            negative_pair: true,
            cache: Some(RwLock::new(SdpCache::shipped())),
            external: None,
        }
    }

    pub fn from_kinds(kinds: &[BackendKind], cache: SdpCache, external: Option<ExternalSolver>) -> Self {
        Backends {
            closed_form: kinds.contains(&BackendKind::ClosedForm),
            negative_pair: kinds.contains(&BackendKind::NegativePair),
            cache: kinds.contains(&BackendKind::Cache).then(|| RwLock::new(cache)),
            external: if kinds.contains(&BackendKind::External) { external } else { None },
        }
    }

    /// Copy of the current cache contents, if the cache backend is enabled.
    pub fn cache_snapshot(&self) -> Option<SdpCache> {
        self.cache.as_ref().map(|c| c.read().expect("cache lock").clone())
    }

    /// Every backend result for `q`, including inapplicable ones. The
    /// external solver is only consulted on a cache miss.
    pub fn evaluate(&self, q: &TwoDistanceQuery) -> Vec<BoundResult> {
        let mut out = Vec::new();
        if self.negative_pair {
            out.push(negative_pair_bound(q));
        }
        if self.closed_form {
            out.push(closed_form_gy(q));
        }
        let mut cached = false;
        if let Some(cache) = &self.cache {
            let hit = cache_lookup(q, &cache.read().expect("cache lock"));
            cached = hit.is_some();
            out.push(hit);
        }
        if !cached {
            out.push(external_sdp(q, self.external.as_ref(), self.cache.as_ref()));
        }
        out
    }
}

/// Minimum over all applicable backend values. Values below `r` for
/// `beta >= 0` contradict the trivial lower bound and are discarded with a
/// warning. With nothing left, `r (r + 3) / 2` is returned only when the
/// fallback is allowed.
pub fn best_bound(q: &TwoDistanceQuery, backends: &Backends, allow_fallback: bool) -> BoundResult {
    let floor = q.floor_value();
    let mut best: Option<BoundResult> = None;
    let mut notes = Vec::new();
    for res in backends.evaluate(q) {
        let Some(v) = &res.value else { continue };
        if let Some(lo) = &floor {
            if v < lo {
                log::warn!("{q}: discarding {} = {v} below the trivial lower bound {lo}", res.provenance);
                notes.push(format!("{}={v} discarded", res.provenance));
                continue;
            }
        }
        notes.push(format!("{}={v}", res.provenance));
        if best.as_ref().and_then(|b| b.value.as_ref()).is_none_or(|b| v < b) {
            best = Some(res);
        }
    }
    match best {
        Some(mut b) => {
            if notes.len() > 1 {
                b.detail = format!("{}; {}", b.detail, notes.join(", "));
            }
            b
        }
        None if allow_fallback => BoundResult::some(
            fallback_cap(q.r),
            Provenance::FallbackCap,
            "absolute two-distance cap r(r+3)/2 outside the relative bounds",
        ),
        None => BoundResult::none(Provenance::FallbackCap, "no backend applies"),
    }
}
