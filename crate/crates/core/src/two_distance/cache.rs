use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use thiserror::Error;

use super::TwoDistanceQuery;
use crate::rational::Rational;

/// Cache contents shipped with the crate.
pub const SHIPPED_CACHE: &str = include_str!("../../data/sdp_cache.txt");

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub bound: BigUint,
    pub source: String,
}

/// Exact-key store of externally computed bounds on `s(r, beta, gamma)`.
///
/// File format, one record per line, `#` starts a comment:
/// `r beta_num/beta_den gamma_num/gamma_den bound source`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SdpCache {
    entries: BTreeMap<TwoDistanceQuery, CacheEntry>,
}

impl SdpCache {
    pub fn shipped() -> Self {
        Self::parse(SHIPPED_CACHE).expect("shipped cache is well formed")
    }

    pub fn parse(text: &str) -> Result<Self, CacheError> {
        let mut cache = SdpCache::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| CacheError::Malformed { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(bad(format!("expected 5 fields, got {}", fields.len())));
            }
            let r: u64 = fields[0].parse().map_err(|_| bad(format!("bad dimension `{}`", fields[0])))?;
            let beta: Rational = fields[1].parse().map_err(|e| bad(format!("{e}")))?;
            let gamma: Rational = fields[2].parse().map_err(|e| bad(format!("{e}")))?;
            let bound: BigUint = fields[3].parse().map_err(|_| bad(format!("bad bound `{}`", fields[3])))?;
            let q = TwoDistanceQuery::new(r, beta, gamma).map_err(|e| bad(e.to_string()))?;
            if let Some(lo) = q.floor_value() {
                if bound < lo {
                    return Err(bad(format!("bound {bound} for {q} is below the dimension")));
                }
            }
            cache.insert(q, bound, fields[4]);
        }
        Ok(cache)
    }

    pub fn load(path: &Path) -> Result<Self, CacheError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# r beta gamma bound source\n");
        for (q, e) in &self.entries {
            writeln!(out, "{} {} {} {} {}", q.r(), q.beta(), q.gamma(), e.bound, e.source).unwrap();
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), CacheError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn get(&self, q: &TwoDistanceQuery) -> Option<&CacheEntry> {
        self.entries.get(q)
    }

    /// Records a bound, keeping the smaller value if the key exists.
    /// Returns whether the stored entry changed.
    pub fn insert(&mut self, q: TwoDistanceQuery, bound: BigUint, source: &str) -> bool {
        match self.entries.get(&q) {
            Some(old) if old.bound <= bound => false,
            _ => {
                self.entries.insert(q, CacheEntry { bound, source: source.replace(char::is_whitespace, "_") });
                true
            }
        }
    }

    /// Overwrites without the keep-minimum rule.
    pub fn insert_unchecked(&mut self, q: TwoDistanceQuery, bound: BigUint, source: &str) {
        self.entries.insert(q, CacheEntry { bound, source: source.to_string() });
    }

    /// Merges `other` into `self` entry by entry with the keep-minimum rule.
    /// Returns the number of entries added or improved.
    pub fn merge(&mut self, other: &SdpCache) -> usize {
        other
            .entries
            .iter()
            .filter(|(q, e)| self.insert((*q).clone(), e.bound.clone(), &e.source))
            .count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TwoDistanceQuery, &CacheEntry)> {
        self.entries.iter()
    }
}
