use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::vectors::dot;
use super::{psd_check_with, GramError, GramianMatrix, NegativeClique, VectorSet};
use crate::rational::{ell, projection_coefficients, Rational, SignVector};

/// Non-base vectors grouped by sign pattern against a fixed `K`-base, each
/// pattern identified with its negation.
#[derive(Debug, Clone, Serialize)]
pub struct PillarPartition {
    pub base: Vec<usize>,
    pub classes: BTreeMap<SignVector, Vec<usize>>,
}

impl PillarPartition {
    pub fn base_size(&self) -> usize {
        self.base.len()
    }

    /// Class keys grouped by `n = min(#positives, K - #positives)`.
    pub fn by_level(&self) -> BTreeMap<usize, Vec<&SignVector>> {
        let mut out: BTreeMap<usize, Vec<&SignVector>> = BTreeMap::new();
        for key in self.classes.keys() {
            out.entry(key.class_level()).or_default().push(key);
        }
        out
    }

    pub fn covered(&self) -> usize {
        self.base.len() + self.classes.values().map(Vec::len).sum::<usize>()
    }
}

fn extremal(alpha: &Rational, k: usize) -> bool {
    alpha.recip().map(|inv| inv + Rational::one() == Rational::from(k)).unwrap_or(false)
}

/// Assigns every non-base vector to the class of its sign pattern against
/// the flipped base.
pub fn pillar_partition(g: &GramianMatrix, alpha: &Rational, base: &NegativeClique) -> Result<PillarPartition, GramError> {
    let k = base.base.len();
    let neg = -alpha;
    for a in 0..k {
        for b in (a + 1)..k {
            let v = g.get(base.base[a], base.base[b]) * Rational::integer((base.flips[a] * base.flips[b]) as i64);
            if v != neg {
                return Err(GramError::InvalidBase(base.base.clone()));
            }
        }
    }
    let is_extremal = extremal(alpha, k);
    let mut classes: BTreeMap<SignVector, Vec<usize>> = BTreeMap::new();
    for x in 0..g.size() {
        if base.base.contains(&x) {
            continue;
        }
        let entries = base
            .base
            .iter()
            .zip(&base.flips)
            .map(|(&b, &f)| if g.get(x, b).is_negative() { -f } else { f })
            .collect();
        let eps = SignVector::new(entries)?;
        if is_extremal {
            if eps.sum() != 0 {
                return Err(GramError::UnbalancedPattern { index: x });
            }
        } else if eps.is_constant() {
            return Err(GramError::ConstantPattern { index: x });
        }
        classes.entry(eps.canonical()).or_default().push(x);
    }
    Ok(PillarPartition { base: base.base.clone(), classes })
}

/// Decomposition `x = h + c` of a vector against the span of a base.
#[derive(Debug, Clone, Serialize)]
pub struct Projection {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub pattern: SignVector,
    /// Number of positive entries of `pattern`.
    pub n: usize,
    /// `<h, h>` as computed from the vectors.
    pub h_norm_sq: f64,
    /// `<h, h>` predicted exactly: `ell(K, n)`, or `alpha` at the extremal size.
    pub expected_norm_sq: Rational,
    /// `max_i |<c, p_i>|`.
    pub orthogonality: f64,
    /// `|x - h - c|`.
    pub reconstruction: f64,
}

/// Projects `vs[x]` onto the span of the flipped base vectors using the
/// exact coefficients, or `h = (1/K) sum eps_i p_i` for an extremal base.
pub fn project_decompose(vs: &VectorSet, base: &NegativeClique, x: usize) -> Result<Projection, GramError> {
    if x >= vs.len() || base.base.contains(&x) {
        return Err(GramError::BadIndex(x));
    }
    let alpha = &vs.alpha;
    let a = alpha.to_f64();
    let k = base.base.len();
    let p: Vec<Vec<f64>> = base
        .base
        .iter()
        .zip(&base.flips)
        .map(|(&b, &f)| vs.vectors[b].iter().map(|t| t * f as f64).collect())
        .collect();
    let xv = &vs.vectors[x];

    let mut entries = Vec::with_capacity(k);
    for (i, pi) in p.iter().enumerate() {
        let ip = dot(xv, pi);
        if (ip - a).abs() <= vs.tolerance {
            entries.push(1);
        } else if (ip + a).abs() <= vs.tolerance {
            entries.push(-1);
        } else {
            return Err(GramError::NotEquiangular { alpha: alpha.clone(), violations: vec![(x, base.base[i], ip)] });
        }
    }
    let pattern = SignVector::new(entries)?;
    let n = pattern.positive_count();

    let (coeffs, expected_norm_sq) = if extremal(alpha, k) {
        let c: Vec<f64> = pattern.entries().iter().map(|&e| e as f64 / k as f64).collect();
        (c, alpha.clone())
    } else {
        let pg = DMatrix::from_fn(k, k, |i, j| dot(&p[i], &p[j]));
        let report = psd_check_with(&pg, 0.0);
        if report.min_eigenvalue <= vs.tolerance {
            return Err(GramError::DependentBase(report.min_eigenvalue));
        }
        let exact = projection_coefficients(alpha, &pattern)?;
        (exact.iter().map(Rational::to_f64).collect(), ell(alpha, k, n)?)
    };

    let mut h = vec![0.0; vs.dim];
    for (ci, pi) in coeffs.iter().zip(&p) {
        for (hj, pj) in h.iter_mut().zip(pi) {
            *hj += ci * pj;
        }
    }
    let c: Vec<f64> = xv.iter().zip(&h).map(|(xi, hi)| xi - hi).collect();
    let orthogonality = p.iter().map(|pi| dot(&c, pi).abs()).fold(0.0, f64::max);
    let reconstruction = xv
        .iter()
        .zip(&h)
        .zip(&c)
        .map(|((xi, hi), ci)| (xi - hi - ci).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(Projection {
        h_norm_sq: dot(&h, &h),
        h,
        c,
        pattern,
        n,
        expected_norm_sq,
        orthogonality,
        reconstruction,
    })
}
