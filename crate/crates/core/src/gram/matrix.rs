use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{GramError, VectorSet, Violation, DEFAULT_TOLERANCE};
use crate::rational::Rational;

/// Exact symmetric matrix of mutual inner products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramianMatrix {
    entries: Vec<Vec<Rational>>,
    unit_diagonal: bool,
}

impl GramianMatrix {
    pub fn from_rows(entries: Vec<Vec<Rational>>) -> Result<Self, GramError> {
        let s = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != s {
                return Err(GramError::DimensionMismatch { index: i, len: row.len(), dim: s });
            }
        }
        for i in 0..s {
            for j in (i + 1)..s {
                if entries[i][j] != entries[j][i] {
                    return Err(GramError::NotSymmetric(i, j));
                }
            }
        }
        let unit_diagonal = (0..s).all(|i| entries[i][i] == Rational::one());
        Ok(GramianMatrix { entries, unit_diagonal })
    }

    /// `(a - b) I + b J` of size `s`.
    pub fn structured(a: &Rational, b: &Rational, s: usize) -> Self {
        let entries = (0..s)
            .map(|i| (0..s).map(|j| if i == j { a.clone() } else { b.clone() }).collect())
            .collect();
        GramianMatrix { entries, unit_diagonal: *a == Rational::one() }
    }

    /// `(1 + alpha) I - alpha J`, the Gramian of a negative clique.
    pub fn negative_clique(alpha: &Rational, k: usize) -> Self {
        Self::structured(&Rational::one(), &-alpha, k)
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn has_unit_diagonal(&self) -> bool {
        self.unit_diagonal
    }

    /// Unit diagonal and every off-diagonal entry equal to `alpha` or `-alpha`.
    pub fn is_equiangular(&self, alpha: &Rational) -> bool {
        let neg = -alpha;
        self.unit_diagonal
            && (0..self.size()).all(|i| {
                (0..self.size()).all(|j| i == j || self.entries[i][j] == *alpha || self.entries[i][j] == neg)
            })
    }

    pub fn principal(&self, indices: &[usize]) -> Self {
        let entries = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.entries[i][j].clone()).collect())
            .collect();
        GramianMatrix::from_rows(entries).expect("principal submatrix of a symmetric matrix")
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let s = self.size();
        DMatrix::from_fn(s, s, |i, j| self.entries[i][j].to_f64())
    }
}

/// Snaps the floating inner products of `vs` to `1` on the diagonal and
/// `+-alpha` off it; every entry further than the tolerance from its target
/// is reported.
pub fn gramian(vs: &VectorSet) -> Result<GramianMatrix, GramError> {
    if vs.is_empty() {
        return Err(GramError::Empty);
    }
    let s = vs.len();
    let alpha = vs.alpha.clone();
    let a = alpha.to_f64();
    let mut violations: Vec<Violation> = Vec::new();
    let mut entries = vec![vec![Rational::zero(); s]; s];
    for i in 0..s {
        let p = vs.dot(i, i);
        if (p - 1.0).abs() > vs.tolerance {
            violations.push((i, i, p));
        }
        entries[i][i] = Rational::one();
        for j in (i + 1)..s {
            let p = vs.dot(i, j);
            let value = if (p - a).abs() <= vs.tolerance {
                alpha.clone()
            } else if (p + a).abs() <= vs.tolerance {
                -&alpha
            } else {
                violations.push((i, j, p));
                continue;
            };
            entries[i][j] = value.clone();
            entries[j][i] = value;
        }
    }
    if !violations.is_empty() {
        return Err(GramError::NotEquiangular { alpha, violations });
    }
    GramianMatrix::from_rows(entries)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Eigenpair {
    pub value: Rational,
    pub multiplicity: usize,
}

/// Eigenvalues of `(a - b) I + b J` of size `s`: the simple `a + (s-1) b`
/// and `a - b` with multiplicity `s - 1`.
pub fn structured_eigenvalues(a: &Rational, b: &Rational, s: usize) -> (Eigenpair, Eigenpair) {
    let simple = a + b * Rational::from(s.saturating_sub(1));
    (
        Eigenpair { value: simple, multiplicity: 1 },
        Eigenpair { value: a - b, multiplicity: s.saturating_sub(1) },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdReport {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

pub fn psd_check(g: &GramianMatrix) -> PsdReport {
    psd_check_with(&g.to_f64(), DEFAULT_TOLERANCE)
}

/// Positive semidefinite iff the smallest eigenvalue is at least `-tolerance`.
pub fn psd_check_with(m: &DMatrix<f64>, tolerance: f64) -> PsdReport {
    if m.nrows() == 0 {
        return PsdReport { psd: true, min_eigenvalue: 0.0 };
    }
    let eig = SymmetricEigen::new(m.clone());
    let min_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    PsdReport { psd: min_eigenvalue >= -tolerance, min_eigenvalue }
}

/// Necessary condition `sum i_k^2 <= a b` for the bordered matrix with
/// diagonal block `a I_s`, border `(i_1, ..., i_s)` and corner `b` to be
/// positive semidefinite (meaningful for `s > 2`).
pub fn bordered_psd_bound(a: &Rational, b: &Rational, inner_products: &[Rational]) -> bool {
    let total = inner_products.iter().fold(Rational::zero(), |acc, i| acc + i * i);
    total <= a * b
}

/// Largest `s` for which `s` border entries of absolute value at least
/// `min_abs` can satisfy the bordered condition: `floor(a b / min_abs^2)`.
pub fn bordered_size_limit(a: &Rational, b: &Rational, min_abs: &Rational) -> Result<num_bigint::BigInt, GramError> {
    Ok((a * b).checked_div(&(min_abs * min_abs))?.floor())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn orthonormal_pair_is_not_equiangular_at_one_third() {
        let vs = VectorSet::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], q("1/3")).unwrap();
        match gramian(&vs) {
            Err(GramError::NotEquiangular { violations, .. }) => {
                assert_eq!(violations.len(), 1);
                assert_eq!((violations[0].0, violations[0].1), (0, 1));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn tetrahedron_gramian() {
        let c = 1.0 / 3f64.sqrt();
        let vs = VectorSet::new(
            3,
            vec![vec![c, c, c], vec![c, -c, -c], vec![-c, c, -c], vec![-c, -c, c]],
            q("1/3"),
        )
        .unwrap();
        let g = gramian(&vs).unwrap();
        assert_eq!(g, GramianMatrix::negative_clique(&q("1/3"), 4));
        assert!(g.is_equiangular(&q("1/3")));
    }

    #[test]
    fn structured_eigenvalue_examples() {
        let (l1, l2) = structured_eigenvalues(&q("1"), &q("-1/5"), 6);
        assert_eq!((l1.value, l2.value, l2.multiplicity), (q("0"), q("6/5"), 5));
        let (l1, l2) = structured_eigenvalues(&q("1"), &q("0"), 9);
        assert_eq!((l1.value, l2.value), (q("1"), q("1")));
        let r = 17;
        let (l1, l2) = structured_eigenvalues(&q("1"), &q("1/13"), r);
        assert_eq!(l1.value, q("1") + q("16/13"));
        assert_eq!(l2.value, q("12/13"));
    }

    #[test]
    fn psd_at_and_beyond_the_extremal_clique() {
        let a = q("1/5");
        let at = psd_check(&GramianMatrix::negative_clique(&a, 6));
        assert!(at.psd);
        assert!(at.min_eigenvalue.abs() < 1e-12);
        let beyond = psd_check(&GramianMatrix::negative_clique(&a, 7));
        assert!(!beyond.psd);
        assert!((beyond.min_eigenvalue + 0.2).abs() < 1e-12);
        assert!(psd_check(&GramianMatrix::structured(&q("1"), &q("0"), 5)).psd);
    }

    #[test]
    fn bordered_thresholds() {
        let i = q("2/15");
        let a = q("4/5");
        assert!(!bordered_psd_bound(&a, &a, &vec![i.clone(); 40]));
        assert!(bordered_psd_bound(&a, &a, &vec![i.clone(); 36]));
        assert!(!bordered_psd_bound(&a, &a, &vec![i.clone(); 37]));
        let b = q("13/15");
        assert!(bordered_psd_bound(&a, &b, &vec![i.clone(); 39]));
        assert!(!bordered_psd_bound(&a, &b, &vec![i.clone(); 40]));
        assert!(bordered_psd_bound(&a, &a, &vec![q("0"); 50]));
        assert_eq!(bordered_size_limit(&a, &a, &i).unwrap(), 36.into());
        assert_eq!(bordered_size_limit(&a, &b, &i).unwrap(), 39.into());
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let m = vec![vec![q("1"), q("1/5")], vec![q("-1/5"), q("1")]];
        assert!(matches!(GramianMatrix::from_rows(m), Err(GramError::NotSymmetric(0, 1))));
    }
}
