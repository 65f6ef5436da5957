use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{GramError, GramianMatrix, VectorSet, DEFAULT_TOLERANCE};
use crate::rational::{ell, projection_coefficients, Angle, Rational, SignVector};

/// `r` unit vectors in `R^r` with all pairwise inner products `alpha`, read
/// off the rows of the Cholesky factor of `(1 - alpha) I + alpha J`.
pub fn equal_angle_set(r: usize, alpha: &Rational) -> Result<VectorSet, GramError> {
    if r == 0 {
        return Err(GramError::Empty);
    }
    let g = GramianMatrix::structured(&Rational::one(), alpha, r).to_f64();
    let chol = nalgebra::Cholesky::new(g).ok_or(GramError::NotPositiveDefinite)?;
    let l = chol.l();
    let vectors = (0..r).map(|i| l.row(i).iter().cloned().collect()).collect();
    VectorSet::new(r, vectors, alpha.clone())
}

/// Factor a positive semidefinite matrix as the Gramian of vectors in
/// `R^dim`. Fails if more than `dim` eigenvalues exceed the tolerance.
pub fn realize_gramian(g: &DMatrix<f64>, dim: usize) -> Result<Vec<Vec<f64>>, GramError> {
    let s = g.nrows();
    let eig = SymmetricEigen::new(g.clone());
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    for (rank, &k) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda < -DEFAULT_TOLERANCE {
            return Err(GramError::NotPositiveDefinite);
        }
        if rank >= dim && lambda > DEFAULT_TOLERANCE {
            return Err(GramError::RankTooLarge { dim, eigenvalue: lambda });
        }
    }
    Ok((0..s)
        .map(|i| {
            let mut v = vec![0.0; dim];
            for (slot, &k) in order.iter().take(dim).enumerate() {
                v[slot] = eig.eigenvalues[k].max(0.0).sqrt() * eig.eigenvectors[(i, k)];
            }
            v
        })
        .collect())
}

/// `k` vectors in `R^dim` with Gramian `(1 + alpha) I - alpha J`. For the
/// extremal `k = 1/alpha + 1` these are the vertices of a regular simplex.
pub fn negative_clique_set(alpha: &Rational, k: usize, dim: usize) -> Result<VectorSet, GramError> {
    let g = GramianMatrix::negative_clique(alpha, k).to_f64();
    VectorSet::new(dim, realize_gramian(&g, dim)?, alpha.clone())
}

/// One randomized pillar configuration: a `K`-base plus `members` vectors of
/// the single class with sign pattern `pattern`.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub angle: Angle,
    pub base_size: usize,
    pub pattern: SignVector,
    pub members: usize,
    pub extra_dims: usize,
}

/// A constructed set plus what the construction guarantees about it.
#[derive(Debug, Clone)]
pub struct SyntheticSet {
    pub set: VectorSet,
    /// Base indices in base order and their sign flips: `flips[i] * v[base[i]]`
    /// are the clique vectors.
    pub base: Vec<usize>,
    pub flips: Vec<i8>,
    /// Non-base indices, each with the sign pattern used to build it.
    pub members: Vec<(usize, SignVector)>,
}

fn rotation<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// Builds the base block in the leading coordinates, each member as
/// `h + c_i` with `h` the exact projection for `pattern` and the `c_i`
/// in fresh orthogonal coordinates with `<x_i, x_j> = alpha`, then applies a
/// random rotation, random sign flips and a random permutation.
pub fn synthetic_pillar_set<R: Rng>(cfg: &SyntheticConfig, rng: &mut R) -> Result<SyntheticSet, GramError> {
    let alpha = cfg.angle.as_rational();
    let k = cfg.base_size;
    let extremal = k == cfg.angle.extremal_base();
    let base_rank = if extremal { k - 1 } else { k };
    let base = negative_clique_set(&alpha, k, base_rank)?;
    let (coeffs, hh) = if extremal {
        let coeffs = cfg
            .pattern
            .entries()
            .iter()
            .map(|&e| Rational::frac(e as i64, k as i64))
            .collect::<Vec<_>>();
        (coeffs, alpha.clone())
    } else {
        let n = cfg.pattern.positive_count();
        (projection_coefficients(&alpha, &cfg.pattern)?, ell(&alpha, k, n)?)
    };
    let mut h = vec![0.0; base_rank];
    for (a, p) in coeffs.iter().zip(&base.vectors) {
        for (hi, pi) in h.iter_mut().zip(p) {
            *hi += a.to_f64() * pi;
        }
    }
    let s = cfg.members;
    let comp = GramianMatrix::structured(&(Rational::one() - &hh), &(&alpha - &hh), s).to_f64();
    let comps = realize_gramian(&comp, s)?;

    let dim = base_rank + s + cfg.extra_dims;
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(k + s);
    for p in &base.vectors {
        let mut v = p.clone();
        v.resize(dim, 0.0);
        raw.push(v);
    }
    for c in &comps {
        let mut v = h.clone();
        v.extend_from_slice(c);
        v.resize(dim, 0.0);
        raw.push(v);
    }

    let rot = rotation(dim, rng);
    let signs: Vec<i8> = (0..raw.len()).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let rotated: Vec<Vec<f64>> = raw
        .iter()
        .zip(&signs)
        .map(|(v, &sg)| {
            let x = &rot * nalgebra::DVector::from_column_slice(v);
            x.iter().map(|t| t * sg as f64).collect()
        })
        .collect();
    let mut perm: Vec<usize> = (0..raw.len()).collect();
    perm.shuffle(rng);
    // perm[new] = old
    let vectors: Vec<Vec<f64>> = perm.iter().map(|&old| rotated[old].clone()).collect();
    let mut new_of_old = vec![0; raw.len()];
    for (new, &old) in perm.iter().enumerate() {
        new_of_old[old] = new;
    }
    let base_idx: Vec<usize> = (0..k).map(|i| new_of_old[i]).collect();
    let flips: Vec<i8> = (0..k).map(|i| signs[i]).collect();
    let members = (0..s)
        .map(|j| {
            let old = k + j;
            let pattern = if signs[old] > 0 { cfg.pattern.clone() } else { cfg.pattern.negated() };
            (new_of_old[old], pattern)
        })
        .collect();
    Ok(SyntheticSet {
        set: VectorSet::new(dim, vectors, alpha)?,
        base: base_idx,
        flips,
        members,
    })
}

/// A random admissible configuration for angle `1/d`: random base size in
/// `2..=d+1`, random non-constant pattern (balanced when extremal) and
/// as many members as positive semidefiniteness allows, capped at 4.
pub fn random_config<R: Rng>(angle: Angle, rng: &mut R) -> SyntheticConfig {
    let kmax = angle.extremal_base();
    let k = rng.gen_range(2..=kmax);
    let alpha = angle.as_rational();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.shuffle(rng);
    let positives = if k == kmax { k / 2 } else { rng.gen_range(1..k) };
    let pattern = SignVector::from_positives(k, &idx[..positives]);
    let cap = if k == kmax {
        4
    } else {
        let l = ell(&alpha, k, pattern.positive_count()).expect("admissible");
        if l > alpha {
            // (1 - alpha) + s (alpha - l) >= 0
            ((Rational::one() - &alpha).checked_div(&(&l - &alpha)).unwrap().floor())
                .try_into()
                .unwrap_or(1usize)
                .clamp(1, 4)
        } else {
            4
        }
    };
    SyntheticConfig {
        angle,
        base_size: k,
        pattern,
        members: rng.gen_range(1..=cap),
        extra_dims: rng.gen_range(0..3),
    }
}

#[cfg(test)]
mod tests {
    use super::super::gramian;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthonormal_triple() {
        let vs = equal_angle_set(3, &Rational::zero()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vs.dot(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_vectors_at_one_fifth() {
        let vs = equal_angle_set(2, &Rational::frac(1, 5)).unwrap();
        assert_eq!(vs.vectors[0], vec![1.0, 0.0]);
        assert!((vs.vectors[1][0] - 0.2).abs() < 1e-15);
        assert!((vs.vectors[1][1] - (0.96f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn equal_angle_round_trip() {
        let vs = equal_angle_set(5, &Rational::frac(1, 13)).unwrap();
        let g = gramian(&vs.clone().with_tolerance(1e-10)).unwrap();
        assert_eq!(g, GramianMatrix::structured(&Rational::one(), &Rational::frac(1, 13), 5));
        let vs = equal_angle_set(5, &Rational::frac(1, 5)).unwrap();
        assert!(gramian(&vs).unwrap().is_equiangular(&Rational::frac(1, 5)));
    }

    #[test]
    fn simplex_realization_sums_to_zero() {
        let set = negative_clique_set(&Rational::frac(1, 5), 6, 5).unwrap();
        let mut sum = vec![0.0; 5];
        for v in &set.vectors {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
        }
        assert!(sum.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-9);
        assert!(matches!(
            negative_clique_set(&Rational::frac(1, 5), 6, 4),
            Err(GramError::RankTooLarge { .. })
        ));
    }

    #[test]
    fn synthetic_sets_are_equiangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [3u64, 5, 7, 9] {
            for _ in 0..10 {
                let cfg = random_config(Angle::new(d).unwrap(), &mut rng);
                let syn = synthetic_pillar_set(&cfg, &mut rng).unwrap();
                let g = gramian(&syn.set).unwrap();
                assert!(g.is_equiangular(&syn.set.alpha), "{cfg:?}");
            }
        }
    }
}
