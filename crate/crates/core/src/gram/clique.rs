use serde::Serialize;

use super::{GramError, GramianMatrix};
use crate::rational::Rational;

/// Exhaustive search is limited to this many vectors (one `u64` bitmask).
pub const MAX_CLIQUE_SEARCH: usize = 64;

/// A maximum negative clique: after multiplying `base[i]` by `flips[i]` all
/// pairwise inner products within the base equal `-alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NegativeClique {
    pub size: usize,
    pub base: Vec<usize>,
    pub flips: Vec<i8>,
}

fn sign(x: &Rational) -> i8 {
    if x.is_negative() {
        -1
    } else {
        1
    }
}

/// Exact base size `K_alpha` of an equiangular Gramian with one witness.
///
/// Every negative clique up to switching has a lowest-index member `v`;
/// flipping each other vector `u` so that `<u, v> = -alpha` turns the
/// question into a plain maximum clique in the graph joining `u, w` when
/// `sgn(G_uv) sgn(G_wv) sgn(G_uw) = -1`. Candidates `u > v` are searched by
/// branch and bound seeded from a greedy clique. Among maximum cliques the
/// lexicographically smallest index set is returned.
pub fn max_negative_clique(g: &GramianMatrix, alpha: &Rational) -> Result<NegativeClique, GramError> {
    let s = g.size();
    if s == 0 {
        return Err(GramError::Empty);
    }
    if s > MAX_CLIQUE_SEARCH {
        return Err(GramError::TooLarge { max: MAX_CLIQUE_SEARCH, got: s });
    }
    if !g.is_equiangular(alpha) {
        return Err(GramError::NotEquiangular { alpha: alpha.clone(), violations: Vec::new() });
    }
    // K <= 1/alpha + 1
    let cap = alpha
        .recip()
        .map(|inv| (inv + Rational::one()).floor())
        .ok()
        .and_then(|c| usize::try_from(c).ok())
        .unwrap_or(s)
        .min(s);

    let signs: Vec<Vec<i8>> = (0..s).map(|i| (0..s).map(|j| sign(g.get(i, j))).collect()).collect();
    let mut best: Vec<usize> = vec![0];
    for v in 0..s {
        if best.len() >= cap || s - v <= best.len() {
            break;
        }
        let mut adj = vec![0u64; s];
        for u in (v + 1)..s {
            for w in (u + 1)..s {
                if signs[u][v] * signs[w][v] * signs[u][w] < 0 {
                    adj[u] |= 1 << w;
                    adj[w] |= 1 << u;
                }
            }
        }
        let candidates: u64 = ((v + 1)..s).fold(0, |m, u| m | (1 << u));
        let inner_cap = cap - 1;
        let greedy = greedy_clique(&adj, candidates).len().min(inner_cap);
        // equal-size cliques stay reachable so the tie-break is by index order
        let target = (best.len() - 1).max(greedy.saturating_sub(1));
        let mut search = Search { adj: &adj, best: Vec::new(), target, cap: inner_cap };
        search.expand(&mut Vec::new(), candidates);
        if search.best.len() + 1 > best.len() {
            let mut found = vec![v];
            found.extend(&search.best);
            best = found;
        }
    }
    let v = best[0];
    let flips = best
        .iter()
        .map(|&u| if u == v { 1 } else { -signs[u][v] })
        .collect();
    Ok(NegativeClique { size: best.len(), base: best, flips })
}

fn greedy_clique(adj: &[u64], mut candidates: u64) -> Vec<usize> {
    let mut clique = Vec::new();
    while candidates != 0 {
        let u = candidates.trailing_zeros() as usize;
        clique.push(u);
        candidates &= adj[u];
    }
    clique
}

struct Search<'a> {
    adj: &'a [u64],
    best: Vec<usize>,
    /// only cliques strictly larger than this are recorded
    target: usize,
    cap: usize,
}

impl Search<'_> {
    fn expand(&mut self, current: &mut Vec<usize>, mut candidates: u64) {
        if current.len() > self.target && current.len() > self.best.len() {
            self.best = current.clone();
            self.target = current.len();
        }
        while candidates != 0 {
            if self.target >= self.cap {
                return;
            }
            if current.len() + candidates.count_ones() as usize <= self.target {
                return;
            }
            let u = candidates.trailing_zeros() as usize;
            candidates &= !(1 << u);
            current.push(u);
            self.expand(current, candidates & self.adj[u]);
            current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    /// Brute force over all subsets and all sign vectors.
    fn brute_force(g: &GramianMatrix, alpha: &Rational) -> usize {
        let s = g.size();
        let mut best = 1;
        for mask in 1u32..(1 << s) {
            let idx: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
            if idx.len() <= best {
                continue;
            }
            let m = idx.len();
            let ok = (0..(1u32 << (m - 1))).any(|flipmask| {
                let f = |i: usize| if i == 0 || flipmask >> (i - 1) & 1 == 0 { 1i64 } else { -1 };
                (0..m).all(|a| {
                    ((a + 1)..m).all(|b| {
                        g.get(idx[a], idx[b]) * Rational::integer(f(a) * f(b)) == -alpha
                    })
                })
            });
            if ok {
                best = m;
            }
        }
        best
    }

    fn random_gramian(s: usize, alpha: &Rational, seed: u64) -> GramianMatrix {
        let mut state = seed;
        let mut rows = vec![vec![Rational::one(); s]; s];
        for i in 0..s {
            for j in (i + 1)..s {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = if state >> 33 & 1 == 1 { alpha.clone() } else { -alpha };
                rows[i][j] = v.clone();
                rows[j][i] = v;
            }
        }
        GramianMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn clique_gramian_is_its_own_base() {
        let a = q("1/5");
        let c = max_negative_clique(&GramianMatrix::negative_clique(&a, 4), &a).unwrap();
        assert_eq!(c.size, 4);
        assert_eq!(c.base, vec![0, 1, 2, 3]);
        assert_eq!(c.flips, vec![1; 4]);
    }

    #[test]
    fn positive_pair_switches_to_negative() {
        let a = q("1/3");
        let g = GramianMatrix::structured(&q("1"), &a, 2);
        let c = max_negative_clique(&g, &a).unwrap();
        assert_eq!(c.size, 2);
        assert_eq!(c.flips, vec![1, -1]);
    }

    #[test]
    fn matches_brute_force_on_sign_patterns() {
        // not necessarily PSD: the search is purely combinatorial
        let a = q("1/9");
        for seed in 0..40 {
            let s = 3 + (seed as usize % 7);
            let g = random_gramian(s, &a, seed);
            let c = max_negative_clique(&g, &a).unwrap();
            assert_eq!(c.size, brute_force(&g, &a), "seed {seed}");
            for x in 0..c.size {
                for y in (x + 1)..c.size {
                    let v = g.get(c.base[x], c.base[y]) * Rational::integer((c.flips[x] * c.flips[y]) as i64);
                    assert_eq!(v, -&a);
                }
            }
        }
    }

    #[test]
    fn respects_the_extremal_cap() {
        let a = q("1/3");
        let g = GramianMatrix::negative_clique(&a, 6);
        assert_eq!(max_negative_clique(&g, &a).unwrap().size, 4);
    }

    #[test]
    fn rejects_non_equiangular_and_oversized() {
        let a = q("1/5");
        let g = GramianMatrix::structured(&q("1"), &q("1/7"), 3);
        assert!(max_negative_clique(&g, &a).is_err());
        let big = GramianMatrix::negative_clique(&q("1/99"), 65);
        assert!(matches!(max_negative_clique(&big, &q("1/99")), Err(GramError::TooLarge { .. })));
    }
}
