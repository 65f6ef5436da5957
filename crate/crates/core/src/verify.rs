//! Numerical checks of the linear-algebra identities behind the pipeline,
//! run on freshly constructed configurations.

use nalgebra::SymmetricEigen;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::gram::{
    bordered_psd_bound, bordered_size_limit, equal_angle_set, gramian, max_negative_clique, negative_clique_set,
    pillar_partition, project_decompose, psd_check, random_config, structured_eigenvalues, synthetic_pillar_set,
    GramError, GramianMatrix, NegativeClique, SyntheticConfig, VectorSet, DEFAULT_TOLERANCE,
};
use crate::rational::{Angle, Rational, SignVector};

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Number of randomized pillar configurations.
    pub configurations: usize,
    /// Restrict randomized configurations to one angle.
    pub angle: Option<Angle>,
    /// Force the extremal base size in randomized configurations.
    pub extremal: bool,
    pub tolerance: f64,
    /// An externally supplied set to check as well.
    pub input: Option<VectorSet>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 2024,
            configurations: 120,
            angle: None,
            extremal: false,
            tolerance: DEFAULT_TOLERANCE,
            input: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<IdentityCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Accumulates residuals for one identity.
struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max_residual: f64,
    failures: Vec<String>,
    info: String,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally { name, tolerance, cases: 0, max_residual: 0.0, failures: Vec::new(), info: String::new() }
    }

    fn residual(&mut self, value: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if value.is_nan() || value > self.max_residual {
            self.max_residual = value;
        }
        if value.is_nan() || value > self.tolerance {
            self.failures.push(what());
        }
    }

    fn condition(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> IdentityCheck {
        let note = match self.failures.len() {
            0 => self.info,
            n => format!("{n} failure(s), first: {}", self.failures[0]),
        };
        IdentityCheck {
            name: self.name,
            passed: self.failures.is_empty() && self.cases > 0,
            cases: self.cases,
            max_residual: self.max_residual,
            tolerance: self.tolerance,
            note,
        }
    }
}

const ANGLES: [u64; 5] = [3, 5, 7, 9, 11];

fn check_eigenvalues(tol: f64) -> IdentityCheck {
    let mut t = Tally::new("structured-eigenvalues", tol);
    let pairs = [("1", "-1/5"), ("1", "0"), ("1", "1/13"), ("2/3", "-1/7"), ("12/13", "-4/13")];
    for (a, b) in pairs {
        let (a, b): (Rational, Rational) = (a.parse().unwrap(), b.parse().unwrap());
        for s in 1..=40 {
            let (l1, l2) = structured_eigenvalues(&a, &b, s);
            let eig = SymmetricEigen::new(GramianMatrix::structured(&a, &b, s).to_f64());
            let mut got: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
            got.sort_by(f64::total_cmp);
            let mut want = vec![l2.value.to_f64(); l2.multiplicity];
            want.push(l1.value.to_f64());
            want.sort_by(f64::total_cmp);
            let err = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
            t.residual(err, || format!("a={a} b={b} s={s}"));
        }
    }
    t.finish()
}

fn check_round_trip() -> IdentityCheck {
    let mut t = Tally::new("equal-angle-round-trip", 1e-10);
    for alpha in [Rational::zero(), Rational::frac(1, 13), Rational::frac(1, 5)] {
        let a = alpha.to_f64();
        for r in 1..=50 {
            let vs = match equal_angle_set(r, &alpha) {
                Ok(vs) => vs,
                Err(e) => {
                    t.condition(false, || format!("r={r} alpha={alpha}: {e}"));
                    continue;
                }
            };
            let mut err: f64 = 0.0;
            for i in 0..r {
                err = err.max((vs.dot(i, i) - 1.0).abs());
                for j in (i + 1)..r {
                    err = err.max((vs.dot(i, j) - a).abs());
                }
            }
            t.residual(err, || format!("r={r} alpha={alpha}"));
        }
    }
    t.finish()
}

fn check_clique_psd(tol: f64) -> IdentityCheck {
    let mut t = Tally::new("negative-clique-psd", tol);
    for d in ANGLES {
        let alpha = Rational::frac(1, d as i64);
        let k = d as usize + 1;
        let at = psd_check(&GramianMatrix::negative_clique(&alpha, k));
        t.residual(at.min_eigenvalue.abs(), || format!("size {k} at 1/{d}: min eigenvalue {}", at.min_eigenvalue));
        t.condition(at.psd, || format!("size {k} at 1/{d} not PSD"));
        let beyond = psd_check(&GramianMatrix::negative_clique(&alpha, k + 1));
        t.condition(!beyond.psd, || format!("size {} at 1/{d} reported PSD", k + 1));
    }
    t.finish()
}

fn check_simplex(tol: f64) -> IdentityCheck {
    let mut t = Tally::new("simplex-sum", tol);
    for d in ANGLES {
        let alpha = Rational::frac(1, d as i64);
        let k = d as usize + 1;
        match negative_clique_set(&alpha, k, k - 1) {
            Ok(vs) => {
                let mut sum = vec![0.0; vs.dim];
                for v in &vs.vectors {
                    for (s, x) in sum.iter_mut().zip(v) {
                        *s += x;
                    }
                }
                let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
                t.residual(norm, || format!("1/{d}: |sum| = {norm:e}"));
            }
            Err(e) => t.condition(false, || format!("1/{d}: {e}")),
        }
    }
    t.finish()
}

fn check_bordered() -> IdentityCheck {
    let mut t = Tally::new("bordered-thresholds", 0.0);
    let i = Rational::frac(2, 15);
    let a = Rational::frac(4, 5);
    let b = Rational::frac(13, 15);
    let limit_aa = bordered_size_limit(&a, &a, &i).ok();
    let limit_ab = bordered_size_limit(&a, &b, &i).ok();
    t.condition(limit_aa == Some(36.into()), || format!("(4/5)^2/(2/15)^2 floor is {limit_aa:?}"));
    t.condition(limit_ab == Some(39.into()), || format!("(52/75)/(2/15)^2 floor is {limit_ab:?}"));
    t.condition(bordered_psd_bound(&a, &a, &vec![i.clone(); 36]), || "36 entries rejected".into());
    t.condition(!bordered_psd_bound(&a, &a, &vec![i.clone(); 37]), || "37 entries accepted".into());
    t.condition(bordered_psd_bound(&a, &b, &vec![i.clone(); 39]), || "39 entries rejected".into());
    t.condition(!bordered_psd_bound(&a, &b, &vec![i.clone(); 40]), || "40 entries accepted".into());
    t.finish()
}

fn extremal_config<R: Rng>(angle: Angle, rng: &mut R) -> SyntheticConfig {
    let k = angle.extremal_base();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.shuffle(rng);
    SyntheticConfig {
        angle,
        base_size: k,
        pattern: SignVector::from_positives(k, &idx[..k / 2]),
        members: rng.gen_range(1..=4),
        extra_dims: rng.gen_range(0..3),
    }
}

struct RandomChecks {
    projection: Tally,
    base_range: Tally,
    partition: Tally,
    balanced: Tally,
}

fn check_random(cfg: &VerifyConfig) -> Vec<IdentityCheck> {
    let tol = cfg.tolerance;
    let mut c = RandomChecks {
        projection: Tally::new("projection-decomposition", tol),
        base_range: Tally::new("base-size-range", 0.0),
        partition: Tally::new("partition-patterns", 0.0),
        balanced: Tally::new("extremal-balanced", 0.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.configurations {
        let angle = cfg.angle.unwrap_or_else(|| Angle::new(ANGLES[i % ANGLES.len()]).expect("odd"));
        // every fourth configuration, and all of them with `extremal`, uses the simplex base
        let sc = if cfg.extremal || i % 4 == 3 { extremal_config(angle, &mut rng) } else { random_config(angle, &mut rng) };
        let syn = match synthetic_pillar_set(&sc, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                c.projection.condition(false, || format!("construction {sc:?}: {e}"));
                continue;
            }
        };
        let vs = syn.set.clone().with_tolerance(tol);
        let extremal = sc.base_size == angle.extremal_base();
        let base = NegativeClique { size: syn.base.len(), base: syn.base.clone(), flips: syn.flips.clone() };
        for (x, _) in &syn.members {
            match project_decompose(&vs, &base, *x) {
                Ok(p) => {
                    let norm_err = (p.h_norm_sq - p.expected_norm_sq.to_f64()).abs();
                    let worst = p.reconstruction.max(p.orthogonality).max(norm_err);
                    c.projection.residual(worst, || format!("config {i}, vector {x}: residual {worst:e}"));
                    if extremal {
                        c.balanced.condition(p.pattern.sum() == 0, || format!("config {i}: pattern {} unbalanced", p.pattern));
                    }
                }
                Err(e) => c.projection.condition(false, || format!("config {i}, vector {x}: {e}")),
            }
        }
        check_maximal_base(&vs, angle, &mut c.base_range, &mut c.partition, &format!("config {i}"));
    }
    let mut out = vec![c.projection.finish(), c.base_range.finish(), c.partition.finish()];
    let balanced = c.balanced.finish();
    if balanced.cases > 0 {
        out.push(balanced);
    }
    out
}

/// Searches the exact base size and partitions against that base.
fn check_maximal_base(vs: &VectorSet, angle: Angle, range: &mut Tally, partition: &mut Tally, label: &str) {
    let alpha = angle.as_rational();
    let g = match gramian(vs) {
        Ok(g) => g,
        Err(e) => {
            range.condition(false, || format!("{label}: {e}"));
            return;
        }
    };
    match max_negative_clique(&g, &alpha) {
        Ok(base) => {
            let k = base.size;
            let ok = vs.len() < 2 || (2..=angle.extremal_base()).contains(&k);
            range.condition(ok, || format!("{label}: K = {k}"));
            let res = pillar_partition(&g, &alpha, &base);
            let ok = matches!(&res, Ok(p) if p.covered() == vs.len());
            partition.condition(ok, || format!("{label}: {:?}", res.err()));
        }
        Err(e) => range.condition(false, || format!("{label}: {e}")),
    }
}

fn check_input(vs: &VectorSet) -> IdentityCheck {
    let mut t = Tally::new("input-set", 0.0);
    let alpha = vs.alpha.clone();
    match gramian(vs) {
        Ok(g) => {
            t.condition(true, String::new);
            match (Angle::from_rational(&alpha), max_negative_clique(&g, &alpha)) {
                (Ok(_), Ok(base)) => {
                    match pillar_partition(&g, &alpha, &base) {
                        Ok(p) => {
                            t.condition(true, String::new);
                            t.info = format!("K = {}, {} class(es)", base.size, p.classes.len());
                        }
                        Err(e) => t.condition(false, || format!("partition: {e}")),
                    }
                }
                (Err(e), _) => t.condition(false, || format!("angle {alpha}: {e}")),
                (_, Err(e)) => t.condition(false, || e.to_string()),
            }
        }
        Err(GramError::NotEquiangular { violations, .. }) => {
            let (i, j, p) = violations[0];
            t.condition(false, || {
                format!("equiangularity violated at {} pair(s), first ({i}, {j}) with inner product {p}", violations.len())
            });
        }
        Err(e) => t.condition(false, || e.to_string()),
    }
    t.finish()
}

pub fn run_verification(cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = vec![
        check_eigenvalues(cfg.tolerance),
        check_round_trip(),
        check_clique_psd(cfg.tolerance),
        check_simplex(cfg.tolerance),
        check_bordered(),
    ];
    checks.extend(check_random(cfg));
    if let Some(vs) = &cfg.input {
        checks.push(check_input(vs));
    }
    VerifyReport { checks }
}
