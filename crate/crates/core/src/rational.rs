//! Exact rational arithmetic and the closed-form scalar functions used by
//! the bound pipeline: the projection norm `ell(K, n)`, its sign regime
//! relative to the angle, the rescaled two-distance inner products, and
//! the projection coefficients of a vector onto a negative clique.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse `{0}` as a rational number")]
    Parse(String),
    #[error("angle denominator {0} must be odd and at least 3")]
    InvalidAngle(i64),
    #[error("sign vector entries must be +1 or -1")]
    InvalidSign,
    #[error("angle {0} must lie strictly between 0 and 1")]
    AngleOutOfRange(Rational),
    #[error("base size {k} is not below the extremal size 1/alpha + 1 for alpha = {alpha}")]
    ExtremalBase { k: usize, alpha: Rational },
    #[error("base size {0} must be at least 2")]
    BaseTooSmall(usize),
    #[error("positive-sign count {n} out of range for base size {k}")]
    CountOutOfRange { k: usize, n: usize },
    #[error("projection norm {0} must lie strictly between 0 and 1")]
    NormOutOfRange(Rational),
}

/// Arbitrary-precision fraction, always in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, RationalError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Panics on a zero denominator; intended for literals.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("zero denominator")
    }

    pub fn integer(value: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, RationalError> {
        if self.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, RationalError> {
        if rhs.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    /// Floor of a value known to be nonnegative; negative values clamp to 0.
    pub fn floor_natural(&self) -> BigUint {
        self.floor().to_biguint().unwrap_or_default()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `p`, `p/q` and `-p/q` with integer `p`, `q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(RationalError::DivisionByZero);
                }
                Rational::new(n, d)
            }
            None => Ok(Rational::integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::integer(v)
    }
}

impl From<u64> for Rational {
    fn from(v: u64) -> Self {
        Rational::integer(v)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational::integer(v as u64)
    }
}

impl From<&BigUint> for Rational {
    fn from(v: &BigUint) -> Self {
        Rational::integer(BigInt::from_biguint(Sign::Plus, v.clone()))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// Division goes through `checked_div`; there is deliberately no `Div` impl.

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// An equiangular angle `alpha = 1/denom` with `denom` odd and at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle {
    denom: u64,
}

impl Angle {
    pub fn new(denom: u64) -> Result<Self, RationalError> {
        if denom < 3 || denom.is_multiple_of(2) {
            return Err(RationalError::InvalidAngle(denom as i64));
        }
        Ok(Angle { denom })
    }

    pub fn denom(self) -> u64 {
        self.denom
    }

    pub fn as_rational(self) -> Rational {
        Rational::frac(1, self.denom as i64)
    }

    /// Size of an extremal (simplex) negative clique, `1/alpha + 1`.
    pub fn extremal_base(self) -> usize {
        self.denom as usize + 1
    }

    pub fn from_rational(alpha: &Rational) -> Result<Self, RationalError> {
        if !alpha.numer().is_one() {
            return Err(RationalError::Parse(alpha.to_string()));
        }
        let denom = alpha
            .denom()
            .to_u64()
            .ok_or_else(|| RationalError::Parse(alpha.to_string()))?;
        Angle::new(denom)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.denom)
    }
}

impl FromStr for Angle {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Angle::from_rational(&s.parse::<Rational>()?)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A `(+1, -1)`-vector recording the signs of the inner products of a
/// vector with the members of a negative clique.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self, RationalError> {
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(RationalError::InvalidSign);
        }
        Ok(SignVector(entries))
    }

    pub fn from_positives(len: usize, positives: &[usize]) -> Self {
        let mut entries = vec![-1; len];
        for &i in positives {
            entries[i] = 1;
        }
        SignVector(entries)
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn positive_count(&self) -> usize {
        self.0.iter().filter(|&&e| e > 0).count()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn negated(&self) -> Self {
        SignVector(self.0.iter().map(|&e| -e).collect())
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    /// Lexicographically smaller of `self` and `-self`; identifies a pillar.
    pub fn canonical(&self) -> Self {
        let neg = self.negated();
        if neg < *self {
            neg
        } else {
            self.clone()
        }
    }

    /// `min(n, K - n)` for `n` positive entries.
    pub fn class_level(&self) -> usize {
        let n = self.positive_count();
        n.min(self.len() - n)
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *e > 0 { "+" } else { "-" })?;
        }
        f.write_str(")")
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Binomial coefficient by the multiplicative formula; 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Three-way position of `ell(K, n)` relative to the angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    BelowAlpha,
    EqualAlpha,
    AboveAlpha,
}

fn check_ell_domain(alpha: &Rational, k: usize, n: usize) -> Result<(), RationalError> {
    if !alpha.is_positive() || *alpha >= Rational::one() {
        return Err(RationalError::AngleOutOfRange(alpha.clone()));
    }
    if k < 2 {
        return Err(RationalError::BaseTooSmall(k));
    }
    // K < 1/alpha + 1  <=>  1 + alpha - K alpha > 0
    if !extremal_gap(alpha, k).is_positive() {
        return Err(RationalError::ExtremalBase { k, alpha: alpha.clone() });
    }
    if n > k {
        return Err(RationalError::CountOutOfRange { k, n });
    }
    Ok(())
}

/// `1 + alpha - K alpha`, positive exactly when `K < 1/alpha + 1`.
fn extremal_gap(alpha: &Rational, k: usize) -> Rational {
    Rational::one() + alpha - alpha * Rational::from(k)
}

/// Squared norm of the projection onto the span of a `K`-vector negative
/// clique of a unit vector having `n` positive inner products with it:
///
/// `alpha^2 (4 alpha n (n - K) + (1 + alpha) K) / ((1 + alpha)(1 + alpha - K alpha))`.
///
/// The pipeline only uses `1 <= n <= K/2`; any `0 <= n <= K` is accepted so
/// that the `n <-> K - n` symmetry can be evaluated directly.
pub fn ell(alpha: &Rational, k: usize, n: usize) -> Result<Rational, RationalError> {
    check_ell_domain(alpha, k, n)?;
    let one = Rational::one();
    let kk = Rational::from(k);
    let nn = Rational::from(n);
    let four = Rational::from(4u64);
    let numer = &four * alpha * &nn * (&nn - &kk) + (&one + alpha) * &kk;
    let denom = (&one + alpha) * extremal_gap(alpha, k);
    (alpha * alpha * numer).checked_div(&denom)
}

/// Position of `ell(alpha, K, n)` relative to `alpha`, decided by comparing
/// `min(n, K - n)` against `K - (1/alpha + 1)/2`.
pub fn ell_regime(alpha: &Rational, k: usize, n: usize) -> Result<Regime, RationalError> {
    check_ell_domain(alpha, k, n)?;
    let n = n.min(k - n);
    let threshold = Rational::from(k)
        - (alpha.recip()? + Rational::one()).checked_div(&Rational::from(2u64))?;
    Ok(match Rational::from(n).cmp(&threshold) {
        Ordering::Greater => Regime::BelowAlpha,
        Ordering::Equal => Regime::EqualAlpha,
        Ordering::Less => Regime::AboveAlpha,
    })
}

/// Inner products `((alpha - l)/(1 - l), (-alpha - l)/(1 - l))` of the
/// normalized orthogonal components of a pillar whose members project to a
/// vector of squared norm `l`.
pub fn beta_gamma(alpha: &Rational, ellval: &Rational) -> Result<(Rational, Rational), RationalError> {
    if !ellval.is_positive() || *ellval >= Rational::one() {
        return Err(RationalError::NormOutOfRange(ellval.clone()));
    }
    let rest = Rational::one() - ellval;
    let beta = (alpha - ellval).checked_div(&rest)?;
    let gamma = (-alpha - ellval).checked_div(&rest)?;
    Ok((beta, gamma))
}

/// Coefficients `a = alpha ((1+alpha) I - alpha J)^{-1} eps` of the projection
/// of a vector with sign pattern `eps` onto the clique span, using the
/// closed-form inverse `((1 + alpha - K alpha) I + alpha J) / ((1+alpha)(1 + alpha - K alpha))`.
pub fn projection_coefficients(alpha: &Rational, eps: &SignVector) -> Result<Vec<Rational>, RationalError> {
    let k = eps.len();
    if !alpha.is_positive() || *alpha >= Rational::one() {
        return Err(RationalError::AngleOutOfRange(alpha.clone()));
    }
    let gap = extremal_gap(alpha, k);
    if !gap.is_positive() {
        return Err(RationalError::ExtremalBase { k, alpha: alpha.clone() });
    }
    let scale = alpha.checked_div(&((Rational::one() + alpha) * &gap))?;
    let total = alpha * Rational::integer(eps.sum());
    Ok(eps
        .entries()
        .iter()
        .map(|&e| &scale * (&gap * Rational::integer(e as i64) + &total))
        .collect())
}

/// Exact inner product of the projections of two vectors with sign
/// patterns `eps1`, `eps2` against the same clique: `alpha * a1 . eps2`.
pub fn projection_inner(alpha: &Rational, eps1: &SignVector, eps2: &SignVector) -> Result<Rational, RationalError> {
    let a = projection_coefficients(alpha, eps1)?;
    let dot = a
        .iter()
        .zip(eps2.entries())
        .fold(Rational::zero(), |acc, (ai, &e)| acc + ai * Rational::integer(e as i64));
    Ok(alpha * dot)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn lowest_terms_and_sign() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(r, q("-3/2"));
        assert_eq!(Rational::new(1, 0), Err(RationalError::DivisionByZero));
        assert_eq!(q("1").checked_div(&Rational::zero()), Err(RationalError::DivisionByZero));
        assert_eq!("3/0".parse::<Rational>(), Err(RationalError::DivisionByZero));
        assert!("x/2".parse::<Rational>().is_err());
    }

    #[test]
    fn floor_is_euclidean_for_positive_denominators() {
        assert_eq!(q("2112/5").floor(), BigInt::from(422));
        assert_eq!(q("-1/2").floor(), BigInt::from(-1));
        assert_eq!(q("-4/2").floor(), BigInt::from(-2));
        assert_eq!(q("7").floor(), BigInt::from(7));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), BigUint::from(20u32));
        assert_eq!(binomial(4, 0), BigUint::one());
        assert_eq!(binomial(8, 4), BigUint::from(70u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        // beyond u128
        let big = binomial(142, 71);
        assert_eq!(&big * &big > BigUint::from(u128::MAX), true);
    }

    #[test]
    fn angle_validation() {
        assert!(Angle::new(1).is_err());
        assert!(Angle::new(4).is_err());
        let a = Angle::new(7).unwrap();
        assert_eq!(a.as_rational(), q("1/7"));
        assert_eq!(a.extremal_base(), 8);
        assert_eq!("1/9".parse::<Angle>().unwrap().denom(), 9);
        assert!("2/9".parse::<Angle>().is_err());
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell(&q("1/7"), 4, 2).unwrap(), q("1/14"));
        assert_eq!(ell(&q("1/5"), 4, 1).unwrap(), q("1/5"));
        assert_eq!(ell(&q("1/5"), 4, 2).unwrap(), q("2/15"));
        assert_eq!(ell(&q("1/7"), 6, 1).unwrap(), q("1/4"));
        // (1 - 1/7)/(ell(6,1) - 1/7) = 8
        let per_class = (Rational::one() - q("1/7")).checked_div(&(q("1/4") - q("1/7"))).unwrap();
        assert_eq!(per_class, q("8"));
    }

    #[test]
    fn ell_rejects_extremal_base() {
        assert!(matches!(ell(&q("1/7"), 8, 4), Err(RationalError::ExtremalBase { .. })));
        assert!(matches!(ell(&q("1/7"), 9, 4), Err(RationalError::ExtremalBase { .. })));
        assert!(matches!(ell(&q("1/7"), 1, 0), Err(RationalError::BaseTooSmall(1))));
        assert!(ell(&q("3/2"), 2, 1).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(ell_regime(&q("1/5"), 4, 2).unwrap(), Regime::BelowAlpha);
        assert_eq!(ell_regime(&q("1/7"), 6, 2).unwrap(), Regime::EqualAlpha);
        assert_eq!(ell_regime(&q("1/7"), 7, 2).unwrap(), Regime::AboveAlpha);
        assert!(ell_regime(&q("1/7"), 8, 2).is_err());
    }

    #[test]
    fn beta_gamma_examples() {
        assert_eq!(beta_gamma(&q("1/7"), &q("1/14")).unwrap(), (q("1/13"), q("-3/13")));
        assert_eq!(beta_gamma(&q("1/5"), &q("2/15")).unwrap(), (q("1/13"), q("-5/13")));
        for a in ["1/3", "1/5", "2/7", "9/10"] {
            let a = q(a);
            let expected = (-(&a * Rational::from(2u64))).checked_div(&(Rational::one() - &a)).unwrap();
            assert_eq!(beta_gamma(&a, &a).unwrap(), (Rational::zero(), expected));
        }
        assert!(beta_gamma(&q("1/5"), &q("1")).is_err());
        assert!(beta_gamma(&q("1/5"), &q("3/2")).is_err());
    }

    #[test]
    fn projection_examples() {
        let eps = SignVector::new(vec![-1, 1, 1, 1]).unwrap();
        assert_eq!(
            projection_coefficients(&q("1/5"), &eps).unwrap(),
            vec![q("0"), q("1/3"), q("1/3"), q("1/3")]
        );
        let eps = SignVector::new(vec![1, 1, -1, -1]).unwrap();
        assert_eq!(
            projection_coefficients(&q("1/5"), &eps).unwrap(),
            vec![q("1/6"), q("1/6"), q("-1/6"), q("-1/6")]
        );
        let eps = SignVector::new(vec![1; 6]).unwrap();
        assert!(projection_coefficients(&q("1/5"), &eps).is_err());
    }

    #[test]
    fn two_by_two_projection_matches_adjugate_inverse() {
        // [[1, -a], [-a, 1]]^{-1} = [[1, a], [a, 1]] / (1 - a^2)
        for a in ["1/3", "1/5", "1/7", "2/9", "1/2"] {
            let a = q(a);
            let det = Rational::one() - &a * &a;
            for eps in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
                let (e0, e1) = (Rational::integer(eps[0] as i64), Rational::integer(eps[1] as i64));
                let x0 = (&a * (&e0 + &a * &e1)).checked_div(&det).unwrap();
                let x1 = (&a * (&a * &e0 + &e1)).checked_div(&det).unwrap();
                let got = projection_coefficients(&a, &SignVector::new(eps.to_vec()).unwrap()).unwrap();
                assert_eq!(got, vec![x0, x1]);
            }
        }
    }

    #[test]
    fn cross_projection_constants() {
        let a = q("1/5");
        let h = SignVector::new(vec![-1, 1, 1, 1]).unwrap();
        for g in [vec![1, -1, 1, 1], vec![1, 1, -1, 1], vec![1, 1, 1, -1], vec![1, 1, -1, -1], vec![1, -1, 1, -1], vec![1, -1, -1, 1]] {
            let g = SignVector::new(g).unwrap();
            assert_eq!(projection_inner(&a, &h, &g).unwrap().abs(), q("1/15"));
        }
        let g = SignVector::new(vec![1, 1, -1, -1]).unwrap();
        assert_eq!(projection_inner(&a, &g, &g).unwrap(), q("2/15"));
    }

    #[test]
    fn sign_vector_canonical() {
        let e = SignVector::new(vec![1, -1, 1]).unwrap();
        assert_eq!(e.canonical(), SignVector::new(vec![-1, 1, -1]).unwrap());
        assert_eq!(e.negated().canonical(), e.canonical());
        assert_eq!(e.class_level(), 1);
        assert!(SignVector::new(vec![1, 0]).is_err());
        assert!(SignVector::new(vec![-1, -1]).unwrap().is_constant());
    }
}
