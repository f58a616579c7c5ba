//! Exact scalar arithmetic over the rationals and prime fields GF(p).
//!
//! Every determinant and rank computation in this crate reduces to arithmetic
//! on [`Scalar`] values, so zero-testing here must be exact: rationals are
//! arbitrary-precision fractions in lowest terms, prime-field elements are
//! canonical residues in `[0, p)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("scalars belong to different fields ({0} vs {1})")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("division or inversion by zero")]
    DivisionByZero,
    #[error("cannot parse {text:?} as a scalar over {field}: {reason}")]
    Parse {
        text: String,
        field: FieldSpec,
        reason: String,
    },
}

/// The coefficient field: exact rationals or GF(p) for a prime p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Rationals,
    PrimeField { modulus: u64 },
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec::Rationals
    }

    /// GF(p). Fails unless `p` is prime.
    pub fn prime_field(p: u64) -> Result<Self, FieldError> {
        if is_prime_u64(p) {
            Ok(FieldSpec::PrimeField { modulus: p })
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            FieldSpec::Rationals => None,
            FieldSpec::PrimeField { modulus } => Some(*modulus),
        }
    }

    pub fn is_rationals(&self) -> bool {
        matches!(self, FieldSpec::Rationals)
    }

    pub fn zero(&self) -> Scalar {
        Scalar::from_integer(*self, 0)
    }

    pub fn one(&self) -> Scalar {
        Scalar::from_integer(*self, 1)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "rational"),
            FieldSpec::PrimeField { modulus } => write!(f, "gf {modulus}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Rat(BigRational),
    Mod(u64),
}

/// An exact field element. Rationals are kept in lowest terms with a positive
/// denominator; prime-field values are residues in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    field: FieldSpec,
    repr: Repr,
}

impl Scalar {
    pub fn from_integer(field: FieldSpec, value: i64) -> Self {
        match field {
            FieldSpec::Rationals => Scalar {
                field,
                repr: Repr::Rat(BigRational::from_integer(BigInt::from(value))),
            },
            FieldSpec::PrimeField { modulus } => Scalar {
                field,
                repr: Repr::Mod((value as i128).rem_euclid(modulus as i128) as u64),
            },
        }
    }

    pub fn from_rational(value: BigRational) -> Self {
        Scalar {
            field: FieldSpec::Rationals,
            repr: Repr::Rat(value),
        }
    }

    pub fn from_residue(field: FieldSpec, value: u64) -> Result<Self, FieldError> {
        match field {
            FieldSpec::PrimeField { modulus } => Ok(Scalar {
                field,
                repr: Repr::Mod(value % modulus),
            }),
            FieldSpec::Rationals => Err(FieldError::FieldMismatch(field, field)),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_zero(),
            Repr::Mod(v) => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_one(),
            Repr::Mod(v) => *v == 1,
        }
    }

    /// True for rationals with denominator 1 (and for every GF(p) residue).
    pub fn is_integer(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_integer(),
            Repr::Mod(_) => true,
        }
    }

    pub(crate) fn as_rational(&self) -> &BigRational {
        match &self.repr {
            Repr::Rat(r) => r,
            Repr::Mod(_) => unreachable!("rational access on a prime-field scalar"),
        }
    }

    pub(crate) fn as_residue(&self) -> u64 {
        match &self.repr {
            Repr::Rat(_) => unreachable!("residue access on a rational scalar"),
            Repr::Mod(v) => *v,
        }
    }

    fn check_same_field(&self, rhs: &Scalar) -> Result<(), FieldError> {
        if self.field == rhs.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch(self.field, rhs.field))
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Result<Scalar, FieldError> {
        self.check_same_field(rhs)?;
        Ok(match (&self.repr, &rhs.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Scalar::from_rational(a + b),
            (Repr::Mod(a), Repr::Mod(b)) => {
                let p = self.field.modulus().unwrap();
                Scalar {
                    field: self.field,
                    repr: Repr::Mod(addm(*a, *b, p)),
                }
            }
            _ => unreachable!(),
        })
    }

    pub fn sub(&self, rhs: &Scalar) -> Result<Scalar, FieldError> {
        self.check_same_field(rhs)?;
        Ok(match (&self.repr, &rhs.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Scalar::from_rational(a - b),
            (Repr::Mod(a), Repr::Mod(b)) => {
                let p = self.field.modulus().unwrap();
                Scalar {
                    field: self.field,
                    repr: Repr::Mod(subm(*a, *b, p)),
                }
            }
            _ => unreachable!(),
        })
    }

    pub fn mul(&self, rhs: &Scalar) -> Result<Scalar, FieldError> {
        self.check_same_field(rhs)?;
        Ok(match (&self.repr, &rhs.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Scalar::from_rational(a * b),
            (Repr::Mod(a), Repr::Mod(b)) => {
                let p = self.field.modulus().unwrap();
                Scalar {
                    field: self.field,
                    repr: Repr::Mod(mulm(*a, *b, p)),
                }
            }
            _ => unreachable!(),
        })
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar, FieldError> {
        self.check_same_field(rhs)?;
        self.mul(&rhs.inv()?)
    }

    pub fn neg(&self) -> Scalar {
        match &self.repr {
            Repr::Rat(a) => Scalar::from_rational(-a),
            Repr::Mod(a) => {
                let p = self.field.modulus().unwrap();
                Scalar {
                    field: self.field,
                    repr: Repr::Mod(subm(0, *a, p)),
                }
            }
        }
    }

    pub fn inv(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match &self.repr {
            Repr::Rat(a) => Scalar::from_rational(a.recip()),
            Repr::Mod(a) => {
                let p = self.field.modulus().unwrap();
                Scalar {
                    field: self.field,
                    repr: Repr::Mod(invm(*a, p)?),
                }
            }
        })
    }

    pub fn checked_eq(&self, rhs: &Scalar) -> Result<bool, FieldError> {
        self.check_same_field(rhs)?;
        Ok(self == rhs)
    }

    /// Canonical-form invariant used by tests: lowest terms, positive denominator,
    /// residues reduced mod p.
    pub fn is_canonical(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => {
                use num_integer::Integer;
                if r.numer().is_zero() {
                    r.denom().is_one()
                } else {
                    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
                }
            }
            Repr::Mod(v) => *v < self.field.modulus().unwrap(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(r) => write!(f, "{r}"),
            Repr::Mod(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parse a scalar token: `[-]?digits(/digits)?` over the rationals,
/// plain `digits` over GF(p).
pub fn parse_scalar(text: &str, field: FieldSpec) -> Result<Scalar, FieldError> {
    let err = |reason: &str| FieldError::Parse {
        text: text.to_string(),
        field,
        reason: reason.to_string(),
    };
    match field {
        FieldSpec::Rationals => {
            let (num_text, den_text) = match text.split_once('/') {
                Some((n, d)) => (n, Some(d)),
                None => (text, None),
            };
            let numer: BigInt = num_text
                .parse()
                .map_err(|_| err("expected an integer numerator"))?;
            if num_text.starts_with('+') {
                return Err(err("explicit plus signs are not accepted"));
            }
            let denom: BigInt = match den_text {
                Some(d) => {
                    if d.starts_with(['-', '+']) {
                        return Err(err("denominator must be an unsigned integer"));
                    }
                    d.parse().map_err(|_| err("expected an integer denominator"))?
                }
                None => BigInt::one(),
            };
            if denom.is_zero() {
                return Err(err("zero denominator"));
            }
            Ok(Scalar::from_rational(BigRational::new(numer, denom)))
        }
        FieldSpec::PrimeField { modulus } => {
            if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("expected an unsigned integer (fractions and signs are not accepted for prime fields)"));
            }
            // Reduce digit by digit so arbitrarily long tokens still work.
            let mut acc: u64 = 0;
            for b in text.bytes() {
                acc = addm(mulm(acc, 10 % modulus, modulus), (b - b'0') as u64 % modulus, modulus);
            }
            Ok(Scalar {
                field,
                repr: Repr::Mod(acc),
            })
        }
    }
}

/// Draw a random scalar: a uniform integer in `[-bound, bound]` over the
/// rationals, a uniform residue over GF(p).
pub fn sample_scalar<R: Rng + ?Sized>(rng: &mut R, field: FieldSpec, bound: u64) -> Scalar {
    assert!(bound >= 1, "sampling bound must be positive");
    match field {
        FieldSpec::Rationals => {
            let b = bound as i64;
            Scalar::from_integer(field, rng.random_range(-b..=b))
        }
        FieldSpec::PrimeField { modulus } => Scalar {
            field,
            repr: Repr::Mod(rng.random_range(0..modulus)),
        },
    }
}

// --- modular arithmetic on canonical residues -------------------------------

pub(crate) fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p { s - p } else { s }
}

pub(crate) fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b { a - b } else { a + p - b }
}

pub(crate) fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Inverse mod p by extended Euclid.
pub(crate) fn invm(a: u64, p: u64) -> Result<u64, FieldError> {
    if a == 0 {
        return Err(FieldError::DivisionByZero);
    }
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "modulus must be prime and a nonzero");
    Ok(t0.rem_euclid(p as i128) as u64)
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    // Deterministic Miller-Rabin for u64 with the standard base set.
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powm(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulm(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn powm(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulm(acc, base, p);
        }
        base = mulm(base, base, p);
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(text: &str) -> Scalar {
        parse_scalar(text, FieldSpec::Rationals).unwrap()
    }

    #[test]
    fn rational_addition_is_exact() {
        let sum = rat("1/2").add(&rat("1/3")).unwrap();
        assert_eq!(sum, rat("5/6"));
    }

    #[test]
    fn gf7_inverse() {
        let f = FieldSpec::prime_field(7).unwrap();
        let three = Scalar::from_integer(f, 3);
        assert_eq!(three.inv().unwrap(), Scalar::from_integer(f, 5));
    }

    #[test]
    fn zero_has_no_inverse() {
        assert_eq!(
            FieldSpec::Rationals.zero().inv(),
            Err(FieldError::DivisionByZero)
        );
        let f = FieldSpec::prime_field(5).unwrap();
        assert_eq!(f.zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let f = FieldSpec::prime_field(5).unwrap();
        let a = FieldSpec::Rationals.one();
        let b = f.one();
        assert!(matches!(a.add(&b), Err(FieldError::FieldMismatch(_, _))));
        assert!(a.checked_eq(&b).is_err());
    }

    #[test]
    fn parse_reduces_to_lowest_terms() {
        assert_eq!(rat("-4/6"), rat("-2/3"));
        assert_eq!(rat("-4/6").to_string(), "-2/3");
        assert_eq!(rat("7/1").to_string(), "7");
    }

    #[test]
    fn parse_prime_field_reduces_mod_p() {
        let f = FieldSpec::prime_field(7).unwrap();
        assert_eq!(parse_scalar("9", f).unwrap(), Scalar::from_integer(f, 2));
        assert!(parse_scalar("1/2", f).is_err());
        assert!(parse_scalar("-3", f).is_err());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_scalar("", FieldSpec::Rationals).is_err());
        assert!(parse_scalar("1/0", FieldSpec::Rationals).is_err());
        assert!(parse_scalar("1/-2", FieldSpec::Rationals).is_err());
        assert!(parse_scalar("a", FieldSpec::Rationals).is_err());
    }

    #[test]
    fn modulus_must_be_prime() {
        assert!(FieldSpec::prime_field(2).is_ok());
        assert!(FieldSpec::prime_field(97).is_ok());
        assert!(FieldSpec::prime_field(1).is_err());
        assert!(FieldSpec::prime_field(6).is_err());
        assert!(FieldSpec::prime_field(561).is_err()); // Carmichael
    }

    #[test]
    fn sampling_is_reproducible_and_in_range() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let x = sample_scalar(&mut a, FieldSpec::Rationals, 100);
            let y = sample_scalar(&mut b, FieldSpec::Rationals, 100);
            assert_eq!(x, y);
            let v = x.as_rational();
            assert!(v.is_integer());
            assert!(v.numer().abs() <= num_bigint::BigInt::from(100));
        }
        let gf2 = FieldSpec::prime_field(2).unwrap();
        for _ in 0..20 {
            let s = sample_scalar(&mut a, gf2, 100);
            assert!(s.as_residue() < 2);
        }
    }

    #[test]
    fn inverse_roundtrip_over_both_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = sample_scalar(&mut rng, FieldSpec::Rationals, 50);
            if !a.is_zero() {
                assert!(a.mul(&a.inv().unwrap()).unwrap().is_one());
            }
        }
        let f = FieldSpec::prime_field(101).unwrap();
        for v in 1..101 {
            let a = Scalar::from_integer(f, v);
            assert!(a.mul(&a.inv().unwrap()).unwrap().is_one());
        }
    }

    #[test]
    fn arithmetic_keeps_canonical_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut acc = rat("1/3");
        for _ in 0..100 {
            let b = sample_scalar(&mut rng, FieldSpec::Rationals, 20);
            acc = acc.add(&b).unwrap().mul(&rat("3/7")).unwrap();
            assert!(acc.is_canonical());
        }
    }
}
