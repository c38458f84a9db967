//! Scalars over ℚ or a prime field 𝔽ₚ.
//!
//! A [`Scalar`] carries its field with it: rationals are arbitrary-precision
//! and always normalized, residues remember their modulus. Mixing the two in
//! one operation is a logic error and panics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The coefficient field of an arrangement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Rationals,
    PrimeField { characteristic: u64 },
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= 1 << 62 {
            return Err(Error::Parse(format!("characteristic {p} too large (must be < 2^62)")));
        }
        Ok(FieldSpec::PrimeField { characteristic: p })
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::PrimeField { characteristic } => *characteristic,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldSpec::PrimeField { characteristic: p } => Scalar::Residue {
                value: v.rem_euclid(*p as i64) as u64,
                modulus: *p,
            },
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rational(BigRational::from_integer(v.clone())),
            FieldSpec::PrimeField { characteristic: p } => {
                let r = v.mod_floor(&BigInt::from(*p));
                Scalar::Residue { value: r.to_u64().expect("residue fits"), modulus: *p }
            }
        }
    }

    /// Parses an integer or `a/b` literal into this field.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let bad = || Error::Parse(format!("invalid coefficient `{text}`"));
        let (num, den) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text.trim(), "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        let d = self.from_bigint(&den);
        if d.is_zero() {
            return Err(Error::Parse(format!(
                "denominator of `{text}` vanishes in characteristic {}",
                self.characteristic()
            )));
        }
        Ok(self.from_bigint(&num).div(&d))
    }

    pub fn label(&self) -> String {
        match self {
            FieldSpec::Rationals => "Q".to_string(),
            FieldSpec::PrimeField { characteristic } => format!("Fp {characteristic}"),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut i = 3u64;
    while i.saturating_mul(i) <= p {
        if p % i == 0 {
            return false;
        }
        i += 2;
    }
    true
}

/// An exact field element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rational(_) => FieldSpec::Rationals,
            Scalar::Residue { modulus, .. } => FieldSpec::PrimeField { characteristic: *modulus },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Residue { value, .. } => *value == 1,
        }
    }

    pub fn inv(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
            Scalar::Residue { value, modulus } => Scalar::Residue {
                value: mod_pow(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        self * &other.inv()
    }

    /// Integer value if this is an integral rational (or a residue).
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Scalar::Rational(r) if r.is_integer() => r.to_integer().to_i64(),
            Scalar::Rational(_) => None,
            Scalar::Residue { value, .. } => i64::try_from(*value).ok(),
        }
    }

    pub fn pow(&self, mut exp: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    /// `self += a * b`, the inner step of every elimination.
    pub fn add_mul_assign(&mut self, a: &Scalar, b: &Scalar) {
        match (self, a, b) {
            (Scalar::Rational(s), Scalar::Rational(x), Scalar::Rational(y)) => {
                *s += x * y;
            }
            (
                Scalar::Residue { value, modulus },
                Scalar::Residue { value: x, .. },
                Scalar::Residue { value: y, .. },
            ) => {
                *value = ((*value as u128 + *x as u128 * *y as u128) % *modulus as u128) as u64;
            }
            _ => panic!("mixed fields in scalar arithmetic"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order for rationals, representative order for residues.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a.cmp(b),
            (Scalar::Residue { value: a, .. }, Scalar::Residue { value: b, .. }) => a.cmp(b),
            (Scalar::Rational(_), Scalar::Residue { .. }) => Ordering::Less,
            (Scalar::Residue { .. }, Scalar::Rational(_)) => Ordering::Greater,
        }
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Residue { value: a, modulus }, Scalar::Residue { value: b, .. }) => {
                Scalar::Residue { value: ((*a as u128 + *b as u128) % *modulus as u128) as u64, modulus: *modulus }
            }
            _ => panic!("mixed fields in scalar arithmetic"),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Residue { value: a, modulus }, Scalar::Residue { value: b, .. }) => {
                Scalar::Residue { value: mul_mod(*a, *b, *modulus), modulus: *modulus }
            }
            _ => panic!("mixed fields in scalar arithmetic"),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Residue { value, modulus } => Scalar::Residue {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Sign of a rational (residues are treated as nonnegative).
pub fn signum(s: &Scalar) -> i32 {
    match s {
        Scalar::Rational(r) if r.is_negative() => -1,
        _ if s.is_zero() => 0,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_normalized() {
        let q = FieldSpec::Rationals;
        let a = q.parse_scalar("4/-6").unwrap();
        assert_eq!(a, q.parse_scalar("-2/3").unwrap());
        if let Scalar::Rational(r) = &a {
            assert!(r.denom().is_positive());
            assert_eq!(r.numer(), &BigInt::from(-2));
        }
    }

    #[test]
    fn residues_invert() {
        let f = FieldSpec::prime(7).unwrap();
        for v in 1..7 {
            let x = f.from_i64(v);
            assert!((&x * &x.inv()).is_one());
        }
        assert_eq!(f.parse_scalar("1/2").unwrap(), f.from_i64(4));
        assert_eq!(f.from_i64(-1), f.from_i64(6));
    }

    #[test]
    fn rejects_composite_and_bad_denominators() {
        assert!(matches!(FieldSpec::prime(9), Err(Error::NotPrime(9))));
        let f = FieldSpec::prime(5).unwrap();
        assert!(f.parse_scalar("1/10").is_err());
        assert!(FieldSpec::Rationals.parse_scalar("3/0").is_err());
        assert!(FieldSpec::Rationals.parse_scalar("x").is_err());
    }

    #[test]
    fn pow_and_add_mul() {
        let q = FieldSpec::Rationals;
        assert_eq!(q.from_i64(-2).pow(5), q.from_i64(-32));
        let mut s = q.from_i64(1);
        s.add_mul_assign(&q.from_i64(2), &q.from_i64(3));
        assert_eq!(s, q.from_i64(7));
    }
}
