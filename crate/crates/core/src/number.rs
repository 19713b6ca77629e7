//! Scalars: exact rationals, binary decimals and the extended real line.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A finite scalar. Arithmetic stays exact while both operands are rational.
#[derive(Clone, Debug)]
pub enum Number {
    Rational(BigRational),
    Decimal(f64),
}

impl Number {
    pub fn int(n: i64) -> Self {
        Number::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Number::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn zero() -> Self {
        Number::int(0)
    }

    pub fn one() -> Self {
        Number::int(1)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => rational_to_f64(r),
            Number::Decimal(d) => *d,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Number::Rational(r) => Some(r),
            Number::Decimal(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Decimal(d) => *d == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Decimal(d) => *d == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Decimal(d) => *d < 0.0,
        }
    }

    pub fn signum(&self) -> Ordering {
        match self {
            Number::Rational(r) => r.cmp(&BigRational::zero()),
            Number::Decimal(d) => d.partial_cmp(&0.0).unwrap_or(Ordering::Equal),
        }
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Decimal(d) => Number::Decimal(-d),
        }
    }

    pub fn abs(&self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(r.abs()),
            Number::Decimal(d) => Number::Decimal(d.abs()),
        }
    }

    pub fn add(&self, o: &Number) -> Number {
        match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a + b),
            _ => Number::Decimal(self.to_f64() + o.to_f64()),
        }
    }

    pub fn sub(&self, o: &Number) -> Number {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Number) -> Number {
        match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a * b),
            _ => Number::Decimal(self.to_f64() * o.to_f64()),
        }
    }

    pub fn div(&self, o: &Number) -> Result<Number> {
        if o.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a / b),
            _ => Number::Decimal(self.to_f64() / o.to_f64()),
        })
    }

    /// Real power with a rational exponent. Integer exponents on rationals are
    /// exact. Odd-denominator roots of negative bases are real roots.
    pub fn pow(&self, e: &BigRational) -> Result<Number> {
        if e.is_integer() {
            let k = e.to_integer().to_i32().ok_or_else(|| Error::Domain("exponent too large".into()))?;
            if let Number::Rational(r) = self {
                if k < 0 && r.is_zero() {
                    return Err(Error::Domain("zero to a negative power".into()));
                }
                return Ok(Number::Rational(num_traits::pow::Pow::pow(r, k)));
            }
            let b = self.to_f64();
            if k < 0 && b == 0.0 {
                return Err(Error::Domain("zero to a negative power".into()));
            }
            return Ok(Number::Decimal(b.powi(k)));
        }
        let b = self.to_f64();
        let ef = rational_to_f64(e);
        if b >= 0.0 {
            if b == 0.0 && e.is_negative() {
                return Err(Error::Domain("zero to a negative power".into()));
            }
            return Ok(Number::Decimal(b.powf(ef)));
        }
        if e.denom() % 2u32 == BigInt::zero() {
            return Err(Error::Domain(format!("fractional power of negative number {b}")));
        }
        let mag = (-b).powf(ef);
        let odd_numer = e.numer() % 2u32 != BigInt::zero();
        Ok(Number::Decimal(if odd_numer { -mag } else { mag }))
    }

    pub fn cmp_num(&self, o: &Number) -> Ordering {
        match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => a.cmp(b),
            _ => self.to_f64().partial_cmp(&o.to_f64()).unwrap_or(Ordering::Equal),
        }
    }

    /// Parse an integer, `p/q`, or decimal literal into an exact rational.
    pub fn parse_exact(text: &str) -> Option<BigRational> {
        let t = text.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            return Some(BigRational::new(p, q));
        }
        decimal_to_rational(t)
    }
}

/// Exact value of a decimal literal such as `-1.25e-3`.
pub fn decimal_to_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, m) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = match m.split_once('.') {
        Some((a, b)) => (a, b),
        None => (m, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{ip}{fp}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exp - fp.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= num_traits::pow::Pow::pow(&ten, scale as u32);
    } else {
        r /= num_traits::pow::Pow::pow(&ten, (-scale) as u32);
    }
    Some(if neg { -r } else { r })
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Smallest rational with a short decimal expansion close to `v`; used when
/// a numeric result has to be fed back into exact machinery.
pub fn f64_to_rational(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

impl PartialEq for Number {
    fn eq(&self, o: &Number) -> bool {
        match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => a == b,
            (Number::Decimal(a), Number::Decimal(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Number::Decimal(d) => {
                let s = format!("{d:?}");
                f.write_str(&s)
            }
        }
    }
}

/// A point of the extended real line.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(Number),
    PosInf,
}

impl ExtReal {
    pub fn from_f64(v: f64) -> ExtReal {
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(Number::Decimal(v))
        }
    }

    pub fn rational(r: BigRational) -> ExtReal {
        ExtReal::Finite(Number::Rational(r))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::Finite(n) => n.to_f64(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<&Number> {
        match self {
            ExtReal::Finite(n) => Some(n),
            _ => None,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> ExtReal {
        ExtReal::from_f64(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::Finite(n) => write!(f, "{n}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(decimal_to_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(decimal_to_rational("-1.5e2").unwrap(), BigRational::from_integer((-150).into()));
        assert_eq!(decimal_to_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert!(decimal_to_rational("abc").is_none());
    }

    #[test]
    fn odd_roots_of_negatives() {
        let v = Number::int(-8).pow(&BigRational::new(1.into(), 3.into())).unwrap();
        assert!((v.to_f64() + 2.0).abs() < 1e-14);
        let v = Number::int(-8).pow(&BigRational::new(4.into(), 3.into())).unwrap();
        assert!((v.to_f64() - 16.0).abs() < 1e-12);
        assert!(Number::int(-4).pow(&BigRational::new(1.into(), 2.into())).is_err());
    }

    #[test]
    fn integer_powers_stay_exact() {
        let v = Number::ratio(2, 3).pow(&BigRational::from_integer((-2).into())).unwrap();
        assert_eq!(v, Number::ratio(9, 4));
    }
}
