use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use super::{format_scaled, parse_unsigned_decimal, pow10};
use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    /// `numer / denom` from machine integers. Panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
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

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest decimal with `digits` fractional digits that is `<= self`.
    pub fn floor_decimal(&self, digits: u32) -> String {
        Fraction::from(self).floor_decimal(digits)
    }

    /// Exact decimal expansion, if the denominator has no prime factors
    /// other than 2 and 5.
    pub fn to_exact_decimal(&self) -> Option<String> {
        let mut den = self.denom().magnitude().clone();
        let (mut twos, mut fives) = (0u32, 0u32);
        let two = BigUint::from(2u32);
        let five = BigUint::from(5u32);
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        loop {
            let (q, r) = den.div_rem(&five);
            if !r.is_zero() {
                break;
            }
            den = q;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        Some(self.floor_decimal(twos.max(fives)))
    }

    /// Parses `0.125`, `-3`, `1/8` or `-7/20`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n
                .trim()
                .parse()
                .map_err(|_| Error::MalformedDecimal(s.to_string()))?;
            let d: BigInt = d
                .trim()
                .parse()
                .map_err(|_| Error::MalformedDecimal(s.to_string()))?;
            return Rational::new(n, d);
        }
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (digits, frac) =
            parse_unsigned_decimal(body).map_err(|_| Error::MalformedDecimal(s.to_string()))?;
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        Rational::new(
            BigInt::from_biguint(sign, digits),
            BigInt::from(pow10(frac)),
        )
    }

    /// Canonical text form: exact decimal when terminating, otherwise `p/q`.
    pub fn to_canonical_string(&self) -> String {
        match self.to_exact_decimal() {
            Some(s) => s,
            None => format!("{}/{}", self.numer(), self.denom()),
        }
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rational::parse(s)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! forward_binop {
    ($ty:ident, $trait:ident, $method:ident, $inner:expr) => {
        impl $trait<&$ty> for &$ty {
            type Output = $ty;
            fn $method(self, rhs: &$ty) -> $ty {
                $inner(self, rhs)
            }
        }
        impl $trait<$ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                $inner(&self, &rhs)
            }
        }
        impl $trait<&$ty> for $ty {
            type Output = $ty;
            fn $method(self, rhs: &$ty) -> $ty {
                $inner(&self, rhs)
            }
        }
        impl $trait<$ty> for &$ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                $inner(self, &rhs)
            }
        }
    };
}

forward_binop!(Rational, Add, add, |a: &Rational, b: &Rational| Rational(
    &a.0 + &b.0
));
forward_binop!(Rational, Sub, sub, |a: &Rational, b: &Rational| Rational(
    &a.0 - &b.0
));
forward_binop!(Rational, Mul, mul, |a: &Rational, b: &Rational| Rational(
    &a.0 * &b.0
));
forward_binop!(Rational, Div, div, |a: &Rational, b: &Rational| {
    assert!(!b.is_zero(), "division by zero");
    Rational(&a.0 / &b.0)
});

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

/// Exact fraction that is not kept in lowest terms.
///
/// Sums of operands with equal denominators keep the denominator, so the
/// probabilities of one law (which all share a denominator) never trigger a
/// gcd. Equality and ordering are by value.
#[derive(Clone, Debug)]
pub struct Fraction {
    num: BigInt,
    den: BigUint,
}

impl Fraction {
    pub fn new(num: BigInt, den: BigUint) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Fraction { num, den })
    }

    /// Nonnegative fraction from unsigned parts. Panics on a zero denominator.
    pub fn from_parts(num: BigUint, den: BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Fraction {
            num: BigInt::from_biguint(Sign::Plus, num),
            den,
        }
    }

    pub fn zero() -> Self {
        Fraction {
            num: BigInt::zero(),
            den: BigUint::one(),
        }
    }

    pub fn one() -> Self {
        Fraction {
            num: BigInt::one(),
            den: BigUint::one(),
        }
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        Fraction {
            num: v.into(),
            den: BigUint::one(),
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn signum(&self) -> Ordering {
        match self.num.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Fraction {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Fraction {
            num: &self.num * k,
            den: self.den.clone(),
        }
    }

    /// Divides by a positive integer.
    pub fn div_uint(&self, k: &BigUint) -> Self {
        assert!(!k.is_zero(), "division by zero");
        Fraction {
            num: self.num.clone(),
            den: &self.den * k,
        }
    }

    /// Reduces to lowest terms. Costs one gcd of the operand sizes.
    pub fn to_rational(&self) -> Rational {
        Rational(BigRational::new(
            self.num.clone(),
            BigInt::from(self.den.clone()),
        ))
    }

    /// Largest decimal with `digits` fractional digits that is `<= self`.
    pub fn floor_decimal(&self, digits: u32) -> String {
        let scaled = &self.num * BigInt::from(pow10(digits));
        let q = scaled.div_floor(&BigInt::from(self.den.clone()));
        format_scaled(q.is_negative(), q.magnitude(), digits)
    }

    /// `floor(self * 10^digits)` as an integer, for nonnegative values.
    pub fn floor_scaled(&self, digits: u32) -> BigInt {
        (&self.num * BigInt::from(pow10(digits))).div_floor(&BigInt::from(self.den.clone()))
    }

    /// Nearest-ish binary float; for display and statistics only.
    pub fn to_f64(&self) -> f64 {
        // Keep ~64 significant bits of the quotient.
        let nb = self.num.magnitude().bits() as i64;
        let db = self.den.bits() as i64;
        let shift = 64 - (nb - db);
        let q = if shift >= 0 {
            (self.num.clone() << (shift as usize)) / BigInt::from(self.den.clone())
        } else {
            self.num.clone() / (BigInt::from(self.den.clone()) << ((-shift) as usize))
        };
        q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(shift as i32))
    }

    fn cross(&self, other: &Fraction) -> (BigInt, BigInt) {
        if self.den == other.den {
            (self.num.clone(), other.num.clone())
        } else {
            (
                &self.num * BigInt::from(other.den.clone()),
                &other.num * BigInt::from(self.den.clone()),
            )
        }
    }
}

impl From<&Rational> for Fraction {
    fn from(r: &Rational) -> Self {
        Fraction {
            num: r.numer().clone(),
            den: r.denom().magnitude().clone(),
        }
    }
}

impl From<Rational> for Fraction {
    fn from(r: Rational) -> Self {
        Fraction::from(&r)
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.cross(other);
        a.cmp(&b)
    }
}

fn frac_add(a: &Fraction, b: &Fraction) -> Fraction {
    if a.den == b.den {
        return Fraction {
            num: &a.num + &b.num,
            den: a.den.clone(),
        };
    }
    let (x, y) = a.cross(b);
    Fraction {
        num: x + y,
        den: &a.den * &b.den,
    }
}

fn frac_sub(a: &Fraction, b: &Fraction) -> Fraction {
    if a.den == b.den {
        return Fraction {
            num: &a.num - &b.num,
            den: a.den.clone(),
        };
    }
    let (x, y) = a.cross(b);
    Fraction {
        num: x - y,
        den: &a.den * &b.den,
    }
}

fn frac_mul(a: &Fraction, b: &Fraction) -> Fraction {
    Fraction {
        num: &a.num * &b.num,
        den: &a.den * &b.den,
    }
}

forward_binop!(Fraction, Add, add, frac_add);
forward_binop!(Fraction, Sub, sub, frac_sub);
forward_binop!(Fraction, Mul, mul, frac_mul);

impl Neg for Fraction {
    type Output = Fraction;
    fn neg(self) -> Fraction {
        Fraction {
            num: -self.num,
            den: self.den,
        }
    }
}
