use num_bigint::BigUint;
use num_traits::Zero;
use std::cmp::Ordering;
use std::fmt;

use super::{format_scaled, parse_unsigned_decimal, pow10, Fraction, Rational};
use crate::error::{Error, Result};

/// Nonnegative decimal `mantissa * 10^-scale`.
///
/// Addition is exact. Multiplication keeps `scale` digits and drops the rest
/// (truncation toward zero), so a product never exceeds the exact product of
/// its operands and is nondecreasing in each of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedDec {
    mantissa: BigUint,
    scale: u32,
}

impl FixedDec {
    pub fn from_mantissa(mantissa: BigUint, scale: u32) -> Self {
        FixedDec { mantissa, scale }
    }

    pub fn zero(scale: u32) -> Self {
        FixedDec {
            mantissa: BigUint::zero(),
            scale,
        }
    }

    pub fn one(scale: u32) -> Self {
        FixedDec {
            mantissa: pow10(scale),
            scale,
        }
    }

    pub fn from_integer(value: u64, scale: u32) -> Self {
        FixedDec {
            mantissa: BigUint::from(value) * pow10(scale),
            scale,
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Parses a decimal literal exactly; fails rather than round.
    pub fn from_decimal(s: &str, scale: u32) -> Result<Self> {
        if s.trim_start().starts_with('-') {
            return Err(Error::Negative(s.to_string()));
        }
        let (digits, frac) = parse_unsigned_decimal(s.trim())?;
        if frac > scale {
            return Err(Error::TooManyDigits {
                value: s.to_string(),
                scale,
            });
        }
        Ok(FixedDec {
            mantissa: digits * pow10(scale - frac),
            scale,
        })
    }

    /// Largest value at `scale` that does not exceed `value`.
    pub fn floor_of(value: &Rational, scale: u32) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::Negative(value.to_string()));
        }
        let scaled = Fraction::from(value).floor_scaled(scale);
        Ok(FixedDec {
            mantissa: scaled.magnitude().clone(),
            scale,
        })
    }

    /// `value` at `scale` when it is representable without rounding.
    pub fn exact_of(value: &Rational, scale: u32) -> Result<Self> {
        let fd = FixedDec::floor_of(value, scale)?;
        if fd.to_rational() != *value {
            return Err(Error::TooManyDigits {
                value: value.to_canonical_string(),
                scale,
            });
        }
        Ok(fd)
    }

    fn check_scale(&self, other: &FixedDec) -> Result<()> {
        if self.scale != other.scale {
            return Err(Error::ScaleMismatch(self.scale, other.scale));
        }
        Ok(())
    }

    pub fn add(&self, other: &FixedDec) -> Result<FixedDec> {
        self.check_scale(other)?;
        Ok(FixedDec {
            mantissa: &self.mantissa + &other.mantissa,
            scale: self.scale,
        })
    }

    /// `floor(a * b * 10^-scale)` at the common scale.
    pub fn mul(&self, other: &FixedDec) -> Result<FixedDec> {
        self.check_scale(other)?;
        let raw = &self.mantissa * &other.mantissa;
        Ok(FixedDec {
            mantissa: raw / pow10(self.scale),
            scale: self.scale,
        })
    }

    pub fn mul_int(&self, k: u64) -> FixedDec {
        FixedDec {
            mantissa: &self.mantissa * k,
            scale: self.scale,
        }
    }

    pub fn checked_sub(&self, other: &FixedDec) -> Result<Option<FixedDec>> {
        self.check_scale(other)?;
        if self.mantissa < other.mantissa {
            return Ok(None);
        }
        Ok(Some(FixedDec {
            mantissa: &self.mantissa - &other.mantissa,
            scale: self.scale,
        }))
    }

    /// `max(self - other, 0)`. A lower bound on a nonnegative difference
    /// stays a lower bound after clamping.
    pub fn saturating_sub(&self, other: &FixedDec) -> Result<FixedDec> {
        Ok(self
            .checked_sub(other)?
            .unwrap_or_else(|| FixedDec::zero(self.scale)))
    }

    /// Lower bound `floor(10^scale / lambda^i) * 10^-scale` on `lambda^-i`.
    pub fn pow_inv(lambda: u64, i: u32, scale: u32) -> Result<FixedDec> {
        if lambda == 0 {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        let den = BigUint::from(lambda).pow(i);
        Ok(FixedDec {
            mantissa: pow10(scale) / den,
            scale,
        })
    }

    /// Exactly `mantissa / 10^scale`, reduced.
    pub fn to_rational(&self) -> Rational {
        self.to_fraction().to_rational()
    }

    pub fn to_fraction(&self) -> Fraction {
        Fraction::from_parts(self.mantissa.clone(), pow10(self.scale))
    }

    pub fn to_f64(&self) -> f64 {
        self.to_fraction().to_f64()
    }
}

impl PartialOrd for FixedDec {
    /// Values at different scales are not compared.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.scale != other.scale {
            return None;
        }
        Some(self.mantissa.cmp(&other.mantissa))
    }
}

impl fmt::Display for FixedDec {
    /// Full expansion with all `scale` digits, trailing zeros included.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_scaled(false, &self.mantissa, self.scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd(s: &str, scale: u32) -> FixedDec {
        FixedDec::from_decimal(s, scale).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(fd("0.5", 2).add(&fd("0.25", 2)).unwrap(), fd("0.75", 2));
        assert_eq!(
            FixedDec::zero(4).add(&fd("0.1234", 4)).unwrap(),
            fd("0.1234", 4)
        );
        assert_eq!(
            fd("0.956", 3).add(&fd("0.044", 3)).unwrap().to_string(),
            "1.000"
        );
        assert_eq!(
            fd("0.5", 2).add(&fd("0.5", 3)),
            Err(Error::ScaleMismatch(2, 3))
        );
    }

    #[test]
    fn mul_examples() {
        assert_eq!(fd("0.1", 1).mul(&fd("0.1", 1)).unwrap(), FixedDec::zero(1));
        let x = fd("0.7312", 6);
        assert_eq!(FixedDec::one(6).mul(&x).unwrap(), x);
        let q0 = fd("0.95651", 200);
        let sq = q0.mul(&q0).unwrap();
        // 95651^2 = 9149113801, ten digits: no truncation at scale 200.
        assert_eq!(
            BigUint::from(95651u64 * 95651),
            BigUint::from(9149113801u64)
        );
        assert_eq!(sq, fd("0.9149113801", 200));
    }

    #[test]
    fn from_decimal_examples() {
        let a = fd("0.08698", 200);
        // 0.08698 = 8698 * 10^-5, so the mantissa at scale 200 is 8698 * 10^195.
        assert_eq!(a.mantissa(), &(BigUint::from(8698u32) * pow10(195)));
        assert!(fd("0", 200).is_zero());
        assert_eq!(fd("0.112", 200).to_rational(), Rational::ratio(112, 1000));
        assert!(matches!(
            FixedDec::from_decimal("0.123", 2),
            Err(Error::TooManyDigits { .. })
        ));
        assert!(matches!(
            FixedDec::from_decimal("-0.1", 2),
            Err(Error::Negative(_))
        ));
        assert!(matches!(
            FixedDec::from_decimal("0.x", 2),
            Err(Error::MalformedDecimal(_))
        ));
    }

    #[test]
    fn pow_inv_examples() {
        assert_eq!(FixedDec::pow_inv(2, 3, 200).unwrap(), fd("0.125", 200));
        assert_eq!(FixedDec::pow_inv(7, 0, 50).unwrap(), FixedDec::one(50));
        // Oracle: integer division 10^200 / 9.
        let third = FixedDec::pow_inv(3, 2, 200).unwrap();
        assert_eq!(third.mantissa(), &(pow10(200) / BigUint::from(9u32)));
        assert!(third.to_rational() <= Rational::ratio(1, 9));
        assert!(
            Rational::ratio(1, 9) - third.to_rational()
                < Rational::new(1.into(), pow10(200).into()).unwrap()
        );
    }

    #[test]
    fn to_rational_examples() {
        assert_eq!(fd("0.125", 3).to_rational(), Rational::ratio(1, 8));
        assert_eq!(FixedDec::zero(5).to_rational(), Rational::zero());
        // gcd(8698, 100000) = 2.
        assert_eq!(
            fd("0.08698", 200).to_rational(),
            Rational::ratio(4349, 50000)
        );
    }

    #[test]
    fn display_keeps_all_digits() {
        assert_eq!(fd("0.5", 4).to_string(), "0.5000");
        assert_eq!(FixedDec::from_integer(3, 2).to_string(), "3.00");
    }

    #[test]
    fn saturating_sub_clamps() {
        assert_eq!(
            fd("0.2", 2).saturating_sub(&fd("0.5", 2)).unwrap(),
            FixedDec::zero(2)
        );
        assert_eq!(
            fd("0.5", 2).saturating_sub(&fd("0.2", 2)).unwrap(),
            fd("0.3", 2)
        );
    }

    #[derive(Debug, Clone)]
    enum Expr {
        Leaf(u64),
        Add(Box<Expr>, Box<Expr>),
        Mul(Box<Expr>, Box<Expr>),
    }

    fn expr() -> impl Strategy<Value = Expr> {
        let leaf = (0u64..=100_000).prop_map(Expr::Leaf);
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            ]
        })
    }

    // Leaves are k / 10^5 exactly; the fixed scale is smaller, so leaves are
    // themselves truncated before entering the tree.
    fn eval_fixed(e: &Expr, scale: u32) -> FixedDec {
        match e {
            Expr::Leaf(k) => {
                FixedDec::floor_of(&Rational::ratio(*k as i64, 100_000), scale).unwrap()
            }
            Expr::Add(a, b) => eval_fixed(a, scale).add(&eval_fixed(b, scale)).unwrap(),
            Expr::Mul(a, b) => eval_fixed(a, scale).mul(&eval_fixed(b, scale)).unwrap(),
        }
    }

    fn eval_exact(e: &Expr) -> Rational {
        match e {
            Expr::Leaf(k) => Rational::ratio(*k as i64, 100_000),
            Expr::Add(a, b) => eval_exact(a) + eval_exact(b),
            Expr::Mul(a, b) => eval_exact(a) * eval_exact(b),
        }
    }

    proptest! {
        #[test]
        fn expression_trees_stay_below_exact(e in expr(), scale in 1u32..12) {
            prop_assert!(eval_fixed(&e, scale).to_rational() <= eval_exact(&e));
        }

        #[test]
        fn mul_and_add_are_monotone(a in 0u64..10_000, b in 0u64..10_000, c in 0u64..10_000, scale in 1u32..8) {
            let (lo, hi) = (a.min(b), a.max(b));
            let f = |v: u64| FixedDec::from_mantissa(BigUint::from(v), scale);
            prop_assert!(f(lo).mul(&f(c)).unwrap() <= f(hi).mul(&f(c)).unwrap());
            prop_assert!(f(c).mul(&f(lo)).unwrap() <= f(c).mul(&f(hi)).unwrap());
            prop_assert!(f(lo).add(&f(c)).unwrap() <= f(hi).add(&f(c)).unwrap());
        }

        #[test]
        fn short_products_are_exact(a in 0u64..1000, b in 0u64..1000) {
            // three digits each, six-digit product, scale 6
            let x = FixedDec::from_mantissa(BigUint::from(a) * pow10(3), 6);
            let y = FixedDec::from_mantissa(BigUint::from(b) * pow10(3), 6);
            prop_assert_eq!(x.mul(&y).unwrap().to_rational(), x.to_rational() * y.to_rational());
        }
    }
}
