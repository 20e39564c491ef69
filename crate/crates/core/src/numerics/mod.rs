//! Number types for the certification path.
//!
//! [`Rational`] is the reduced exact type used for model parameters and
//! small results. [`Fraction`] is an exact, lazily reduced fraction used for
//! quantities whose denominators run to hundreds of thousands of digits,
//! where a gcd per operation would dominate the run time. [`FixedDec`] is a
//! nonnegative decimal at a fixed scale whose multiplication truncates toward
//! zero, so every value built from `+` and `*` of lower bounds is itself a
//! lower bound.

mod fixed;
mod rational;

pub use fixed::FixedDec;
pub use rational::{Fraction, Rational};

use num_bigint::BigUint;
use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Default number of fractional digits for the fixed-point backend.
pub const DEFAULT_SCALE: u32 = 200;

thread_local! {
    static POW10: RefCell<HashMap<u32, BigUint>> = RefCell::new(HashMap::new());
}

/// `10^e`, memoized per thread.
pub fn pow10(e: u32) -> BigUint {
    POW10.with(|cache| {
        cache
            .borrow_mut()
            .entry(e)
            .or_insert_with(|| BigUint::from(10u32).pow(e))
            .clone()
    })
}

/// Splits a plain decimal literal into its digit string and number of
/// fractional digits. Accepts `12`, `12.`, `.5`, `0.08698`; rejects signs,
/// exponents and empty input.
pub(crate) fn parse_unsigned_decimal(s: &str) -> Result<(BigUint, u32)> {
    let malformed = || Error::MalformedDecimal(s.to_string());
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(malformed());
    }
    let digits: String = int_part.chars().chain(frac_part.chars()).collect();
    let value = if digits.is_empty() {
        BigUint::default()
    } else {
        digits.parse::<BigUint>().map_err(|_| malformed())?
    };
    let frac_len = u32::try_from(frac_part.len()).map_err(|_| malformed())?;
    Ok((value, frac_len))
}

/// Formats `mag * 10^-digits` with exactly `digits` fractional digits.
pub(crate) fn format_scaled(negative: bool, mag: &BigUint, digits: u32) -> String {
    let raw = mag.to_str_radix(10);
    let digits = digits as usize;
    let mut out = String::with_capacity(raw.len() + digits + 3);
    if negative && mag.bits() > 0 {
        out.push('-');
    }
    if digits == 0 {
        out.push_str(&raw);
        return out;
    }
    if raw.len() <= digits {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', digits - raw.len()));
        out.push_str(&raw);
    } else {
        let (int, frac) = raw.split_at(raw.len() - digits);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}
