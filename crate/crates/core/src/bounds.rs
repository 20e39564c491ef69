//! Bounds on the critical arrival density.
//!
//! Upper bounds: `alpha` is supercritical as soon as `G(alpha) > F(alpha)`,
//! and since `G_n` increases to `G`, a certified lower bound `g_n` of some
//! `G_n` with `g_n > F(alpha)` proves it. Also the percolation comparison
//! `alpha_c <= k d^-k` for arrivals of `k` cars.
//!
//! Lower bounds: a union bound over connected subtrees containing the root,
//! with `growth^m` bounding the number of such subtrees on `m` vertices.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::dist::{ArrivalFamily, ArrivalLaw};
use crate::error::{Error, Result};
use crate::numerics::{pow10, FixedDec, Fraction, Rational};
use crate::recursion::{big_f, run, BackendChoice, ModelConfig};

/// Rational upper bound on Euler's number (error below `10^-40`).
pub const E_UPPER: &str = "2.7182818284590452353602874713526624977573";

/// Default digits for the certified square root in [`lower_bound_count`].
pub const DEFAULT_SQRT_DIGITS: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GfCriterion,
    CatalanCount,
    Percolation,
}

/// A replayable witness for a one-sided bound on the critical density.
///
/// For `gf-criterion`, `margin` is `g_n(alpha) - F(alpha)` floored to a
/// decimal and `scale` is `None` for exact runs. For `catalan-count` it is
/// the slack `1 - 4 growth^2 p (1 - p)` at `p = alpha/2`; for `percolation`
/// it is `d^k alpha / k - 1`, which is zero at the boundary value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub method: Method,
    pub d: u32,
    pub arrival: String,
    pub alpha: String,
    pub n: Option<usize>,
    pub scale: Option<u32>,
    pub margin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<String>,
}

/// Result of an upper-bound check; `certificate` is `None` on refusal.
#[derive(Clone, Debug)]
pub struct UpperCheck {
    pub g: Fraction,
    pub f: Rational,
    pub margin: Fraction,
    pub certificate: Option<BoundCertificate>,
}

impl UpperCheck {
    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }
}

/// Decimal floor of `x` with at least `min_digits` digits, refined until a
/// nonzero value shows a nonzero digit.
fn margin_string(x: &Fraction, min_digits: u32) -> String {
    let mut digits = min_digits.max(1);
    loop {
        let s = x.floor_decimal(digits);
        let shows_sign = x.is_zero() || s.bytes().any(|b| (b'1'..=b'9').contains(&b));
        if shows_sign || digits > 1 << 24 {
            return s;
        }
        digits *= 2;
    }
}

/// Runs the engine to depth `n` and compares the resulting lower bound
/// `g_n` on `G_n(alpha)` with the exact `F(alpha)`. A refusal is
/// inconclusive: it never shows `alpha <= alpha_c`.
pub fn certify_upper(
    d: u32,
    arrival: &ArrivalLaw,
    n: usize,
    backend: BackendChoice,
) -> Result<UpperCheck> {
    certify_upper_with(&ModelConfig {
        backend,
        ..ModelConfig::new(d, arrival.clone(), n)
    })
}

/// [`certify_upper`] with full control over the run configuration (for
/// example a raised exact vertex cap).
pub fn certify_upper_with(cfg: &ModelConfig) -> Result<UpperCheck> {
    let alpha = cfg.arrival.mean();
    if let BackendChoice::Fixed { scale } = cfg.backend {
        FixedDec::exact_of(&alpha, scale)?;
    }
    let f = big_f(&alpha, cfg.lambda())?;
    let traj = run(cfg)?;
    let g = traj.g.last().expect("nonempty").clone();
    let margin = &g - &Fraction::from(&f);
    let certificate = (margin.signum() == std::cmp::Ordering::Greater).then(|| BoundCertificate {
        kind: BoundKind::Upper,
        method: Method::GfCriterion,
        d: cfg.d,
        arrival: cfg.arrival.spec(),
        alpha: alpha.to_canonical_string(),
        n: Some(cfg.depth),
        scale: cfg.backend.scale(),
        margin: margin_string(&margin, cfg.backend.scale().unwrap_or(40) + 2),
        growth: None,
    });
    Ok(UpperCheck {
        g,
        f,
        margin,
        certificate,
    })
}

/// `k d^-k`: above it, the vertices at distance `k` that receive `k` cars
/// form a supercritical percolation cluster and infinitely many cars reach
/// the root.
pub fn upper_bound_percolation(d: u32, k: u32) -> Result<Rational> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "percolation comparison needs k >= 2".into(),
        ));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(
            "percolation comparison needs d >= 2".into(),
        ));
    }
    Ok(Rational::from_integer(k) / Rational::from_integer(BigInt::from(d).pow(k)))
}

pub fn percolation_certificate(d: u32, k: u32) -> Result<BoundCertificate> {
    let alpha = upper_bound_percolation(d, k)?;
    let family = ArrivalFamily::Atom(k as usize);
    let law = family.at(alpha.clone())?;
    let slack = Rational::from_integer(BigInt::from(d).pow(k)) * &alpha / Rational::from_integer(k)
        - Rational::one();
    Ok(BoundCertificate {
        kind: BoundKind::Upper,
        method: Method::Percolation,
        d,
        arrival: law.spec(),
        alpha: alpha.to_canonical_string(),
        n: None,
        scale: None,
        margin: slack.to_canonical_string(),
        growth: None,
    })
}

/// Growth constant bounding the number of rooted connected subtrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Growth {
    /// `4`: Catalan numbers, binary tree only.
    Catalan,
    /// `e d`, from `C(dm, m) <= (e d)^m`; `e` replaced by a rational upper
    /// bound.
    Ed,
    /// `d^d / (d-1)^(d-1)`, the growth rate of the generalized Catalan
    /// numbers.
    GeneralizedCatalan,
    Custom(Rational),
}

impl Growth {
    /// `catalan` for `d = 2`, `ed` otherwise.
    pub fn default_for(d: u32) -> Growth {
        if d == 2 {
            Growth::Catalan
        } else {
            Growth::Ed
        }
    }

    pub fn parse(s: &str) -> Result<Growth> {
        match s.trim() {
            "catalan" => Ok(Growth::Catalan),
            "ed" => Ok(Growth::Ed),
            "generalized-catalan" => Ok(Growth::GeneralizedCatalan),
            other => Ok(Growth::Custom(Rational::parse(other)?)),
        }
    }

    /// The constant used, never below the true growth rate.
    pub fn value(&self, d: u32) -> Result<Rational> {
        let g = match self {
            Growth::Catalan if d == 2 => Rational::from_integer(4),
            Growth::Catalan => {
                return Err(Error::InvalidArgument(
                    "the Catalan growth constant applies to d = 2 only".into(),
                ))
            }
            Growth::Ed => Rational::parse(E_UPPER)? * Rational::from_integer(d),
            Growth::GeneralizedCatalan => {
                if d < 2 {
                    return Err(Error::InvalidArgument(
                        "generalized Catalan growth needs d >= 2".into(),
                    ));
                }
                Rational::from_integer(BigInt::from(d).pow(d))
                    / Rational::from_integer(BigInt::from(d - 1).pow(d - 1))
            }
            Growth::Custom(g) => g.clone(),
        };
        if !g.is_positive() {
            return Err(Error::InvalidArgument(
                "growth constant must be positive".into(),
            ));
        }
        Ok(g)
    }
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Catalan => f.write_str("catalan"),
            Growth::Ed => f.write_str("ed"),
            Growth::GeneralizedCatalan => f.write_str("generalized-catalan"),
            Growth::Custom(g) => f.write_str(&g.to_canonical_string()),
        }
    }
}

/// Smallest `s` with `s >= sqrt(x)` on the grid `10^-digits`.
fn sqrt_upper(x: &Rational, digits: u32) -> Rational {
    let scale = pow10(2 * digits);
    let num = x.numer().magnitude() * &scale;
    let den = x.denom().magnitude();
    let target = (&num + den - 1u32) / den;
    let mut r = target.sqrt();
    if &r * &r < target {
        r += 1u32;
    }
    Rational::new(BigInt::from(r), BigInt::from(pow10(digits))).expect("positive denominator")
}

/// A certified lower bound on the critical density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBound {
    pub alpha: Rational,
    pub growth: Rational,
    /// `1 - 4 growth^2 p (1 - p)` at `p = alpha / 2`; nonnegative.
    pub slack: Rational,
}

/// `alpha = 2 p*` where `p*` is the smaller root of `4 growth^2 p (1-p) = 1`,
/// that is `1 - sqrt(1 - 1/growth^2)`, rounded down. For smaller `alpha`
/// the union bound over subtrees is summable and no car escapes to the
/// root infinitely often.
pub fn lower_bound_count(d: u32, growth: &Growth, sqrt_digits: u32) -> Result<LowerBound> {
    let g = growth.value(d)?;
    if g < Rational::one() {
        return Err(Error::InvalidArgument(
            "growth constant below 1 gives no bound".into(),
        ));
    }
    let inside = Rational::one() - (&g * &g).recip()?;
    let alpha = Rational::one() - sqrt_upper(&inside, sqrt_digits);
    let p = &alpha / &Rational::from_integer(2);
    let slack = Rational::one() - Rational::from_integer(4) * &g * &g * &p * (Rational::one() - &p);
    Ok(LowerBound {
        alpha,
        growth: g,
        slack,
    })
}

/// The cruder `alpha = 1 / (2 growth^2)` from requiring `4 growth^2 p < 1`.
pub fn lower_bound_crude(d: u32, growth: &Growth) -> Result<Rational> {
    let g = growth.value(d)?;
    (Rational::from_integer(2) * &g * &g).recip()
}

pub fn lower_certificate(d: u32, growth: &Growth, sqrt_digits: u32) -> Result<BoundCertificate> {
    let lb = lower_bound_count(d, growth, sqrt_digits)?;
    Ok(BoundCertificate {
        kind: BoundKind::Lower,
        method: Method::CatalanCount,
        d,
        arrival: "two".into(),
        alpha: lb.alpha.to_canonical_string(),
        n: None,
        scale: None,
        margin: lb.slack.to_canonical_string(),
        growth: Some(growth.to_string()),
    })
}

/// Evenly spaced `alpha` values, exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaGrid {
    pub start: Rational,
    pub stop: Rational,
    pub step: Rational,
}

impl AlphaGrid {
    pub fn new(start: Rational, stop: Rational, step: Rational) -> Result<Self> {
        if !step.is_positive() || start.is_negative() || stop < start {
            return Err(Error::InvalidArgument(
                "grid needs 0 <= start <= stop and step > 0".into(),
            ));
        }
        Ok(AlphaGrid { start, stop, step })
    }

    /// `start, start + step, ...` up to and including `stop`.
    pub fn points(&self) -> Vec<Rational> {
        let span = (&self.stop - &self.start) / self.step.clone();
        let count = (span.numer() / span.denom()).magnitude().clone();
        let count: usize = usize::try_from(&count).unwrap_or(usize::MAX - 1) + 1;
        (0..count)
            .map(|i| &self.start + &(&self.step * &Rational::from_integer(i as u64)))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct GridPoint {
    pub alpha: Rational,
    pub margin: Fraction,
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    /// Grid points evaluated, in increasing `alpha`.
    pub evaluated: Vec<GridPoint>,
    pub best: Option<BoundCertificate>,
}

/// Smallest grid `alpha` that [`certify_upper`] certifies. Points are
/// checked in increasing order, a chunk at a time in parallel, and the scan
/// stops after the first chunk containing a certificate; the result does not
/// depend on scheduling.
pub fn search_upper(
    d: u32,
    family: ArrivalFamily,
    n: usize,
    backend: BackendChoice,
    grid: &AlphaGrid,
) -> Result<SearchResult> {
    const CHUNK: usize = 16;
    let points = grid.points();
    if let BackendChoice::Fixed { scale } = backend {
        for a in &points {
            FixedDec::exact_of(a, scale)?;
        }
    }
    let mut evaluated = Vec::new();
    for chunk in points.chunks(CHUNK) {
        let checks: Vec<(Rational, UpperCheck)> = chunk
            .par_iter()
            .map(|a| -> Result<_> {
                Ok((
                    a.clone(),
                    certify_upper(d, &family.at(a.clone())?, n, backend)?,
                ))
            })
            .collect::<Result<_>>()?;
        let mut best = None;
        for (alpha, check) in checks {
            evaluated.push(GridPoint {
                alpha,
                margin: check.margin.clone(),
                certified: check.is_certified(),
            });
            if best.is_none() {
                best = check.certificate;
            }
        }
        if best.is_some() {
            return Ok(SearchResult { evaluated, best });
        }
    }
    Ok(SearchResult {
        evaluated,
        best: None,
    })
}

/// Re-derives a certificate from its own fields and checks that the same
/// margin comes out.
pub fn replay_certificate(cert: &BoundCertificate) -> Result<bool> {
    let regenerated = match cert.method {
        Method::GfCriterion => {
            let arrival = ArrivalLaw::parse(&cert.arrival)?;
            let n = cert
                .n
                .ok_or_else(|| Error::InvalidArgument("certificate lacks a depth".into()))?;
            let backend = match cert.scale {
                Some(scale) => BackendChoice::Fixed { scale },
                None => BackendChoice::Exact,
            };
            let cfg = ModelConfig {
                backend,
                exact_vertex_cap: u128::MAX,
                ..ModelConfig::new(cert.d, arrival, n)
            };
            certify_upper_with(&cfg)?.certificate
        }
        Method::CatalanCount => {
            // Any alpha <= 1 with nonnegative slack lies below the smaller
            // root, so the recorded alpha is checked directly.
            let growth = Growth::parse(cert.growth.as_deref().unwrap_or("catalan"))?;
            let g = growth.value(cert.d)?;
            let alpha = Rational::parse(&cert.alpha)?;
            let p = &alpha / &Rational::from_integer(2);
            let slack =
                Rational::one() - Rational::from_integer(4) * &g * &g * &p * (Rational::one() - &p);
            let valid = !alpha.is_negative() && alpha <= Rational::one() && !slack.is_negative();
            return Ok(valid
                && cert.kind == BoundKind::Lower
                && slack.to_canonical_string() == cert.margin);
        }
        Method::Percolation => {
            let k = ArrivalLaw::parse(&cert.arrival)?
                .atom_size()
                .ok_or_else(|| {
                    Error::InvalidArgument("percolation certificate needs an atom arrival".into())
                })?;
            Some(percolation_certificate(cert.d, k as u32)?)
        }
    };
    Ok(regenerated.as_ref() == Some(cert))
}

/// `1 / (2 e^2) d^-2` with the rational upper bound on `e`, which makes
/// this a lower estimate of the asymptotic value.
pub fn asymptotic_lower(d: u32) -> Result<Rational> {
    let e = Rational::parse(E_UPPER)?;
    (Rational::from_integer(2) * &e * &e * Rational::from_integer(BigInt::from(d).pow(2))).recip()
}
