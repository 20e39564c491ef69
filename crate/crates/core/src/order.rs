//! Increasing convex order on integer laws.
//!
//! For laws on the nonnegative integers with finite support, `A <= B` in the
//! increasing convex order iff `E (A - t)^+ <= E (B - t)^+` for every integer
//! `t >= 0`. Reports carry the exact margins `E (B - t)^+ - E (A - t)^+`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dist::{Backend, Exact, IntDist, Scalar};
use crate::error::{Error, Result};
use crate::numerics::Fraction;
use crate::recursion::{BackendChoice, Engine, ModelConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict", content = "t")]
pub enum Verdict {
    Dominated,
    /// Smallest threshold with a negative margin.
    ViolatedAt(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IcxReport {
    /// `margins[t]` for `t = 0..=max support of either law`.
    pub margins: Vec<Fraction>,
    pub verdict: Verdict,
}

impl IcxReport {
    pub fn is_dominated(&self) -> bool {
        self.verdict == Verdict::Dominated
    }

    /// The `t = 0` margin, i.e. `mean(B) - mean(A)`.
    pub fn mean_gap(&self) -> &Fraction {
        &self.margins[0]
    }
}

fn tails<B: Backend>(law: &IntDist<B>, up_to: usize) -> Vec<Fraction> {
    law.tail_expectation_numerators(up_to)
        .into_iter()
        .map(|n| law.backend().scalar(n).to_fraction())
        .collect()
}

/// Compares `a` against `b`: dominated means `a <= b`.
pub fn icx_compare_laws<A: Backend, B: Backend>(a: &IntDist<A>, b: &IntDist<B>) -> IcxReport {
    let top = a.max_value().unwrap_or(0).max(b.max_value().unwrap_or(0));
    let (ta, tb) = (tails(a, top), tails(b, top));
    let margins: Vec<Fraction> = tb.iter().zip(&ta).map(|(y, x)| y - x).collect();
    let verdict = match margins.iter().position(Fraction::is_negative) {
        Some(t) => Verdict::ViolatedAt(t),
        None => Verdict::Dominated,
    };
    IcxReport { margins, verdict }
}

/// Compares the exact laws of `X_n` under `cfg_a` and `cfg_b` at every depth
/// `0..=depth`. Both configurations must use the exact backend and the same
/// `d`; the whole law is kept regardless of the configured law mode.
pub fn icx_compare_parking(
    cfg_a: &ModelConfig,
    cfg_b: &ModelConfig,
    depth: usize,
) -> Result<Vec<IcxReport>> {
    if cfg_a.d != cfg_b.d {
        return Err(Error::InvalidArgument(format!(
            "offspring counts differ: {} vs {}",
            cfg_a.d, cfg_b.d
        )));
    }
    for cfg in [cfg_a, cfg_b] {
        if cfg.backend != BackendChoice::Exact {
            return Err(Error::BackendMismatch(format!(
                "order comparisons need the exact backend, got {}",
                cfg.backend
            )));
        }
    }
    let prepare = |cfg: &ModelConfig| cfg.clone().full_law().with_depth(depth);
    let ea = Engine::new(&prepare(cfg_a), Exact::new())?;
    let eb = Engine::new(&prepare(cfg_b), Exact::new())?;
    let (mut sa, mut sb) = (ea.initial(), eb.initial());
    let mut out = vec![icx_compare_laws(sa.law(), sb.law())];
    for _ in 0..depth {
        ea.step(&mut sa)?;
        eb.step(&mut sb)?;
        out.push(icx_compare_laws(sa.law(), sb.law()));
    }
    Ok(out)
}

/// `depth,t,margin` rows, margins floored to `digits` fractional digits.
pub fn reports_csv(reports: &[IcxReport], digits: u32) -> String {
    let mut s = String::from("depth,t,margin\n");
    for (depth, r) in reports.iter().enumerate() {
        for (t, m) in r.margins.iter().enumerate() {
            let _ = writeln!(s, "{depth},{t},{}", m.floor_decimal(digits));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ArrivalLaw;
    use crate::numerics::Rational;

    fn law(spec: &str) -> IntDist<Exact> {
        ArrivalLaw::parse(spec)
            .unwrap()
            .to_dist(&Exact::new())
            .unwrap()
    }

    #[test]
    fn reflexive() {
        let a = law("pmf:0:0.5,1:0.25,4:0.25");
        let r = icx_compare_laws(&a, &a);
        assert!(r.is_dominated());
        assert_eq!(r.margins.len(), 5);
        assert!(r.margins.iter().all(Fraction::is_zero));
    }

    #[test]
    fn bernoulli_below_threes() {
        let alpha = Rational::ratio(1, 10);
        let r = icx_compare_laws(&law("two:0.1"), &law("three:0.1"));
        assert!(r.is_dominated());
        assert_eq!(
            r.margins[1].to_rational(),
            &alpha / &Rational::from_integer(6)
        );
        assert!(r.mean_gap().is_zero());
        let back = icx_compare_laws(&law("three:0.1"), &law("two:0.1"));
        assert_eq!(back.verdict, Verdict::ViolatedAt(1));
    }

    #[test]
    fn parking_rejects_mismatches() {
        let a = ModelConfig::new(2, ArrivalLaw::parse("two:0.05").unwrap(), 3).exact();
        let b = ModelConfig::new(3, ArrivalLaw::parse("two:0.05").unwrap(), 3).exact();
        assert!(matches!(
            icx_compare_parking(&a, &b, 2),
            Err(Error::InvalidArgument(_))
        ));
        let c = ModelConfig::new(2, ArrivalLaw::parse("two:0.05").unwrap(), 3);
        assert!(matches!(
            icx_compare_parking(&a, &c, 2),
            Err(Error::BackendMismatch(_))
        ));
    }

    #[test]
    fn parking_depth_zero_matches_arrivals() {
        let a = ModelConfig::new(2, ArrivalLaw::parse("two:0.05").unwrap(), 4).exact();
        let b = ModelConfig::new(2, ArrivalLaw::parse("three:0.05").unwrap(), 4).exact();
        let reports = icx_compare_parking(&a, &b, 4).unwrap();
        assert_eq!(reports.len(), 5);
        assert_eq!(
            reports[0],
            icx_compare_laws(&law("two:0.05"), &law("three:0.05"))
        );
        assert!(reports.iter().all(IcxReport::is_dominated));
        let same = icx_compare_parking(&a, &a, 3).unwrap();
        assert!(same.iter().all(|r| r.margins.iter().all(Fraction::is_zero)));
        let csv = reports_csv(&same[..1], 6);
        assert_eq!(
            csv,
            "depth,t,margin\n0,0,0.000000\n0,1,0.000000\n0,2,0.000000\n"
        );
    }
}
