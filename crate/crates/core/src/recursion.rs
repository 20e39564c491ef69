//! The distributional recursion on the d-ary tree.
//!
//! `X_0 = eta` and `X_{n+1} = eta + sum_{i=1}^d (X_n^{(i)} - 1)^+` with
//! independent copies on the right. From the laws of `X_n` the engine
//! collects `q_n = P(X_n = 0)`, the partial sums `G_n = sum_i lambda^-i q_i`
//! and `EX_n`.
//!
//! Entry `j` of the law of `X_{n+1}` only depends on entries `0..=j+1` of
//! the law of `X_n`. So to obtain `q_0..q_N` it is enough to keep the law
//! of `X_n` on `[0, N - n]` ([`LawMode::Windowed`]); the kept entries are
//! exactly those of the full law. [`LawMode::Full`] keeps every entry and is
//! needed for means and order comparisons of the laws themselves.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::dist::{
    ArrivalLaw, Backend, Exact, Fixed, IntDist, Limits, Scalar, DEFAULT_MAX_SUPPORT,
};
use crate::error::{Error, Result};
use crate::numerics::{Fraction, Rational, DEFAULT_SCALE};

/// Default cap on the tree size for exact runs: the depth-14 binary tree.
pub const DEFAULT_EXACT_VERTEX_CAP: u128 = (1 << 15) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum BackendChoice {
    Exact,
    Fixed { scale: u32 },
}

impl BackendChoice {
    /// `exact`, `fixed` (default scale) or `fixed:<S>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" | "rational" => Ok(BackendChoice::Exact),
            "fixed" => Ok(BackendChoice::Fixed {
                scale: DEFAULT_SCALE,
            }),
            other => other
                .strip_prefix("fixed:")
                .and_then(|s| s.parse().ok())
                .filter(|&s| s > 0)
                .map(|scale| BackendChoice::Fixed { scale })
                .ok_or_else(|| Error::InvalidArgument(format!("unknown backend {s:?}"))),
        }
    }

    pub fn scale(&self) -> Option<u32> {
        match *self {
            BackendChoice::Exact => None,
            BackendChoice::Fixed { scale } => Some(scale),
        }
    }
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendChoice::Exact => f.write_str("exact"),
            BackendChoice::Fixed { scale } => write!(f, "fixed:{scale}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawMode {
    /// Keep only the part of the law that still influences `q_n` up to the
    /// configured depth.
    #[default]
    Windowed,
    /// Keep the whole law.
    Full,
}

/// Model and arithmetic for one run of the exact engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    /// Number of children of every vertex.
    pub d: u32,
    pub arrival: ArrivalLaw,
    pub depth: usize,
    pub backend: BackendChoice,
    pub law: LawMode,
    pub max_support: usize,
    /// Largest tree (in vertices) an exact run may cover.
    pub exact_vertex_cap: u128,
}

impl ModelConfig {
    /// Fixed-point backend at the default scale, windowed law.
    pub fn new(d: u32, arrival: ArrivalLaw, depth: usize) -> Self {
        ModelConfig {
            d,
            arrival,
            depth,
            backend: BackendChoice::Fixed {
                scale: DEFAULT_SCALE,
            },
            law: LawMode::Windowed,
            max_support: DEFAULT_MAX_SUPPORT,
            exact_vertex_cap: DEFAULT_EXACT_VERTEX_CAP,
        }
    }

    pub fn exact(mut self) -> Self {
        self.backend = BackendChoice::Exact;
        self
    }

    pub fn fixed(mut self, scale: u32) -> Self {
        self.backend = BackendChoice::Fixed { scale };
        self
    }

    pub fn full_law(mut self) -> Self {
        self.law = LawMode::Full;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn lambda(&self) -> u64 {
        self.d as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if let BackendChoice::Fixed { scale: 0 } = self.backend {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        if self.backend == BackendChoice::Exact {
            let vertices = tree_vertices(self.d, self.depth);
            if vertices > self.exact_vertex_cap {
                return Err(Error::ExactDepthCap {
                    depth: self.depth,
                    cap: self.exact_vertex_cap,
                });
            }
        }
        Ok(())
    }
}

/// Vertices of the d-ary tree cut at `depth`, saturating.
pub fn tree_vertices(d: u32, depth: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        total = total.saturating_add(level);
        level = level.saturating_mul(d as u128);
    }
    total
}

/// State after `n` steps.
#[derive(Clone, Debug)]
pub struct RecursionState<B: Backend> {
    n: usize,
    law: IntDist<B>,
    children: IntDist<B>,
    q: Vec<B::Scalar>,
    g: Vec<B::Scalar>,
    ex: Vec<B::Scalar>,
    law_mean: Vec<B::Scalar>,
}

impl<B: Backend> RecursionState<B> {
    pub fn depth(&self) -> usize {
        self.n
    }

    /// Law of `X_n` (windowed or full, per the engine's mode).
    pub fn law(&self) -> &IntDist<B> {
        &self.law
    }

    /// Law of the children's contribution `sum_i (X_{n-1}^{(i)} - 1)^+`;
    /// `X_n` is the arrival at the root plus an independent copy of it.
    pub fn children_law(&self) -> &IntDist<B> {
        &self.children
    }

    /// `q_0..q_n`.
    pub fn q(&self) -> &[B::Scalar] {
        &self.q
    }

    /// `G_0..G_n`.
    pub fn g(&self) -> &[B::Scalar] {
        &self.g
    }

    /// `EX_0..EX_n` from the one-step expectation recursion.
    pub fn ex(&self) -> &[B::Scalar] {
        &self.ex
    }

    /// Means of the stored laws at every depth; equal to [`ex`](Self::ex)
    /// when the law is full and exact.
    pub fn law_means(&self) -> &[B::Scalar] {
        &self.law_mean
    }
}

/// Runs the recursion for one configuration on backend `B`.
#[derive(Clone, Debug)]
pub struct Engine<B: Backend> {
    d: u32,
    arrival: IntDist<B>,
    alpha: B::Scalar,
    one: B::Scalar,
    horizon: Option<usize>,
    max_depth: Option<usize>,
    limits: Limits,
}

impl<B: Backend> Engine<B> {
    pub fn new(cfg: &ModelConfig, backend: B) -> Result<Self> {
        cfg.validate()?;
        let arrival = cfg.arrival.to_dist(&backend)?;
        let alpha = backend.lift(&cfg.arrival.mean())?;
        let one = backend.lift(&Rational::one())?;
        let horizon = match cfg.law {
            LawMode::Windowed => Some(cfg.depth),
            LawMode::Full => None,
        };
        let max_depth = match cfg.backend {
            BackendChoice::Exact => Some(cfg.depth),
            BackendChoice::Fixed { .. } => horizon,
        };
        let limits = Limits {
            cap: None,
            max_support: cfg.max_support,
        };
        Ok(Engine {
            d: cfg.d,
            arrival,
            alpha,
            one,
            horizon,
            max_depth,
            limits,
        })
    }

    fn backend(&self) -> &B {
        self.arrival.backend()
    }

    fn window(&self, n: usize) -> Option<usize> {
        self.horizon.map(|h| h.saturating_sub(n))
    }

    pub fn initial(&self) -> RecursionState<B> {
        let law = match self.window(0) {
            Some(w) => self.arrival.truncate_above(w),
            None => self.arrival.clone(),
        };
        let q0 = law.prob(0);
        let mean = law.mean();
        let children = IntDist::point_mass(
            0,
            self.backend()
                .product(self.backend())
                .expect("same backend"),
        );
        RecursionState {
            n: 0,
            law,
            children,
            g: vec![q0.clone()],
            q: vec![q0],
            ex: vec![self.alpha.clone()],
            law_mean: vec![mean],
        }
    }

    pub fn step(&self, state: &mut RecursionState<B>) -> Result<()> {
        let next = state.n + 1;
        if let Some(max) = self.max_depth {
            if next > max {
                return Err(Error::DepthExceeded {
                    requested: next,
                    available: max,
                });
            }
        }
        let b = self.backend();
        let limits = self.limits.with_cap(self.window(next));
        let pushed = state.law.pushdown_minus_one();
        let children = pushed.convolve_power(self.d, &limits)?;
        let law = self.arrival.convolve(&children, &limits)?;

        let q_prev = state.q.last().expect("q_0 is set");
        let ex_prev = state.ex.last().expect("EX_0 is set");
        // EX_{n+1} = alpha + lambda * (EX_n - P(X_n > 0)); clamping keeps a
        // lower bound a lower bound.
        let excess = b.sub_clamped(&b.add(ex_prev, q_prev), &self.one);
        let ex = b.add(&self.alpha, &b.mul_int(&excess, self.d as u64));

        let q = law.prob(0);
        let weight = b.inv_power(self.d as u64, next as u32);
        let g = b.add(state.g.last().expect("G_0 is set"), &b.mul(&weight, &q));

        state.law_mean.push(law.mean());
        state.q.push(q);
        state.g.push(g);
        state.ex.push(ex);
        state.law = law;
        state.children = children;
        state.n = next;
        Ok(())
    }

    /// Steps from the initial state to `depth`.
    pub fn run_to(&self, depth: usize) -> Result<RecursionState<B>> {
        let mut state = self.initial();
        while state.n < depth {
            self.step(&mut state)?;
        }
        Ok(state)
    }
}

/// Backend-independent results of a run, as exact fractions (in the fixed
/// backend these are the truncated values).
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub backend: BackendChoice,
    pub q: Vec<Fraction>,
    pub g: Vec<Fraction>,
    pub ex: Vec<Fraction>,
    /// Means of the stored laws; only meaningful for [`LawMode::Full`].
    pub law_mean: Vec<Fraction>,
}

impl Trajectory {
    fn from_state<B: Backend>(backend: BackendChoice, s: &RecursionState<B>) -> Self {
        let conv = |v: &[B::Scalar]| v.iter().map(Scalar::to_fraction).collect();
        Trajectory {
            backend,
            q: conv(&s.q),
            g: conv(&s.g),
            ex: conv(&s.ex),
            law_mean: conv(&s.law_mean),
        }
    }

    pub fn depth(&self) -> usize {
        self.q.len() - 1
    }
}

/// Runs `cfg` to its depth on the configured backend.
pub fn run(cfg: &ModelConfig) -> Result<Trajectory> {
    match cfg.backend {
        BackendChoice::Exact => {
            let engine = Engine::new(cfg, Exact::new())?;
            Ok(Trajectory::from_state(
                cfg.backend,
                &engine.run_to(cfg.depth)?,
            ))
        }
        BackendChoice::Fixed { scale } => {
            let engine = Engine::new(cfg, Fixed::new(scale))?;
            Ok(Trajectory::from_state(
                cfg.backend,
                &engine.run_to(cfg.depth)?,
            ))
        }
    }
}

/// `q_0..q_n` for `cfg`.
pub fn q_sequence(cfg: &ModelConfig) -> Result<Vec<Fraction>> {
    Ok(run(cfg)?.q)
}

fn check_lambda(lambda: u64) -> Result<Rational> {
    if lambda < 2 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be at least 2, got {lambda}"
        )));
    }
    Ok(Rational::from_integer(lambda))
}

/// `F(alpha) = lambda (1 - alpha) / (lambda - 1)`.
pub fn big_f(alpha: &Rational, lambda: u64) -> Result<Rational> {
    let l = check_lambda(lambda)?;
    Ok(&l * &(Rational::one() - alpha) / (&l - &Rational::one()))
}

/// `(1 - alpha) / (lambda - 1)`, the constant term as it is usually quoted.
pub fn big_c(alpha: &Rational, lambda: u64) -> Result<Rational> {
    let l = check_lambda(lambda)?;
    Ok((Rational::one() - alpha) / (&l - &Rational::one()))
}

/// `(lambda - alpha) / (lambda - 1)`, the constant that iterating the
/// one-step expectation recursion actually produces.
pub fn big_c_star(alpha: &Rational, lambda: u64) -> Result<Rational> {
    let l = check_lambda(lambda)?;
    Ok((&l - alpha) / (&l - &Rational::one()))
}

/// `alpha + lambda (EX_n - (1 - q_n))`.
pub fn one_step_ex(ex_n: &Fraction, q_n: &Fraction, alpha: &Rational, lambda: u64) -> Fraction {
    let l = Fraction::from_integer(lambda);
    Fraction::from(alpha) + l * (ex_n - &Fraction::one() + q_n)
}

/// `(G_n - F) lambda^{n+1} + constant`, the closed form for `EX_{n+1}`.
pub fn closed_form_ex(
    g_n: &Fraction,
    n: usize,
    alpha: &Rational,
    lambda: u64,
    constant: &Rational,
) -> Result<Fraction> {
    let f = big_f(alpha, lambda)?;
    let scale = Fraction::from_integer(num_bigint::BigInt::from(lambda).pow(n as u32 + 1));
    Ok((g_n - &Fraction::from(&f)) * scale + Fraction::from(constant))
}

/// `EX_n - (lambda - alpha - lambda q_n) / (lambda - 1)`; tends to zero in
/// the subcritical regime.
pub fn limit_identity_residual(
    ex_n: &Fraction,
    q_n: &Fraction,
    alpha: &Rational,
    lambda: u64,
) -> Result<Fraction> {
    let l = check_lambda(lambda)?;
    let num = Fraction::from(&(&l - alpha)) - q_n * &Fraction::from(&l);
    let target = num.div_uint(&num_bigint::BigUint::from(lambda - 1));
    Ok(ex_n - &target)
}

/// Truncated `E lambda^-tau` where `tau` is the first time a car reaches
/// the root, using `P(tau > m) = q_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauTransform {
    /// `(1 - q_0) + sum_{m=1}^n lambda^-m (q_{m-1} - q_m)`.
    pub value: Fraction,
    /// `lambda^-(n+1) q_n`, an upper bound on the omitted terms.
    pub remainder: Fraction,
}

pub fn tau_transform(q: &[Fraction], lambda: u64) -> Result<TauTransform> {
    let (first, _) = q
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty q sequence".into()))?;
    if lambda == 0 {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let l = num_bigint::BigUint::from(lambda);
    let mut value = Fraction::one() - first;
    let mut weight = num_bigint::BigUint::from(1u32);
    for pair in q.windows(2) {
        weight *= &l;
        value = value + (&pair[0] - &pair[1]).div_uint(&weight);
    }
    weight *= &l;
    let remainder = q.last().expect("nonempty").div_uint(&weight);
    Ok(TauTransform { value, remainder })
}

/// `lambda / (lambda - 1) * (1 - T_n - lambda^-(n+1) q_n)`, which equals
/// `G_n` exactly when `T_n` is the truncated tau transform of the same
/// `q_0..q_n`.
pub fn g_from_tau(tau: &TauTransform, lambda: u64) -> Result<Fraction> {
    check_lambda(lambda)?;
    let inner = Fraction::one() - &tau.value - &tau.remainder;
    Ok(inner
        .mul_int(lambda as i64)
        .div_uint(&num_bigint::BigUint::from(lambda - 1)))
}
