//! Monte Carlo on Galton-Watson trees.
//!
//! Trees are sampled level by level up to a fixed depth. [`eval_parking`]
//! evaluates `A_m(v) = eta_v + sum_children (A_{m-1}(u) - 1)^+` bottom-up;
//! [`simulate_stepwise`] moves individual cars with random tie-breaks and
//! serves as an oracle for it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::dist::ArrivalLaw;
use crate::error::{Error, Result};
use crate::numerics::Rational;

/// Default cap on the number of sampled vertices per tree.
pub const DEFAULT_NODE_CAP: usize = 100_000_000;

/// Integer-valued law sampled exactly when its denominator fits in a `u64`.
#[derive(Clone, Debug, PartialEq)]
struct Table {
    /// Cumulative numerators over `den`.
    cumulative: Vec<u64>,
    den: u64,
}

impl Table {
    fn new(probs: &[Rational]) -> Result<Self> {
        let mut den = num_bigint::BigInt::from(1);
        for p in probs {
            den = num_integer::Integer::lcm(&den, p.denom());
        }
        let den_u64 = u64::try_from(&den).map_err(|_| {
            Error::InvalidArgument("probabilities need a common denominator below 2^64".into())
        })?;
        let mut acc = 0u64;
        let cumulative = probs
            .iter()
            .map(|p| {
                let share = p.numer() * (&den / p.denom());
                acc += u64::try_from(&share).expect("share is at most the denominator");
                acc
            })
            .collect();
        Ok(Table {
            cumulative,
            den: den_u64,
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let u = rng.random_range(0..self.den);
        self.cumulative.partition_point(|&c| c <= u) as u32
    }
}

fn poisson_sample<R: Rng>(rng: &mut R, mean: f64) -> u32 {
    // Inversion: walk the cumulative distribution until it passes u.
    let u: f64 = rng.random();
    let mut p = (-mean).exp();
    let mut cum = p;
    let mut k = 0u32;
    while u > cum && p > 0.0 {
        k += 1;
        p *= mean / k as f64;
        cum += p;
    }
    k
}

/// Number of children of a vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum OffspringLaw {
    Deterministic(u32),
    Poisson(f64),
    Pmf(Vec<Rational>),
}

impl OffspringLaw {
    /// `det:<d>` (or just `<d>`), `poisson:<mean>`, `pmf:<k>:<w>,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("offspring law {s:?}"));
        if let Ok(d) = s.parse::<u32>() {
            return Ok(OffspringLaw::Deterministic(d));
        }
        match s.split_once(':') {
            Some(("det", d)) => Ok(OffspringLaw::Deterministic(d.parse().map_err(|_| bad())?)),
            Some(("poisson", m)) => {
                let m: f64 = m.parse().map_err(|_| bad())?;
                if !(0.0..=500.0).contains(&m) {
                    return Err(Error::InvalidArgument(
                        "poisson mean must lie in [0, 500]".into(),
                    ));
                }
                Ok(OffspringLaw::Poisson(m))
            }
            Some(("pmf", _)) => Ok(OffspringLaw::Pmf(ArrivalLaw::parse(s)?.probs().to_vec())),
            _ => Err(bad()),
        }
    }

    pub fn spec(&self) -> String {
        match self {
            OffspringLaw::Deterministic(d) => format!("det:{d}"),
            OffspringLaw::Poisson(m) => format!("poisson:{m}"),
            OffspringLaw::Pmf(p) => ArrivalLaw::from_probs(p.clone()).expect("validated").spec(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            OffspringLaw::Deterministic(d) => *d as f64,
            OffspringLaw::Poisson(m) => *m,
            OffspringLaw::Pmf(p) => p
                .iter()
                .enumerate()
                .map(|(k, w)| k as f64 * w.to_f64())
                .sum(),
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        Ok(match self {
            OffspringLaw::Deterministic(d) => Sampler::Constant(*d),
            OffspringLaw::Poisson(m) => Sampler::Poisson(*m),
            OffspringLaw::Pmf(p) => Sampler::Table(Table::new(p)?),
        })
    }
}

/// Number of cars arriving at a vertex, for simulation.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrivalSampler {
    Finite(ArrivalLaw),
    Poisson(f64),
}

impl ArrivalSampler {
    /// `poisson:<alpha>` or any finite arrival law.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().strip_prefix("poisson:") {
            Some(m) => {
                let m: f64 = m
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("arrival {s:?}")))?;
                if !(0.0..=500.0).contains(&m) {
                    return Err(Error::InvalidArgument(
                        "poisson mean must lie in [0, 500]".into(),
                    ));
                }
                Ok(ArrivalSampler::Poisson(m))
            }
            None => Ok(ArrivalSampler::Finite(ArrivalLaw::parse(s)?)),
        }
    }

    pub fn spec(&self) -> String {
        match self {
            ArrivalSampler::Finite(law) => law.spec(),
            ArrivalSampler::Poisson(m) => format!("poisson:{m}"),
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        Ok(match self {
            ArrivalSampler::Finite(law) if law.is_degenerate_zero() => Sampler::Constant(0),
            ArrivalSampler::Finite(law) => Sampler::Table(Table::new(law.probs())?),
            ArrivalSampler::Poisson(m) => Sampler::Poisson(*m),
        })
    }
}

#[derive(Clone, Debug)]
enum Sampler {
    Constant(u32),
    Poisson(f64),
    Table(Table),
}

impl Sampler {
    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        match self {
            Sampler::Constant(c) => *c,
            Sampler::Poisson(m) => poisson_sample(rng, *m),
            Sampler::Table(t) => t.sample(rng),
        }
    }
}

/// A tree cut at `depth`, vertices in level order.
///
/// Children of a vertex are contiguous and appear in the next level in the
/// order of their parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledTree {
    parent: Vec<u32>,
    first_child: Vec<u32>,
    child_count: Vec<u32>,
    eta: Vec<u32>,
    /// `level_start[l]..level_start[l+1]` are the vertices at level `l`.
    level_start: Vec<usize>,
}

impl SampledTree {
    /// Builds a tree from per-vertex child counts and arrivals listed in
    /// level order.
    pub fn from_level_order(child_count: Vec<u32>, eta: Vec<u32>, depth: usize) -> Result<Self> {
        if child_count.len() != eta.len() || eta.is_empty() {
            return Err(Error::InvalidArgument(
                "need one child count and one arrival per vertex".into(),
            ));
        }
        let mut tree = SampledTree {
            parent: vec![u32::MAX],
            first_child: Vec::new(),
            child_count: Vec::new(),
            eta: Vec::new(),
            level_start: vec![0, 1],
        };
        let mut next = 0usize;
        while next < tree.parent.len() {
            let level = tree.level_start.len() - 2;
            let (v, kids) = (next, child_count[next]);
            tree.first_child.push(tree.parent.len() as u32);
            let kids = if level == depth { 0 } else { kids };
            tree.child_count.push(kids);
            tree.eta.push(eta[v]);
            for _ in 0..kids {
                if tree.parent.len() >= eta.len() {
                    return Err(Error::InvalidArgument(
                        "child counts exceed the vertex list".into(),
                    ));
                }
                tree.parent.push(v as u32);
            }
            next += 1;
            if next == tree.level_start[level + 1] && next < tree.parent.len() {
                tree.level_start.push(tree.parent.len());
            }
        }
        if tree.parent.len() != eta.len() {
            return Err(Error::InvalidArgument(
                "vertex list longer than the tree".into(),
            ));
        }
        while tree.level_start.len() < depth + 2 {
            tree.level_start.push(tree.parent.len());
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Depth the tree was cut at; deeper levels may be empty.
    pub fn depth(&self) -> usize {
        self.level_start.len() - 2
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v > 0).then(|| self.parent[v] as usize)
    }

    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        let s = self.first_child[v] as usize;
        s..s + self.child_count[v] as usize
    }

    pub fn eta(&self, v: usize) -> u32 {
        self.eta[v]
    }

    pub fn level(&self, l: usize) -> std::ops::Range<usize> {
        self.level_start[l]..self.level_start[l + 1]
    }
}

fn grow<R: Rng>(
    offspring: &Sampler,
    arrival: &Sampler,
    depth: usize,
    node_cap: usize,
    rng: &mut R,
) -> Result<SampledTree> {
    let mut tree = SampledTree {
        parent: vec![u32::MAX],
        first_child: Vec::new(),
        child_count: Vec::new(),
        eta: vec![arrival.sample(rng)],
        level_start: vec![0, 1],
    };
    for level in 0..=depth {
        let range = tree.level(level);
        for v in range {
            let kids = if level == depth {
                0
            } else {
                offspring.sample(rng)
            };
            tree.first_child.push(tree.parent.len() as u32);
            tree.child_count.push(kids);
            if tree.parent.len() + kids as usize > node_cap {
                return Err(Error::TooManyNodes { cap: node_cap });
            }
            for _ in 0..kids {
                tree.parent.push(v as u32);
                tree.eta.push(arrival.sample(rng));
            }
        }
        if level < depth {
            tree.level_start.push(tree.parent.len());
        }
    }
    Ok(tree)
}

/// Samples a tree cut at `depth`, reproducibly from `seed`.
pub fn sample_tree(
    offspring: &OffspringLaw,
    arrival: &ArrivalSampler,
    depth: usize,
    seed: u64,
) -> Result<SampledTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow(
        &offspring.sampler()?,
        &arrival.sampler()?,
        depth,
        DEFAULT_NODE_CAP,
        &mut rng,
    )
}

/// `A_m(root)` for `m = 0..=tree.depth()`: the cars that reach the root
/// by time `m`, those starting there included.
pub fn root_arrivals(tree: &SampledTree) -> Vec<u64> {
    let depth = tree.depth();
    // below[i * stride + m] = A_m of the i-th vertex of the level below.
    let mut below: Vec<u64> = Vec::new();
    for level in (0..=depth).rev() {
        let stride = depth - level + 1;
        let range = tree.level(level);
        let below_start = if level < depth {
            tree.level_start[level + 1]
        } else {
            0
        };
        let mut here = vec![0u64; range.len() * stride];
        for (i, v) in range.enumerate() {
            let row = &mut here[i * stride..(i + 1) * stride];
            row.fill(tree.eta[v] as u64);
            for u in tree.children(v) {
                let child =
                    &below[(u - below_start) * (stride - 1)..(u - below_start + 1) * (stride - 1)];
                for m in 1..stride {
                    row[m] += child[m - 1].saturating_sub(1);
                }
            }
        }
        below = here;
    }
    below
}

/// `A_n(root)`.
pub fn eval_parking(tree: &SampledTree, n: usize) -> Result<u64> {
    if n > tree.depth() {
        return Err(Error::DepthExceeded {
            requested: n,
            available: tree.depth(),
        });
    }
    Ok(root_arrivals(tree)[n])
}

/// Moves every car literally: at each time, the cars arriving at a vertex
/// with a free spot draw one of themselves uniformly to park there and the
/// rest step to the parent. Returns the number of cars that reached the
/// root by time `n`.
pub fn simulate_stepwise(tree: &SampledTree, n: usize, seed: u64) -> Result<u64> {
    if n > tree.depth() {
        return Err(Error::DepthExceeded {
            requested: n,
            available: tree.depth(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (vertex, car id); ids only matter for the tie-break.
    let mut moving: Vec<(usize, usize)> = Vec::new();
    for v in 0..tree.len() {
        for _ in 0..tree.eta(v) {
            let id = moving.len();
            moving.push((v, id));
        }
    }
    let mut occupied = vec![false; tree.len()];
    let mut parked_ids = Vec::new();
    let mut at_root = 0u64;
    for _time in 0..=n {
        moving.sort_unstable();
        let mut next = Vec::with_capacity(moving.len());
        let mut i = 0;
        while i < moving.len() {
            let v = moving[i].0;
            let j = i + moving[i..].iter().take_while(|c| c.0 == v).count();
            let group = &moving[i..j];
            if v == 0 {
                at_root += group.len() as u64;
            }
            let mut parker = None;
            if !occupied[v] {
                occupied[v] = true;
                let pick = rng.random_range(0..group.len());
                parked_ids.push(group[pick].1);
                parker = Some(pick);
            }
            if let Some(parent) = tree.parent(v) {
                for (k, car) in group.iter().enumerate() {
                    if Some(k) != parker {
                        next.push((parent, car.1));
                    }
                }
            }
            i = j;
        }
        moving = next;
    }
    Ok(at_root)
}

/// Aggregated Monte Carlo results; all counts are integers so the report
/// does not depend on how trials were split across workers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstimateReport {
    pub trials: u64,
    pub depth: usize,
    pub lambda: u64,
    pub lambda_f64_bits: u64,
    /// Trials with `X_m = 0`, per depth.
    pub zero_counts: Vec<u64>,
    pub sums: Vec<u128>,
    pub sums_sq: Vec<u128>,
    /// `tau_counts[m]`: trials whose first car reaches the root at time `m`.
    pub tau_counts: Vec<u64>,
    /// Trials with no car at the root by time `depth`.
    pub censored: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthEstimate {
    pub n: usize,
    pub q_hat: f64,
    pub q_se: f64,
    pub ex_hat: f64,
    pub ex_se: f64,
}

impl EstimateReport {
    fn empty(depth: usize, lambda: f64) -> Self {
        EstimateReport {
            trials: 0,
            depth,
            lambda: 0,
            lambda_f64_bits: lambda.to_bits(),
            zero_counts: vec![0; depth + 1],
            sums: vec![0; depth + 1],
            sums_sq: vec![0; depth + 1],
            tau_counts: vec![0; depth + 1],
            censored: 0,
        }
    }

    fn record(&mut self, arrivals: &[u64]) {
        self.trials += 1;
        let mut tau = None;
        for (m, &x) in arrivals.iter().enumerate() {
            if x == 0 {
                self.zero_counts[m] += 1;
            } else if tau.is_none() {
                tau = Some(m);
            }
            self.sums[m] += x as u128;
            self.sums_sq[m] += x as u128 * x as u128;
        }
        match tau {
            Some(m) => self.tau_counts[m] += 1,
            None => self.censored += 1,
        }
    }

    fn merge(mut self, other: EstimateReport) -> Self {
        self.trials += other.trials;
        for m in 0..=self.depth {
            self.zero_counts[m] += other.zero_counts[m];
            self.sums[m] += other.sums[m];
            self.sums_sq[m] += other.sums_sq[m];
            self.tau_counts[m] += other.tau_counts[m];
        }
        self.censored += other.censored;
        self
    }

    pub fn lambda(&self) -> f64 {
        f64::from_bits(self.lambda_f64_bits)
    }

    pub fn at(&self, n: usize) -> DepthEstimate {
        let t = self.trials as f64;
        let q = self.zero_counts[n] as f64 / t;
        let mean = self.sums[n] as f64 / t;
        let var = if self.trials > 1 {
            let s = self.sums[n] as f64;
            ((self.sums_sq[n] as f64 - s * s / t) / (t - 1.0)).max(0.0)
        } else {
            0.0
        };
        DepthEstimate {
            n,
            q_hat: q,
            q_se: (q * (1.0 - q) / t).sqrt(),
            ex_hat: mean,
            ex_se: (var / t).sqrt(),
        }
    }

    /// Empirical `P(tau > n)`.
    pub fn tau_survival(&self, n: usize) -> f64 {
        let hit: u64 = self.tau_counts[..=n].iter().sum();
        (self.trials - hit) as f64 / self.trials as f64
    }

    /// `(sum_{m <= depth} P(tau = m) lambda^-m, lambda^-(depth+1))`: the
    /// truncated transform and a bound on what the truncation omits.
    pub fn tau_transform(&self) -> (f64, f64) {
        let l = self.lambda();
        let t = self.trials as f64;
        let value = self
            .tau_counts
            .iter()
            .enumerate()
            .map(|(m, &c)| c as f64 / t * l.powi(-(m as i32)))
            .sum();
        (value, l.powi(-(self.depth as i32 + 1)))
    }

    /// `n,trials,q_hat,q_se,ex_hat,ex_se` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,trials,q_hat,q_se,ex_hat,ex_se\n");
        for n in 0..=self.depth {
            let e = self.at(n);
            let _ = writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                n, self.trials, e.q_hat, e.q_se, e.ex_hat, e.ex_se
            );
        }
        s
    }

    /// `m,count` rows; censored trials appear as `censored,<count>`.
    pub fn tau_csv(&self) -> String {
        let mut s = String::from("m,count\n");
        for (m, c) in self.tau_counts.iter().enumerate() {
            let _ = writeln!(s, "{m},{c}");
        }
        let _ = writeln!(s, "censored,{}", self.censored);
        s
    }
}

/// Monte Carlo configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateConfig {
    pub offspring: OffspringLaw,
    pub arrival: ArrivalSampler,
    pub depth: usize,
    pub trials: u64,
    pub seed: u64,
    pub node_cap: usize,
}

/// Generator for trial `trial`: the base seed picks the key, the trial
/// index picks the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs independent trials on the current rayon pool.
pub fn estimate(cfg: &EstimateConfig) -> Result<EstimateReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let offspring = cfg.offspring.sampler()?;
    let arrival = cfg.arrival.sampler()?;
    let lambda = cfg.offspring.mean();
    const CHUNK: u64 = 256;
    let chunks = cfg.trials.div_ceil(CHUNK);
    let partials: Vec<EstimateReport> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<EstimateReport> {
            let mut rep = EstimateReport::empty(cfg.depth, lambda);
            for trial in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let mut rng = trial_rng(cfg.seed, trial);
                let tree = grow(&offspring, &arrival, cfg.depth, cfg.node_cap, &mut rng)?;
                rep.record(&root_arrivals(&tree));
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    Ok(partials.into_iter().fold(
        EstimateReport::empty(cfg.depth, lambda),
        EstimateReport::merge,
    ))
}

/// [`estimate`] on a dedicated pool of `workers` threads.
pub fn estimate_with_workers(cfg: &EstimateConfig, workers: usize) -> Result<EstimateReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| estimate(cfg))
}

/// One disagreement between [`eval_parking`] and [`simulate_stepwise`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleMismatch {
    pub instance: u64,
    pub n: usize,
    pub tie_break_seed: u64,
    pub recursive: u64,
    pub stepwise: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub instances: u64,
    pub comparisons: u64,
    pub mismatches: Vec<OracleMismatch>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn random_table<R: Rng>(rng: &mut R, values: usize) -> Table {
    loop {
        let mut acc = 0;
        let cumulative: Vec<u64> = (0..values)
            .map(|_| {
                acc += rng.random_range(0..5u64);
                acc
            })
            .collect();
        if acc > 0 {
            return Table {
                cumulative,
                den: acc,
            };
        }
    }
}

/// Draws `instances` random trees (depth up to `max_depth`, up to three
/// children and three cars per vertex, random laws per instance) and checks
/// the stepwise simulation against the recursive evaluation at every depth
/// for `tie_breaks` tie-break seeds.
pub fn oracle_check(
    instances: u64,
    max_depth: usize,
    tie_breaks: u64,
    seed: u64,
) -> Result<OracleReport> {
    let results: Vec<(u64, Vec<OracleMismatch>)> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<(u64, Vec<OracleMismatch>)> {
            let mut rng = trial_rng(seed, i);
            let depth = rng.random_range(0..=max_depth);
            let offspring = Sampler::Table(random_table(&mut rng, 4));
            let arrival = Sampler::Table(random_table(&mut rng, 4));
            let tree = grow(&offspring, &arrival, depth, DEFAULT_NODE_CAP, &mut rng)?;
            let expected = root_arrivals(&tree);
            let mut count = 0;
            let mut bad = Vec::new();
            for (n, &want) in expected.iter().enumerate() {
                for k in 0..tie_breaks {
                    let tie_break_seed = rng.random::<u64>() ^ k;
                    let got = simulate_stepwise(&tree, n, tie_break_seed)?;
                    count += 1;
                    if got != want {
                        bad.push(OracleMismatch {
                            instance: i,
                            n,
                            tie_break_seed,
                            recursive: want,
                            stepwise: got,
                        });
                    }
                }
            }
            Ok((count, bad))
        })
        .collect::<Result<_>>()?;
    let mut report = OracleReport {
        instances,
        comparisons: 0,
        mismatches: Vec::new(),
    };
    for (count, bad) in results {
        report.comparisons += count;
        report.mismatches.extend(bad);
    }
    Ok(report)
}
