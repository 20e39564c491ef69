//! Exact identities about laws too large to expand, proved modulo primes.
//!
//! With an exact arrival law over denominator `D`, the law of `X_n` has
//! integer numerators over `U_n = D^{V_n}` (`V_n` the number of vertices of
//! the depth-`n` tree). Its total mass, zero mass and first moment are then
//! integers. Running the recursion modulo many NTT-friendly primes gives
//! those integers modulo each prime; once the product of the primes exceeds
//! twice any candidate value, agreement modulo every prime is equality.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use std::sync::{Mutex, OnceLock};

use crate::dist::{Backend, Exact};
use crate::error::{Error, Result};
use crate::numerics::Fraction;
use crate::recursion::{run, ModelConfig};

/// Every prime used here is `c * 2^TWO_ADICITY + 1`.
pub const TWO_ADICITY: u32 = 20;

/// Montgomery arithmetic modulo an NTT prime below `2^62`.
#[derive(Clone, Copy, Debug)]
pub struct NttField {
    p: u64,
    neg_inv: u64,
    r2: u64,
    /// Element of order `2^TWO_ADICITY`, in Montgomery form.
    root: u64,
}

impl NttField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 62 || !(p - 1).is_multiple_of(1 << TWO_ADICITY) || !is_prime(p) {
            return Err(Error::InvalidArgument(format!(
                "{p} is not an NTT prime below 2^62"
            )));
        }
        let mut inv = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        let mut f = NttField {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
            root: 0,
        };
        let c = (p - 1) >> TWO_ADICITY;
        let minus_one = f.to_mont(p - 1);
        for x in 2u64.. {
            let w = f.pow(f.to_mont(x), c);
            if f.pow(w, 1 << (TWO_ADICITY - 1)) == minus_one {
                f.root = w;
                break;
            }
        }
        Ok(f)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        // u < 2p; the wrapped difference is huge exactly when u < p.
        u.min(u.wrapping_sub(self.p))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        s.min(s.wrapping_sub(self.p))
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let d = a.wrapping_sub(b);
        d.min(d.wrapping_add(self.p))
    }

    pub fn to_mont(&self, x: u64) -> u64 {
        self.mul(x % self.p, self.r2)
    }

    pub fn from_mont(&self, x: u64) -> u64 {
        self.redc(x as u128)
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = self.to_mont(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Montgomery form of `x mod p`.
    pub fn reduce(&self, x: &BigUint) -> u64 {
        self.to_mont((x % self.p).to_u64().expect("residue fits"))
    }

    fn reduce_signed(&self, x: &BigInt) -> u64 {
        let r = self.reduce(x.magnitude());
        if x.sign() == Sign::Minus {
            self.sub(0, r)
        } else {
            r
        }
    }

    /// In-place transform of a power-of-two length slice in Montgomery form.
    pub fn ntt(&self, a: &mut [u64], inverse: bool) {
        let n = a.len();
        assert!(
            n.is_power_of_two() && n.trailing_zeros() <= TWO_ADICITY,
            "bad transform length"
        );
        let mut j = 0;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let mut w_len = self.pow(self.root, (1u64 << TWO_ADICITY) / len as u64);
            if inverse {
                w_len = self.pow(w_len, self.p - 2);
            }
            let half = len / 2;
            let mut twiddles = Vec::with_capacity(half);
            let mut w = self.to_mont(1);
            for _ in 0..half {
                twiddles.push(w);
                w = self.mul(w, w_len);
            }
            for chunk in a.chunks_exact_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for k in 0..half {
                    let u = lo[k];
                    let v = self.mul(hi[k], twiddles[k]);
                    lo[k] = self.add(u, v);
                    hi[k] = self.sub(u, v);
                }
            }
            len <<= 1;
        }
        if inverse {
            let n_inv = self.pow(self.to_mont(n as u64), self.p - 2);
            for x in a.iter_mut() {
                *x = self.mul(*x, n_inv);
            }
        }
    }

    /// `a^k` as a polynomial (all coefficients kept).
    fn poly_pow(&self, a: &[u64], k: u32) -> Vec<u64> {
        let out_len = (a.len() - 1) * k as usize + 1;
        let size = out_len.next_power_of_two();
        let mut buf = a.to_vec();
        buf.resize(size, 0);
        self.ntt(&mut buf, false);
        for x in buf.iter_mut() {
            *x = self.pow(*x, k as u64);
        }
        self.ntt(&mut buf, true);
        buf.truncate(out_len);
        buf
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_cache() -> &'static Mutex<Vec<u64>> {
    static CACHE: OnceLock<Mutex<Vec<u64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// The `count` largest primes `c * 2^TWO_ADICITY + 1` below `2^62`, in
/// decreasing order.
pub fn ntt_primes(count: usize) -> Vec<u64> {
    let mut cache = prime_cache().lock().expect("prime cache poisoned");
    let mut c = match cache.last() {
        Some(&p) => (p >> TWO_ADICITY) - 1,
        None => (1u64 << (62 - TWO_ADICITY)) - 1,
    };
    while cache.len() < count {
        let p = (c << TWO_ADICITY) | 1;
        if is_prime(p) {
            cache.push(p);
        }
        c -= 1;
    }
    cache[..count].to_vec()
}

/// Total mass, mass at zero and first moment of the law of `X_n`, as
/// integers over `U_n`, reduced modulo one prime (normal form).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Residues {
    pub mass: u64,
    pub zero: u64,
    pub first_moment: u64,
}

/// Runs the full recursion modulo `field` for depths `0..=depth`.
/// `arrival` holds the arrival numerators (over the arrival denominator).
pub fn law_residues(
    d: u32,
    arrival: &[BigUint],
    depth: usize,
    field: &NttField,
) -> Result<Vec<Residues>> {
    let arrival: Vec<u64> = arrival.iter().map(|x| field.reduce(x)).collect();
    let summarize = |law: &[u64]| {
        let mut r = Residues {
            mass: 0,
            zero: 0,
            first_moment: 0,
        };
        let mut mass = 0;
        let mut moment = 0;
        for (k, &w) in law.iter().enumerate() {
            mass = field.add(mass, w);
            moment = field.add(moment, field.mul(w, field.to_mont(k as u64)));
        }
        r.mass = field.from_mont(mass);
        r.zero = field.from_mont(law.first().copied().unwrap_or(0));
        r.first_moment = field.from_mont(moment);
        r
    };
    let mut law = arrival.clone();
    let mut out = vec![summarize(&law)];
    for _ in 0..depth {
        let mut child = if law.len() >= 2 {
            let mut c = Vec::with_capacity(law.len() - 1);
            c.push(field.add(law[0], law[1]));
            c.extend_from_slice(&law[2..]);
            c
        } else {
            law.clone()
        };
        if child.is_empty() {
            child.push(0);
        }
        let children_len = (child.len() - 1) * d as usize + 1;
        if children_len.next_power_of_two().trailing_zeros() > TWO_ADICITY {
            return Err(Error::SupportTooLarge {
                needed: children_len,
                cap: 1 << TWO_ADICITY,
            });
        }
        let children = field.poly_pow(&child, d);
        let mut next = vec![0u64; children.len() + arrival.len() - 1];
        for (i, &a) in arrival.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &c) in children.iter().enumerate() {
                next[i + j] = field.add(next[i + j], field.mul(a, c));
            }
        }
        law = next;
        out.push(summarize(&law));
    }
    Ok(out)
}

/// Outcome of [`prove_law_means`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanProof {
    pub depth: usize,
    pub primes: usize,
    /// Bits of the product of the primes used.
    pub modulus_bits: u64,
    /// Bits needed to make agreement modulo the primes an equality.
    pub required_bits: u64,
    /// First depth at which a residue disagreed, if any.
    pub mismatch: Option<usize>,
}

impl MeanProof {
    pub fn holds(&self) -> bool {
        self.mismatch.is_none() && self.modulus_bits > self.required_bits
    }
}

/// Proves, for `n = 0..=cfg.depth`, that the mean of the full exact law of
/// `X_n` equals `EX_n` from the one-step expectation recursion and that its
/// mass at zero equals the exact `q_n` of a windowed run.
///
/// The windowed exact run supplies `q_n = Q_n / U_n`; the integers
/// `E_n = EX_n * U_n` follow from
/// `E_{n+1} = alpha D U_n^d + lambda D U_n^{d-1} (E_n - U_n + Q_n)`.
/// The full laws are only ever formed modulo primes.
pub fn prove_law_means(cfg: &ModelConfig) -> Result<MeanProof> {
    let cfg = cfg.clone().exact();
    cfg.validate()?;
    let traj = run(&cfg)?;
    let (arrival_backend, numers) = Exact::new().lower_probabilities(cfg.arrival.probs())?;
    let den = arrival_backend.unit().clone();
    let d = cfg.d;
    let alpha_d: BigUint = numers
        .iter()
        .enumerate()
        .map(|(k, w)| w * BigUint::from(k))
        .sum();

    let mut units = vec![den.clone()];
    let mut zeros = Vec::new();
    let mut scaled_ex = vec![BigInt::from(alpha_d.clone())];
    let mut max_value = cfg.arrival.max_value() as u64;
    let mut bound_bits = 0u64;
    for n in 0..=cfg.depth {
        let u = units[n].clone();
        let q = &traj.q[n];
        if q.denom() != &u {
            return Err(Error::BackendMismatch(
                "windowed run is not over the expected denominator".into(),
            ));
        }
        zeros.push(q.numer().clone());
        let e = scaled_ex[n].clone();
        if Fraction::new(e.clone(), u.clone())? != traj.ex[n] {
            return Err(Error::BackendMismatch(
                "integer expectation recursion disagrees with the engine".into(),
            ));
        }
        let bound = (&u * BigUint::from(max_value.max(1)))
            .bits()
            .max(e.magnitude().bits());
        bound_bits = bound_bits.max(bound);
        if n < cfg.depth {
            let u_pow = u.pow(d - 1);
            let next_u = &den * &u_pow * &u;
            let inner = &e - BigInt::from(u.clone()) + q.numer();
            let next_e = BigInt::from(&alpha_d * &u_pow * &u)
                + BigInt::from(&den * &u_pow * BigUint::from(d)) * inner;
            units.push(next_u);
            scaled_ex.push(next_e);
            max_value = cfg.arrival.max_value() as u64 + d as u64 * max_value.saturating_sub(1);
        }
    }
    // |a - b| < 2^(bound_bits + 1) for any two candidates below 2^bound_bits.
    let required_bits = bound_bits + 1;
    // A product of at least 2^(required_bits + 1) separates them.
    let mut primes = Vec::new();
    let mut product = BigUint::one();
    let mut batch = 64;
    while product.bits() <= required_bits + 1 {
        primes = ntt_primes(primes.len() + batch);
        product = primes.iter().fold(BigUint::one(), |acc, &p| acc * p);
        batch *= 2;
    }
    // Drop surplus primes from the tail while the product still suffices.
    while primes.len() > 1 {
        let last = *primes.last().expect("nonempty");
        let smaller = &product / last;
        if smaller.bits() <= required_bits + 1 {
            break;
        }
        product = smaller;
        primes.pop();
    }
    let modulus_bits = product.bits() - 1;

    let mismatches: Vec<Option<usize>> = primes
        .par_iter()
        .map(|&p| -> Result<Option<usize>> {
            let field = NttField::new(p)?;
            let residues = law_residues(d, &numers, cfg.depth, &field)?;
            for (n, r) in residues.iter().enumerate() {
                let want_mass = field.from_mont(field.reduce(&units[n]));
                let want_zero = field.from_mont(field.reduce_signed(&zeros[n]));
                let want_moment = field.from_mont(field.reduce_signed(&scaled_ex[n]));
                if r.mass != want_mass || r.zero != want_zero || r.first_moment != want_moment {
                    return Ok(Some(n));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    let mismatch = mismatches.into_iter().flatten().min();
    Ok(MeanProof {
        depth: cfg.depth,
        primes: primes.len(),
        modulus_bits,
        required_bits,
        mismatch,
    })
}
