//! ±1 sign streams for input, cross-encoder and bias couplings.
//!
//! Two sources exist: the fractional binary digits of π (bit 0 ↦ −1,
//! bit 1 ↦ +1) and seeded Bernoulli draws. Coupling matrices are always
//! filled in one canonical order so that a given source, order `k`, size `n`
//! and adjacency produce the same signs everywhere.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::topology::BitMatrix;

const GUARD_BITS: u64 = 64;

fn pi_cache() -> &'static RwLock<Vec<bool>> {
    static CACHE: OnceLock<RwLock<Vec<bool>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Vec::new()))
}

/// The first `count` bits of the fractional part of π
/// (π = 11.001001000011111101101010100010001000010110100011…₂).
///
/// Results are memoized; later calls with a larger `count` extend the cache.
pub fn pi_fraction_bits(count: usize) -> Vec<bool> {
    {
        let cache = pi_cache().read().unwrap_or_else(|e| e.into_inner());
        if cache.len() >= count {
            return cache[..count].to_vec();
        }
    }
    let mut cache = pi_cache().write().unwrap_or_else(|e| e.into_inner());
    if cache.len() < count {
        let target = count.max(cache.len() * 2).max(4096);
        *cache = compute_pi_bits(target);
    }
    cache[..count].to_vec()
}

/// One fractional bit of π by 0-based index.
pub fn pi_bit(index: usize) -> bool {
    pi_fraction_bits(index + 1)[index]
}

// Chudnovsky series, summed by binary splitting.
const CHUD_A: u64 = 13_591_409;
const CHUD_B: u64 = 545_140_134;
// 640320³ / 24
const CHUD_C3_OVER_24: u64 = 10_939_058_860_032_000;
// Each series term contributes log2(640320³/1728) ≈ 47.11 bits.
const BITS_PER_TERM: f64 = 47.11;

fn split(a: u64, b: u64) -> (BigInt, BigInt, BigInt) {
    if b - a == 1 {
        let (p, q) = if a == 0 {
            (BigInt::one(), BigInt::one())
        } else {
            let p = BigInt::from(6 * a - 5) * BigInt::from(2 * a - 1) * BigInt::from(6 * a - 1);
            let q = BigInt::from(a) * BigInt::from(a) * BigInt::from(a) * BigInt::from(CHUD_C3_OVER_24);
            (p, q)
        };
        let mut t = &p * BigInt::from(CHUD_A + CHUD_B * a);
        if a % 2 == 1 {
            t = -t;
        }
        (p, q, t)
    } else {
        let m = (a + b) / 2;
        let (p1, q1, t1) = split(a, m);
        let (p2, q2, t2) = split(m, b);
        let t = &q2 * t1 + &p1 * t2;
        (p1 * p2, q1 * q2, t)
    }
}

fn compute_pi_bits(count: usize) -> Vec<bool> {
    let prec = count as u64 + GUARD_BITS;
    let terms = (prec as f64 / BITS_PER_TERM) as u64 + 2;
    let (_, q, t) = split(0, terms);
    // π = 426880·√10005·Q / T
    let scale = BigUint::one() << prec;
    let sqrt_c = (BigUint::from(10005u32) * &scale * &scale).sqrt();
    let q = q.magnitude().clone();
    let t = {
        assert_eq!(t.sign(), Sign::Plus, "Chudnovsky sum must be positive");
        t.abs().magnitude().clone()
    };
    let pi_fixed = (q * BigUint::from(426_880u32) * sqrt_c) / t;
    let scaled = pi_fixed >> GUARD_BITS;
    let m = count as u64;
    (1..=m).map(|i| scaled.bit(m - i)).collect()
}

#[inline]
fn bit_to_sign(bit: bool) -> f64 {
    if bit {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignMode {
    Pi,
    Bernoulli,
}

/// A consumable stream of ±1 signs.
#[derive(Debug, Clone)]
pub enum SignSource {
    Pi { consumed: usize },
    Bernoulli { seed: u64, consumed: usize, rng: ChaCha8Rng },
}

impl SignSource {
    pub fn pi() -> Self {
        SignSource::Pi { consumed: 0 }
    }

    pub fn bernoulli(seed: u64) -> Self {
        SignSource::Bernoulli { seed, consumed: 0, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn new(mode: SignMode, seed: u64) -> Self {
        match mode {
            SignMode::Pi => SignSource::pi(),
            SignMode::Bernoulli => SignSource::bernoulli(seed),
        }
    }

    pub fn mode(&self) -> SignMode {
        match self {
            SignSource::Pi { .. } => SignMode::Pi,
            SignSource::Bernoulli { .. } => SignMode::Bernoulli,
        }
    }

    /// Number of signs drawn from the stream so far.
    pub fn consumed(&self) -> usize {
        match self {
            SignSource::Pi { consumed } | SignSource::Bernoulli { consumed, .. } => *consumed,
        }
    }

    pub fn take_signs(&mut self, count: usize) -> Vec<f64> {
        match self {
            SignSource::Pi { consumed } => {
                let bits = pi_fraction_bits(*consumed + count);
                let out = bits[*consumed..].iter().map(|&b| bit_to_sign(b)).collect();
                *consumed += count;
                out
            }
            SignSource::Bernoulli { consumed, rng, .. } => {
                *consumed += count;
                (0..count).map(|_| bit_to_sign(rng.random::<bool>())).collect()
            }
        }
    }
}

/// All sign couplings of an order-`k` system with encoders of size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    k: usize,
    n: usize,
    input: Vec<Vec<f64>>,
    /// `cross[i * k + j]` is the n×n row-major matrix carrying encoder `j`
    /// into encoder `i`.
    cross: Vec<Option<Arc<[f64]>>>,
    bias: Vec<Vec<f64>>,
}

impl Couplings {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.input[i]
    }

    pub fn bias(&self, i: usize) -> &[f64] {
        &self.bias[i]
    }

    /// Matrix from encoder `from` into encoder `to`, if it was allocated.
    pub fn cross(&self, from: usize, to: usize) -> Option<&[f64]> {
        self.cross[to * self.k + from].as_deref()
    }

    pub(crate) fn cross_shared(&self, from: usize, to: usize) -> Option<Arc<[f64]>> {
        self.cross[to * self.k + from].clone()
    }

    /// Builds couplings from explicit sign vectors (used when reloading
    /// or in tests). `cross` is indexed `to * k + from`.
    pub fn from_parts(
        k: usize,
        n: usize,
        input: Vec<Vec<f64>>,
        cross: Vec<Option<Vec<f64>>>,
        bias: Vec<Vec<f64>>,
    ) -> Self {
        assert_eq!(input.len(), k);
        assert_eq!(bias.len(), k);
        assert_eq!(cross.len(), k * k);
        assert!(input.iter().chain(&bias).all(|v| v.len() == n));
        assert!(cross.iter().flatten().all(|v| v.len() == n * n));
        let is_sign = |x: &f64| *x == 1.0 || *x == -1.0;
        assert!(input.iter().chain(&bias).flatten().all(is_sign));
        assert!(cross.iter().flatten().flatten().all(is_sign));
        let cross = cross.into_iter().map(|c| c.map(Arc::from)).collect();
        Couplings { k, n, input, cross, bias }
    }
}

/// Canonical allocation: every input vector `V_in` for encoders `0..k` in
/// order, then `V` for each ordered pair `(to, from)` with `to` ascending,
/// `from` ascending, `from != to`, skipping pairs not permitted by `a`.
///
/// In π mode every bias vector is read from absolute fractional bits
/// `n..2n` (0-based), independent of the stream; in Bernoulli mode each bias
/// vector is drawn from the stream after the coupling matrices.
pub fn allocate_couplings(src: &mut SignSource, k: usize, n: usize, a: &BitMatrix) -> Couplings {
    assert_eq!(a.k(), k);
    let input: Vec<Vec<f64>> = (0..k).map(|_| src.take_signs(n)).collect();
    let mut cross = vec![None; k * k];
    for to in 0..k {
        for from in 0..k {
            if from != to && a.get(from, to) {
                cross[to * k + from] = Some(Arc::from(src.take_signs(n * n)));
            }
        }
    }
    let bias = match src {
        SignSource::Pi { .. } => {
            let bits = pi_fraction_bits(2 * n);
            let b: Vec<f64> = bits[n..2 * n].iter().map(|&x| bit_to_sign(x)).collect();
            vec![b; k]
        }
        SignSource::Bernoulli { .. } => (0..k).map(|_| src.take_signs(n)).collect(),
    };
    Couplings { k, n, input, cross, bias }
}
