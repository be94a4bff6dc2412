//! Fibred orbits of the skew product `(ω, x) -> (σω, g_{ω₁} x)`.
//!
//! Three orbit representations live here:
//!
//! - [`FiberedOrbit`] over any [`Coord`]: plain float or exact rational iteration.
//! - [`TailOrbit`]: the orbit of a Lebesgue-uniform point under linear maps, tracked
//!   as the top 64 bits of its binary expansion. The discarded tail is uniform and
//!   independent of the kept bits, so `k·x mod 1` only needs a uniform carry in
//!   `0..k` per step. The law of the whole orbit is exact; no bits are lost to
//!   rounding as with `f64` doubling.
//! - Dynamical balls of linear systems, computed exactly as unions of arcs.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::circle::{circle_dist, Arc, ArcSet, Coord};
use crate::error::{LabError, Result};
use crate::maps::SemigroupSystem;
use crate::symbols::{domain, keyed_rng, SymbolStream};

/// Orbit `(f_ω^n(x0))_{n≥0}` of one fibre. Iterating yields `f_ω^1(x0), f_ω^2(x0), …`.
#[derive(Debug, Clone)]
pub struct FiberedOrbit<S> {
    system: SemigroupSystem,
    origin: SymbolStream,
    stream: SymbolStream,
    x0: S,
    current: S,
    steps: u64,
}

impl<S: Coord> FiberedOrbit<S> {
    pub fn new(system: SemigroupSystem, stream: SymbolStream, x0: S) -> Self {
        let x0 = x0.frac();
        FiberedOrbit {
            system,
            origin: stream.clone(),
            stream,
            current: x0.clone(),
            x0,
            steps: 0,
        }
    }

    pub fn x0(&self) -> &S {
        &self.x0
    }

    pub fn system(&self) -> &SemigroupSystem {
        &self.system
    }

    /// The symbol sequence as seen from the current step.
    pub fn stream(&self) -> &SymbolStream {
        &self.stream
    }

    pub fn current(&self) -> &S {
        &self.current
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_exact(&self) -> bool {
        S::is_exact()
    }

    /// Applies `g_{ω_{n+1}}`, returning the new point.
    pub fn step(&mut self) -> Result<&S> {
        let s = self.stream.next_symbol();
        self.current = self.system.generator(s)?.eval(&self.current);
        self.steps += 1;
        Ok(&self.current)
    }

    /// `f_ω^n(x0)`, counted from the orbit's starting point.
    pub fn orbit_point(&self, n: u64) -> Result<S> {
        let mut stream = self.origin.clone();
        let mut y = self.x0.clone();
        for _ in 0..n {
            y = self.system.generator(stream.next_symbol())?.eval(&y);
        }
        Ok(y)
    }

    /// Whether `y` lies in the dynamical ball `B_δ^ω(x0, n)`, i.e. the first `n`
    /// iterates (`j = 0..n-1`) stay strictly within `δ`.
    pub fn dyn_ball_contains(&self, y: &S, delta: &S, n: u64) -> Result<bool> {
        if !(delta > &S::origin()) {
            return Err(LabError::InvalidRadius(delta.as_f64()));
        }
        let mut stream = self.origin.clone();
        let (mut a, mut b) = (self.x0.clone(), y.frac());
        for j in 0..n {
            if !(circle_dist(&a, &b) < *delta) {
                return Ok(false);
            }
            if j + 1 < n {
                let g = self.system.generator(stream.next_symbol())?;
                a = g.eval(&a);
                b = g.eval(&b);
            }
        }
        Ok(true)
    }
}

impl<S: Coord> Iterator for FiberedOrbit<S> {
    type Item = Result<S>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.step().cloned())
    }
}

/// Finite union of arcs in 64-bit fixed point, `[lo, hi)` with `hi ≤ 2^64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSet {
    pieces: Vec<(u128, u128)>,
}

const SCALE: f64 = 18_446_744_073_709_551_616.0;

fn to_fixed(x: f64) -> u128 {
    let v = libm::ceil(x * SCALE);
    if v <= 0.0 {
        0
    } else if v >= SCALE {
        1u128 << 64
    } else {
        v as u128
    }
}

impl FixedSet {
    pub fn from_set(set: &ArcSet<f64>) -> Self {
        FixedSet {
            pieces: set
                .pieces()
                .iter()
                .map(|(a, b)| (to_fixed(*a), to_fixed(*b)))
                .filter(|(a, b)| a < b)
                .collect(),
        }
    }

    pub fn contains(&self, w: u64) -> bool {
        let w = w as u128;
        self.pieces.iter().any(|&(a, b)| a <= w && w < b)
    }

    /// Total length in units of `2^-64`.
    pub fn measure(&self) -> u128 {
        self.pieces.iter().map(|(a, b)| b - a).sum()
    }

    /// Uniform point of the set from one 64-bit draw; `None` for an empty set.
    pub fn sample(&self, bits: u64) -> Option<u64> {
        let total = self.measure();
        if total == 0 {
            return None;
        }
        let mut r = (bits as u128 * total) >> 64;
        for &(a, b) in &self.pieces {
            if r < b - a {
                return Some((a + r) as u64);
            }
            r -= b - a;
        }
        None
    }
}

/// Orbit of a Lebesgue-uniform point under a linear system, tracked in fixed point.
#[derive(Debug, Clone)]
pub struct TailOrbit {
    degrees: Vec<u32>,
    stream: SymbolStream,
    rng: ChaCha8Rng,
    w: u64,
}

impl TailOrbit {
    /// Draws `x0` uniformly from `start` (the whole circle when `None`).
    pub fn sample(
        system: &SemigroupSystem,
        stream: SymbolStream,
        start: Option<&FixedSet>,
        seed: u64,
        point_id: u64,
    ) -> Result<Self> {
        let degrees = system.degrees("tail-point orbits")?;
        let mut rng = keyed_rng(seed, point_id, domain::POINTS);
        let bits = rng.next_u64();
        let w = match start {
            None => bits,
            Some(set) => set
                .sample(bits)
                .ok_or_else(|| LabError::InvalidParameter("sampling from an empty set".into()))?,
        };
        Ok(TailOrbit { degrees, stream, rng, w })
    }

    /// Top 64 bits of the current point.
    pub fn bits(&self) -> u64 {
        self.w
    }

    /// The current point rounded to `f64`.
    pub fn point(&self) -> f64 {
        self.w as f64 / SCALE
    }

    pub fn step(&mut self) -> Result<u64> {
        let s = self.stream.next_symbol();
        let k = *self
            .degrees
            .get(s.wrapping_sub(1))
            .ok_or(LabError::UnknownGenerator { symbol: s, p: self.degrees.len() })? as u64;
        let carry = if k.is_power_of_two() {
            self.rng.next_u64() >> (64 - k.trailing_zeros())
        } else {
            ((self.rng.next_u64() as u128 * k as u128) >> 64) as u64
        };
        self.w = self.w.wrapping_mul(k).wrapping_add(carry);
        Ok(self.w)
    }
}

/// Uniform dyadic rational `m / 2^bits` in `[0,1)` for exact-arm experiments.
pub fn random_dyadic(seed: u64, point_id: u64, bits: u32) -> BigRational {
    let mut rng = keyed_rng(seed, point_id, domain::POINTS);
    let words = bits.div_ceil(64) as usize;
    let limbs: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
    let mut m = BigUint::zero();
    for l in limbs.iter().rev() {
        m = (m << 64u32) + BigUint::from(*l);
    }
    m >>= (words as u32 * 64 - bits) as usize;
    BigRational::new(BigInt::from(m), BigInt::one() << bits as usize)
}

/// Exact dynamical ball `B_δ^ω(x0, n)` of a linear system.
///
/// Writing `y = x0 + t`, step `j` maps `t` to `K_j t` where `K_j` is the product
/// of the first `j` degrees, so the ball is `{t : dist(K_j t, ℤ) < δ, j < n}`.
/// The pieces are tracked as `t`-intervals and branched over the integers
/// `m` with `|K_j t - m| < δ`.
pub fn dyn_ball<S: Coord>(
    system: &SemigroupSystem,
    stream: &SymbolStream,
    x0: &S,
    delta: &S,
    n: u64,
) -> Result<ArcSet<S>> {
    let pieces = dyn_ball_pieces(system, stream, delta, n)?;
    Ok(ArcSet::from_arcs(
        pieces
            .into_iter()
            .map(|(lo, hi)| Arc::new(x0.add(&lo), hi.sub(&lo))),
    ))
}

/// The connected component of the dynamical ball that contains `x0`.
pub fn dyn_ball_as_arc<S: Coord>(
    system: &SemigroupSystem,
    stream: &SymbolStream,
    x0: &S,
    delta: &S,
    n: u64,
) -> Result<Arc<S>> {
    let pieces = dyn_ball_pieces(system, stream, delta, n)?;
    let zero = S::origin();
    let (lo, hi) = pieces
        .into_iter()
        .find(|(lo, hi)| *lo <= zero && zero < *hi)
        .ok_or_else(|| LabError::InvalidParameter("dynamical ball lost its centre".into()))?;
    Ok(Arc::new(x0.add(&lo), hi.sub(&lo)))
}

fn dyn_ball_pieces<S: Coord>(
    system: &SemigroupSystem,
    stream: &SymbolStream,
    delta: &S,
    n: u64,
) -> Result<Vec<(S, S)>> {
    if !(delta > &S::origin()) {
        return Err(LabError::InvalidRadius(delta.as_f64()));
    }
    if n == 0 {
        return Err(LabError::InvalidParameter("dynamical ball needs n ≥ 1".into()));
    }
    let degrees = system.degrees("dynamical balls")?;
    let half = S::half();
    let r0 = if *delta < half { delta.clone() } else { half.clone() };
    // Half-open `[lo, hi)` in `t`; the strict inequality only moves endpoints.
    let mut pieces = alloc::vec![(S::origin().sub(&r0), r0)];
    let mut cursor = stream.clone();
    let mut scale = S::unit();
    for _ in 1..n {
        let s = cursor.next_symbol();
        let k = *degrees
            .get(s.wrapping_sub(1))
            .ok_or(LabError::UnknownGenerator { symbol: s, p: degrees.len() })?;
        scale = scale.mul_int(k as u64);
        if *delta >= half {
            continue;
        }
        let mut next = Vec::with_capacity(pieces.len());
        for (lo, hi) in &pieces {
            let a = scale.mul(lo);
            let b = scale.mul(hi);
            let m_lo = a.sub(delta).floor_i64();
            let m_hi = b.add(delta).floor_i64() + 1;
            for m in m_lo..=m_hi {
                let mm = S::from_ratio(m, 1);
                let c_lo = S::max_of(&a, &mm.sub(delta));
                let c_hi = S::min_of(&b, &mm.add(delta));
                if c_lo < c_hi {
                    next.push((c_lo.div(&scale), c_hi.div(&scale)));
                }
            }
        }
        pieces = next;
    }
    Ok(pieces)
}
