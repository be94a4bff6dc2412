//! Arithmetic on the circle `[0,1)` with the quotient metric.
//!
//! Geometry is generic over a [`Coord`] scalar: `f64` for Monte Carlo work and
//! [`BigRational`] for the exact oracles. Float comparisons in the closed
//! (touching) predicates use an absolute tolerance of `1e-12`; the rational
//! arm uses none.
//!
//! Arcs are half-open `[start, start + length)`. An [`ArcSet`] is stored in a
//! normal form: a sorted list of disjoint, non-touching, non-wrapping pieces
//! `[lo, hi)` inside `[0, 1]`. A wrapping arc occupies two pieces.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LabError, Result};

/// Absolute tolerance for float comparisons in closed-overlap tests.
pub const GEOM_EPS: f64 = 1e-12;

/// Scalar field used for circle coordinates and arc lengths.
pub trait Coord: Clone + PartialOrd + fmt::Debug + Send + Sync {
    fn origin() -> Self;
    fn unit() -> Self;
    fn from_ratio(num: i64, den: u64) -> Self;
    /// Exact for rationals: the value of the double itself.
    fn from_f64(x: f64) -> Self;
    fn as_f64(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn mul_int(&self, k: u64) -> Self;
    /// `floor(self)`, assumed to fit in an `i64`.
    fn floor_i64(&self) -> i64;
    /// Fractional part in `[0, 1)`.
    fn frac(&self) -> Self;
    fn abs(&self) -> Self;
    /// Slack used by closed comparisons.
    fn tolerance() -> Self;
    fn is_exact() -> bool;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl Coord for f64 {
    fn origin() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn mul_int(&self, k: u64) -> Self {
        self * k as f64
    }
    fn floor_i64(&self) -> i64 {
        libm::floor(*self) as i64
    }
    fn frac(&self) -> Self {
        let r = self - libm::floor(*self);
        // x slightly below an integer can round up to exactly 1.0
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
    fn tolerance() -> Self {
        GEOM_EPS
    }
    fn is_exact() -> bool {
        false
    }
}

impl Coord for BigRational {
    fn origin() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(Zero::zero)
    }
    fn as_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn mul_int(&self, k: u64) -> Self {
        self * BigInt::from(k)
    }
    fn floor_i64(&self) -> i64 {
        self.floor().to_integer().to_i64().unwrap_or(i64::MAX)
    }
    fn frac(&self) -> Self {
        self - self.floor()
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn tolerance() -> Self {
        Zero::zero()
    }
    fn is_exact() -> bool {
        true
    }
}

/// Converts a rational with arbitrarily large parts to the nearest-ish double.
fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both parts down to 64 significant bits.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 64).max(0) as usize;
    let shift_d = (db - 64).max(0) as usize;
    let n = (r.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * libm::pow(2.0, (shift_n as f64) - (shift_d as f64))
}

/// A point of the circle in floating point, always in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(x: f64) -> Self {
        CirclePoint(x.frac())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point of the circle as a reduced fraction `num/den` with `0 <= num < den`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint(BigRational);

impl RationalPoint {
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(LabError::InvalidParameter("zero denominator".into()));
        }
        Ok(RationalPoint(BigRational::from_ratio(num, den).frac()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        RationalPoint(r.frac())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_value(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Quotient distance `min(|x-y|, 1-|x-y|)` of two normalized coordinates.
pub fn circle_dist<S: Coord>(x: &S, y: &S) -> S {
    let d = x.sub(y).abs().frac();
    let e = S::unit().sub(&d);
    S::min_of(&d, &e)
}

/// Half-open arc `[start, start + length)`; `length = 1` is the full circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc<S> {
    start: S,
    length: S,
}

impl<S: Coord> Arc<S> {
    /// Normalizes the start and clamps the length into `[0, 1]`.
    pub fn new(start: S, length: S) -> Self {
        let length = if length < S::origin() {
            S::origin()
        } else if length > S::unit() {
            S::unit()
        } else {
            length
        };
        Arc {
            start: start.frac(),
            length,
        }
    }

    /// The arc `[a, b)` read counter-clockwise; wraps through 0 when `b < a`.
    pub fn from_bounds(a: S, b: S) -> Self {
        let a = a.frac();
        let b = b.frac();
        let length = if b >= a {
            b.sub(&a)
        } else {
            S::unit().sub(&a).add(&b)
        };
        Arc::new(a, length)
    }

    pub fn full() -> Self {
        Arc {
            start: S::origin(),
            length: S::unit(),
        }
    }

    pub fn start(&self) -> &S {
        &self.start
    }

    pub fn length(&self) -> &S {
        &self.length
    }

    pub fn is_full(&self) -> bool {
        self.length >= S::unit()
    }

    /// Midpoint of the arc.
    pub fn center(&self) -> S {
        self.start.add(&self.length.mul(&S::half())).frac()
    }

    /// Half-open membership.
    pub fn contains(&self, x: &S) -> bool {
        if self.is_full() {
            return true;
        }
        x.sub(&self.start).frac() < self.length
    }

    /// Non-wrapping pieces inside `[0, 1]`.
    pub fn pieces(&self) -> Vec<(S, S)> {
        if self.length <= S::origin() {
            return Vec::new();
        }
        if self.is_full() {
            return alloc::vec![(S::origin(), S::unit())];
        }
        let end = self.start.add(&self.length);
        if end <= S::unit() {
            alloc::vec![(self.start.clone(), end)]
        } else {
            alloc::vec![
                (S::origin(), end.sub(&S::unit())),
                (self.start.clone(), S::unit())
            ]
        }
    }

    pub fn to_set(&self) -> ArcSet<S> {
        ArcSet::from_pieces(self.pieces())
    }
}

/// `B_delta(x)`: the arc centered at `x` of length `min(1, 2 delta)`.
pub fn ball<S: Coord>(x: &S, delta: &S) -> Result<Arc<S>> {
    if *delta <= S::origin() {
        return Err(LabError::InvalidRadius(delta.as_f64()));
    }
    let two_delta = delta.mul_int(2);
    if two_delta >= S::unit() {
        return Ok(Arc::full());
    }
    Ok(Arc::new(x.sub(delta).frac(), two_delta))
}

/// Finite union of arcs in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet<S> {
    pieces: Vec<(S, S)>,
}

impl<S: Coord> Default for ArcSet<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Coord> ArcSet<S> {
    pub fn empty() -> Self {
        ArcSet { pieces: Vec::new() }
    }

    pub fn full() -> Self {
        ArcSet {
            pieces: alloc::vec![(S::origin(), S::unit())],
        }
    }

    pub fn from_arcs<I: IntoIterator<Item = Arc<S>>>(arcs: I) -> Self {
        Self::from_pieces(arcs.into_iter().flat_map(|a| a.pieces()))
    }

    /// Builds a set from raw `[lo, hi)` pieces inside `[0, 1]`; empty pieces
    /// are dropped and overlapping or touching ones merged.
    pub fn from_pieces<I: IntoIterator<Item = (S, S)>>(pieces: I) -> Self {
        let mut raw: Vec<(S, S)> = pieces
            .into_iter()
            .map(|(lo, hi)| {
                let lo = S::max_of(&lo, &S::origin());
                let hi = S::min_of(&hi, &S::unit());
                (lo, hi)
            })
            .filter(|(lo, hi)| lo < hi)
            .collect();
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(S, S)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        ArcSet { pieces: merged }
    }

    pub fn pieces(&self) -> &[(S, S)] {
        &self.pieces
    }

    /// Maximal arcs, with a piece ending at 1 joined to one starting at 0.
    pub fn arcs(&self) -> Vec<Arc<S>> {
        let n = self.pieces.len();
        if n == 0 {
            return Vec::new();
        }
        if self.is_full() {
            return alloc::vec![Arc::full()];
        }
        let wraps = n >= 2 && self.pieces[0].0 <= S::origin() && self.pieces[n - 1].1 >= S::unit();
        let mut out = Vec::with_capacity(n);
        let inner = if wraps { &self.pieces[1..n - 1] } else { &self.pieces[..] };
        for (lo, hi) in inner {
            out.push(Arc::new(lo.clone(), hi.sub(lo)));
        }
        if wraps {
            let (lo, hi) = &self.pieces[n - 1];
            let len = hi.sub(lo).add(&self.pieces[0].1);
            out.push(Arc::new(lo.clone(), len));
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].0 <= S::origin() && self.pieces[0].1 >= S::unit()
    }

    pub fn lebesgue_length(&self) -> S {
        self.pieces
            .iter()
            .fold(S::origin(), |acc, (lo, hi)| acc.add(&hi.sub(lo)))
    }

    /// Half-open membership.
    pub fn contains(&self, x: &S) -> bool {
        self.pieces.iter().any(|(lo, hi)| lo <= x && x < hi)
    }

    /// Membership in the closure, with the float tolerance.
    pub fn contains_closed(&self, x: &S) -> bool {
        let tol = S::tolerance();
        let hit = |x: &S| {
            self.pieces
                .iter()
                .any(|(lo, hi)| lo.sub(&tol) <= *x && *x <= hi.add(&tol))
        };
        // 0 and 1 are the same point of the circle.
        hit(x) || (*x <= tol && hit(&S::unit())) || (*x >= S::unit().sub(&tol) && hit(&S::origin()))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_pieces(self.pieces.iter().chain(other.pieces.iter()).cloned())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a0, a1) = &self.pieces[i];
            let (b0, b1) = &other.pieces[j];
            let lo = S::max_of(a0, b0);
            let hi = S::min_of(a1, b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_pieces(out)
    }

    /// Lebesgue-positive overlap of the half-open sets.
    pub fn intersects(&self, other: &Self) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a0, a1) = &self.pieces[i];
            let (b0, b1) = &other.pieces[j];
            if S::max_of(a0, b0) < S::min_of(a1, b1) {
                return true;
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    }

    /// Overlap of the closures: touching endpoints count, including at 0 = 1.
    pub fn intersects_closed(&self, other: &Self) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        let tol = S::tolerance();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a0, a1) = &self.pieces[i];
            let (b0, b1) = &other.pieces[j];
            if S::max_of(a0, b0) <= S::min_of(a1, b1).add(&tol) {
                return true;
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        let top = S::unit().sub(&tol);
        let touches_one = |s: &Self| s.pieces.last().is_some_and(|p| p.1 >= top);
        let touches_zero = |s: &Self| s.pieces.first().is_some_and(|p| p.0 <= tol);
        (touches_one(self) && touches_zero(other)) || (touches_zero(self) && touches_one(other))
    }

    /// Every piece of `self` lies inside a piece of `other` (up to tolerance).
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let tol = S::tolerance();
        self.pieces.iter().all(|(lo, hi)| {
            other
                .pieces
                .iter()
                .any(|(a, b)| a.sub(&tol) <= *lo && *hi <= b.add(&tol))
        })
    }

    /// Rigid rotation of every arc by `offset`.
    pub fn rotate(&self, offset: &S) -> Self {
        Self::from_arcs(
            self.arcs()
                .into_iter()
                .map(|a| Arc::new(a.start().add(offset), a.length().clone())),
        )
    }

    /// Equality up to the float tolerance; exact for rationals.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let tol = S::tolerance();
        self.pieces.len() == other.pieces.len()
            && self.pieces.iter().zip(&other.pieces).all(|(a, b)| {
                a.0.sub(&b.0).abs() <= tol && a.1.sub(&b.1).abs() <= tol
            })
    }

    /// Converts to another scalar type through `f64` (or exactly, for f64 to rational).
    pub fn map_coord<T: Coord>(&self) -> ArcSet<T> {
        ArcSet::from_pieces(
            self.pieces
                .iter()
                .map(|(lo, hi)| (T::from_f64(lo.as_f64()), T::from_f64(hi.as_f64()))),
        )
    }
}

impl<S: Coord + fmt::Display> fmt::Display for ArcSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, (lo, hi)) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "[{lo}, {hi})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn set(bounds: &[(f64, f64)]) -> ArcSet<f64> {
        ArcSet::from_arcs(bounds.iter().map(|&(a, b)| Arc::from_bounds(a, b)))
    }

    #[test]
    fn distance_examples() {
        assert!((circle_dist(&0.1, &0.9) - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(&0.3, &0.3), 0.0);
        assert_eq!(circle_dist(&0.25, &0.5), 0.25);
        assert_eq!(circle_dist(&q(1, 10), &q(9, 10)), q(1, 5));
    }

    #[test]
    fn ball_examples() {
        let b = ball(&0.5, &0.1).unwrap();
        assert!((b.start() - 0.4).abs() < 1e-15 && (b.length() - 0.2).abs() < 1e-15);
        let b = ball(&q(0, 1), &q(1, 10)).unwrap();
        assert_eq!(b, Arc::new(q(9, 10), q(1, 5)));
        assert!(ball(&0.3, &0.6).unwrap().is_full());
        assert_eq!(ball(&0.3, &0.0), Err(LabError::InvalidRadius(0.0)));
        assert!(ball(&0.3, &-1.0).is_err());
    }

    #[test]
    fn arcset_examples() {
        let a = set(&[(0.0, 0.25), (0.5, 0.75)]);
        assert_eq!(a.lebesgue_length(), 0.5);

        let left = set(&[(0.0, 0.25)]);
        let right = set(&[(0.25, 0.5)]);
        assert!(!left.intersects(&right));
        assert!(left.intersects_closed(&right));

        let wrap = ArcSet::from_arcs([Arc::from_bounds(q(9, 10), q(1, 10))]);
        let mid = ArcSet::from_arcs([Arc::from_bounds(q(1, 20), q(19, 20))]);
        let cap = wrap.intersection(&mid);
        assert_eq!(cap.pieces(), &[(q(1, 20), q(1, 10)), (q(9, 10), q(19, 20))]);
        assert_eq!(cap.lebesgue_length(), q(1, 10));
    }

    #[test]
    fn wrap_touch_counts_as_closed_overlap() {
        let top = set(&[(0.5, 1.0)]);
        let bottom = set(&[(0.0, 0.2)]);
        assert!(!top.intersects(&bottom));
        assert!(top.intersects_closed(&bottom));
        assert!(bottom.contains_closed(&0.999_999_999_999_9));
    }

    #[test]
    fn wrapping_arc_roundtrips_through_arcs() {
        let a = Arc::from_bounds(q(7, 8), q(1, 8));
        let s = a.to_set();
        assert_eq!(s.pieces().len(), 2);
        assert_eq!(s.arcs(), alloc::vec![a]);
    }

    #[test]
    fn membership_is_half_open() {
        let a = set(&[(0.25, 0.5)]);
        assert!(a.contains(&0.25));
        assert!(!a.contains(&0.5));
        assert!(a.contains_closed(&0.5));
    }

    proptest! {
        #[test]
        fn metric_axioms(x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
            let dxy = circle_dist(&x, &y);
            prop_assert!(dxy <= 0.5);
            prop_assert!((dxy - circle_dist(&y, &x)).abs() < 1e-15);
            prop_assert!(circle_dist(&x, &z) <= dxy + circle_dist(&y, &z) + 1e-12);
        }

        #[test]
        fn ball_is_monotone(x in 0.0f64..1.0, d in 1e-6f64..0.5, extra in 0.0f64..0.5) {
            let small = ball(&x, &d).unwrap().to_set();
            let big = ball(&x, &(d + extra)).unwrap().to_set();
            prop_assert!(small.is_subset_of(&big));
        }

        #[test]
        fn normalization_is_idempotent_and_rotation_invariant(
            arcs in proptest::collection::vec((0u64..64, 0u64..64), 0..6),
            offset in 0u64..64,
        ) {
            let s = ArcSet::from_arcs(arcs.iter().map(|&(a, l)| Arc::new(q(a as i64, 64), q(l as i64, 64))));
            let again = ArcSet::from_pieces(s.pieces().iter().cloned());
            prop_assert_eq!(&again, &s);
            let rotated = s.rotate(&q(offset as i64, 64));
            prop_assert_eq!(rotated.lebesgue_length(), s.lebesgue_length());
        }

        #[test]
        fn union_length_is_subadditive(
            a in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.5), 0..4),
            b in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.5), 0..4),
        ) {
            let sa = ArcSet::from_arcs(a.iter().map(|&(s, l)| Arc::new(s, l)));
            let sb = ArcSet::from_arcs(b.iter().map(|&(s, l)| Arc::new(s, l)));
            let u = sa.union(&sb);
            prop_assert!(u.lebesgue_length() <= sa.lebesgue_length() + sb.lebesgue_length() + 1e-12);
            prop_assert!(u.lebesgue_length() <= 1.0 + 1e-12);
            let i = sa.intersection(&sb);
            prop_assert!(i.is_subset_of(&sa) && i.is_subset_of(&sb));
        }
    }
}
