//! Return times: pointwise first returns, Kac averages, set and ball return
//! times along a fibre or over the whole semigroup, and their δ → 0 rates.
//!
//! Pointwise membership uses half-open arcs. Set overlap (`f(A) ∩ A ≠ ∅`)
//! uses closed arcs. Every search is truncated at an explicit bound and the
//! truncation is reported as [`ReturnTime::Censored`].

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_rational::BigRational;

use crate::circle::{ball, ArcSet, Coord};
use crate::error::{LabError, Result};
use crate::maps::SemigroupSystem;
use crate::orbit::{dyn_ball_as_arc, FiberedOrbit, FixedSet, TailOrbit};
use crate::stats::{least_squares, summarize, Running, Summary};
use crate::symbols::{SymbolStream, WalkLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReturnTime {
    Returned(u64),
    /// No return up to the stated bound.
    Censored(u64),
}

impl ReturnTime {
    pub fn value(self) -> Option<u64> {
        match self {
            ReturnTime::Returned(k) => Some(k),
            ReturnTime::Censored(_) => None,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, ReturnTime::Censored(_))
    }

    /// The returned time, or the bound when censored.
    pub fn raw(self) -> u64 {
        match self {
            ReturnTime::Returned(k) | ReturnTime::Censored(k) => k,
        }
    }
}

/// Whether the starting point must lie in the target set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Return,
    Hitting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnTimeSample {
    pub value: ReturnTime,
    pub start: f64,
    pub stream_id: u64,
}

/// Smallest `k` in `1..=n_max` with `f_ω^k(x) ∈ A`, starting from the orbit's current point.
pub fn first_return_time<S: Coord>(
    orbit: &FiberedOrbit<S>,
    a: &ArcSet<S>,
    n_max: u64,
    semantics: Semantics,
) -> Result<ReturnTime> {
    if n_max == 0 {
        return Err(LabError::InvalidParameter("N_max must be at least 1".into()));
    }
    if semantics == Semantics::Return && !a.contains(orbit.current()) {
        return Err(LabError::InvalidParameter("return semantics needs x0 in A".into()));
    }
    let mut o = orbit.clone();
    for k in 1..=n_max {
        if a.contains(o.step()?) {
            return Ok(ReturnTime::Returned(k));
        }
    }
    Ok(ReturnTime::Censored(n_max))
}

/// First return of a tail-point orbit to `a`.
pub fn tail_return_time(orbit: &mut TailOrbit, a: &FixedSet, n_max: u64) -> Result<ReturnTime> {
    for k in 1..=n_max {
        if a.contains(orbit.step()?) {
            return Ok(ReturnTime::Returned(k));
        }
    }
    Ok(ReturnTime::Censored(n_max))
}

/// Monte Carlo Kac estimate: mean of the uncensored return times.
#[derive(Debug, Clone, PartialEq)]
pub struct KacEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: u64,
    pub censored: u64,
    pub censored_fraction: f64,
    /// Censored fraction times `N_max`, a scale for the truncation bias.
    pub defect_bound: f64,
}

impl KacEstimate {
    pub fn from_returns<I: IntoIterator<Item = ReturnTime>>(returns: I, n_max: u64) -> Result<Self> {
        let mut r = Running::new();
        let mut censored = 0u64;
        for t in returns {
            match t {
                ReturnTime::Returned(k) => r.push(k as f64),
                ReturnTime::Censored(_) => censored += 1,
            }
        }
        let samples = r.count() + censored;
        if r.count() == 0 {
            return Err(LabError::EstimateUndefined(samples));
        }
        let censored_fraction = censored as f64 / samples as f64;
        Ok(KacEstimate {
            mean: r.mean(),
            half_width: r.half_width(),
            samples,
            censored,
            censored_fraction,
            defect_bound: censored_fraction * n_max as f64,
        })
    }
}

/// Everything needed to draw one Kac sample: a linear system, the law of ω,
/// the target set, the truncation and the seed.
#[derive(Debug, Clone)]
pub struct KacSetup {
    pub system: SemigroupSystem,
    pub law: WalkLaw,
    pub set: ArcSet<f64>,
    pub n_max: u64,
    pub seed: u64,
    fixed: FixedSet,
}

impl KacSetup {
    pub fn new(system: SemigroupSystem, law: WalkLaw, set: ArcSet<f64>, n_max: u64, seed: u64) -> Result<Self> {
        system.degrees("Lebesgue return-time sampling")?;
        if law.alphabet_bound() > system.p() {
            return Err(LabError::UnknownGenerator {
                symbol: law.alphabet_bound(),
                p: system.p(),
            });
        }
        if n_max == 0 {
            return Err(LabError::InvalidParameter("N_max must be at least 1".into()));
        }
        let fixed = FixedSet::from_set(&set);
        if fixed.measure() == 0 {
            return Err(LabError::InvalidParameter("target set has zero length".into()));
        }
        Ok(KacSetup {
            system,
            law,
            set,
            n_max,
            seed,
            fixed,
        })
    }

    /// One draw of `(ω, x)` with `ω ~ law` and `x ~ Lebesgue|A`.
    pub fn sample(&self, stream_id: u64) -> Result<ReturnTimeSample> {
        let omega = self.law.sample_stream(self.seed, stream_id);
        self.sample_along(omega, stream_id)
    }

    /// One draw of `x ~ Lebesgue|A` along a given symbol sequence.
    pub fn sample_along(&self, omega: SymbolStream, point_id: u64) -> Result<ReturnTimeSample> {
        let mut orbit = TailOrbit::sample(&self.system, omega, Some(&self.fixed), self.seed, point_id)?;
        let start = orbit.point();
        let value = tail_return_time(&mut orbit, &self.fixed, self.n_max)?;
        Ok(ReturnTimeSample {
            value,
            start,
            stream_id: point_id,
        })
    }
}

/// Serial Kac estimate over stream ids `0..m`.
pub fn kac_integral_estimate(setup: &KacSetup, m: u64) -> Result<KacEstimate> {
    let returns = (0..m)
        .map(|i| setup.sample(i).map(|s| s.value))
        .collect::<Result<Vec<_>>>()?;
    KacEstimate::from_returns(returns, setup.n_max)
}

/// Cesàro–Kac layout: one ω drawn from stream `omega_id`, `m` points per shift.
#[derive(Debug, Clone)]
pub struct CesaroSetup {
    pub kac: KacSetup,
    pub omega_id: u64,
    pub shifts: u64,
    pub m: u64,
}

impl CesaroSetup {
    pub fn omega(&self) -> SymbolStream {
        self.kac.law.sample_stream(self.kac.seed, self.omega_id)
    }

    /// Point id of sample `i` at shift `j`.
    pub fn point_id(&self, j: u64, i: u64) -> u64 {
        j * self.m + i
    }

    /// Sample `i` of `∫_A n_A^{σ^j ω} dν_A`.
    pub fn sample(&self, omega: &SymbolStream, j: u64, i: u64) -> Result<ReturnTimeSample> {
        self.kac.sample_along(omega.shift(j), self.point_id(j, i))
    }

    pub fn term(&self, omega: &SymbolStream, j: u64) -> Result<KacEstimate> {
        let returns = (0..self.m)
            .map(|i| self.sample(omega, j, i).map(|s| s.value))
            .collect::<Result<Vec<_>>>()?;
        KacEstimate::from_returns(returns, self.kac.n_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CesaroReport {
    /// `∫_A n_A^{σ^j ω} dν_A` for `j = 0..K-1`.
    pub terms: Vec<KacEstimate>,
    /// Partial means `(1/k) Σ_{j<k}` of the terms, `k = 1..=K`.
    pub cesaro: Vec<f64>,
    /// The unaveraged term at `j = K`.
    pub unaveraged: KacEstimate,
}

impl CesaroReport {
    pub fn new(terms: Vec<KacEstimate>, unaveraged: KacEstimate) -> Self {
        let mut acc = 0.0;
        let cesaro = terms
            .iter()
            .enumerate()
            .map(|(k, t)| {
                acc += t.mean;
                acc / (k + 1) as f64
            })
            .collect();
        CesaroReport {
            terms,
            cesaro,
            unaveraged,
        }
    }

    pub fn final_mean(&self) -> f64 {
        self.cesaro.last().copied().unwrap_or(f64::NAN)
    }
}

pub fn cesaro_kac(setup: &CesaroSetup) -> Result<CesaroReport> {
    let omega = setup.omega();
    let terms = (0..setup.shifts)
        .map(|j| setup.term(&omega, j))
        .collect::<Result<Vec<_>>>()?;
    let unaveraged = setup.term(&omega, setup.shifts)?;
    Ok(CesaroReport::new(terms, unaveraged))
}

/// Fraction of sampled `x ∈ A` that come back to `A` within `N_max` steps.
///
/// With `shift = k > 0` the orbit is read along `σ^k ω`, which is the
/// shifted-window form `g_{ω_n} ⋯ g_{ω_{k+1}}(x) ∈ A` for some `n > k`.
pub fn verify_recurrence(setup: &KacSetup, m: u64, shift: u64) -> Result<f64> {
    let mut returned = 0u64;
    for i in 0..m {
        let omega = setup.law.sample_stream(setup.seed, i).shift(shift);
        if !setup.sample_along(omega, i)?.value.is_censored() {
            returned += 1;
        }
    }
    Ok(returned as f64 / m as f64)
}

/// `T^ω(A) = inf{k ≥ 1 : f_ω^k(A) ∩ A ≠ ∅}` by exact forward images and closed overlap.
pub fn set_return_time<S: Coord>(
    system: &SemigroupSystem,
    stream: &SymbolStream,
    a: &ArcSet<S>,
    n_max: u64,
) -> Result<ReturnTime> {
    if a.is_empty() {
        return Err(LabError::InvalidParameter("set return time of the empty set".into()));
    }
    let mut cursor = stream.clone();
    let mut image = a.clone();
    for k in 1..=n_max {
        image = system.generator(cursor.next_symbol())?.set_image(&image);
        if image.is_full() || image.intersects_closed(a) {
            return Ok(ReturnTime::Returned(k));
        }
    }
    Ok(ReturnTime::Censored(n_max))
}

fn cmp_sets<S: Coord>(a: &ArcSet<S>, b: &ArcSet<S>) -> Ordering {
    for (p, q) in a.pieces().iter().zip(b.pieces()) {
        let o = p
            .0
            .partial_cmp(&q.0)
            .unwrap_or(Ordering::Equal)
            .then(p.1.partial_cmp(&q.1).unwrap_or(Ordering::Equal));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.pieces().len().cmp(&b.pieces().len())
}

/// Breadth-first `T^S(A)`: the first word length `k` for which some word maps
/// `A` onto a set meeting `A`. Images are deduplicated level by level.
/// More than `frontier_cap` distinct images at one level is an error.
pub fn action_set_return_time<S: Coord>(
    system: &SemigroupSystem,
    a: &ArcSet<S>,
    k_max: u64,
    frontier_cap: usize,
) -> Result<ReturnTime> {
    if a.is_empty() {
        return Err(LabError::InvalidParameter("set return time of the empty set".into()));
    }
    let mut frontier = alloc::vec![a.clone()];
    for k in 1..=k_max {
        let mut next = Vec::with_capacity(frontier.len() * system.p());
        for img in &frontier {
            for g in system.generators() {
                let out = g.set_image(img);
                if out.is_full() || out.intersects_closed(a) {
                    return Ok(ReturnTime::Returned(k));
                }
                next.push(out);
            }
        }
        next.sort_by(cmp_sets);
        next.dedup();
        if next.len() > frontier_cap {
            return Err(LabError::BudgetExceeded(alloc::format!(
                "{} distinct images at word length {k}",
                next.len()
            )));
        }
        frontier = next;
    }
    Ok(ReturnTime::Censored(k_max))
}

/// `T^S(B_δ(x))`.
pub fn action_ball_return_time<S: Coord>(
    system: &SemigroupSystem,
    x: &S,
    delta: &S,
    k_max: u64,
) -> Result<ReturnTime> {
    let b = ball(x, delta)?.to_set();
    action_set_return_time(system, &b, k_max, 1 << 20)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynBallRatio {
    pub n: u64,
    pub time: ReturnTime,
    /// `T / n` when uncensored.
    pub ratio: Option<f64>,
}

/// `T^ω(B_δ^ω(x, n)) / n` for each `n` in the grid, with the exact dynamical-ball arc.
pub fn dynball_return_ratio(
    system: &SemigroupSystem,
    stream: &SymbolStream,
    x: &BigRational,
    delta: &BigRational,
    n_grid: &[u64],
    n_max: u64,
) -> Result<Vec<DynBallRatio>> {
    n_grid
        .iter()
        .map(|&n| {
            let arc = dyn_ball_as_arc(system, stream, x, delta, n)?;
            let time = set_return_time(system, stream, &arc.to_set(), n_max)?;
            Ok(DynBallRatio {
                n,
                time,
                ratio: time.value().map(|t| t as f64 / n as f64),
            })
        })
        .collect()
}

/// `δ_j = δ0 · r^j` for `j = 0..points`.
pub fn geometric_grid(delta0: f64, ratio: f64, points: usize) -> Vec<f64> {
    (0..points).map(|j| delta0 * libm::pow(ratio, j as f64)).collect()
}

/// Least-squares fit of `T^ω(B_δ(x))` against `-log δ` for one `(ω, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Uncensored `(δ, T)` pairs, δ decreasing.
    pub grid: Vec<(f64, u64)>,
    /// Grid radii dropped because the search was censored.
    pub dropped: Vec<f64>,
}

/// Rate fit for one sample; `None` when fewer than two grid points survive.
pub fn rate_sample(
    system: &SemigroupSystem,
    stream: &SymbolStream,
    x: &BigRational,
    deltas: &[f64],
    n_max: u64,
) -> Result<Option<RateEstimate>> {
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(LabError::InvalidParameter("δ grid must be strictly decreasing".into()));
    }
    let mut grid = Vec::new();
    let mut dropped = Vec::new();
    for &d in deltas {
        let b = ball(x, &BigRational::from_f64(d))?.to_set();
        match set_return_time(system, stream, &b, n_max)? {
            ReturnTime::Returned(t) => grid.push((d, t)),
            ReturnTime::Censored(_) => dropped.push(d),
        }
    }
    let xs: Vec<f64> = grid.iter().map(|(d, _)| -libm::log(*d)).collect();
    let ys: Vec<f64> = grid.iter().map(|(_, t)| *t as f64).collect();
    Ok(least_squares(&xs, &ys).map(|fit| RateEstimate {
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        grid,
        dropped,
    }))
}

/// Distribution of per-sample slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    pub slopes: Summary,
    pub unfitted: usize,
    pub flagged: usize,
}

impl RateSummary {
    pub fn new(samples: &[Option<RateEstimate>]) -> Self {
        let slopes: Vec<f64> = samples.iter().flatten().map(|r| r.slope).collect();
        RateSummary {
            slopes: summarize(&slopes),
            unfitted: samples.iter().filter(|s| s.is_none()).count(),
            flagged: samples.iter().flatten().filter(|r| !r.dropped.is_empty()).count(),
        }
    }
}

/// Serial recurrence-rate estimate over `samples` draws of `(ω, x)`.
pub fn recurrence_rate(
    system: &SemigroupSystem,
    law: &WalkLaw,
    deltas: &[f64],
    samples: u64,
    n_max: u64,
    seed: u64,
) -> Result<(Vec<Option<RateEstimate>>, RateSummary)> {
    let all = (0..samples)
        .map(|i| {
            let x = crate::orbit::random_dyadic(seed, i, EXACT_BITS);
            rate_sample(system, &law.sample_stream(seed, i), &x, deltas, n_max)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = RateSummary::new(&all);
    Ok((all, summary))
}

/// Binary digits of the random dyadic starting points used by exact-arm experiments.
pub const EXACT_BITS: u32 = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct RotationBoundRow {
    pub x: f64,
    pub delta: f64,
    pub time: ReturnTime,
    pub bound: f64,
    pub holds: bool,
}

/// Checks `T^S(B_δ(x)) ≤ (1/α₁ + 1)/δ` for a system of rational rotations,
/// `α₁` the largest rotation number.
pub fn rotation_ball_bound_check(
    rotations: &[(u64, u64)],
    deltas: &[BigRational],
    xs: &[BigRational],
) -> Result<Vec<RotationBoundRow>> {
    let gens = rotations
        .iter()
        .map(|&(n, d)| crate::maps::GeneratorMap::rotation(n, d))
        .collect::<Result<Vec<_>>>()?;
    let system = SemigroupSystem::new(gens)?;
    let alpha1 = rotations
        .iter()
        .map(|&(n, d)| n as f64 / d as f64)
        .fold(0.0, f64::max);
    let mut rows = Vec::new();
    for x in xs {
        for d in deltas {
            let delta = d.as_f64();
            let bound = (1.0 / alpha1 + 1.0) / delta;
            let k_max = libm::ceil(bound) as u64 + 1;
            let time = action_ball_return_time(&system, x, d, k_max)?;
            rows.push(RotationBoundRow {
                x: x.as_f64(),
                delta,
                time,
                bound,
                holds: time.value().is_some_and(|t| t as f64 <= bound),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Word;
    use crate::symbols::BernoulliWalk;
    use proptest::prelude::*;

    fn q(n: i64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn cyclic(s: &str) -> SymbolStream {
        SymbolStream::cyclic(Word::parse(s).unwrap()).unwrap()
    }

    fn rset(a: BigRational, b: BigRational) -> ArcSet<BigRational> {
        ArcSet::from_pieces([(a, b)])
    }

    #[test]
    fn first_return_examples() {
        let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
        let o = FiberedOrbit::new(sys, cyclic("12"), q(1, 7));
        let a = rset(q(0, 1), q(1, 4));
        assert_eq!(first_return_time(&o, &a, 100, Semantics::Return).unwrap(), ReturnTime::Returned(4));

        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        let o = FiberedOrbit::new(doubling.clone(), cyclic("1"), q(1, 5));
        let a = rset(q(0, 1), q(1, 2));
        assert_eq!(first_return_time(&o, &a, 10, Semantics::Return).unwrap(), ReturnTime::Returned(1));

        let o = FiberedOrbit::new(doubling, cyclic("1"), q(1, 3));
        let a = rset(q(1, 3), q(1, 2));
        assert_eq!(first_return_time(&o, &a, 5, Semantics::Return).unwrap(), ReturnTime::Returned(2));
        let a = rset(q(0, 1), q(1, 10));
        assert!(first_return_time(&o, &a, 5, Semantics::Return).is_err());
        assert_eq!(first_return_time(&o, &a, 5, Semantics::Hitting).unwrap(), ReturnTime::Censored(5));
    }

    #[test]
    fn set_return_examples() {
        let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
        let a = rset(q(0, 1), q(1, 10));
        assert_eq!(set_return_time(&sys, &cyclic("21"), &a, 10).unwrap(), ReturnTime::Returned(1));
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        let a = rset(q(3, 10), q(7, 20));
        assert_eq!(set_return_time(&doubling, &cyclic("1"), &a, 10).unwrap(), ReturnTime::Returned(2));
        let a = rset(q(0, 1), q(1, 4));
        assert_eq!(set_return_time(&doubling, &cyclic("1"), &a, 10).unwrap(), ReturnTime::Returned(1));
    }

    #[test]
    fn action_ball_examples() {
        let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
        assert_eq!(action_ball_return_time(&sys, &q(0, 1), &q(1, 1000), 60).unwrap(), ReturnTime::Returned(1));
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        assert_eq!(action_ball_return_time(&doubling, &q(1, 3), &q(1, 20), 60).unwrap(), ReturnTime::Returned(2));
        let t = action_ball_return_time(&sys, &q(3, 10), &q(1, 1000), 60).unwrap().value().unwrap();
        let bound = libm::ceil(libm::log(1000.0) / libm::log(2.0)) as u64 + 1;
        assert!(t <= bound, "{t}");
    }

    #[test]
    fn rotation_examples() {
        let rows = rotation_ball_bound_check(&[(1, 4)], &[q(3, 10)], &[q(1, 10)]).unwrap();
        assert_eq!(rows[0].time, ReturnTime::Returned(1));
        assert!(rows[0].holds && (rows[0].bound - 5.0 / 0.3).abs() < 1e-12);
        let rows = rotation_ball_bound_check(&[(2, 5)], &[q(1, 100)], &[q(1, 7)]).unwrap();
        assert_eq!(rows[0].time, ReturnTime::Returned(5));
        let rows = rotation_ball_bound_check(&[(1, 3), (2, 7)], &[q(1, 2), q(3, 5)], &[q(0, 1), q(1, 2)]).unwrap();
        assert!(rows.iter().all(|r| r.time == ReturnTime::Returned(1)));
    }

    #[test]
    fn kac_on_the_full_circle_is_one() {
        let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
        let law = WalkLaw::Bernoulli(BernoulliWalk::uniform(2).unwrap());
        let setup = KacSetup::new(sys, law, ArcSet::full(), 10, 1).unwrap();
        let est = kac_integral_estimate(&setup, 1000).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(verify_recurrence(&setup, 100, 0).unwrap(), 1.0);
    }

    #[test]
    fn all_censored_is_undefined() {
        let sys = SemigroupSystem::linear(&[2]).unwrap();
        let law = WalkLaw::Cyclic(Word::parse("1").unwrap());
        let setup = KacSetup::new(sys, law, ArcSet::from_pieces([(0.5, 0.5 + 1e-6)]), 1, 1).unwrap();
        assert!(matches!(kac_integral_estimate(&setup, 10), Err(LabError::EstimateUndefined(10))));
    }

    #[test]
    fn single_map_cesaro_terms_agree() {
        // With p = 1 every shift sees the same sequence; shifts only change the points.
        let sys = SemigroupSystem::linear(&[2]).unwrap();
        let law = WalkLaw::Bernoulli(BernoulliWalk::new(alloc::vec![1.0]).unwrap());
        let kac = KacSetup::new(sys, law, ArcSet::from_pieces([(0.0, 0.5)]), 1000, 3).unwrap();
        let setup = CesaroSetup {
            kac,
            omega_id: 0,
            shifts: 4,
            m: 20_000,
        };
        let rep = cesaro_kac(&setup).unwrap();
        for t in &rep.terms {
            assert!((t.mean - 2.0).abs() < 4.0 * t.half_width);
        }
    }

    #[test]
    fn dynball_ratio_examples() {
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        let rows = dynball_return_ratio(&doubling, &cyclic("1"), &q(0, 1), &q(1, 100), &[5, 10], 50).unwrap();
        assert!(rows.iter().all(|r| r.time.value().unwrap() <= r.n + 1));
        let rows = dynball_return_ratio(&doubling, &cyclic("1"), &q(1, 3), &q(1, 100), &[10, 20, 40], 200).unwrap();
        for r in &rows {
            assert_eq!(r.time.value().unwrap() % 2, 0);
        }
    }

    /// Brute-force return time of `x = q/255` for the doubling map.
    fn doubling_return(num: u64, den: u64, lo: u64, hi: u64, scale: u64) -> Option<u64> {
        let mut y = num;
        for k in 1..=64 {
            y = 2 * y % den;
            // y/den ∈ [lo/scale, hi/scale)
            if y * scale >= lo * den && y * scale < hi * den {
                return Some(k);
            }
        }
        None
    }

    #[test]
    fn single_map_matches_integer_orbits() {
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        for (lo, hi) in [(0u64, 32u64), (8, 24), (40, 44), (0, 1)] {
            let a = rset(q(lo as i64, 64), q(hi as i64, 64));
            for n in 0..255u64 {
                let o = FiberedOrbit::new(doubling.clone(), cyclic("1"), q(n as i64, 255));
                let got = first_return_time(&o, &a, 64, Semantics::Hitting).unwrap().value();
                assert_eq!(got, doubling_return(n, 255, lo, hi, 64), "x={n}/255 A=[{lo},{hi})/64");
            }
        }
    }

    proptest! {
        #[test]
        fn ball_return_monotone_in_delta(xn in 0i64..997, d1 in 1u64..400, d2 in 1u64..400) {
            let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
            let (small, large) = (d1.min(d2), d1.max(d2));
            let x = q(xn, 997);
            let t_small = action_ball_return_time(&sys, &x, &q(small as i64, 1000), 60).unwrap().raw();
            let t_large = action_ball_return_time(&sys, &x, &q(large as i64, 1000), 60).unwrap().raw();
            prop_assert!(t_small >= t_large);
            let stream = SymbolStream::sampled(BernoulliWalk::uniform(2).unwrap(), xn as u64, 0);
            let f_small = set_return_time(&sys, &stream, &ball(&x, &q(small as i64, 1000)).unwrap().to_set(), 60).unwrap().raw();
            let f_large = set_return_time(&sys, &stream, &ball(&x, &q(large as i64, 1000)).unwrap().to_set(), 60).unwrap().raw();
            prop_assert!(f_small >= f_large);
        }

        #[test]
        fn bfs_is_min_over_words(xn in 0i64..1000, dn in 1i64..60, k in 1usize..10) {
            // T^S over words of length ≤ k equals the minimum of T^ω over all
            // cyclic words of length k (which enumerate every prefix).
            let sys = SemigroupSystem::linear(&[2, 3]).unwrap();
            let a = ball(&q(xn, 1000), &q(dn, 1000)).unwrap().to_set();
            let bfs = action_set_return_time(&sys, &a, k as u64, 1 << 16).unwrap();
            let mut best = ReturnTime::Censored(k as u64);
            for code in 0..(1u32 << k) {
                let w = Word::new((0..k).map(|i| 1 + ((code >> i) & 1) as usize).collect());
                let t = set_return_time(&sys, &SymbolStream::cyclic(w).unwrap(), &a, k as u64).unwrap();
                if let (ReturnTime::Returned(x), ReturnTime::Censored(_)) | (ReturnTime::Returned(x), ReturnTime::Returned(_)) = (t, best) {
                    if best.is_censored() || x < best.raw() {
                        best = ReturnTime::Returned(x);
                    }
                }
            }
            prop_assert_eq!(bfs, best);
        }
    }
}
