//! Partition joins along random words, metric entropy of the action,
//! closed-form entropies of linear families, and Lyapunov exponents.
//!
//! For linear maps `x -> kx mod 1` the composition along a word prefix of
//! length `j` is `x -> K_j x mod 1`, so the preimage of a cut `c` is the set
//! `{(c + m)/K_j : 0 ≤ m < K_j}`. Join cells are the arcs between consecutive
//! cut points. With all cuts of the form `c/q`, every cut of the n-th join lies on
//! the grid `(1/D)ℤ`, `D = q·K_{n-1}`, and the entropy is a function of the
//! gap lengths alone.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::circle::{Arc, ArcSet, Coord};
use crate::error::{LabError, Result};
use crate::maps::{SemigroupSystem, Symbol, Word};
use crate::stats::{least_squares, Running};
use crate::symbols::{BernoulliWalk, SymbolStream, WalkLaw};

/// Finite partition of the circle into arc unions.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePartition {
    cells: Vec<ArcSet<BigRational>>,
}

impl CirclePartition {
    /// Validates disjointness and total length 1.
    pub fn new(cells: Vec<ArcSet<BigRational>>) -> Result<Self> {
        let mut total = BigRational::zero();
        for (i, a) in cells.iter().enumerate() {
            total += a.lebesgue_length();
            for b in &cells[i + 1..] {
                if a.intersects(b) {
                    return Err(LabError::InvalidParameter("partition cells overlap".into()));
                }
            }
        }
        if total != BigRational::one() {
            return Err(LabError::InvalidParameter("partition cells do not cover the circle".into()));
        }
        Ok(CirclePartition { cells })
    }

    /// Cells are the arcs between consecutive cut points.
    pub fn from_cuts(mut cuts: Vec<BigRational>) -> Self {
        for c in cuts.iter_mut() {
            *c = c.frac();
        }
        cuts.sort();
        cuts.dedup();
        let cells = match cuts.len() {
            0 => alloc::vec![ArcSet::full()],
            1 => alloc::vec![Arc::new(cuts[0].clone(), BigRational::one()).to_set()],
            n => (0..n)
                .map(|i| {
                    let a = cuts[i].clone();
                    let b = if i + 1 < n { cuts[i + 1].clone() } else { cuts[0].clone() + BigRational::one() };
                    Arc::new(a.clone(), b - a).to_set()
                })
                .collect(),
        };
        CirclePartition { cells }
    }

    /// `q` equal arcs `[i/q, (i+1)/q)`; `q = 2` is the dyadic partition.
    pub fn equal(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(LabError::InvalidParameter("a partition needs at least one cell".into()));
        }
        Ok(Self::from_cuts((0..q).map(|i| BigRational::from_ratio(i as i64, q)).collect()))
    }

    pub fn dyadic() -> Self {
        Self::from_cuts(alloc::vec![BigRational::zero(), BigRational::from_ratio(1, 2)])
    }

    pub fn cells(&self) -> &[ArcSet<BigRational>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// All arc endpoints, reduced mod 1, sorted and deduplicated.
    pub fn cuts(&self) -> Vec<BigRational> {
        let mut cuts: Vec<BigRational> = self
            .cells
            .iter()
            .filter(|c| !c.is_full())
            .flat_map(|c| c.arcs())
            .flat_map(|a| [a.start().clone(), (a.start().clone() + a.length().clone()).frac()])
            .collect();
        cuts.sort();
        cuts.dedup();
        cuts
    }

    /// `-Σ |cell| log |cell|` under Lebesgue measure.
    pub fn entropy(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.lebesgue_length().as_f64())
            .filter(|&m| m > 0.0)
            .map(|m| -m * libm::log(m))
            .sum()
    }
}

fn prefix_degrees(system: &SemigroupSystem, prefix: &[Symbol]) -> Result<Vec<u64>> {
    let degrees = system.degrees("partition refinement")?;
    prefix
        .iter()
        .map(|&s| {
            degrees
                .get(s.wrapping_sub(1))
                .map(|&d| d as u64)
                .ok_or(LabError::UnknownGenerator { symbol: s, p: degrees.len() })
        })
        .collect()
}

/// `β ∨ g_{ω₁}^{-1}β ∨ … ∨ (g_{ω_{n-1}} ⋯ g_{ω₁})^{-1}β` with connected-arc cells.
pub fn refine_partition(
    system: &SemigroupSystem,
    prefix: &Word,
    beta: &CirclePartition,
    n: usize,
) -> Result<CirclePartition> {
    if n == 0 {
        return Err(LabError::InvalidParameter("join length must be at least 1".into()));
    }
    if prefix.len() + 1 < n {
        return Err(LabError::InvalidParameter("word prefix shorter than n - 1".into()));
    }
    let degrees = prefix_degrees(system, &prefix.symbols()[..n - 1])?;
    let base = beta.cuts();
    let mut cuts = base.clone();
    let mut k: u64 = 1;
    for d in degrees {
        k = k
            .checked_mul(d)
            .ok_or_else(|| LabError::BudgetExceeded("join too fine".into()))?;
        let kk = BigRational::from_integer(BigInt::from(k));
        for c in &base {
            for m in 0..k {
                cuts.push((c.clone() + BigRational::from_integer(BigInt::from(m))) / &kk);
            }
        }
    }
    Ok(CirclePartition::from_cuts(cuts))
}

/// Largest grid (in bits) the join-entropy bitset may allocate.
pub const MAX_GRID_BITS: u64 = 1 << 32;

/// `H(β₀ⁿ(ω))` for every `n` in `n_values` along the symbol prefix, via the cut grid.
pub fn join_entropies(
    system: &SemigroupSystem,
    prefix: &[Symbol],
    beta: &CirclePartition,
    n_values: &[usize],
) -> Result<Vec<f64>> {
    let n_top = n_values.iter().copied().max().unwrap_or(0);
    if n_values.contains(&0) {
        return Err(LabError::InvalidParameter("join length must be at least 1".into()));
    }
    if n_top == 0 {
        return Ok(Vec::new());
    }
    if prefix.len() + 1 < n_top {
        return Err(LabError::InvalidParameter("word prefix shorter than n - 1".into()));
    }
    let degrees = prefix_degrees(system, &prefix[..n_top - 1])?;
    let cuts = beta.cuts();
    if cuts.is_empty() {
        return Ok(alloc::vec![0.0; n_values.len()]);
    }
    let q = cuts
        .iter()
        .fold(BigInt::from(1u8), |acc, c| acc.lcm(c.denom()))
        .to_u64()
        .ok_or_else(|| LabError::BudgetExceeded("partition denominators too large".into()))?;
    let nums: Vec<u64> = cuts
        .iter()
        .map(|c| (c.numer() * BigInt::from(q) / c.denom()).to_u64().unwrap_or(0))
        .collect();
    let mut k_levels = alloc::vec![1u64];
    for d in &degrees {
        let next = k_levels.last().unwrap().checked_mul(*d);
        k_levels.push(next.ok_or_else(|| LabError::BudgetExceeded("join too fine".into()))?);
    }
    let k_top = *k_levels.last().unwrap();
    let grid = q
        .checked_mul(k_top)
        .filter(|&g| g <= MAX_GRID_BITS)
        .ok_or_else(|| LabError::BudgetExceeded(alloc::format!("join grid for n = {n_top} exceeds {MAX_GRID_BITS} points")))?;

    let mut bits = alloc::vec![0u64; grid.div_ceil(64) as usize];
    let mut out = alloc::vec![f64::NAN; n_values.len()];
    for (j, &k_j) in k_levels.iter().enumerate() {
        let stride = k_top / k_j;
        for &c in &nums {
            let mut pos = c * stride;
            for _ in 0..k_j {
                bits[(pos / 64) as usize] |= 1 << (pos % 64);
                pos += q * stride;
            }
        }
        let n = j + 1;
        if n_values.contains(&n) {
            let h = grid_entropy(&bits, grid);
            for (slot, &nv) in out.iter_mut().zip(n_values) {
                if nv == n {
                    *slot = h;
                }
            }
        }
    }
    Ok(out)
}

/// Entropy of the partition of `(1/D)ℤ / ℤ` cut at the set bits.
fn grid_entropy(bits: &[u64], grid: u64) -> f64 {
    let mut first = None;
    let mut last = 0u64;
    let mut acc = 0.0;
    for (wi, &word) in bits.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let pos = wi as u64 * 64 + w.trailing_zeros() as u64;
            w &= w - 1;
            match first {
                None => first = Some(pos),
                Some(_) => {
                    let g = (pos - last) as f64;
                    acc += g * libm::log(g);
                }
            }
            last = pos;
        }
    }
    let Some(first) = first else { return 0.0 };
    let g = (first + grid - last) as f64;
    acc += g * libm::log(g);
    let d = grid as f64;
    libm::log(d) - acc / d
}

/// Per-n averages of `H(β₀ⁿ(ω))/n` and their extrapolation `n -> ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub n_grid: Vec<usize>,
    pub per_n: Vec<f64>,
    pub per_n_half_width: Vec<f64>,
    /// Intercept of the linear fit of the last three points against `1/n`.
    pub limit: f64,
    pub limit_half_width: f64,
    pub samples: usize,
}

fn extrapolate(n_grid: &[usize], values: &[f64]) -> f64 {
    let k = n_grid.len().min(3);
    let xs: Vec<f64> = n_grid[n_grid.len() - k..].iter().map(|&n| 1.0 / n as f64).collect();
    match least_squares(&xs, &values[values.len() - k..]) {
        Some(fit) => fit.intercept,
        None => values.last().copied().unwrap_or(f64::NAN),
    }
}

impl EntropyReport {
    /// Builds the report from per-ω entropy rows `H(β₀ⁿ(ω))` aligned with `n_grid`.
    pub fn from_rows(n_grid: &[usize], rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || n_grid.is_empty() {
            return Err(LabError::EstimateUndefined(0));
        }
        let mut per = alloc::vec![Running::new(); n_grid.len()];
        let mut lim = Running::new();
        for row in rows {
            let scaled: Vec<f64> = row.iter().zip(n_grid).map(|(h, &n)| h / n as f64).collect();
            for (r, v) in per.iter_mut().zip(&scaled) {
                r.push(*v);
            }
            lim.push(extrapolate(n_grid, &scaled));
        }
        Ok(EntropyReport {
            n_grid: n_grid.to_vec(),
            per_n: per.iter().map(Running::mean).collect(),
            per_n_half_width: per.iter().map(Running::half_width).collect(),
            limit: lim.mean(),
            limit_half_width: lim.half_width(),
            samples: rows.len(),
        })
    }
}

/// Serial metric-entropy estimate over ω streams `0..m_omega`.
pub fn metric_entropy_estimate(
    system: &SemigroupSystem,
    law: &WalkLaw,
    beta: &CirclePartition,
    n_grid: &[usize],
    m_omega: u64,
    seed: u64,
) -> Result<EntropyReport> {
    let rows = (0..m_omega)
        .map(|i| entropy_row(system, &law.sample_stream(seed, i), beta, n_grid))
        .collect::<Result<Vec<_>>>()?;
    EntropyReport::from_rows(n_grid, &rows)
}

/// Join entropies along one ω.
pub fn entropy_row(
    system: &SemigroupSystem,
    omega: &SymbolStream,
    beta: &CirclePartition,
    n_grid: &[usize],
) -> Result<Vec<f64>> {
    let n_top = n_grid.iter().copied().max().unwrap_or(1);
    let prefix = omega.peek_word(n_top.saturating_sub(1));
    join_entropies(system, prefix.symbols(), beta, n_grid)
}

/// Closed-form entropies of a linear family with degrees `d_i` under `P_a`.
///
/// `h_top_action` and `pressure` are the values quoted for linear expanding
/// families rather than quantities estimated here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEntropies {
    /// `h_top(F_G) = log Σ d_i`.
    pub h_top_skew: f64,
    /// `h_top(S) = log(Σ d_i / p)`.
    pub h_top_action: f64,
    /// Quenched pressure at zero potential, `Σ a_i log d_i`.
    pub pressure: f64,
    /// `h_P(σ) = -Σ a_i log a_i`.
    pub h_walk: f64,
    pub p: usize,
}

pub fn analytic_entropies(system: &SemigroupSystem, walk: &BernoulliWalk) -> Result<AnalyticEntropies> {
    let degrees = system.degrees("analytic entropies")?;
    if walk.p() != degrees.len() {
        return Err(LabError::InvalidWalk(alloc::format!(
            "walk has {} weights for {} generators",
            walk.p(),
            degrees.len()
        )));
    }
    let sum: f64 = degrees.iter().map(|&d| d as f64).sum();
    let p = degrees.len();
    Ok(AnalyticEntropies {
        h_top_skew: libm::log(sum),
        h_top_action: libm::log(sum / p as f64),
        pressure: walk
            .weights()
            .iter()
            .zip(&degrees)
            .map(|(a, &d)| a * libm::log(d as f64))
            .sum(),
        h_walk: walk.entropy(),
        p,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(label: &'static str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        InequalityCheck {
            label,
            lhs,
            rhs,
            holds: lhs <= rhs + tolerance,
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalReport {
    pub checks: Vec<InequalityCheck>,
    /// `h_top(S) - pressure`, reported for the symmetric walk only.
    pub strict_margin: Option<f64>,
}

impl VariationalReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Checks the estimated entropy against the closed-form upper bounds.
pub fn variational_check(
    analytic: &AnalyticEntropies,
    walk: &BernoulliWalk,
    estimate: f64,
    tolerance: f64,
) -> VariationalReport {
    let upper = analytic.h_top_action + libm::log(analytic.p as f64) - analytic.h_walk;
    let mut checks = alloc::vec![
        InequalityCheck::new("h_est <= pressure", estimate, analytic.pressure, tolerance),
        InequalityCheck::new("h_est <= h_top(S) + log p - h_P", estimate, upper, tolerance),
        InequalityCheck::new("pressure <= h_top(S) + log p - h_P", analytic.pressure, upper, 1e-12),
    ];
    let w = walk.weights();
    let symmetric = w.iter().all(|&a| libm::fabs(a - w[0]) < 1e-12);
    let strict_margin = symmetric.then(|| {
        checks.push(InequalityCheck::new(
            "pressure <= h_top(S)",
            analytic.pressure,
            analytic.h_top_action,
            1e-12,
        ));
        analytic.h_top_action - analytic.pressure
    });
    VariationalReport { checks, strict_margin }
}

/// Birkhoff average `(1/dim)(1/n) Σ_j log|det Dg_{ω_{j+1}}(f_ω^j x)|`; `None`
/// when the orbit meets a critical point.
pub fn lyapunov_sample(system: &SemigroupSystem, omega: &SymbolStream, x0: f64, n: u64, dim: u32) -> Result<Option<f64>> {
    if n == 0 || dim == 0 {
        return Err(LabError::InvalidParameter("Lyapunov estimate needs n ≥ 1 and dim ≥ 1".into()));
    }
    let mut cursor = omega.clone();
    let mut x = x0;
    let mut acc = 0.0;
    for _ in 0..n {
        let g = system.generator(cursor.next_symbol())?;
        match g.log_abs_derivative(x) {
            Ok(v) => acc += v,
            Err(LabError::SingularDerivative { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
        x = g.eval(&x);
    }
    Ok(Some(acc / n as f64 / dim as f64))
}

/// `(1/dim) Σ a_i log d_i` for linear families under a law with known symbol frequencies.
pub fn analytic_lyapunov(system: &SemigroupSystem, law: &WalkLaw, dim: u32) -> Option<f64> {
    let degrees = system.degrees("analytic Lyapunov exponent").ok()?;
    let freq = law.symbol_frequencies(degrees.len());
    // On the circle |det Dg| = |g'|; the 1/dim normalisation is kept symbolic.
    Some(
        freq.iter()
            .zip(&degrees)
            .map(|(a, &d)| a * libm::log(d as f64))
            .sum::<f64>()
            / dim as f64,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub std_error: f64,
    pub orbits: usize,
    pub dropped: usize,
    pub analytic: Option<f64>,
    pub dim: u32,
}

impl LyapunovEstimate {
    pub fn from_samples(samples: &[Option<f64>], analytic: Option<f64>, dim: u32) -> Result<Self> {
        let r: Running = samples.iter().flatten().copied().collect();
        if r.count() == 0 {
            return Err(LabError::EstimateUndefined(samples.len() as u64));
        }
        Ok(LyapunovEstimate {
            mean: r.mean(),
            half_width: r.half_width(),
            std_error: r.std_error(),
            orbits: r.count() as usize,
            dropped: samples.len() - r.count() as usize,
            analytic,
            dim,
        })
    }
}

/// Starting point of Lyapunov orbit `i`: uniform on `[0,1)`.
pub fn lyapunov_start(seed: u64, i: u64) -> f64 {
    use rand::RngCore;
    crate::symbols::unit_f64(crate::symbols::keyed_rng(seed, i, crate::symbols::domain::POINTS).next_u64())
}

pub fn lyapunov_estimate(
    system: &SemigroupSystem,
    law: &WalkLaw,
    n: u64,
    m: u64,
    seed: u64,
    dim: u32,
) -> Result<LyapunovEstimate> {
    let samples = (0..m)
        .map(|i| lyapunov_sample(system, &law.sample_stream(seed, i), lyapunov_start(seed, i), n, dim))
        .collect::<Result<Vec<_>>>()?;
    LyapunovEstimate::from_samples(&samples, analytic_lyapunov(system, law, dim), dim)
}

/// `-Σ_{|w|=n} P(w) log P(w)` by enumeration of cylinders.
pub fn cylinder_entropy(walk: &BernoulliWalk, n: usize) -> f64 {
    let mut probs = alloc::vec![1.0f64];
    for _ in 0..n {
        probs = probs
            .iter()
            .flat_map(|&p| walk.weights().iter().map(move |&a| p * a))
            .collect();
    }
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * libm::log(p)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbramovRokhlinReport {
    pub n_grid: Vec<usize>,
    /// `H_{P×ν}(cylinders × β, n) / n` by exact enumeration.
    pub lhs_per_n: Vec<f64>,
    pub lhs: f64,
    pub h_walk: f64,
    pub h_metric: f64,
    pub rhs: f64,
}

impl AbramovRokhlinReport {
    pub fn difference(&self) -> f64 {
        libm::fabs(self.lhs - self.rhs)
    }
}

/// Skew-product entropy for the product partition (length-`n` cylinders × join
/// of β along them), enumerated exactly over all words, against `h_P(σ) + h_metric`.
pub fn abramov_rokhlin_check(
    system: &SemigroupSystem,
    walk: &BernoulliWalk,
    beta: &CirclePartition,
    n_grid: &[usize],
    h_metric: f64,
) -> Result<AbramovRokhlinReport> {
    let p = system.p();
    if walk.p() != p {
        return Err(LabError::InvalidWalk("walk and system disagree on p".into()));
    }
    let n_top = n_grid.iter().copied().max().unwrap_or(1);
    let len = n_top.saturating_sub(1);
    let words = (p as u64)
        .checked_pow(len as u32)
        .filter(|&w| w <= 1 << 22)
        .ok_or_else(|| LabError::BudgetExceeded("too many words to enumerate".into()))?;
    let mut fiber = alloc::vec![0.0; n_grid.len()];
    let mut prefix = alloc::vec![1usize; len];
    for code in 0..words {
        let mut c = code;
        let mut prob = 1.0;
        for s in prefix.iter_mut() {
            *s = (c % p as u64) as usize + 1;
            c /= p as u64;
            prob *= walk.weights()[*s - 1];
        }
        let hs = join_entropies(system, &prefix, beta, n_grid)?;
        for (f, h) in fiber.iter_mut().zip(hs) {
            *f += prob * h;
        }
    }
    let lhs_per_n: Vec<f64> = n_grid
        .iter()
        .zip(&fiber)
        .map(|(&n, f)| (cylinder_entropy(walk, n) + f) / n as f64)
        .collect();
    let lhs = extrapolate(n_grid, &lhs_per_n);
    let h_walk = walk.entropy();
    Ok(AbramovRokhlinReport {
        n_grid: n_grid.to_vec(),
        lhs_per_n,
        lhs,
        h_walk,
        h_metric,
        rhs: h_walk + h_metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;
    use proptest::prelude::*;

    fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    fn two_three() -> SemigroupSystem {
        SemigroupSystem::linear(&[2, 3]).unwrap()
    }

    fn half() -> BernoulliWalk {
        BernoulliWalk::uniform(2).unwrap()
    }

    #[test]
    fn refinement_examples() {
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        let beta = CirclePartition::dyadic();
        let j = refine_partition(&doubling, &Word::parse("1").unwrap(), &beta, 2).unwrap();
        assert_eq!(j, CirclePartition::equal(4).unwrap());
        let j = refine_partition(&doubling, &Word::parse("").unwrap(), &beta, 1).unwrap();
        assert_eq!(j, beta);
        let j = refine_partition(&two_three(), &Word::parse("12").unwrap(), &beta, 3).unwrap();
        assert_eq!(j.len(), 12);
        assert!(j.cells().iter().all(|c| c.lebesgue_length() == BigRational::from_ratio(1, 12)));
        assert!(refine_partition(&SemigroupSystem::parse("logistic").unwrap(), &Word::parse("1").unwrap(), &beta, 2).is_err());
    }

    #[test]
    fn single_map_entropy_is_log_two() {
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        let law = WalkLaw::Cyclic(Word::parse("1").unwrap());
        let grid = [2, 4, 6, 8, 10];
        let rep = metric_entropy_estimate(&doubling, &law, &CirclePartition::dyadic(), &grid, 3, 1).unwrap();
        for (v, &n) in rep.per_n.iter().zip(&grid) {
            assert!((v * n as f64 - n as f64 * LN_2).abs() < 1e-9);
        }
        assert!((rep.limit - LN_2).abs() < 1e-9);
    }

    #[test]
    fn analytic_examples() {
        let a = analytic_entropies(&two_three(), &half()).unwrap();
        assert!((a.h_top_skew - ln(5.0)).abs() < 1e-15);
        assert!((a.h_top_action - ln(2.5)).abs() < 1e-15);
        assert!((a.pressure - (ln(2.0) + ln(3.0)) / 2.0).abs() < 1e-15);
        assert!((a.h_walk - LN_2).abs() < 1e-15);
        assert!((a.h_top_skew - (ln(2.0) + a.h_top_action)).abs() < 1e-14);

        let single = analytic_entropies(&SemigroupSystem::linear(&[2]).unwrap(), &BernoulliWalk::new(alloc::vec![1.0]).unwrap()).unwrap();
        assert_eq!((single.h_top_skew, single.h_top_action, single.pressure, single.h_walk), (LN_2, LN_2, LN_2, 0.0));

        let twins = analytic_entropies(&SemigroupSystem::linear(&[2, 2]).unwrap(), &half()).unwrap();
        assert!((twins.h_top_skew - ln(4.0)).abs() < 1e-15);
        assert!((twins.h_top_action - LN_2).abs() < 1e-15);
    }

    #[test]
    fn variational_examples() {
        let a = analytic_entropies(&two_three(), &half()).unwrap();
        let rep = variational_check(&a, &half(), a.pressure, 0.0);
        assert!(rep.all_hold());
        assert!((rep.strict_margin.unwrap() - 0.0204).abs() < 1e-3);

        let skew = BernoulliWalk::new(alloc::vec![0.25, 0.75]).unwrap();
        let a = analytic_entropies(&two_three(), &skew).unwrap();
        assert!((a.pressure - 0.9972).abs() < 1e-4);
        let rep = variational_check(&a, &skew, a.pressure, 0.0);
        assert!(rep.all_hold() && rep.strict_margin.is_none());
        assert!((rep.checks[2].rhs - 1.047).abs() < 1e-3);
    }

    #[test]
    fn lyapunov_examples() {
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        let law = WalkLaw::Cyclic(Word::parse("1").unwrap());
        let est = lyapunov_estimate(&doubling, &law, 100, 10, 1, 1).unwrap();
        assert!((est.mean - LN_2).abs() < 1e-14);
        let skew = WalkLaw::Bernoulli(BernoulliWalk::new(alloc::vec![0.25, 0.75]).unwrap());
        let est = lyapunov_estimate(&two_three(), &skew, 1000, 200, 4, 1).unwrap();
        assert!((est.mean - 0.9972).abs() < 0.003);
        assert!((est.mean - est.analytic.unwrap()).abs() < 4.0 * est.std_error);
    }

    #[test]
    fn logistic_orbit_through_the_critical_point_is_dropped() {
        let sys = SemigroupSystem::parse("logistic").unwrap();
        let stream = SymbolStream::cyclic(Word::parse("1").unwrap()).unwrap();
        assert_eq!(lyapunov_sample(&sys, &stream, 0.5, 10, 1).unwrap(), None);
    }

    #[test]
    fn abramov_rokhlin_tight_case() {
        let twins = SemigroupSystem::linear(&[2, 2]).unwrap();
        let grid = [6, 7, 8];
        let rep = abramov_rokhlin_check(&twins, &half(), &CirclePartition::dyadic(), &grid, LN_2).unwrap();
        assert!((rep.lhs - ln(4.0)).abs() < 1e-9, "{}", rep.lhs);
        assert!(rep.difference() < 1e-9);
    }

    #[test]
    fn grid_budget_is_enforced() {
        let sys = SemigroupSystem::linear(&[1 << 20]).unwrap();
        let prefix = [1usize; 4];
        assert!(matches!(
            join_entropies(&sys, &prefix, &CirclePartition::dyadic(), &[5]),
            Err(LabError::BudgetExceeded(_))
        ));
    }

    proptest! {
        #[test]
        fn grid_entropy_matches_exact_cells(code in 0u32..64, len in 1usize..7, cut in 1i64..7) {
            let prefix: Vec<usize> = (0..len).map(|i| 1 + ((code >> i) & 1) as usize).collect();
            let beta = CirclePartition::from_cuts(alloc::vec![BigRational::zero(), BigRational::from_ratio(cut, 7)]);
            let n_values: Vec<usize> = (1..=len + 1).collect();
            let fast = join_entropies(&two_three(), &prefix, &beta, &n_values).unwrap();
            let word = Word::new(prefix.clone());
            let mut prev = 0.0;
            for (&n, h) in n_values.iter().zip(&fast) {
                let exact = refine_partition(&two_three(), &word, &beta, n).unwrap().entropy();
                prop_assert!((exact - h).abs() < 1e-9);
                prop_assert!(*h >= prev - 1e-12);
                prev = *h;
            }
        }

        #[test]
        fn dyadic_join_is_equal_cells(code in 0u32..4096, len in 0usize..12) {
            let prefix: Vec<usize> = (0..len).map(|i| 1 + ((code >> i) & 1) as usize).collect();
            let h = join_entropies(&two_three(), &prefix, &CirclePartition::dyadic(), &[len + 1]).unwrap()[0];
            let logs: f64 = prefix.iter().map(|&s| ln([2.0, 3.0][s - 1])).sum();
            prop_assert!((h - (LN_2 + logs)).abs() < 1e-9);
        }
    }
}
