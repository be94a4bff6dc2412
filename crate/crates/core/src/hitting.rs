//! Hitting frequencies of fibred orbits and periodic-orbit maximizing measures.
//!
//! Frequencies are kept as exact fractions `hits / window`. Target sets are
//! closed: a point on the boundary of `A` counts as a visit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::circle::{Arc, ArcSet, Coord};
use crate::error::{LabError, Result};
use crate::maps::{Chart, GeneratorMap, PeriodicPoint, SemigroupSystem, Word};
use crate::orbit::{FiberedOrbit, TailOrbit};
use crate::symbols::{keyed_rng, unit_f64, WalkLaw};

/// `hits / window` as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frequency {
    pub hits: u64,
    pub window: u64,
}

impl Frequency {
    pub fn new(hits: u64, window: u64) -> Self {
        let g = gcd(hits, window).max(1);
        Frequency {
            hits: hits / g,
            window: window / g,
        }
    }

    pub fn zero() -> Self {
        Frequency { hits: 0, window: 1 }
    }

    pub fn value(self) -> f64 {
        self.hits as f64 / self.window as f64
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.hits), BigInt::from(self.window))
    }
}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.hits as u128 * other.window as u128).cmp(&(other.hits as u128 * self.window as u128))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Limsup proxy for `γ_{ω,x}(A)` from one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HittingFrequency {
    pub frequency: Frequency,
    /// Iterates inspected.
    pub window: u64,
    pub trajectory: u64,
    /// Whether an exact cycle of the orbit was found.
    pub periodic: bool,
}

impl HittingFrequency {
    pub fn value(&self) -> f64 {
        self.frequency.value()
    }
}

/// Frequency of visits to the closed set `a` among `x, f_ω x, …, f_ω^{n-1} x`.
///
/// For an exact orbit along a cyclic ω the state `(phase, x)` is tracked with
/// Brent's cycle search; once a cycle closes within `n` steps the limsup is the
/// visit fraction over the cycle. Otherwise the value is the largest visit
/// fraction over the windows `n, n/2, n/4, n/8`.
pub fn hitting_frequency<S: Coord>(
    orbit: &FiberedOrbit<S>,
    a: &ArcSet<S>,
    n: u64,
    trajectory: u64,
) -> Result<HittingFrequency> {
    if n == 0 {
        return Err(LabError::InvalidParameter("hitting window must be positive".into()));
    }
    if S::is_exact() {
        if let Some(period) = orbit.stream().cycle().map(Word::len) {
            if let Some(f) = cycle_frequency(orbit, a, n, period as u64)? {
                return Ok(HittingFrequency {
                    frequency: f,
                    window: n,
                    trajectory,
                    periodic: true,
                });
            }
        }
    }
    let windows: Vec<u64> = (0..4).map(|j| n >> j).filter(|&w| w > 0).collect();
    let mut o = orbit.clone();
    let mut hits = 0u64;
    let mut best = Frequency::zero();
    let mut x = o.current().clone();
    for i in 1..=n {
        if a.contains_closed(&x) {
            hits += 1;
        }
        if windows.contains(&i) {
            best = best.max(Frequency::new(hits, i));
        }
        if i < n {
            x = o.step()?.clone();
        }
    }
    Ok(HittingFrequency {
        frequency: best,
        window: n,
        trajectory,
        periodic: false,
    })
}

fn cycle_frequency<S: Coord>(orbit: &FiberedOrbit<S>, a: &ArcSet<S>, n: u64, period: u64) -> Result<Option<Frequency>> {
    let phase0 = orbit.stream().position() % period;
    let mut tortoise = (phase0, orbit.current().clone());
    let mut hare_orbit = orbit.clone();
    let mut hare = (phase0, orbit.current().clone());
    let advance = |o: &mut FiberedOrbit<S>, s: &mut (u64, S)| -> Result<()> {
        s.1 = o.step()?.clone();
        s.0 = (s.0 + 1) % period;
        Ok(())
    };
    advance(&mut hare_orbit, &mut hare)?;
    let (mut power, mut lam, mut steps) = (1u64, 1u64, 1u64);
    while tortoise != hare {
        if steps >= n {
            return Ok(None);
        }
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        advance(&mut hare_orbit, &mut hare)?;
        lam += 1;
        steps += 1;
    }
    let mut hits = 0;
    for _ in 0..lam {
        if a.contains_closed(&hare.1) {
            hits += 1;
        }
        advance(&mut hare_orbit, &mut hare)?;
    }
    Ok(Some(Frequency::new(hits, lam)))
}

/// Closed target set in both float and exact form.
#[derive(Debug, Clone)]
pub struct Target {
    float: ArcSet<f64>,
    exact: ArcSet<BigRational>,
}

impl Target {
    pub fn new(set: ArcSet<f64>) -> Self {
        Target {
            exact: set.map_coord(),
            float: set,
        }
    }

    pub fn float(&self) -> &ArcSet<f64> {
        &self.float
    }

    /// Exact for identity-chart points; logistic points are compared in `f64`.
    pub fn contains(&self, point: &PeriodicPoint) -> bool {
        match point.chart {
            Chart::Identity => self.exact.contains_closed(point.coord.value()),
            Chart::SineSquared => self.float.contains_closed(&point.position()),
        }
    }
}

/// Uniform measure on the orbit of `(w^∞, x0)` under the skew product.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbitMeasure {
    word: Word,
    atoms: Vec<PeriodicPoint>,
}

impl PeriodicOrbitMeasure {
    /// Fails unless `word_eval(w, x0) = x0` exactly.
    pub fn new(system: &SemigroupSystem, word: Word, base: PeriodicPoint) -> Result<Self> {
        if word.is_empty() {
            return Err(LabError::InvalidParameter("periodic orbit of the empty word".into()));
        }
        let mut atoms = Vec::with_capacity(word.len());
        let mut x = base.clone();
        for &s in word.symbols() {
            atoms.push(x.clone());
            x = step_point(system, &x, s)?;
        }
        if x != base {
            return Err(LabError::InvalidParameter(format!("{} is not fixed by {word}", label(&base))));
        }
        Ok(PeriodicOrbitMeasure { word, atoms })
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn period(&self) -> usize {
        self.atoms.len()
    }

    /// `atoms()[j] = f^j(x0)`, each carrying mass `1/period`.
    pub fn atoms(&self) -> &[PeriodicPoint] {
        &self.atoms
    }

    pub fn mass(&self, target: &Target) -> Frequency {
        let hits = self.atoms.iter().filter(|x| target.contains(x)).count();
        Frequency::new(hits as u64, self.atoms.len() as u64)
    }

    /// Pushing each atom forward one step of the skew product lands on the next atom.
    pub fn is_invariant(&self, system: &SemigroupSystem) -> bool {
        let m = self.atoms.len();
        (0..m).all(|j| {
            step_point(system, &self.atoms[j], self.word.symbols()[j]).ok().as_ref() == Some(&self.atoms[(j + 1) % m])
        })
    }
}

fn step_point(system: &SemigroupSystem, x: &PeriodicPoint, s: usize) -> Result<PeriodicPoint> {
    let g = system.generator(s)?;
    x.step(g).ok_or_else(|| LabError::UnsupportedGenerator {
        operation: "periodic orbit stepping across charts",
        generator: format!("{g}"),
    })
}

/// `"2/5"` or `"sin^2(pi*1/5)"`.
pub fn label(point: &PeriodicPoint) -> String {
    match point.chart {
        Chart::Identity => format!("{}", point.coord),
        Chart::SineSquared => format!("sin^2(pi*{})", point.coord),
    }
}

/// Nearest fraction with denominator at most `10^6` (Stern–Brocot descent).
pub fn approx_fraction(x: f64) -> (u64, u64) {
    let (mut lo, mut hi) = ((0u64, 1u64), (1u64, 0u64));
    let whole = libm::floor(x) as u64;
    let frac = x - whole as f64;
    let mut best = (0u64, 1u64);
    for _ in 0..10_000 {
        let mid = (lo.0 + hi.0, lo.1 + hi.1);
        if mid.1 > 1_000_000 {
            break;
        }
        let v = mid.0 as f64 / mid.1 as f64;
        best = mid;
        if libm::fabs(v - frac) < 1e-13 {
            break;
        }
        if v < frac {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let candidates = [lo, hi, best];
    let (n, d) = candidates
        .into_iter()
        .filter(|c| c.1 > 0)
        .min_by(|a, b| {
            let ea = libm::fabs(a.0 as f64 / a.1 as f64 - frac);
            let eb = libm::fabs(b.0 as f64 / b.1 as f64 - frac);
            ea.total_cmp(&eb)
        })
        .unwrap_or((0, 1));
    (n + whole * d, d)
}

/// The cyclic components `(weight, word)` of a law supported on periodic sequences.
pub fn periodic_components(law: &WalkLaw) -> Result<Vec<(BigRational, Word)>> {
    let parts: Vec<(f64, Word)> = match law {
        WalkLaw::Cyclic(w) => alloc::vec![(1.0, w.clone())],
        WalkLaw::Mixture(parts) => parts.clone(),
        WalkLaw::Bernoulli(b) if b.p() == 1 => alloc::vec![(1.0, Word::new(alloc::vec![1]))],
        WalkLaw::Bernoulli(_) => {
            return Err(LabError::InvalidWalk(
                "periodic-orbit measures cannot project to a non-degenerate Bernoulli walk".into(),
            ))
        }
    };
    Ok(parts
        .into_iter()
        .map(|(w, word)| {
            let (n, d) = approx_fraction(w);
            (BigRational::new(BigInt::from(n), BigInt::from(d)), word)
        })
        .collect())
}

/// Best periodic orbit measure for one component word.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentWitness {
    pub weight: BigRational,
    pub component: Word,
    pub best: Frequency,
    /// All maximizing orbits found, first by word length then by base point.
    pub witnesses: Vec<PeriodicOrbitMeasure>,
    /// Some period in range was skipped for exceeding the point budget.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaReport {
    /// `Σ_c weight_c · best_c`.
    pub value: BigRational,
    pub components: Vec<ComponentWitness>,
    pub lower_bound_only: bool,
}

impl AlphaReport {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    /// Marginal on the circle of the witness measure: `(label, position, weight)`.
    pub fn marginal(&self) -> Vec<(String, f64, f64)> {
        let mut atoms = Vec::new();
        for c in &self.components {
            if let Some(w) = c.witnesses.first() {
                let weight = c.weight.to_f64().unwrap_or(f64::NAN) / w.period() as f64;
                for x in w.atoms() {
                    atoms.push((label(x), x.position(), weight));
                }
            }
        }
        atoms
    }
}

/// Default limit on periodic points examined per word.
pub const PERIODIC_BUDGET: u64 = 1 << 24;

/// `α_P(A)` over convex combinations of periodic-orbit measures whose
/// σ-marginal is `P`: for each cyclic component `c` the best orbit of a
/// power `c^r` with `|c^r| ≤ L`.
pub fn alpha_p_periodic(system: &SemigroupSystem, law: &WalkLaw, a: &ArcSet<f64>, l_max: usize) -> Result<AlphaReport> {
    let target = Target::new(a.clone());
    let mut components = Vec::new();
    let mut value = BigRational::zero();
    for (weight, c) in periodic_components(law)? {
        system.validate_word(&c)?;
        let mut best = Frequency::zero();
        let mut witnesses: Vec<PeriodicOrbitMeasure> = Vec::new();
        let mut truncated = false;
        for r in 1..=l_max / c.len().max(1) {
            let word = c.repeat(r);
            let points = match system.periodic_points_within(&word, PERIODIC_BUDGET) {
                Ok(p) => p,
                Err(LabError::BudgetExceeded(_)) => {
                    truncated = true;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for x in points {
                let mu = PeriodicOrbitMeasure::new(system, word.clone(), x)?;
                let m = mu.mass(&target);
                match m.cmp(&best) {
                    Ordering::Greater => {
                        best = m;
                        witnesses = alloc::vec![mu];
                    }
                    Ordering::Equal if witnesses.len() < 8 => witnesses.push(mu),
                    _ => {}
                }
            }
        }
        value += weight.clone() * best.to_rational();
        components.push(ComponentWitness {
            weight,
            component: c,
            best,
            witnesses,
            truncated,
        });
    }
    let lower_bound_only = components.iter().any(|c| c.truncated);
    Ok(AlphaReport {
        value,
        components,
        lower_bound_only,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaConfig {
    /// ω samples drawn from the law.
    pub m_omega: u64,
    /// Starting points `k/grid`, `k < grid`, per ω.
    pub grid: u64,
    /// Lebesgue-random starting points per ω.
    pub typical: u64,
    /// Orbit length for grid and random starts.
    pub window: u64,
    /// Longest periodic word searched.
    pub l_max: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    pub best: Frequency,
    /// Where the maximum was first attained.
    pub source: String,
    pub trajectories: u64,
}

impl GammaReport {
    pub fn value(&self) -> f64 {
        self.best.value()
    }
}

/// Lower-bound estimator of `γ_P(A)`: the largest hitting frequency over sampled ω
/// times (grid ∪ random points), plus every periodic orbit of the law's cyclic
/// components up to length `L`.
pub fn gamma_p_estimate(system: &SemigroupSystem, law: &WalkLaw, a: &ArcSet<f64>, cfg: &GammaConfig) -> Result<GammaReport> {
    let mut best = Frequency::zero();
    let mut source = String::from("none");
    let mut trajectories = 0u64;
    let mut consider = |f: Frequency, what: &dyn Fn() -> String| {
        if f > best {
            best = f;
            source = what();
        }
    };
    let linear = system.all_linear();
    let fixed = crate::orbit::FixedSet::from_set(a);
    for i in 0..cfg.m_omega {
        let omega = law.sample_stream(cfg.seed, i);
        for k in 0..cfg.grid {
            let x = k as f64 / cfg.grid as f64;
            let o = FiberedOrbit::new(system.clone(), omega.clone(), x);
            let h = hitting_frequency(&o, a, cfg.window, trajectories)?;
            trajectories += 1;
            consider(h.frequency, &|| format!("grid x={x} omega#{i}"));
        }
        for t in 0..cfg.typical {
            let id = i * cfg.typical + t;
            let f = if linear {
                let mut orbit = TailOrbit::sample(system, omega.clone(), None, cfg.seed, id)?;
                tail_hitting(&mut orbit, &fixed, cfg.window)?
            } else {
                let x = unit_f64(rand::RngCore::next_u64(&mut keyed_rng(cfg.seed, id, crate::symbols::domain::POINTS)));
                let o = FiberedOrbit::new(system.clone(), omega.clone(), x);
                hitting_frequency(&o, a, cfg.window, trajectories)?.frequency
            };
            trajectories += 1;
            consider(f, &|| format!("random point #{id} omega#{i}"));
        }
    }
    if !matches!(law, WalkLaw::Bernoulli(b) if b.p() > 1) {
        let alpha = alpha_p_periodic(system, law, a, cfg.l_max)?;
        for c in &alpha.components {
            trajectories += 1;
            if let Some(w) = c.witnesses.first() {
                consider(c.best, &|| format!("periodic {} under {}", label(&w.atoms()[0]), w.word()));
            }
        }
    }
    Ok(GammaReport {
        best,
        source,
        trajectories,
    })
}

fn tail_hitting(orbit: &mut TailOrbit, set: &crate::orbit::FixedSet, n: u64) -> Result<Frequency> {
    let windows: Vec<u64> = (0..4).map(|j| n >> j).filter(|&w| w > 0).collect();
    let mut hits = 0;
    let mut best = Frequency::zero();
    let mut w = orbit.bits();
    for i in 1..=n {
        if set.contains(w) {
            hits += 1;
        }
        if windows.contains(&i) {
            best = best.max(Frequency::new(hits, i));
        }
        if i < n {
            w = orbit.step()?;
        }
    }
    Ok(best)
}

/// ℓ-ranges for which `A_ℓ` has maximal hitting frequency `1/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JenkinsonWindow {
    pub n: u32,
    pub doubling: (f64, f64),
    pub logistic: (f64, f64),
    pub intersection: Option<(f64, f64)>,
}

pub fn jenkinson_window(n: u32) -> Result<JenkinsonWindow> {
    if n == 0 || n > 60 {
        return Err(LabError::InvalidParameter(format!("window index {n} outside 1..=60")));
    }
    let p = libm::ldexp(1.0, n as i32);
    let half_p = p / 2.0;
    let pi = core::f64::consts::PI;
    let doubling = (1.0 / (p + 1.0), 1.0 / (half_p + 1.0));
    let logistic = (libm::sin(pi / (2.0 * (p + 1.0))), libm::sin(pi / (2.0 * (half_p + 1.0))));
    let lo = doubling.0.max(logistic.0);
    let hi = doubling.1.min(logistic.1);
    Ok(JenkinsonWindow {
        n,
        doubling,
        logistic,
        intersection: (lo < hi).then_some((lo, hi)),
    })
}

/// `A_ℓ = [(1-ℓ)/2, (1+ℓ)/2]`, stored half-open and read as closed.
pub fn centered_set(ell: f64) -> ArcSet<f64> {
    Arc::from_bounds((1.0 - ell) / 2.0, (1.0 + ell) / 2.0).to_set()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingReport {
    pub window: JenkinsonWindow,
    pub ell: Option<f64>,
    /// Set when no admissible ℓ exists.
    pub notice: Option<String>,
    pub gamma: Option<GammaReport>,
    pub alpha: Option<AlphaReport>,
    pub target: f64,
    pub tolerance: f64,
}

impl HittingReport {
    pub fn passes(&self) -> bool {
        match (&self.gamma, &self.alpha) {
            (Some(g), Some(a)) => {
                let (g, a) = (g.value(), a.value_f64());
                libm::fabs(g - a) <= self.tolerance
                    && libm::fabs(a - self.target) <= self.tolerance
                    && libm::fabs(g - self.target) <= self.tolerance
            }
            _ => false,
        }
    }
}

/// Admissible ℓ-range for the generators used by the law's components.
pub fn admissible_range(system: &SemigroupSystem, law: &WalkLaw, window: &JenkinsonWindow) -> Result<Option<(f64, f64)>> {
    let mut range = (0.0f64, 1.0f64);
    for (_, c) in periodic_components(law)? {
        for &s in c.symbols() {
            let r = match system.generator(s)? {
                GeneratorMap::Logistic => window.logistic,
                GeneratorMap::LinearExpanding { degree: 2 } => window.doubling,
                g => {
                    return Err(LabError::UnsupportedGenerator {
                        operation: "hitting windows",
                        generator: format!("{g}"),
                    })
                }
            };
            range = (range.0.max(r.0), range.1.min(r.1));
        }
    }
    Ok((range.0 < range.1).then_some(range))
}

/// Compares `γ_P(A_ℓ)` and `α_P(A_ℓ)` with `1/n`. Without `ell` the midpoint of the
/// admissible range is used; an empty range yields a report with a notice.
pub fn hitting_equality_check(
    system: &SemigroupSystem,
    law: &WalkLaw,
    n: u32,
    ell: Option<f64>,
    cfg: &GammaConfig,
    tolerance: f64,
) -> Result<HittingReport> {
    let window = jenkinson_window(n)?;
    let range = admissible_range(system, law, &window)?;
    let target = 1.0 / n as f64;
    let ell = match (ell, range) {
        (Some(l), Some((lo, hi))) if lo <= l && l < hi => l,
        (Some(l), _) => {
            return Err(LabError::InvalidParameter(format!("ℓ = {l} lies outside the admissible window for n = {n}")))
        }
        (None, Some((lo, hi))) => (lo + hi) / 2.0,
        (None, None) => {
            return Ok(HittingReport {
                window,
                ell: None,
                notice: Some(format!("empty window intersection for n = {n}; skipped")),
                gamma: None,
                alpha: None,
                target,
                tolerance,
            })
        }
    };
    let a = centered_set(ell);
    let alpha = alpha_p_periodic(system, law, &a, cfg.l_max)?;
    let gamma = gamma_p_estimate(system, law, &a, cfg)?;
    Ok(HittingReport {
        window,
        ell: Some(ell),
        notice: None,
        gamma: Some(gamma),
        alpha: Some(alpha),
        target,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::SymbolStream;
    use proptest::prelude::*;

    fn q(n: i64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn doubling() -> SemigroupSystem {
        SemigroupSystem::linear(&[2]).unwrap()
    }

    fn mixed() -> SemigroupSystem {
        SemigroupSystem::parse("logistic,linear:2").unwrap()
    }

    fn cyclic(s: &str) -> SymbolStream {
        SymbolStream::cyclic(Word::parse(s).unwrap()).unwrap()
    }

    fn small_cfg(l_max: usize) -> GammaConfig {
        GammaConfig {
            m_omega: 4,
            grid: 64,
            typical: 16,
            window: 1024,
            l_max,
            seed: 5,
        }
    }

    #[test]
    fn frequency_examples() {
        let o = FiberedOrbit::new(doubling(), cyclic("1"), q(1, 3));
        let full: ArcSet<BigRational> = ArcSet::full();
        assert_eq!(hitting_frequency(&o, &full, 64, 0).unwrap().value(), 1.0);
        assert_eq!(hitting_frequency(&o, &ArcSet::empty(), 64, 0).unwrap().value(), 0.0);
        let a = ArcSet::from_pieces([(q(3, 5), q(7, 10))]);
        let h = hitting_frequency(&o, &a, 64, 0).unwrap();
        assert!(h.periodic);
        assert_eq!(h.frequency, Frequency::new(1, 2));
    }

    #[test]
    fn preperiodic_orbits_use_the_cycle() {
        // 1/6 -> 1/3 -> 2/3 -> 1/3 ...
        let o = FiberedOrbit::new(doubling(), cyclic("1"), q(1, 6));
        let a = ArcSet::from_pieces([(q(0, 1), q(1, 5))]);
        let h = hitting_frequency(&o, &a, 64, 0).unwrap();
        assert_eq!(h.frequency, Frequency::zero());
    }

    #[test]
    fn window_examples() {
        let w = jenkinson_window(2).unwrap();
        assert!((w.doubling.0 - 0.2).abs() < 1e-15 && (w.doubling.1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((w.logistic.0 - 0.3090).abs() < 1e-4 && (w.logistic.1 - 0.5).abs() < 1e-12);
        let (lo, hi) = w.intersection.unwrap();
        assert!((lo - 0.3090).abs() < 1e-4 && (hi - 1.0 / 3.0).abs() < 1e-15);
        let w1 = jenkinson_window(1).unwrap();
        assert!((w1.doubling.0 - 1.0 / 3.0).abs() < 1e-15 && w1.doubling.1 == 0.5);
        for n in 1..20 {
            let (a, b) = (jenkinson_window(n).unwrap(), jenkinson_window(n + 1).unwrap());
            assert!(b.doubling.1 <= a.doubling.1 && b.logistic.1 <= a.logistic.1);
            assert!(b.doubling.0 < a.doubling.0);
        }
    }

    #[test]
    fn alpha_doubling_windows() {
        let law = WalkLaw::Cyclic(Word::parse("1").unwrap());
        let rep = alpha_p_periodic(&doubling(), &law, &centered_set(0.25), 12).unwrap();
        assert_eq!(rep.value, q(1, 2));
        let rep = alpha_p_periodic(&doubling(), &law, &centered_set(0.15), 12).unwrap();
        assert_eq!(rep.value, q(1, 3));
        let w = &rep.components[0].witnesses[0];
        assert_eq!(6 % w.period(), 0);
        let rep = alpha_p_periodic(&doubling(), &law, &ArcSet::full(), 4).unwrap();
        assert_eq!(rep.value, q(1, 1));
    }

    #[test]
    fn mixture_example_reaches_one_half() {
        let law = WalkLaw::parse("mixture:1/3@1,2/3@2").unwrap();
        let cfg = small_cfg(12);
        let rep = hitting_equality_check(&mixed(), &law, 2, Some(0.32), &cfg, 0.0).unwrap();
        assert_eq!(rep.alpha.as_ref().unwrap().value, q(1, 2));
        assert_eq!(rep.gamma.as_ref().unwrap().best, Frequency::new(1, 2));
        assert!(rep.passes());
        let mass: f64 = rep.alpha.unwrap().marginal().iter().map(|a| a.2).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn witnesses_are_invariant() {
        let law = WalkLaw::parse("mixture:1/3@1,2/3@2").unwrap();
        let rep = alpha_p_periodic(&mixed(), &law, &centered_set(0.32), 8).unwrap();
        for c in &rep.components {
            for w in &c.witnesses {
                assert!(w.is_invariant(&mixed()));
            }
        }
    }

    #[test]
    fn bernoulli_has_no_periodic_marginal() {
        let law = WalkLaw::parse("bernoulli:0.5,0.5").unwrap();
        assert!(alpha_p_periodic(&mixed(), &law, &centered_set(0.3), 4).is_err());
    }

    #[test]
    fn fixed_point_gives_full_frequency() {
        let law = WalkLaw::Cyclic(Word::parse("1").unwrap());
        let a = ArcSet::from_pieces([(0.0, 0.05)]);
        let g = gamma_p_estimate(&doubling(), &law, &a, &small_cfg(6)).unwrap();
        assert_eq!(g.value(), 1.0);
    }

    #[test]
    fn typical_orbits_see_lebesgue_mass() {
        let law = WalkLaw::Cyclic(Word::parse("1").unwrap());
        let a = ArcSet::from_pieces([(0.5, 0.51)]);
        let cfg = GammaConfig {
            m_omega: 1,
            grid: 0,
            typical: 8,
            window: 1 << 16,
            l_max: 1,
            seed: 2,
        };
        assert!(gamma_p_estimate(&doubling(), &law, &a, &cfg).unwrap().value() >= 0.01);
    }

    #[test]
    fn fractions() {
        assert_eq!(approx_fraction(1.0 / 3.0), (1, 3));
        assert_eq!(approx_fraction(2.0 / 3.0), (2, 3));
        assert_eq!(approx_fraction(0.25), (1, 4));
        assert_eq!(approx_fraction(1.0), (1, 1));
    }

    proptest! {
        #[test]
        fn alpha_below_gamma_and_monotone(l1 in 0.05f64..0.6, extra in 0.0f64..0.3) {
            let law = WalkLaw::parse("mixture:1/3@1,2/3@2").unwrap();
            let cfg = GammaConfig { m_omega: 2, grid: 16, typical: 2, window: 256, l_max: 6, seed: 1 };
            let small = centered_set(l1);
            let large = centered_set((l1 + extra).min(0.99));
            let a1 = alpha_p_periodic(&mixed(), &law, &small, 6).unwrap().value;
            let a2 = alpha_p_periodic(&mixed(), &law, &large, 6).unwrap().value;
            let g1 = gamma_p_estimate(&mixed(), &law, &small, &cfg).unwrap().best.to_rational();
            let g2 = gamma_p_estimate(&mixed(), &law, &large, &cfg).unwrap().best.to_rational();
            prop_assert!(a1 <= g1 && g1 <= q(1, 1));
            prop_assert!(a1 <= a2);
            prop_assert!(g1 <= g2);
        }
    }
}
