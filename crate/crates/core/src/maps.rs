//! Generator maps of the semigroup and their compositions.
//!
//! Three families are supported: linear expanding maps `x -> kx mod 1`, the
//! logistic map `x -> 4x(1-x)` on `[0,1]`, and rational rotations
//! `x -> x + num/den mod 1`. Words are applied left to right: the first
//! symbol acts first, so `word_eval(u·v, x) = word_eval(v, word_eval(u, x))`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::circle::{Arc, ArcSet, Coord, RationalPoint};
use crate::error::{LabError, Result};

/// Generator label, 1-based.
pub type Symbol = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorMap {
    /// `x -> kx mod 1`, `k >= 2`.
    LinearExpanding { degree: u32 },
    /// `x -> 4x(1-x)`.
    Logistic,
    /// `x -> x + num/den mod 1` with `0 < num/den < 1`.
    Rotation { num: u64, den: u64 },
}

impl GeneratorMap {
    pub fn linear(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(LabError::ParseGenerator(format!("linear:{degree}")));
        }
        Ok(GeneratorMap::LinearExpanding { degree })
    }

    pub fn rotation(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num >= den {
            return Err(LabError::ParseGenerator(format!("rotation:{num}/{den}")));
        }
        let g = num_integer::gcd(num, den);
        Ok(GeneratorMap::Rotation {
            num: num / g,
            den: den / g,
        })
    }

    pub fn degree(&self) -> Option<u32> {
        match self {
            GeneratorMap::LinearExpanding { degree } => Some(*degree),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, GeneratorMap::LinearExpanding { .. })
    }

    pub fn eval<S: Coord>(&self, x: &S) -> S {
        match *self {
            GeneratorMap::LinearExpanding { degree } => x.mul_int(degree as u64).frac(),
            // 4·(1/2)·(1/2) = 1 is identified with 0, which is also where 1 goes.
            GeneratorMap::Logistic => x.mul(&S::unit().sub(x)).mul_int(4).frac(),
            GeneratorMap::Rotation { num, den } => x.add(&S::from_ratio(num as i64, den)).frac(),
        }
    }

    /// `log |g'(x)|`.
    pub fn log_abs_derivative(&self, x: f64) -> Result<f64> {
        match *self {
            GeneratorMap::LinearExpanding { degree } => Ok(libm::log(degree as f64)),
            GeneratorMap::Rotation { .. } => Ok(0.0),
            GeneratorMap::Logistic => {
                let d = libm::fabs(4.0 - 8.0 * x);
                if d == 0.0 {
                    Err(LabError::SingularDerivative { map: "logistic", x })
                } else {
                    Ok(libm::log(d))
                }
            }
        }
    }

    /// Forward image of an arc, as exact arcs.
    pub fn arc_image<S: Coord>(&self, arc: &Arc<S>) -> ArcSet<S> {
        match *self {
            GeneratorMap::LinearExpanding { degree } => {
                let len = arc.length().mul_int(degree as u64);
                if len >= S::unit() {
                    ArcSet::full()
                } else {
                    Arc::new(arc.start().mul_int(degree as u64), len).to_set()
                }
            }
            GeneratorMap::Rotation { .. } => {
                Arc::new(self.eval(arc.start()), arc.length().clone()).to_set()
            }
            GeneratorMap::Logistic => self.pieces_image(&arc.pieces()),
        }
    }

    pub fn set_image<S: Coord>(&self, set: &ArcSet<S>) -> ArcSet<S> {
        match self {
            GeneratorMap::Logistic => self.pieces_image(set.pieces()),
            _ => ArcSet::from_arcs(set.arcs().iter().flat_map(|a| self.arc_image(a).arcs())),
        }
    }

    /// Logistic image of `[lo, hi)` pieces, split at the critical point.
    fn pieces_image<S: Coord>(&self, pieces: &[(S, S)]) -> ArcSet<S> {
        let half = S::half();
        let f = |x: &S| x.mul(&S::unit().sub(x)).mul_int(4);
        let mut out = Vec::new();
        for (lo, hi) in pieces {
            if *lo < half {
                let top = S::min_of(hi, &half);
                out.push((f(lo), f(&top)));
            }
            if *hi > half {
                let bottom = S::max_of(lo, &half);
                out.push((f(hi), f(&bottom)));
            }
        }
        ArcSet::from_pieces(out)
    }
}

impl fmt::Display for GeneratorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorMap::LinearExpanding { degree } => write!(f, "linear:{degree}"),
            GeneratorMap::Logistic => write!(f, "logistic"),
            GeneratorMap::Rotation { num, den } => write!(f, "rotation:{num}/{den}"),
        }
    }
}

impl FromStr for GeneratorMap {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let spec = s.trim().to_ascii_lowercase();
        let bad = || LabError::ParseGenerator(s.to_string());
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (spec.as_str(), None),
        };
        match (kind, arg) {
            ("logistic", None) => Ok(GeneratorMap::Logistic),
            ("linear", Some(k)) => {
                let k: u32 = k.parse().map_err(|_| bad())?;
                GeneratorMap::linear(k).map_err(|_| bad())
            }
            ("rotation", Some(alpha)) => {
                let (n, d) = alpha.split_once('/').ok_or_else(bad)?;
                let n: u64 = n.trim().parse().map_err(|_| bad())?;
                let d: u64 = d.trim().parse().map_err(|_| bad())?;
                GeneratorMap::rotation(n, d).map_err(|_| bad())
            }
            _ => Err(bad()),
        }
    }
}

/// A finite word over `{1..p}`; the first symbol acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }

    /// Parses digit strings such as `"1212"` or comma lists such as `"1,2,10"`.
    pub fn parse(s: &str) -> Result<Word> {
        let t = s.trim();
        let bad = || LabError::ParseSymbols(s.to_string());
        let symbols: Vec<Symbol> = if t.contains(',') {
            t.split(',')
                .map(|x| x.trim().parse::<Symbol>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        } else {
            t.chars()
                .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        if symbols.contains(&0) {
            return Err(bad());
        }
        Ok(Word(symbols))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&s| s > 9);
        for (i, s) in self.0.iter().enumerate() {
            if wide && i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Ordered generator list; generator `i` carries label `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemigroupSystem {
    generators: Vec<GeneratorMap>,
}

impl SemigroupSystem {
    pub fn new(generators: Vec<GeneratorMap>) -> Result<Self> {
        if generators.is_empty() {
            return Err(LabError::InvalidParameter("a system needs at least one generator".into()));
        }
        Ok(SemigroupSystem { generators })
    }

    /// Linear expanding system with the given degrees.
    pub fn linear(degrees: &[u32]) -> Result<Self> {
        Self::new(degrees.iter().map(|&k| GeneratorMap::linear(k)).collect::<Result<_>>()?)
    }

    /// Parses a list like `"linear:2, linear:3"` (commas or semicolons).
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(
            s.split([',', ';'])
                .filter(|t| !t.trim().is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?,
        )
    }

    pub fn p(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[GeneratorMap] {
        &self.generators
    }

    pub fn generator(&self, symbol: Symbol) -> Result<&GeneratorMap> {
        symbol
            .checked_sub(1)
            .and_then(|i| self.generators.get(i))
            .ok_or(LabError::UnknownGenerator {
                symbol,
                p: self.p(),
            })
    }

    pub fn validate_word(&self, w: &Word) -> Result<()> {
        w.symbols().iter().try_for_each(|&s| self.generator(s).map(|_| ()))
    }

    pub fn all_linear(&self) -> bool {
        self.generators.iter().all(GeneratorMap::is_linear)
    }

    /// Degrees of a linear system, or an error naming the first offender.
    pub fn degrees(&self, operation: &'static str) -> Result<Vec<u32>> {
        self.generators
            .iter()
            .map(|g| {
                g.degree().ok_or_else(|| LabError::UnsupportedGenerator {
                    operation,
                    generator: g.to_string(),
                })
            })
            .collect()
    }

    pub fn word_eval<S: Coord>(&self, w: &Word, x: &S) -> Result<S> {
        let mut y = x.frac();
        for &s in w.symbols() {
            y = self.generator(s)?.eval(&y);
        }
        Ok(y)
    }

    /// Forward image of a set along a word.
    pub fn word_image<S: Coord>(&self, w: &Word, set: &ArcSet<S>) -> Result<ArcSet<S>> {
        let mut img = set.clone();
        for &s in w.symbols() {
            img = self.generator(s)?.set_image(&img);
        }
        Ok(img)
    }

    /// All solutions of `word_eval(w, x) = x`, listed in increasing position.
    pub fn periodic_points(&self, w: &Word) -> Result<Vec<PeriodicPoint>> {
        self.periodic_points_within(w, u64::MAX)
    }

    /// As [`Self::periodic_points`], refusing words with more than `budget` solutions.
    pub fn periodic_points_within(&self, w: &Word, budget: u64) -> Result<Vec<PeriodicPoint>> {
        if w.is_empty() {
            return Err(LabError::InvalidParameter("the empty word fixes every point".into()));
        }
        self.validate_word(w)?;
        let maps: Vec<GeneratorMap> = w.symbols().iter().map(|&s| self.generators[s - 1]).collect();
        if maps.iter().any(|g| matches!(g, GeneratorMap::Rotation { .. })) {
            return Err(LabError::NoFiniteFix);
        }
        let over = |count: u128| LabError::BudgetExceeded(format!("word {w} has {count} periodic points"));
        if maps.iter().all(GeneratorMap::is_linear) {
            let mut total: u128 = 1;
            for g in &maps {
                total = total
                    .checked_mul(g.degree().unwrap_or(1) as u128)
                    .filter(|&d| d <= u64::MAX as u128)
                    .ok_or_else(|| over(u128::MAX))?;
            }
            let count = total - 1;
            if count > budget as u128 {
                return Err(over(count));
            }
            let den = count as u64;
            return Ok((0..den)
                .map(|m| PeriodicPoint {
                    chart: Chart::Identity,
                    coord: RationalPoint::from_ratio(BigRational::new(BigInt::from(m), BigInt::from(den))),
                })
                .collect());
        }
        if maps.iter().all(|g| *g == GeneratorMap::Logistic) {
            return logistic_periodic_points(maps.len(), budget);
        }
        Err(LabError::UnsupportedGenerator {
            operation: "periodic points of mixed logistic/linear words",
            generator: "logistic".into(),
        })
    }
}

impl fmt::Display for SemigroupSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Coordinate chart of a periodic point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// The coordinate is the point itself.
    Identity,
    /// The point is `sin²(π y)` for the stored angle `y ∈ [0, 1/2]`; the
    /// logistic map acts on `y` as doubling followed by the fold `y -> min(y, 1-y)`.
    SineSquared,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicPoint {
    pub chart: Chart,
    pub coord: RationalPoint,
}

impl PeriodicPoint {
    pub fn position(&self) -> f64 {
        let y = self.coord.to_f64();
        match self.chart {
            Chart::Identity => y,
            Chart::SineSquared => {
                let s = libm::sin(core::f64::consts::PI * y);
                s * s
            }
        }
    }

    /// Exact image under one generator; `None` if the chart cannot follow it.
    pub fn step(&self, g: &GeneratorMap) -> Option<PeriodicPoint> {
        match (self.chart, g) {
            (Chart::Identity, GeneratorMap::Logistic) => None,
            (Chart::Identity, g) => Some(PeriodicPoint {
                chart: Chart::Identity,
                coord: RationalPoint::from_ratio(g.eval(self.coord.value())),
            }),
            (Chart::SineSquared, GeneratorMap::Logistic) => {
                let y = self.coord.value().mul_int(2).frac();
                let folded = BigRational::min_of(&y, &(BigRational::one() - &y));
                Some(PeriodicPoint {
                    chart: Chart::SineSquared,
                    coord: RationalPoint::from_ratio(folded),
                })
            }
            (Chart::SineSquared, _) => None,
        }
    }
}

/// Fixed points of the n-fold logistic map through `x = sin²(π y)`:
/// `2^n y ≡ ±y (mod 1)`, i.e. `y = m/(2^n - 1)` or `y = m/(2^n + 1)` with `y <= 1/2`.
fn logistic_periodic_points(n: usize, budget: u64) -> Result<Vec<PeriodicPoint>> {
    if n >= 63 || (1u64 << n) > budget {
        return Err(LabError::BudgetExceeded(format!("logistic^{n} has 2^{n} periodic points")));
    }
    let pow = 1u64 << n;
    let mut ys: Vec<BigRational> = Vec::with_capacity(pow as usize);
    for den in [pow - 1, pow + 1] {
        for m in 0..=den / 2 {
            ys.push(BigRational::new(BigInt::from(m), BigInt::from(den)));
        }
    }
    ys.sort();
    ys.dedup();
    Ok(ys
        .into_iter()
        .map(|y| PeriodicPoint {
            chart: Chart::SineSquared,
            coord: RationalPoint::from_ratio(y),
        })
        .collect())
}

/// Human-readable symbol string for a system, e.g. `"{2x,3x}"`.
pub fn describe(system: &SemigroupSystem) -> String {
    let parts: Vec<String> = system
        .generators()
        .iter()
        .map(|g| match g {
            GeneratorMap::LinearExpanding { degree } => format!("{degree}x"),
            other => other.to_string(),
        })
        .collect();
    format!("{{{}}}", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn two_three() -> SemigroupSystem {
        SemigroupSystem::linear(&[2, 3]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let doubling = GeneratorMap::linear(2).unwrap();
        assert!((doubling.eval(&0.7) - 0.4).abs() < 1e-15);
        assert_eq!(GeneratorMap::Logistic.eval(&0.75), 0.75);
        // sin²(π/3) maps to sin²(2π/3); both equal 3/4.
        let h = |y: f64| libm::sin(core::f64::consts::PI * y).powi(2);
        assert!((GeneratorMap::Logistic.eval(&h(1.0 / 3.0)) - h(2.0 / 3.0)).abs() < 1e-12);
        assert!((h(2.0 / 3.0) - 0.75).abs() < 1e-12);
        assert_eq!(GeneratorMap::Logistic.eval(&q(1, 2)), q(0, 1));
    }

    #[test]
    fn word_eval_examples() {
        let s = two_three();
        let w = Word::new(alloc::vec![1, 2]);
        assert!((s.word_eval(&w, &0.1).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(s.word_eval(&Word::default(), &0.37).unwrap(), 0.37);
        let w = Word::parse("1212").unwrap();
        assert_eq!(s.word_eval(&w, &q(1, 7)).unwrap(), q(1, 7));
        assert_eq!(
            s.word_eval(&Word::parse("13").unwrap(), &0.1),
            Err(LabError::UnknownGenerator { symbol: 3, p: 2 })
        );
    }

    #[test]
    fn derivative_examples() {
        let g3 = GeneratorMap::linear(3).unwrap();
        assert!((g3.log_abs_derivative(0.2).unwrap() - 1.0986).abs() < 1e-4);
        assert_eq!(GeneratorMap::rotation(3, 10).unwrap().log_abs_derivative(0.4).unwrap(), 0.0);
        assert!((GeneratorMap::Logistic.log_abs_derivative(0.0).unwrap() - libm::log(4.0)).abs() < 1e-15);
        assert!(matches!(
            GeneratorMap::Logistic.log_abs_derivative(0.5),
            Err(LabError::SingularDerivative { .. })
        ));
    }

    #[test]
    fn arc_image_examples() {
        let g3 = GeneratorMap::linear(3).unwrap();
        let img = g3.arc_image(&Arc::from_bounds(q(4, 5), q(9, 10)));
        assert_eq!(img.pieces(), &[(q(2, 5), q(7, 10))]);
        assert!(g3.arc_image(&Arc::new(q(1, 10), q(2, 5))).is_full());
        let img = GeneratorMap::Logistic.arc_image(&Arc::from_bounds(q(1, 5), q(3, 10)));
        assert_eq!(img.pieces(), &[(q(16, 25), q(21, 25))]);
        // A piece straddling 1/2 folds back onto itself.
        let img = GeneratorMap::Logistic.arc_image(&Arc::from_bounds(q(1, 4), q(3, 4)));
        assert_eq!(img.pieces(), &[(q(3, 4), q(1, 1))]);
        let rot = GeneratorMap::rotation(1, 4).unwrap();
        let img = rot.arc_image(&Arc::from_bounds(q(7, 8), q(1, 1)));
        assert_eq!(img.pieces(), &[(q(1, 8), q(1, 4))]);
    }

    #[test]
    fn periodic_point_examples() {
        let doubling = SemigroupSystem::linear(&[2]).unwrap();
        let coords = |pts: Vec<PeriodicPoint>| -> Vec<BigRational> {
            pts.into_iter().map(|p| p.coord.into_value()).collect()
        };
        assert_eq!(coords(doubling.periodic_points(&Word::parse("1").unwrap()).unwrap()), alloc::vec![q(0, 1)]);
        assert_eq!(
            coords(doubling.periodic_points(&Word::parse("11").unwrap()).unwrap()),
            alloc::vec![q(0, 1), q(1, 3), q(2, 3)]
        );
        assert_eq!(
            coords(two_three().periodic_points(&Word::parse("12").unwrap()).unwrap()),
            (0..5).map(|m| q(m, 5)).collect::<Vec<_>>()
        );
        let rot = SemigroupSystem::parse("linear:2, rotation:1/3").unwrap();
        assert_eq!(rot.periodic_points(&Word::parse("12").unwrap()), Err(LabError::NoFiniteFix));
    }

    #[test]
    fn logistic_periodic_points_are_fixed() {
        let s = SemigroupSystem::parse("logistic").unwrap();
        for n in 1..=6 {
            let w = Word::new(alloc::vec![1; n]);
            let pts = s.periodic_points(&w).unwrap();
            assert_eq!(pts.len(), 1 << n);
            for p in &pts {
                let mut y = p.clone();
                for _ in 0..n {
                    y = y.step(&GeneratorMap::Logistic).unwrap();
                }
                assert_eq!(&y, p);
                let x = p.position();
                assert!((s.word_eval(&w, &x).unwrap() - x).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn parse_grammar() {
        let s = SemigroupSystem::parse("LINEAR:2; Logistic, rotation:2/4").unwrap();
        assert_eq!(
            s.generators(),
            &[
                GeneratorMap::LinearExpanding { degree: 2 },
                GeneratorMap::Logistic,
                GeneratorMap::Rotation { num: 1, den: 2 }
            ]
        );
        for bad in ["linear:1", "linear", "rotation:1/1", "rotation:0/3", "tent", "logistic:2"] {
            assert!(bad.parse::<GeneratorMap>().is_err(), "{bad}");
        }
        assert_eq!(s.to_string(), "linear:2,logistic,rotation:1/2");
    }

    proptest! {
        #[test]
        fn word_eval_composes(u in proptest::collection::vec(1usize..=2, 0..8),
                              v in proptest::collection::vec(1usize..=2, 0..8),
                              num in 0i64..1000) {
            let s = two_three();
            let (u, v) = (Word::new(u), Word::new(v));
            let x = q(num, 1009);
            let lhs = s.word_eval(&u.concat(&v), &x).unwrap();
            let rhs = s.word_eval(&v, &s.word_eval(&u, &x).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn linear_image_length(k in 2u32..6, start in 0i64..100, len in 0i64..100) {
            let g = GeneratorMap::linear(k).unwrap();
            let a = Arc::new(q(start, 100), q(len, 100));
            let img = g.arc_image(&a);
            let expect = BigRational::min_of(&q(len * k as i64, 100), &BigRational::one());
            prop_assert_eq!(img.lebesgue_length(), expect);
        }

        #[test]
        fn periodic_points_are_exact(w in proptest::collection::vec(1usize..=2, 1..7)) {
            let s = two_three();
            let w = Word::new(w);
            for p in s.periodic_points(&w).unwrap() {
                prop_assert_eq!(s.word_eval(&w, p.coord.value()).unwrap(), p.coord.value().clone());
            }
        }
    }
}
