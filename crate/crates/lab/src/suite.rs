//! The acceptance suite: eleven criteria with fixed tolerances, plus a
//! reduced-sample smoke variant.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use semilab_core::circle::{Arc, Coord};
use semilab_core::entropy::{
    analytic_entropies, entropy_row, lyapunov_sample, lyapunov_start, variational_check, CirclePartition,
    EntropyReport,
};
use semilab_core::hitting::{hitting_equality_check, Frequency, GammaConfig};
use semilab_core::orbit::random_dyadic;
use semilab_core::recurrence::{
    action_ball_return_time, dynball_return_ratio, first_return_time, geometric_grid, rate_sample, set_return_time,
    CesaroReport, CesaroSetup, KacEstimate, KacSetup, ReturnTime, Semantics, EXACT_BITS,
};
use semilab_core::stats::{ks_uniform, Running};
use semilab_core::symbols::{domain, keyed_rng, unit_f64};
use semilab_core::{
    ArcSet, BernoulliWalk, FiberedOrbit, GeneratorMap, LabError, SemigroupSystem, SymbolStream, WalkLaw, Word,
};

pub const SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Quick,
}

impl Scale {
    fn pick(self, full: u64, quick: u64) -> u64 {
        match self {
            Scale::Full => full,
            Scale::Quick => quick,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} [{:.1} s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

type Check = Result<(bool, String), LabError>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Option<Duration>,
    run: fn(Scale) -> Check,
}

const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, title: "kac, single map", budget: Some(Duration::from_secs(30)), run: kac_single_map },
    Criterion { id: 2, title: "cesaro-kac", budget: Some(Duration::from_secs(300)), run: cesaro_kac },
    Criterion { id: 3, title: "recurrence", budget: Some(Duration::from_secs(60)), run: recurrence },
    Criterion { id: 4, title: "recurrence rate", budget: Some(Duration::from_secs(600)), run: rate },
    Criterion { id: 5, title: "semigroup ball upper bound", budget: None, run: semigroup_upper },
    Criterion { id: 6, title: "dynamical-ball ratio", budget: None, run: dynball },
    Criterion { id: 7, title: "entropy", budget: Some(Duration::from_secs(120)), run: entropy },
    Criterion { id: 8, title: "lyapunov", budget: None, run: lyapunov },
    Criterion { id: 9, title: "hitting frequencies", budget: Some(Duration::from_secs(180)), run: hitting },
    Criterion { id: 10, title: "oracle equivalence", budget: None, run: oracle_equivalence },
    Criterion { id: 11, title: "lebesgue invariance", budget: None, run: invariance },
];

/// Runs every criterion, calling `report` as each finishes.
pub fn run_suite(scale: Scale, mut report: impl FnMut(&Verdict)) -> Vec<Verdict> {
    CRITERIA
        .iter()
        .map(|c| {
            let t0 = Instant::now();
            let result = (c.run)(scale);
            let elapsed = t0.elapsed();
            let (mut passed, mut detail) = match result {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            if let (Scale::Full, Some(b)) = (scale, c.budget) {
                if elapsed > b {
                    passed = false;
                    detail.push_str(&format!("; over the {} s budget", b.as_secs()));
                }
            }
            let v = Verdict {
                id: c.id,
                title: c.title,
                passed,
                detail,
                elapsed,
            };
            report(&v);
            v
        })
        .collect()
}

fn system(degrees: &[u32]) -> SemigroupSystem {
    SemigroupSystem::linear(degrees).expect("valid degrees")
}

fn bernoulli(weights: &[f64]) -> WalkLaw {
    WalkLaw::Bernoulli(BernoulliWalk::new(weights.to_vec()).expect("valid weights"))
}

fn interval(a: f64, b: f64) -> ArcSet<f64> {
    ArcSet::from_pieces([(a, b)])
}

fn kac_mean(setup: &KacSetup, ids: std::ops::Range<u64>) -> Result<KacEstimate, LabError> {
    let returns = ids
        .into_par_iter()
        .map(|i| setup.sample(i).map(|s| s.value))
        .collect::<Result<Vec<_>, _>>()?;
    KacEstimate::from_returns(returns, setup.n_max)
}

fn kac_single_map(scale: Scale) -> Check {
    let m = scale.pick(1_000_000, 20_000);
    let law = WalkLaw::Cyclic(Word::parse("1")?);
    let setup = KacSetup::new(system(&[2]), law, interval(0.0, 0.5), 10_000, SEED)?;
    let est = kac_mean(&setup, 0..m)?;
    Ok((
        (1.96..=2.04).contains(&est.mean),
        format!("mean {:.4} ± {:.4} over {m} samples, target [1.96, 2.04]", est.mean, est.half_width),
    ))
}

fn cesaro_kac(scale: Scale) -> Check {
    let k = scale.pick(200, 20);
    let m = scale.pick(10_000, 2_000);
    let setup = CesaroSetup {
        kac: KacSetup::new(system(&[2, 3]), bernoulli(&[0.5, 0.5]), interval(0.0, 0.25), 10_000, SEED)?,
        omega_id: 0,
        shifts: k,
        m,
    };
    let omega = setup.omega();
    let terms = (0..=k)
        .into_par_iter()
        .map(|j| setup.term(&omega, j))
        .collect::<Result<Vec<_>, _>>()?;
    let mut terms = terms;
    let last = terms.pop().expect("k + 1 terms");
    let rep = CesaroReport::new(terms, last);
    let fin = rep.final_mean();
    Ok((
        (3.85..=4.15).contains(&fin),
        format!("final mean {fin:.4} after {k} shifts of {m}, target [3.85, 4.15]"),
    ))
}

fn recurrence(scale: Scale) -> Check {
    let m = scale.pick(100_000, 10_000);
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, law) in [("bernoulli", bernoulli(&[0.5, 0.5])), ("cyclic(12)", WalkLaw::Cyclic(Word::parse("12")?))] {
        let setup = KacSetup::new(system(&[2, 3]), law, interval(0.0, 0.1), 1_000, SEED)?;
        let est = kac_mean(&setup, 0..m)?;
        let returned = 1.0 - est.censored_fraction;
        ok &= returned >= 0.999;
        parts.push(format!("{name} {returned:.5}"));
    }
    Ok((ok, format!("returning fractions {} (floor 0.999)", parts.join(", "))))
}

fn rate(scale: Scale) -> Check {
    let m = scale.pick(200, 40);
    let deltas = geometric_grid(0.1, 0.5, 13);
    let sys = system(&[2, 3]);
    let law = bernoulli(&[0.5, 0.5]);
    let ests = (0..m)
        .into_par_iter()
        .map(|i| rate_sample(&sys, &law.sample_stream(SEED, i), &random_dyadic(SEED, i, EXACT_BITS), &deltas, 60))
        .collect::<Result<Vec<_>, _>>()?;
    let slopes: Vec<f64> = ests.iter().flatten().map(|e| e.slope).collect();
    let r: Running = slopes.iter().copied().collect();
    let (lo, hi) = (1.0 / 3f64.ln() - 0.05, 1.0 / 2f64.ln() + 0.05);
    let outside: Vec<f64> = slopes.iter().copied().filter(|s| !(lo..=hi).contains(s)).collect();
    let (smin, smax) = slopes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let mean_ok = (1.06..=1.17).contains(&r.mean());
    Ok((
        mean_ok && outside.is_empty(),
        format!(
            "mean slope {:.4} (target [1.06, 1.17]); {} of {} slopes outside [{lo:.3}, {hi:.3}], range [{smin:.3}, {smax:.3}]",
            r.mean(),
            outside.len(),
            slopes.len()
        ),
    ))
}

fn semigroup_upper(scale: Scale) -> Check {
    let m = scale.pick(100, 20);
    let delta = 1.0 / 65536.0;
    let d = <BigRational as Coord>::from_f64(delta);
    let sys = system(&[2, 3]);
    let times = (0..m)
        .into_par_iter()
        .map(|i| action_ball_return_time(&sys, &random_dyadic(SEED, i, EXACT_BITS), &d, 60))
        .collect::<Result<Vec<_>, _>>()?;
    let bound = 1.0 / 2f64.ln() + 0.05;
    let mut worst = 0.0f64;
    let mut censored = 0;
    for t in &times {
        match t {
            ReturnTime::Returned(k) => worst = worst.max(*k as f64 / -delta.ln()),
            ReturnTime::Censored(_) => censored += 1,
        }
    }
    Ok((
        censored == 0 && worst <= bound,
        format!("max T^S/(-log delta) {worst:.4} over {m} samples, bound {bound:.4}, {censored} censored"),
    ))
}

fn dynball(scale: Scale) -> Check {
    let m = scale.pick(50, 10);
    let n = 200;
    let d = <BigRational as Coord>::from_f64(0.01);
    let sys = system(&[2, 3]);
    let law = bernoulli(&[0.5, 0.5]);
    let ratios = (0..m)
        .into_par_iter()
        .map(|i| {
            let r = dynball_return_ratio(&sys, &law.sample_stream(SEED, i), &random_dyadic(SEED, i, EXACT_BITS), &d, &[n], 10 * n)?;
            Ok(r[0].ratio)
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let inside = ratios.iter().filter(|r| r.is_some_and(|q| (1.0..=1.2).contains(&q))).count();
    let mean: Running = ratios.iter().flatten().copied().collect();
    Ok((
        inside as f64 >= 0.9 * m as f64,
        format!("{inside}/{m} ratios in [1.0, 1.2] (need 90%), mean {:.4}", mean.mean()),
    ))
}

fn entropy(scale: Scale) -> Check {
    let sys = system(&[2, 3]);
    let walk = BernoulliWalk::uniform(2)?;
    let a = analytic_entropies(&sys, &walk)?;
    let (l2, l3) = (2f64.ln(), 3f64.ln());
    let exact = [
        (a.h_top_skew, 5f64.ln()),
        (a.h_top_action, 2.5f64.ln()),
        (a.pressure, (l2 + l3) / 2.0),
        (a.h_walk, l2),
    ]
    .iter()
    .all(|(x, y)| (x - y).abs() <= 1e-15);
    let m = scale.pick(500, 100);
    let grid: Vec<usize> = (8..=14).collect();
    let law = WalkLaw::Bernoulli(walk.clone());
    let beta = CirclePartition::dyadic();
    let rows = (0..m)
        .into_par_iter()
        .map(|i| entropy_row(&sys, &law.sample_stream(SEED, i), &beta, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = EntropyReport::from_rows(&grid, &rows)?;
    let estimate_ok = (rep.limit - 0.8959).abs() <= 0.05;
    let var = variational_check(&a, &walk, rep.limit, 0.05);
    let chain = a.pressure <= a.h_top_action && a.h_top_action <= a.h_top_action + l2 - a.h_walk + 1e-15;
    Ok((
        exact && estimate_ok && var.all_hold() && chain,
        format!(
            "analytic values {}; estimate {:.4} ± {:.4} (target 0.8959 ± 0.05); chain {:.3} <= {:.3} <= {:.3} + ({:.3} - {:.3})",
            if exact { "exact" } else { "wrong" },
            rep.limit,
            rep.limit_half_width,
            a.pressure,
            a.h_top_action,
            a.h_top_action,
            l2,
            a.h_walk
        ),
    ))
}

fn lyapunov(scale: Scale) -> Check {
    let m = scale.pick(1_000, 100);
    let n = 10_000;
    let sys = system(&[2, 3]);
    let mut ok = true;
    let mut parts = Vec::new();
    for (weights, target) in [([0.25, 0.75], 0.9972), ([0.5, 0.5], 0.8959)] {
        let law = bernoulli(&weights);
        let samples = (0..m)
            .into_par_iter()
            .map(|i| lyapunov_sample(&sys, &law.sample_stream(SEED, i), lyapunov_start(SEED, i), n, 1))
            .collect::<Result<Vec<_>, _>>()?;
        let r: Running = samples.iter().flatten().copied().collect();
        ok &= r.count() == m && (r.mean() - target).abs() <= 0.01;
        parts.push(format!("a={weights:?}: {:.4} vs {target}", r.mean()));
    }
    Ok((ok, format!("{} (tolerance 0.01)", parts.join("; "))))
}

fn hitting(_scale: Scale) -> Check {
    let cfg = GammaConfig {
        m_omega: 4,
        grid: 64,
        typical: 16,
        window: 1024,
        l_max: 12,
        seed: SEED,
    };
    let mixed = SemigroupSystem::parse("logistic,linear:2")?;
    let mixture = WalkLaw::parse("mixture:1/3@1,2/3@2")?;
    let two = hitting_equality_check(&mixed, &mixture, 2, Some(0.32), &cfg, 0.0)?;
    let doubling = WalkLaw::Cyclic(Word::parse("1")?);
    let three = hitting_equality_check(&system(&[2]), &doubling, 3, Some(0.15), &cfg, 0.0)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (rep, n) in [(&two, 2i64), (&three, 3)] {
        let (Some(alpha), Some(gamma)) = (&rep.alpha, &rep.gamma) else {
            return Ok((false, format!("n={n}: window skipped")));
        };
        let target = BigRational::new(1.into(), n.into());
        ok &= alpha.value == target && gamma.best == Frequency::new(1, n as u64) && rep.passes();
        parts.push(format!("n={n}: alpha {} gamma {}", alpha.value, gamma.best.to_rational()));
    }
    Ok((ok, parts.join("; ")))
}

const GRID_BITS: u32 = 14;

/// Closed dyadic arc `[start, start + len]·2^-r` in units of `2^-14`.
#[derive(Debug, Clone, Copy)]
struct DyadicArc {
    start: u64,
    len: u64,
}

impl DyadicArc {
    fn contains(&self, y: u64) -> bool {
        let m = 1u64 << GRID_BITS;
        (y + m - self.start) % m <= self.len
    }

    fn exact(&self) -> Arc<BigRational> {
        let m = BigRational::from_integer((1u64 << GRID_BITS).into());
        Arc::new(
            BigRational::from_integer(self.start.into()) / &m,
            BigRational::from_integer(self.len.into()) / &m,
        )
    }

    fn float(&self) -> Arc<f64> {
        let m = (1u64 << GRID_BITS) as f64;
        Arc::new(self.start as f64 / m, self.len as f64 / m)
    }
}

/// Least `k ≤ n_max` at which some grid point of `A` lands in `A`, computed in integers.
fn grid_return(degrees: &[u32], word: &[usize], arcs: &[DyadicArc], n_max: u64) -> ReturnTime {
    let m = 1u64 << GRID_BITS;
    let inside = |y: u64| arcs.iter().any(|a| a.contains(y));
    let mut best = n_max + 1;
    for y0 in (0..m).filter(|&y| inside(y)) {
        let mut y = y0;
        for k in 1..best {
            y = y * degrees[word[(k as usize - 1) % word.len()] - 1] as u64 % m;
            if inside(y) {
                best = k;
                break;
            }
        }
    }
    if best > n_max {
        ReturnTime::Censored(n_max)
    } else {
        ReturnTime::Returned(best)
    }
}

fn oracle_equivalence(scale: Scale) -> Check {
    let systems: [&[u32]; 6] = [&[2], &[3], &[2, 2], &[2, 3], &[3, 2], &[3, 3]];
    let cases_per_system = scale.pick(400, 40);
    let n_max = 16;
    let results = systems
        .par_iter()
        .enumerate()
        .map(|(si, degrees)| -> Result<(u64, u64, Vec<String>), LabError> {
            let sys = system(degrees);
            let p = degrees.len();
            let mut rng = keyed_rng(SEED, si as u64, domain::POINTS);
            let (mut sets, mut points) = (0u64, 0u64);
            let mut mismatches = Vec::new();
            for _ in 0..cases_per_system {
                let len = rng.random_range(1..=10usize);
                let word: Vec<usize> = (0..len).map(|_| rng.random_range(1..=p)).collect();
                let pieces = rng.random_range(1..=2usize);
                let arcs: Vec<DyadicArc> = (0..pieces)
                    .map(|_| {
                        let r = rng.random_range(1..=6u32);
                        let unit = 1u64 << (GRID_BITS - r);
                        DyadicArc {
                            start: rng.random_range(0..1u64 << r) * unit,
                            len: rng.random_range(1..1u64 << r) * unit,
                        }
                    })
                    .collect();
                let stream = SymbolStream::cyclic(Word::new(word.clone()))?;
                let exact_set = ArcSet::from_arcs(arcs.iter().map(DyadicArc::exact));
                let by_images = set_return_time(&sys, &stream, &exact_set, n_max)?;
                let by_grid = grid_return(degrees, &word, &arcs, n_max);
                sets += 1;
                if by_images != by_grid {
                    mismatches.push(format!("{degrees:?} {word:?} {arcs:?}: images {by_images:?} grid {by_grid:?}"));
                }
                let float_set = ArcSet::from_arcs(arcs.iter().map(DyadicArc::float));
                for q in 0..200u64 {
                    let xq = BigRational::new(q.into(), 65537u64.into());
                    let xf = q as f64 / 65537.0;
                    let exact = FiberedOrbit::new(sys.clone(), stream.clone(), xq);
                    let float = FiberedOrbit::new(sys.clone(), stream.clone(), xf);
                    let a = first_return_time(&exact, &exact_set, n_max, Semantics::Hitting)?;
                    let b = first_return_time(&float, &float_set, n_max, Semantics::Hitting)?;
                    points += 1;
                    if a != b {
                        mismatches.push(format!("{degrees:?} {word:?} q={q}: exact {a:?} float {b:?}"));
                    }
                }
            }
            Ok((sets, points, mismatches))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sets: u64 = results.iter().map(|r| r.0).sum();
    let points: u64 = results.iter().map(|r| r.1).sum();
    let mismatches: Vec<&String> = results.iter().flat_map(|r| &r.2).collect();
    let mut detail = format!(
        "{sets} set-return cases against the 2^14 grid, {points} float/exact first returns; {} mismatches",
        mismatches.len()
    );
    if let Some(first) = mismatches.first() {
        detail.push_str(&format!("; first: {first}"));
    }
    Ok((mismatches.is_empty(), detail))
}

fn invariance(_scale: Scale) -> Check {
    let n = 1_000_000;
    let results: Vec<(u32, f64)> = [2u32, 3, 4, 5]
        .par_iter()
        .map(|&d| {
            let g = GeneratorMap::LinearExpanding { degree: d };
            let mut rng = keyed_rng(SEED, d as u64, domain::POINTS);
            let mut ys: Vec<f64> = (0..n).map(|_| g.eval(&unit_f64(rng.next_u64()))).collect();
            (d, ks_uniform(&mut ys))
        })
        .collect();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((
        worst < 0.002,
        results
            .iter()
            .map(|(d, ks)| format!("{d}x: {ks:.5}"))
            .collect::<Vec<_>>()
            .join(", ")
            + " (bound 0.002)",
    ))
}
