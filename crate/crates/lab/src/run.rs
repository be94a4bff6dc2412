//! Dispatch from a validated config to the core operations.
//!
//! Samples are independent tasks keyed by stream id. They run on the rayon
//! pool and are collected in id order, so every aggregate is an order-fixed
//! reduce and the output does not depend on the worker count.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use semilab_core::circle::Coord;
use semilab_core::entropy::{
    analytic_entropies, entropy_row, lyapunov_sample, lyapunov_start, analytic_lyapunov, variational_check,
    EntropyReport, LyapunovEstimate,
};
use semilab_core::hitting::{hitting_equality_check, GammaConfig};
use semilab_core::orbit::random_dyadic;
use semilab_core::recurrence::{
    action_ball_return_time, action_set_return_time, dynball_return_ratio, geometric_grid, rate_sample,
    rotation_ball_bound_check, set_return_time, CesaroReport, CesaroSetup, KacEstimate, KacSetup, RateSummary,
    ReturnTime, EXACT_BITS,
};
use semilab_core::stats::Running;
use semilab_core::{LabError, WalkLaw};

use crate::config::{Experiment, Validated};

/// One line of the per-sample JSONL stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub experiment: &'static str,
    pub seed: u64,
    pub stream_id: u64,
    pub quantity: &'static str,
    pub x: Option<f64>,
    pub omega_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<u64>,
    pub value: Option<f64>,
    pub censored: bool,
}

/// One row of the aggregate CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub metric: String,
    pub value: f64,
    pub half_width: Option<f64>,
    pub count: u64,
    pub stream_ids: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn verdict(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub aggregates: Vec<Aggregate>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn aggregate(&mut self, metric: impl Into<String>, value: f64, half_width: Option<f64>, count: u64, ids: String) {
        self.aggregates.push(Aggregate {
            metric: metric.into(),
            value,
            half_width,
            count,
            stream_ids: ids,
        });
    }
}

pub fn id_range(start: u64, len: u64) -> String {
    match len {
        0 => String::new(),
        1 => start.to_string(),
        _ => format!("{}-{}", start, start + len - 1),
    }
}

fn par_samples<T, F>(count: u64, f: F) -> Result<Vec<T>, LabError>
where
    T: Send,
    F: Fn(u64) -> Result<T, LabError> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

fn rational(x: f64) -> BigRational {
    <BigRational as Coord>::from_f64(x)
}

fn time_value(t: ReturnTime) -> Option<f64> {
    t.value().map(|k| k as f64)
}

/// Runs the experiment on the current rayon pool.
pub fn run(v: &Validated) -> Result<Outcome, LabError> {
    let cfg = &v.config;
    let mode = cfg.walk.clone().unwrap_or_else(|| "uniform".into());
    let rec = |quantity: &'static str, stream_id: u64, x: Option<f64>| Record {
        experiment: cfg.experiment.name(),
        seed: cfg.seed,
        stream_id,
        quantity,
        x,
        omega_mode: mode.clone(),
        delta: None,
        n: None,
        shift: None,
        value: None,
        censored: false,
    };
    let s = &cfg.samples;
    let mut out = Outcome::default();
    match cfg.experiment {
        Experiment::Kac | Experiment::Recurrence => {
            let kac = cfg.experiment == Experiment::Kac;
            let set = v.set.clone().expect("validated");
            let m = s.m.unwrap_or(100_000);
            let n_max = s.n_max.unwrap_or(if kac { 10_000 } else { 1_000 });
            let setup = KacSetup::new(v.system.clone(), v.law.clone(), set.clone(), n_max, cfg.seed)?;
            let samples = par_samples(m, |i| setup.sample(i))?;
            for smp in &samples {
                out.records.push(Record {
                    value: time_value(smp.value),
                    censored: smp.value.is_censored(),
                    ..rec("return_time", smp.stream_id, Some(smp.start))
                });
            }
            let est = KacEstimate::from_returns(samples.iter().map(|s| s.value), n_max)?;
            let ids = id_range(0, m);
            out.aggregate("mean_return_time", est.mean, Some(est.half_width), est.samples, ids.clone());
            out.aggregate("censored_fraction", est.censored_fraction, None, est.samples, ids.clone());
            out.aggregate("defect_bound", est.defect_bound, None, est.samples, ids);
            if kac {
                let target = 1.0 / set.lebesgue_length();
                let tol = v.tolerance(0.02) * target;
                out.checks.push(Check::new(
                    "kac mean return time",
                    (est.mean - target).abs() <= tol,
                    format!("mean {:.4} vs 1/nu(A) = {:.4} (tolerance {:.4})", est.mean, target, tol),
                ));
            } else {
                let returned = 1.0 - est.censored_fraction;
                let floor = 1.0 - v.tolerance(0.001);
                out.checks.push(Check::new(
                    "returning fraction",
                    returned >= floor,
                    format!("{returned:.5} of {} starts returned within {n_max} (floor {floor})", est.samples),
                ));
            }
        }
        Experiment::CesaroKac => {
            let set = v.set.clone().expect("validated");
            let k = s.k.unwrap_or(50);
            let m = s.m.unwrap_or(1_000);
            let n_max = s.n_max.unwrap_or(10_000);
            let setup = CesaroSetup {
                kac: KacSetup::new(v.system.clone(), v.law.clone(), set.clone(), n_max, cfg.seed)?,
                omega_id: 0,
                shifts: k,
                m,
            };
            let omega = setup.omega();
            let samples = par_samples((k + 1) * m, |id| setup.sample(&omega, id / m, id % m))?;
            let mut terms = Vec::new();
            for (j, chunk) in samples.chunks(m as usize).enumerate() {
                for smp in chunk {
                    out.records.push(Record {
                        shift: Some(j as u64),
                        value: time_value(smp.value),
                        censored: smp.value.is_censored(),
                        ..rec("return_time", smp.stream_id, Some(smp.start))
                    });
                }
                terms.push(KacEstimate::from_returns(chunk.iter().map(|s| s.value), n_max)?);
            }
            let last = terms.pop().expect("k + 1 terms");
            let report = CesaroReport::new(terms, last);
            for (j, (t, c)) in report.terms.iter().zip(&report.cesaro).enumerate() {
                let ids = id_range(setup.point_id(j as u64, 0), m);
                out.aggregate(format!("term_{j}"), t.mean, Some(t.half_width), t.samples, ids.clone());
                out.aggregate(format!("cesaro_{}", j + 1), *c, None, t.samples, ids);
            }
            out.aggregate(
                format!("unaveraged_{k}"),
                report.unaveraged.mean,
                Some(report.unaveraged.half_width),
                report.unaveraged.samples,
                id_range(setup.point_id(k, 0), m),
            );
            let target = 1.0 / set.lebesgue_length();
            let tol = v.tolerance(0.0375) * target;
            let fin = report.final_mean();
            out.checks.push(Check::new(
                "cesaro-kac final mean",
                (fin - target).abs() <= tol,
                format!("{fin:.4} vs 1/nu(A) = {target:.4} (tolerance {tol:.4})"),
            ));
        }
        Experiment::SetReturn => {
            let set = v.set.clone().expect("validated").map_coord::<BigRational>();
            let m = s.m.unwrap_or(100);
            let n_max = s.n_max.unwrap_or(64);
            let k_max = s.k_max.unwrap_or(32);
            let times = par_samples(m, |i| set_return_time(&v.system, &v.law.sample_stream(cfg.seed, i), &set, n_max))?;
            let mut r = Running::new();
            for (i, t) in times.iter().enumerate() {
                if let Some(k) = t.value() {
                    r.push(k as f64);
                }
                out.records.push(Record {
                    value: time_value(*t),
                    censored: t.is_censored(),
                    ..rec("fibre_set_return_time", i as u64, None)
                });
            }
            let ids = id_range(0, m);
            out.aggregate("mean_fibre_return_time", r.mean(), Some(r.half_width()), r.count(), ids.clone());
            let min_fibre = times.iter().filter_map(|t| t.value()).min();
            let action = action_set_return_time(&v.system, &set, k_max, 1 << 16)?;
            out.aggregate(
                "action_return_time",
                action.value().map_or(f64::NAN, |k| k as f64),
                None,
                1,
                String::new(),
            );
            let passed = match (action, min_fibre) {
                (ReturnTime::Returned(a), Some(f)) => a <= f,
                (_, None) => true,
                (ReturnTime::Censored(_), Some(f)) => f > k_max,
            };
            out.checks.push(Check::new(
                "T^S(A) <= min over sampled omega of T^omega(A)",
                passed,
                format!("action {action:?}, fibre minimum {min_fibre:?}"),
            ));
        }
        Experiment::BallReturn => {
            let m = s.m.unwrap_or(100);
            let k_max = s.k_max.unwrap_or(60);
            let delta = cfg.delta.value.unwrap_or(1.0 / 65536.0);
            let degrees = v.system.degrees("ball return")?;
            let bound = 1.0 / (*degrees.iter().min().expect("p >= 1") as f64).ln() + v.tolerance(0.05);
            let d = rational(delta);
            let rows = par_samples(m, |i| {
                let x = random_dyadic(cfg.seed, i, EXACT_BITS);
                let t = action_ball_return_time(&v.system, &x, &d, k_max)?;
                Ok((x.as_f64(), t))
            })?;
            let (mut worst, mut least) = (0.0f64, f64::INFINITY);
            let mut r = Running::new();
            for (i, (x, t)) in rows.iter().enumerate() {
                let ratio = t.value().map(|k| k as f64 / -delta.ln());
                if let Some(q) = ratio {
                    worst = worst.max(q);
                    least = least.min(q);
                    r.push(q);
                }
                out.records.push(Record {
                    delta: Some(delta),
                    value: time_value(*t),
                    censored: t.is_censored(),
                    ..rec("action_ball_return_time", i as u64, Some(*x))
                });
            }
            let censored = rows.iter().filter(|(_, t)| t.is_censored()).count();
            out.aggregate("mean_ratio", r.mean(), Some(r.half_width()), r.count(), id_range(0, m));
            out.aggregate("max_ratio", worst, None, r.count(), id_range(0, m));
            // No lower bound is known; reported without a check.
            out.aggregate("min_ratio", least, None, r.count(), id_range(0, m));
            out.checks.push(Check::new(
                "T^S(B_delta(x)) / -log delta upper bound",
                censored == 0 && worst <= bound,
                format!("max ratio {worst:.4} vs bound {bound:.4}, {censored} censored"),
            ));
        }
        Experiment::Rate => {
            let m = s.m.unwrap_or(200);
            let n_max = s.n_max.unwrap_or(60);
            let deltas = geometric_grid(
                cfg.delta.delta0.unwrap_or(0.1),
                cfg.delta.ratio.unwrap_or(0.5),
                cfg.delta.points.unwrap_or(13) as usize,
            );
            let samples = par_samples(m, |i| {
                let x = random_dyadic(cfg.seed, i, EXACT_BITS);
                let est = rate_sample(&v.system, &v.law.sample_stream(cfg.seed, i), &x, &deltas, n_max)?;
                Ok((x.as_f64(), est))
            })?;
            for (i, (x, est)) in samples.iter().enumerate() {
                let i = i as u64;
                if let Some(est) = est {
                    for &(d, t) in &est.grid {
                        out.records.push(Record {
                            delta: Some(d),
                            value: Some(t as f64),
                            ..rec("fibre_ball_return_time", i, Some(*x))
                        });
                    }
                    for &d in &est.dropped {
                        out.records.push(Record {
                            delta: Some(d),
                            censored: true,
                            ..rec("fibre_ball_return_time", i, Some(*x))
                        });
                    }
                }
                out.records.push(Record {
                    value: est.as_ref().map(|e| e.slope),
                    censored: est.is_none(),
                    ..rec("slope", i, Some(*x))
                });
            }
            let ests: Vec<_> = samples.into_iter().map(|(_, e)| e).collect();
            let summary = RateSummary::new(&ests);
            let ids = id_range(0, m);
            let sm = &summary.slopes;
            out.aggregate("mean_slope", sm.mean, Some(1.96 * sm.std_dev / (sm.count.max(1) as f64).sqrt()), sm.count as u64, ids.clone());
            out.aggregate("slope_std_dev", sm.std_dev, None, sm.count as u64, ids.clone());
            for (q, val) in semilab_core::stats::SUMMARY_LEVELS.iter().zip(sm.quantiles) {
                out.aggregate(format!("slope_q{:02}", (q * 100.0).round()), val, None, sm.count as u64, ids.clone());
            }
            out.aggregate("unfitted", summary.unfitted as f64, None, m, ids.clone());
            out.aggregate("flagged", summary.flagged as f64, None, m, ids);
            let degrees = v.system.degrees("rate")?;
            let lyap = analytic_lyapunov(&v.system, &v.law, 1).unwrap_or(f64::NAN);
            let target = 1.0 / lyap;
            let tol = v.tolerance(0.05);
            out.checks.push(Check::new(
                "mean slope vs 1/lambda",
                (sm.mean - target).abs() <= tol,
                format!("{:.4} vs {target:.4} (tolerance {tol})", sm.mean),
            ));
            let dmin = *degrees.iter().min().expect("p >= 1") as f64;
            let dmax = *degrees.iter().max().expect("p >= 1") as f64;
            let (lo, hi) = (1.0 / dmax.ln() - 0.05, 1.0 / dmin.ln() + 0.05);
            let outside = ests.iter().flatten().filter(|e| e.slope < lo || e.slope > hi).count();
            out.checks.push(Check::new(
                "every slope between the extreme rates",
                outside == 0,
                format!("{outside} of {} slopes outside [{lo:.3}, {hi:.3}]", sm.count),
            ));
        }
        Experiment::Dynball => {
            let m = s.m.unwrap_or(50);
            let n = s.n.unwrap_or(200);
            let n_max = s.n_max.unwrap_or(10 * n);
            let delta = cfg.delta.value.unwrap_or(0.01);
            let d = rational(delta);
            let rows = par_samples(m, |i| {
                let x = random_dyadic(cfg.seed, i, EXACT_BITS);
                let r = dynball_return_ratio(&v.system, &v.law.sample_stream(cfg.seed, i), &x, &d, &[n], n_max)?;
                Ok((x.as_f64(), r.into_iter().next().expect("one length")))
            })?;
            let tol = v.tolerance(0.2);
            let mut inside = 0u64;
            for (i, (x, r)) in rows.iter().enumerate() {
                if r.ratio.is_some_and(|q| (1.0..=1.0 + tol).contains(&q)) {
                    inside += 1;
                }
                out.records.push(Record {
                    delta: Some(delta),
                    n: Some(n),
                    value: r.ratio,
                    censored: r.time.is_censored(),
                    ..rec("dynball_ratio", i as u64, Some(*x))
                });
            }
            let ratios: Running = rows.iter().filter_map(|(_, r)| r.ratio).collect();
            out.aggregate("mean_ratio", ratios.mean(), Some(ratios.half_width()), ratios.count(), id_range(0, m));
            let frac = inside as f64 / m as f64;
            out.aggregate("fraction_in_band", frac, None, m, id_range(0, m));
            out.checks.push(Check::new(
                "dynamical-ball ratio band",
                frac >= 0.9,
                format!("{inside}/{m} ratios in [1, {}]", 1.0 + tol),
            ));
        }
        Experiment::Entropy | Experiment::Variational => {
            let WalkLaw::Bernoulli(walk) = &v.law else {
                unreachable!("validated")
            };
            let analytic = analytic_entropies(&v.system, walk)?;
            let tol = v.tolerance(0.05);
            let run_estimate = cfg.experiment == Experiment::Entropy || s.m_omega.is_some();
            let estimate = if run_estimate {
                let m = s.m_omega.unwrap_or(500);
                let grid: Vec<usize> = cfg
                    .n_grid
                    .clone()
                    .unwrap_or_else(|| (8..=14).collect())
                    .into_iter()
                    .map(|n| n as usize)
                    .collect();
                let rows = par_samples(m, |i| entropy_row(&v.system, &v.law.sample_stream(cfg.seed, i), &v.partition, &grid))?;
                for (i, row) in rows.iter().enumerate() {
                    for (&n, h) in grid.iter().zip(row) {
                        out.records.push(Record {
                            n: Some(n as u64),
                            value: Some(*h),
                            ..rec("join_entropy", i as u64, None)
                        });
                    }
                }
                let report = EntropyReport::from_rows(&grid, &rows)?;
                for ((n, h), hw) in report.n_grid.iter().zip(&report.per_n).zip(&report.per_n_half_width) {
                    out.aggregate(format!("entropy_per_n_{n}"), *h, Some(*hw), m, id_range(0, m));
                }
                out.aggregate("entropy_limit", report.limit, Some(report.limit_half_width), m, id_range(0, m));
                Some(report.limit)
            } else {
                None
            };
            for (name, val) in [
                ("h_top_skew", analytic.h_top_skew),
                ("h_top_action", analytic.h_top_action),
                ("pressure", analytic.pressure),
                ("h_walk", analytic.h_walk),
            ] {
                out.aggregate(name, val, None, 0, String::new());
            }
            if cfg.experiment == Experiment::Entropy {
                let est = estimate.expect("estimated");
                out.checks.push(Check::new(
                    "entropy estimate vs quenched pressure",
                    (est - analytic.pressure).abs() <= tol,
                    format!("{est:.4} vs {:.4} (tolerance {tol})", analytic.pressure),
                ));
            } else {
                let rep = variational_check(&analytic, walk, estimate.unwrap_or(analytic.pressure), tol);
                for (i, c) in rep.checks.iter().enumerate() {
                    out.records.push(Record {
                        value: Some(c.margin()),
                        censored: false,
                        ..rec("variational_margin", i as u64, None)
                    });
                    out.aggregate(format!("margin: {}", c.label), c.margin(), None, 1, String::new());
                    out.checks.push(Check::new(c.label, c.holds, format!("{:.4} <= {:.4}", c.lhs, c.rhs)));
                }
                if let Some(gap) = rep.strict_margin {
                    out.aggregate("strict_margin", gap, None, 1, String::new());
                }
            }
        }
        Experiment::Lyapunov => {
            let m = s.m.unwrap_or(1_000);
            let n = s.n.unwrap_or(10_000);
            let dim = cfg.dim.unwrap_or(1);
            let samples = par_samples(m, |i| {
                let x = lyapunov_start(cfg.seed, i);
                Ok((x, lyapunov_sample(&v.system, &v.law.sample_stream(cfg.seed, i), x, n, dim)?))
            })?;
            for (i, (x, l)) in samples.iter().enumerate() {
                out.records.push(Record {
                    n: Some(n),
                    value: *l,
                    censored: l.is_none(),
                    ..rec("lyapunov", i as u64, Some(*x))
                });
            }
            let ls: Vec<Option<f64>> = samples.iter().map(|(_, l)| *l).collect();
            let est = LyapunovEstimate::from_samples(&ls, analytic_lyapunov(&v.system, &v.law, dim), dim)?;
            out.aggregate("lyapunov", est.mean, Some(est.half_width), est.orbits as u64, id_range(0, m));
            out.aggregate("dropped", est.dropped as f64, None, m, id_range(0, m));
            if let Some(a) = est.analytic {
                let tol = v.tolerance(0.01);
                out.aggregate("analytic", a, None, 0, String::new());
                out.checks.push(Check::new(
                    "lyapunov estimate vs analytic",
                    (est.mean - a).abs() <= tol,
                    format!("{:.5} vs {a:.5} (tolerance {tol})", est.mean),
                ));
            }
        }
        Experiment::Hitting => {
            let gamma = GammaConfig {
                m_omega: s.m_omega.unwrap_or(4),
                grid: s.grid.unwrap_or(64),
                typical: s.m.unwrap_or(16),
                window: s.n.unwrap_or(1024),
                l_max: s.l.unwrap_or(12) as usize,
                seed: cfg.seed,
            };
            let n = cfg.window_n.unwrap_or(2);
            let rep = hitting_equality_check(&v.system, &v.law, n, cfg.ell, &gamma, v.tolerance(0.0))?;
            if let Some(notice) = &rep.notice {
                out.checks.push(Check::new("hitting window", true, notice.clone()));
                return Ok(out);
            }
            let alpha = rep.alpha.as_ref().expect("no notice");
            let g = rep.gamma.as_ref().expect("no notice");
            for (i, c) in alpha.components.iter().enumerate() {
                out.records.push(Record {
                    value: Some(c.best.value()),
                    ..rec("component_best_frequency", i as u64, c.witnesses.first().map(|w| w.atoms()[0].position()))
                });
            }
            out.aggregate("ell", rep.ell.unwrap_or(f64::NAN), None, 1, String::new());
            out.aggregate("alpha", alpha.value_f64(), None, alpha.components.len() as u64, String::new());
            out.aggregate("gamma", g.value(), None, g.trajectories, id_range(0, gamma.m_omega));
            out.checks.push(Check::new(
                "alpha = gamma = 1/n",
                rep.passes(),
                format!("alpha {} gamma {} via {}, target 1/{n}", alpha.value, g.best.to_rational(), g.source),
            ));
        }
        Experiment::RotationBound => {
            let rotations = v.rotations().expect("validated");
            let m = s.m.unwrap_or(16);
            let deltas: Vec<BigRational> = geometric_grid(
                cfg.delta.delta0.unwrap_or(0.1),
                cfg.delta.ratio.unwrap_or(0.5),
                cfg.delta.points.unwrap_or(8) as usize,
            )
            .into_iter()
            .map(rational)
            .collect();
            let xs: Vec<BigRational> = (0..m).map(|j| BigRational::new(j.into(), m.into())).collect();
            let rows = rotation_ball_bound_check(&rotations, &deltas, &xs)?;
            let mut holds = 0;
            for (i, r) in rows.iter().enumerate() {
                holds += r.holds as u64;
                out.records.push(Record {
                    delta: Some(r.delta),
                    value: time_value(r.time),
                    censored: r.time.is_censored(),
                    ..rec("rotation_ball_return_time", i as u64, Some(r.x))
                });
            }
            out.aggregate("rows_holding", holds as f64, None, rows.len() as u64, id_range(0, rows.len() as u64));
            out.checks.push(Check::new(
                "rotation return-time bound",
                holds == rows.len() as u64,
                format!("{holds}/{} rows within the bound", rows.len()),
            ));
        }
    }
    Ok(out)
}
