//! Empirical `(C, alpha)`-good testing and sup lower-bound batteries.
//!
//! A function is `(C, alpha)`-good on an interval when, on every ball `B`,
//! the sublevel set `{x in B : |f(x)| < eps * sup_B |f|}` has measure at
//! most `C eps^alpha |B|`. The tests here sample random balls and estimate
//! the two sides on grids: sup estimates are attained samples refined around
//! the argmax (never above the true sup), measures count grid midpoints,
//! and violations are declared only when a bound fails by more than the
//! certified grid error, so discretization cannot raise false alarms.

use crate::interval::Interval;
use crate::lattice::{wedge2_int, GMap, Vec3i};
use crate::sample::{inf_abs_grid, random_subinterval, simpson, sup_abs_refined, SUP_GRID};
use crate::curves::Curve;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GoodnessError {
    #[error("epsilon values must lie in (0, 1), got {0}")]
    BadEps(f64),
    #[error("measure grid must have at least 256 cells, got {0}")]
    GridTooSmall(usize),
    #[error("probe must test at least one ball")]
    NoBalls,
    #[error("C and alpha must be positive, got C={0}, alpha={1}")]
    BadConstants(f64, f64),
}

#[derive(Clone, Debug)]
pub struct GoodnessProbe {
    pub c: f64,
    pub alpha: f64,
    pub ball_samples: usize,
    pub eps_grid: Vec<f64>,
    pub measure_grid: usize,
    pub seed: u64,
    /// Ratios above `1 + tol` count as violations.
    pub tol: f64,
}

impl GoodnessProbe {
    pub fn new(c: f64, alpha: f64) -> GoodnessProbe {
        GoodnessProbe {
            c,
            alpha,
            ball_samples: 20,
            eps_grid: vec![0.5, 0.1, 0.01],
            measure_grid: 512,
            seed: 0,
            tol: 1e-3,
        }
    }

    fn validate(&self) -> Result<(), GoodnessError> {
        if !(self.c > 0.0 && self.alpha > 0.0) {
            return Err(GoodnessError::BadConstants(self.c, self.alpha));
        }
        if self.measure_grid < 256 {
            return Err(GoodnessError::GridTooSmall(self.measure_grid));
        }
        if self.ball_samples == 0 {
            return Err(GoodnessError::NoBalls);
        }
        for &e in &self.eps_grid {
            if !(e > 0.0 && e < 1.0) {
                return Err(GoodnessError::BadEps(e));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodnessReport {
    /// Worst measured `|B_eps| / (C eps^alpha |B|)`.
    pub max_ratio: f64,
    pub worst_ball: Interval,
    pub worst_eps: f64,
    pub violations: u64,
    /// Balls discarded because the sampled sup was identically zero.
    pub skipped: u64,
    pub balls_tested: usize,
    /// One row per (ball, eps) pair.
    pub details: Vec<BallRatio>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BallRatio {
    pub ball: Interval,
    pub eps: f64,
    pub sup: f64,
    pub measure: f64,
    pub ratio: f64,
}

/// Sublevel-set measure of `|f| <= level` on `b` by midpoint counting.
/// Grid membership cannot distinguish the strict inequality of the
/// definition from the non-strict one, so the non-strict form is used.
fn sublevel_measure(f: impl Fn(f64) -> f64, b: Interval, level: f64, grid: usize) -> f64 {
    let h = b.length() / grid as f64;
    let hits = (0..grid)
        .filter(|&k| f(b.lo() + (k as f64 + 0.5) * h).abs() <= level)
        .count();
    hits as f64 * h
}

/// Estimate the goodness ratio statistics of `f` over seeded random balls.
pub fn good_test(
    f: impl Fn(f64) -> f64,
    i: Interval,
    probe: &GoodnessProbe,
) -> Result<GoodnessReport, GoodnessError> {
    probe.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let mut report = GoodnessReport {
        max_ratio: 0.0,
        worst_ball: i,
        worst_eps: f64::NAN,
        violations: 0,
        skipped: 0,
        balls_tested: 0,
        details: Vec::with_capacity(probe.ball_samples * probe.eps_grid.len()),
    };
    for _ in 0..probe.ball_samples {
        let b = random_subinterval(&mut rng, i, 1e-3);
        let sup = sup_abs_refined(&f, b, SUP_GRID);
        if sup.value == 0.0 {
            report.skipped += 1;
            continue;
        }
        report.balls_tested += 1;
        for &eps in &probe.eps_grid {
            let measure = sublevel_measure(&f, b, eps * sup.value, probe.measure_grid);
            let ratio = measure / (probe.c * eps.powf(probe.alpha) * b.length());
            report.details.push(BallRatio {
                ball: b,
                eps,
                sup: sup.value,
                measure,
                ratio,
            });
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.worst_ball = b;
                report.worst_eps = eps;
            }
            if ratio > 1.0 + probe.tol {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Outcome of a single lemma check; `Skipped` records a failed
/// precondition, not a failed bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum LemmaOutcome {
    Verified { margin: f64 },
    Violated { gap: f64 },
    Skipped { reason: String },
}

impl LemmaOutcome {
    pub fn verified(&self) -> bool {
        matches!(self, LemmaOutcome::Verified { .. })
    }
}

fn conclude(optimistic_sup: f64, bound: f64) -> LemmaOutcome {
    if optimistic_sup >= bound {
        LemmaOutcome::Verified {
            margin: optimistic_sup - bound,
        }
    } else {
        LemmaOutcome::Violated {
            gap: bound - optimistic_sup,
        }
    }
}

/// `inf |f'| >= lambda` on `B` forces `sup |f| >= lambda |B| / 2`.
pub fn lemma_teclem_check(curve: &Curve, b: Interval, lambda: f64) -> LemmaOutcome {
    let inf_d = inf_abs_grid(|x| curve.d1(x), b, SUP_GRID);
    if inf_d < lambda {
        return LemmaOutcome::Skipped {
            reason: format!("sampled inf |f'| = {inf_d} below lambda = {lambda}"),
        };
    }
    let sup = sup_abs_refined(|x| curve.eval(x), b, SUP_GRID);
    conclude(sup.value + sup.grid_err, 0.5 * lambda * b.length())
}

/// When `sup |f| >= 2 inf |f|` on `B`, the sup is controlled by the total
/// variation: `sup |f| <= 2 int_B |f'|`.
pub fn lemma_teclem3_check(curve: &Curve, b: Interval) -> LemmaOutcome {
    let sup = sup_abs_refined(|x| curve.eval(x), b, SUP_GRID);
    let inf = inf_abs_grid(|x| curve.eval(x), b, SUP_GRID);
    if sup.value < 2.0 * inf {
        return LemmaOutcome::Skipped {
            reason: format!("sup {} below twice inf {inf}", sup.value),
        };
    }
    let integral = simpson(|x| curve.d1(x).abs(), b.lo(), b.hi(), 2048);
    // here the estimated sup sits on the small side, so subtract its error
    if sup.value - sup.grid_err <= 2.0 * integral {
        LemmaOutcome::Verified {
            margin: 2.0 * integral - sup.value,
        }
    } else {
        LemmaOutcome::Violated {
            gap: sup.value - 2.0 * integral,
        }
    }
}

/// Aggregate of a seeded lower-bound battery run.
#[derive(Clone, Debug, Serialize)]
pub struct BatteryReport {
    pub trials: usize,
    pub checks: u64,
    pub violations: u64,
    /// Smallest signed slack `optimistic_sup - bound` seen (negative would
    /// be a violation).
    pub worst_margin: f64,
    pub skipped: u64,
}

/// Seeded random checks of the four sup lower bounds behind the
/// non-divergence estimate, for a curve with curvature window lower bound
/// `c1` on its domain:
///
/// - `sup |a g1' + b g2'| >= c1 |B| / (2 M)`
/// - `sup |a g1 + b g2 + c| >= c1 |B|^2 / (32 M)`
/// - `sup |(f + a x + b) f''| >= c1^2 |B|^2 / 32`
/// - `sup |grad~(u.hat-g, w.hat-g)| >= min(c1^2 |B|^2 / 32, c1 |B| / (2 M))`
///
/// with `a^2 + b^2 >= 1`, integer `u ^ w != 0`, and `M = sqrt(1 + 4 L^2)`.
pub fn lemma_lower_bounds_battery(
    curve: &Curve,
    c1: f64,
    trials: usize,
    seed: u64,
) -> BatteryReport {
    let g = GMap::new(curve);
    let dom = curve.domain();
    let m = (1.0 + 4.0 * dom.max_abs() * dom.max_abs()).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BatteryReport {
        trials,
        checks: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        skipped: 0,
    };
    let record = |report: &mut BatteryReport, sup_opt: f64, bound: f64| {
        report.checks += 1;
        let margin = sup_opt - bound;
        if margin < report.worst_margin {
            report.worst_margin = margin;
        }
        if margin < 0.0 {
            report.violations += 1;
        }
    };
    for _ in 0..trials {
        let b = random_subinterval(&mut rng, dom, 1e-3);
        let len = b.length();
        // coefficients with a^2 + b^2 >= 1, scaled up when the draw lands
        // inside the unit disc
        let (mut ca, mut cb) = (rng.gen_range(-3.0f64..3.0), rng.gen_range(-3.0f64..3.0));
        let norm = (ca * ca + cb * cb).sqrt();
        if norm < 1.0 {
            if norm == 0.0 {
                ca = 1.0;
            } else {
                ca /= norm;
                cb /= norm;
            }
        }
        let cc = rng.gen_range(-3.0..3.0);

        let sup = sup_abs_refined(|x| ca * g.g1d(x) + cb * g.g2d(x), b, SUP_GRID);
        record(&mut report, sup.value + sup.grid_err, c1 * len / (2.0 * m));

        let sup = sup_abs_refined(|x| ca * g.g1(x) + cb * g.g2(x) + cc, b, SUP_GRID);
        record(&mut report, sup.value + sup.grid_err, c1 * len * len / (32.0 * m));

        let curve_ref = &g;
        let sup = sup_abs_refined(
            |x| (curve_ref.curve().eval(x) + ca * x + cb) * curve_ref.curve().d2(x),
            b,
            SUP_GRID,
        );
        record(&mut report, sup.value + sup.grid_err, c1 * c1 * len * len / 32.0);

        let (u, w) = loop {
            let rv = |rng: &mut ChaCha8Rng| -> Vec3i {
                [
                    rng.gen_range(-5i64..=5),
                    rng.gen_range(-5i64..=5),
                    rng.gen_range(-5i64..=5),
                ]
            };
            let (u, w) = (rv(&mut rng), rv(&mut rng));
            if wedge2_int(u, w) != [0, 0, 0] {
                break (u, w);
            }
            report.skipped += 1;
        };
        let sup = sup_abs_refined(
            |x| {
                crate::lattice::skew_gradient(&g, u, w, x)
                    .map(|s| s.via_formula)
                    .unwrap_or(f64::NAN)
            },
            b,
            SUP_GRID,
        );
        let bound = (c1 * c1 * len * len / 32.0).min(c1 * len / (2.0 * m));
        record(&mut report, sup.value + sup.grid_err, bound);
    }
    report
}

/// A seeded random polynomial of degree exactly `k` with coefficients in
/// `[-2, 2]` (leading coefficient bounded away from zero).
pub fn random_polynomial(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut coeffs: Vec<f64> = (0..=k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let lead = rng.gen_range(0.25..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    coeffs[k] = lead;
    coeffs
}

pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
