//! Enumerate and count rational points near a curve.
//!
//! A triple `(q, p1, p2)` is counted when `c*Q < q <= Q`, `p1/q` lies in the
//! closed window `J`, `|f(p1/q) - p2/q| <= delta/Q` and `gcd(q, p1, p2) = 1`.
//! All threshold comparisons are non-strict, matching the displayed
//! inequalities that define the sets.
//!
//! Two arithmetic modes:
//!
//! - **exact**: for curves with exact rational evaluation (polynomials with
//!   rational coefficients, the pathological construction) the inequality is
//!   decided in rational arithmetic, so counts carry no floating-point
//!   ambiguity;
//! - **float**: plain doubles, with candidates inside a small margin band of
//!   the threshold counted as hits *and* tallied separately, so a report can
//!   flag itself as margin-sensitive.
//!
//! [`brute_force_oracle`] re-derives the same sets by scanning the whole
//! `p2` box with direct inequality checks and no window arithmetic; it is
//! the independent verification path and is deliberately slow.

use crate::curves::Curve;
use crate::interval::{Interval, IntervalUnion};
use crate::rat::{ceil_i64, floor_i64, rat_from_f64, rat_int, rat_to_f64, Rat};
use num_integer::Integer;
use num_traits::Signed;
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CountError {
    #[error("Q must be finite and at least 1, got {0}")]
    BadQ(f64),
    #[error("delta must be finite and nonnegative, got {0}")]
    BadDelta(f64),
    #[error("cutoff factor must satisfy 0 <= c < 1, got {0}")]
    BadCutoff(f64),
    #[error("rho must be positive, got {0}")]
    BadRho(f64),
    #[error("exact mode requires a curve with exact rational evaluation")]
    ExactUnsupported,
    #[error("brute-force oracle guard: Q = {0} exceeds the cap of {1}")]
    OracleGuard(f64, f64),
    #[error("integer range overflow while enumerating")]
    Overflow,
}

/// A coprime integer triple representing the rational point
/// `(p1/q, p2/q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RationalTriple {
    pub q: i64,
    pub p1: i64,
    pub p2: i64,
}

impl RationalTriple {
    pub fn x(&self) -> f64 {
        self.p1 as f64 / self.q as f64
    }

    pub fn y(&self) -> f64 {
        self.p2 as f64 / self.q as f64
    }
}

pub fn gcd3(q: i64, p1: i64, p2: i64) -> i64 {
    q.gcd(&p1).gcd(&p2)
}

/// Default margin factor for float-mode threshold comparisons.
pub const FLOAT_MARGIN: f64 = 1e-12;

/// Default cap on the number of triples retained in reports.
pub const TRIPLE_CAP: usize = 100_000;

#[derive(Clone, Debug)]
pub enum Arithmetic {
    /// Rational comparisons; `delta` is the exact threshold numerator.
    Exact { delta: Rat },
    /// Double comparisons with a relative margin band near the threshold.
    Float { margin: f64 },
}

impl Arithmetic {
    pub fn mode_name(&self) -> &'static str {
        match self {
            Arithmetic::Exact { .. } => "exact",
            Arithmetic::Float { .. } => "float",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CountParams {
    pub q_max: f64,
    pub delta: f64,
    /// Lower cutoff factor: only `q > c * q_max` is enumerated.
    pub c: f64,
    pub j: Interval,
    pub arithmetic: Arithmetic,
    pub triple_cap: usize,
}

impl CountParams {
    fn validate(q_max: f64, delta: f64, c: f64) -> Result<(), CountError> {
        if !(q_max.is_finite() && q_max >= 1.0) {
            return Err(CountError::BadQ(q_max));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(CountError::BadDelta(delta));
        }
        if !(0.0..1.0).contains(&c) {
            return Err(CountError::BadCutoff(c));
        }
        Ok(())
    }

    /// Exact-arithmetic parameters. `q_max` is taken at its exact double
    /// value; `delta` is an arbitrary rational.
    pub fn exact(q_max: f64, delta: Rat, c: f64, j: Interval) -> Result<Self, CountError> {
        let delta_f = rat_to_f64(&delta);
        Self::validate(q_max, delta_f, c)?;
        Ok(CountParams {
            q_max,
            delta: delta_f,
            c,
            j,
            arithmetic: Arithmetic::Exact { delta },
            triple_cap: TRIPLE_CAP,
        })
    }

    /// Float-arithmetic parameters with the default margin band.
    pub fn float(q_max: f64, delta: f64, c: f64, j: Interval) -> Result<Self, CountError> {
        Self::validate(q_max, delta, c)?;
        Ok(CountParams {
            q_max,
            delta,
            c,
            j,
            arithmetic: Arithmetic::Float { margin: FLOAT_MARGIN },
            triple_cap: TRIPLE_CAP,
        })
    }

    /// Integer `q` range `(c*Q, Q]`; empty when `hi < lo`.
    pub fn q_range(&self) -> (i64, i64) {
        let hi = self.q_max.floor() as i64;
        let cq = self.c * self.q_max;
        let lo = (cq.floor() as i64 + 1).max(1);
        (lo, hi)
    }

    fn threshold_f64(&self) -> f64 {
        self.delta / self.q_max
    }
}

/// Enumeration result: the triples in canonical `(q, p1, p2)` order plus
/// the number of float-mode candidates that fell inside the margin band.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Enumeration {
    pub triples: Vec<RationalTriple>,
    pub boundary_hits: u64,
}

/// Exactly the triples of the near-curve set, scanned in deterministic
/// `(q, p1, p2)` order.
pub fn enumerate_r(curve: &Curve, params: &CountParams) -> Result<Enumeration, CountError> {
    let (q_lo, q_hi) = params.q_range();
    enumerate_q_range(curve, params, q_lo, q_hi, false)
}

/// The same enumeration restricted to a `q` sub-range; shards over disjoint
/// sub-ranges merge to the identical set.
pub fn enumerate_r_shard(
    curve: &Curve,
    params: &CountParams,
    q_from: i64,
    q_to: i64,
) -> Result<Enumeration, CountError> {
    let (q_lo, q_hi) = params.q_range();
    enumerate_q_range(curve, params, q_from.max(q_lo), q_to.min(q_hi), false)
}

fn enumerate_q_range(
    curve: &Curve,
    params: &CountParams,
    q_lo: i64,
    q_hi: i64,
    wide: bool,
) -> Result<Enumeration, CountError> {
    match &params.arithmetic {
        Arithmetic::Exact { delta } => {
            enumerate_exact(curve, params, delta, q_lo, q_hi, wide)
        }
        Arithmetic::Float { margin } => {
            Ok(enumerate_float(curve, params, *margin, q_lo, q_hi, wide))
        }
    }
}

/// `wide` switches the vertical threshold to `1 + delta/Q` (the enlarged
/// set used by the closure-margin computation).
fn enumerate_exact(
    curve: &Curve,
    params: &CountParams,
    delta: &Rat,
    q_lo: i64,
    q_hi: i64,
    wide: bool,
) -> Result<Enumeration, CountError> {
    if !curve.has_rational_eval() {
        return Err(CountError::ExactUnsupported);
    }
    let q_max = rat_from_f64(params.q_max).ok_or(CountError::BadQ(params.q_max))?;
    let mut threshold = delta / &q_max;
    if wide {
        threshold += rat_int(1);
    }
    let j_lo = rat_from_f64(params.j.lo()).ok_or(CountError::Overflow)?;
    let j_hi = rat_from_f64(params.j.hi()).ok_or(CountError::Overflow)?;
    let mut out = Enumeration::default();
    for q in q_lo..=q_hi {
        let qr = rat_int(q);
        let p1_lo = ceil_i64(&(&qr * &j_lo)).ok_or(CountError::Overflow)?;
        let p1_hi = floor_i64(&(&qr * &j_hi)).ok_or(CountError::Overflow)?;
        for p1 in p1_lo..=p1_hi {
            let x = Rat::new(p1.into(), q.into());
            let y = curve.eval_rational(&x).ok_or(CountError::ExactUnsupported)?;
            let lo = (&y - &threshold) * &qr;
            let hi = (&y + &threshold) * &qr;
            let p2_lo = ceil_i64(&lo).ok_or(CountError::Overflow)?;
            let p2_hi = floor_i64(&hi).ok_or(CountError::Overflow)?;
            for p2 in p2_lo..=p2_hi {
                if gcd3(q, p1, p2) == 1 {
                    out.triples.push(RationalTriple { q, p1, p2 });
                }
            }
        }
    }
    Ok(out)
}

fn enumerate_float(
    curve: &Curve,
    params: &CountParams,
    margin: f64,
    q_lo: i64,
    q_hi: i64,
    wide: bool,
) -> Enumeration {
    let mut threshold = params.threshold_f64();
    if wide {
        threshold += 1.0;
    }
    let (j_lo, j_hi) = (params.j.lo(), params.j.hi());
    let mut out = Enumeration::default();
    for q in q_lo..=q_hi {
        let qf = q as f64;
        let p1_from = (qf * j_lo).floor() as i64 - 1;
        let p1_to = (qf * j_hi).ceil() as i64 + 1;
        for p1 in p1_from..=p1_to {
            let p1f = p1 as f64;
            if p1f < qf * j_lo || p1f > qf * j_hi {
                continue;
            }
            let y = curve.eval(p1f / qf);
            if !y.is_finite() {
                continue;
            }
            let m = margin * (1.0 + y.abs());
            let p2_from = (qf * (y - threshold)).floor() as i64 - 1;
            let p2_to = (qf * (y + threshold)).ceil() as i64 + 1;
            for p2 in p2_from..=p2_to {
                let dist = (y - p2 as f64 / qf).abs();
                if dist <= threshold + m {
                    if (dist - threshold).abs() < m {
                        out.boundary_hits += 1;
                    }
                    if gcd3(q, p1, p2) == 1 {
                        out.triples.push(RationalTriple { q, p1, p2 });
                    }
                }
            }
        }
    }
    out
}

/// Parameter echo carried by every report.
#[derive(Clone, Debug, Serialize)]
pub struct ParamsEcho {
    pub q_max: f64,
    pub delta: f64,
    pub c: f64,
    pub j_lo: f64,
    pub j_hi: f64,
    pub mode: String,
}

impl ParamsEcho {
    fn of(params: &CountParams) -> ParamsEcho {
        ParamsEcho {
            q_max: params.q_max,
            delta: params.delta,
            c: params.c,
            j_lo: params.j.lo(),
            j_hi: params.j.hi(),
            mode: params.arithmetic.mode_name().to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub n: u64,
    /// Retained when the count stays within the cap.
    pub triples: Option<Vec<RationalTriple>>,
    /// Float-mode candidates within the margin band of the threshold; a
    /// nonzero value flags the count as margin-sensitive.
    pub boundary_hits: u64,
    /// Whether `delta/Q < 1/2` held, in which case each `(q, p1)` admits at
    /// most one `p2` and the triple count equals the point count.
    pub unique_p2_regime: bool,
    pub params: ParamsEcho,
}

/// Count near-curve triples with no lower `q` cutoff.
pub fn count_n(curve: &Curve, params: &CountParams) -> Result<CountReport, CountError> {
    let mut params = params.clone();
    params.c = 0.0;
    let enumeration = enumerate_r(curve, &params)?;
    let n = enumeration.triples.len() as u64;
    Ok(CountReport {
        n,
        triples: (enumeration.triples.len() <= params.triple_cap).then_some(enumeration.triples),
        boundary_hits: enumeration.boundary_hits,
        unique_p2_regime: params.threshold_f64() < 0.5,
        params: ParamsEcho::of(&params),
    })
}

/// Union of `rho`-balls around the abscissas `p1/q`, clipped to `J` and
/// maximally merged.
pub fn delta_union(
    triples: &[RationalTriple],
    rho: f64,
    j: Interval,
) -> Result<IntervalUnion, CountError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(CountError::BadRho(rho));
    }
    let balls = triples
        .iter()
        .filter_map(|t| {
            let x = t.x();
            Interval::new(x - rho, x + rho).ok()?.intersect(&j)
        })
        .collect();
    Ok(IntervalUnion::from_intervals(balls))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureMargin {
    /// Smallest slack `|f(p1/q) - p2/q| - delta/Q` over the enlarged set
    /// minus the near-curve set; any perturbation uniformly closer than
    /// `min(1, eps_star)` cannot add triples. Infinite when the difference
    /// set is empty.
    pub eps_star: f64,
    pub r_star_size: usize,
}

/// The enlarged set uses threshold `1 + delta/Q` and the non-strict lower
/// cutoff `c*Q <= q`.
pub fn closure_margin(
    curve_bar: &Curve,
    params: &CountParams,
) -> Result<ClosureMargin, CountError> {
    let near: BTreeSet<RationalTriple> =
        enumerate_r(curve_bar, params)?.triples.into_iter().collect();
    let (q_lo, q_hi) = params.q_range();
    // non-strict lower cutoff: include q = c*Q when integral
    let cq = params.c * params.q_max;
    let q_lo_star = if cq.fract() == 0.0 && cq >= 1.0 {
        (cq as i64).min(q_lo).max(1)
    } else {
        q_lo
    };
    let star = enumerate_q_range(curve_bar, params, q_lo_star, q_hi, true)?;
    let threshold = params.threshold_f64();
    let mut eps_star = f64::INFINITY;
    for t in &star.triples {
        if near.contains(t) {
            continue;
        }
        let slack = match &params.arithmetic {
            Arithmetic::Exact { delta } => {
                let x = Rat::new(t.p1.into(), t.q.into());
                let y = curve_bar.eval_rational(&x).ok_or(CountError::ExactUnsupported)?;
                let dist = (y - Rat::new(t.p2.into(), t.q.into())).abs();
                let q_max = rat_from_f64(params.q_max).ok_or(CountError::BadQ(params.q_max))?;
                rat_to_f64(&(dist - delta / q_max))
            }
            Arithmetic::Float { .. } => {
                let dist = (curve_bar.eval(t.x()) - t.y()).abs();
                dist - threshold
            }
        };
        if slack < eps_star {
            eps_star = slack;
        }
    }
    Ok(ClosureMargin {
        eps_star,
        r_star_size: star.triples.len(),
    })
}

/// Cap on `Q` for the brute-force oracle (the scan is cubic-ish).
pub const ORACLE_Q_CAP: f64 = 2000.0;

/// Independent verification path: a triple loop over `q`, every `p1` with
/// `p1/q` in `J`, and every `p2` in the box `|p2| <= q * max|f| + slack`,
/// testing the defining inequality directly. Shares no window arithmetic
/// with [`enumerate_r`].
pub fn brute_force_oracle(
    curve: &Curve,
    params: &CountParams,
) -> Result<Vec<RationalTriple>, CountError> {
    if params.q_max > ORACLE_Q_CAP {
        return Err(CountError::OracleGuard(params.q_max, ORACLE_Q_CAP));
    }
    // conservative bound on max |f| over J: fine grid plus sampled-slope
    // safety so no admissible p2 is missed
    let n_grid = 4096;
    let h = params.j.length() / n_grid as f64;
    let mut fmax = 0.0f64;
    let mut lip = 0.0f64;
    let mut prev = f64::NAN;
    for x in params.j.grid(n_grid) {
        let v = curve.eval(x).abs();
        fmax = fmax.max(v);
        if prev.is_finite() && h > 0.0 {
            lip = lip.max((v - prev).abs() / h);
        }
        prev = v;
    }
    let fmax = fmax + lip * h / 2.0 + 1e-9;
    let threshold_f = params.threshold_f64();
    let (q_lo, q_hi) = params.q_range();
    let mut out = Vec::new();
    for q in q_lo..=q_hi {
        let qf = q as f64;
        let p2_cap = (qf * (fmax + threshold_f)).floor() as i64 + 1;
        let p1_from = (qf * params.j.lo()).floor() as i64 - 1;
        let p1_to = (qf * params.j.hi()).ceil() as i64 + 1;
        for p1 in p1_from..=p1_to {
            match &params.arithmetic {
                Arithmetic::Exact { delta } => {
                    let x = Rat::new(p1.into(), q.into());
                    let j_lo = rat_from_f64(params.j.lo()).ok_or(CountError::Overflow)?;
                    let j_hi = rat_from_f64(params.j.hi()).ok_or(CountError::Overflow)?;
                    if x < j_lo || x > j_hi {
                        continue;
                    }
                    let y = curve.eval_rational(&x).ok_or(CountError::ExactUnsupported)?;
                    let q_max = rat_from_f64(params.q_max).ok_or(CountError::BadQ(params.q_max))?;
                    let threshold = delta / q_max;
                    for p2 in -p2_cap..=p2_cap {
                        let dist = (&y - Rat::new(p2.into(), q.into())).abs();
                        if dist <= threshold && gcd3(q, p1, p2) == 1 {
                            out.push(RationalTriple { q, p1, p2 });
                        }
                    }
                }
                Arithmetic::Float { margin } => {
                    let p1f = p1 as f64;
                    if p1f < qf * params.j.lo() || p1f > qf * params.j.hi() {
                        continue;
                    }
                    let y = curve.eval(p1f / qf);
                    if !y.is_finite() {
                        continue;
                    }
                    let m = margin * (1.0 + y.abs());
                    for p2 in -p2_cap..=p2_cap {
                        let dist = (y - p2 as f64 / qf).abs();
                        if dist <= threshold_f + m && gcd3(q, p1, p2) == 1 {
                            out.push(RationalTriple { q, p1, p2 });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn parabola(j: Interval) -> Curve {
        Curve::parse("x^2", j).unwrap()
    }

    #[test]
    fn hand_count_anchor() {
        // J = [0, 1/2], Q = 1: only q = 1, p1 = 0, f(0) = 0 -> (1, 0, 0)
        let j = iv(0.0, 0.5);
        let curve = parabola(j);
        let params = CountParams::exact(1.0, rat(1, 2), 0.0, j).unwrap();
        let e = enumerate_r(&curve, &params).unwrap();
        assert_eq!(e.triples, vec![RationalTriple { q: 1, p1: 0, p2: 0 }]);
        let report = count_n(&curve, &params).unwrap();
        assert_eq!(report.n, 1);
        assert_eq!(report.boundary_hits, 0);
    }

    #[test]
    fn float_and_exact_agree_away_from_boundaries() {
        let j = iv(0.0, 1.0);
        let curve = parabola(j);
        let exact = CountParams::exact(17.0, rat(3, 10), 0.0, j).unwrap();
        let float = CountParams::float(17.0, 0.3, 0.0, j).unwrap();
        let a = enumerate_r(&curve, &exact).unwrap().triples;
        let b = enumerate_r(&curve, &float).unwrap().triples;
        // delta = 0.3 is not a dyadic, so thresholds differ in the last ulp;
        // tolerate only boundary-band discrepancies
        let sa: BTreeSet<_> = a.iter().collect();
        let sb: BTreeSet<_> = b.iter().collect();
        let sym_diff = sa.symmetric_difference(&sb).count();
        assert!(sym_diff <= 2, "unexpected disagreement: {sym_diff}");
    }

    #[test]
    fn oracle_matches_enumeration_exact_mode() {
        let j = iv(0.0, 1.0);
        let curve = parabola(j);
        for (q_max, delta) in [(3.0, rat(1, 1)), (20.0, rat(1, 4)), (50.0, rat(1, 2))] {
            let params = CountParams::exact(q_max, delta, 0.0, j).unwrap();
            let fast = enumerate_r(&curve, &params).unwrap().triples;
            let slow = brute_force_oracle(&curve, &params).unwrap();
            assert_eq!(fast, slow, "Q={q_max}");
        }
    }

    #[test]
    fn oracle_respects_cutoff() {
        let j = iv(0.0, 1.0);
        let curve = parabola(j);
        let params = CountParams::exact(10.0, rat(1, 2), 0.45, j).unwrap();
        let fast = enumerate_r(&curve, &params).unwrap().triples;
        let slow = brute_force_oracle(&curve, &params).unwrap();
        assert_eq!(fast, slow);
        assert!(fast.iter().all(|t| t.q > 4 && t.q <= 10));
    }

    #[test]
    fn threshold_dominating_distance_includes_every_coprime_triple() {
        // delta/Q = 4 >= max|f| + 1 on [0,1]: every (q, p1) pairs with all
        // p2 in reach; check q <= 2 triples are present
        let j = iv(0.0, 1.0);
        let curve = parabola(j);
        let params = CountParams::exact(2.0, rat(8, 1), 0.0, j).unwrap();
        let got = enumerate_r(&curve, &params).unwrap().triples;
        for t in [
            RationalTriple { q: 1, p1: 0, p2: 0 },
            RationalTriple { q: 1, p1: 1, p2: 1 },
            RationalTriple { q: 2, p1: 1, p2: 1 },
        ] {
            assert!(got.contains(&t), "{t:?} missing");
        }
        // and nothing outside the vertical window
        for t in &got {
            assert!((curve.eval(t.x()) - t.y()).abs() <= 4.0 + 1e-12);
        }
    }

    #[test]
    fn empty_q_range_counts_zero() {
        let j = iv(10.0, 10.0);
        let curve = parabola(iv(0.0, 20.0));
        // J = single point 10; q = 1 gives p1 = 10
        let params = CountParams::exact(1.0, rat(1, 2), 0.0, j).unwrap();
        let report = count_n(&curve, &params).unwrap();
        assert_eq!(report.n, 1);
        let nothing = CountParams::exact(1.0, rat(1, 100), 0.0, iv(0.1, 0.2)).unwrap();
        assert_eq!(count_n(&curve, &nothing).unwrap().n, 0);
    }

    #[test]
    fn monotone_in_delta_and_j() {
        let j = iv(0.0, 1.0);
        let curve = parabola(j);
        let small = CountParams::exact(40.0, rat(1, 8), 0.0, iv(0.1, 0.6)).unwrap();
        let big_delta = CountParams::exact(40.0, rat(1, 2), 0.0, iv(0.1, 0.6)).unwrap();
        let big_j = CountParams::exact(40.0, rat(1, 8), 0.0, j).unwrap();
        let base: BTreeSet<_> = enumerate_r(&curve, &small).unwrap().triples.into_iter().collect();
        let d: BTreeSet<_> = enumerate_r(&curve, &big_delta).unwrap().triples.into_iter().collect();
        let w: BTreeSet<_> = enumerate_r(&curve, &big_j).unwrap().triples.into_iter().collect();
        assert!(base.is_subset(&d));
        assert!(base.is_subset(&w));
        // growing Q at a fixed vertical threshold delta/Q only adds triples
        let tall = CountParams::exact(60.0, rat(3, 16), 0.0, iv(0.1, 0.6)).unwrap();
        let tall_set: BTreeSet<_> =
            enumerate_r(&curve, &tall).unwrap().triples.into_iter().collect();
        let short = CountParams::exact(40.0, rat(1, 8), 0.0, iv(0.1, 0.6)).unwrap();
        let short_set: BTreeSet<_> =
            enumerate_r(&curve, &short).unwrap().triples.into_iter().collect();
        assert!(short_set.is_subset(&tall_set));
    }

    #[test]
    fn shard_merge_is_deterministic() {
        let j = iv(0.0, 1.0);
        let curve = parabola(j);
        let params = CountParams::exact(60.0, rat(1, 3), 0.0, j).unwrap();
        let whole = enumerate_r(&curve, &params).unwrap().triples;
        for shards in [2usize, 3, 7] {
            let (q_lo, q_hi) = params.q_range();
            let span = (q_hi - q_lo + 1).max(1);
            let mut merged = Vec::new();
            for s in 0..shards {
                let from = q_lo + span * s as i64 / shards as i64;
                let to = q_lo + span * (s as i64 + 1) / shards as i64 - 1;
                merged.extend(enumerate_r_shard(&curve, &params, from, to).unwrap().triples);
            }
            merged.sort();
            assert_eq!(merged, whole, "shards = {shards}");
        }
    }

    #[test]
    fn delta_union_examples() {
        let j = iv(0.0, 1.0);
        let one = vec![RationalTriple { q: 1, p1: 0, p2: 0 }];
        let u = delta_union(&one, 0.1, j).unwrap();
        assert!((u.measure() - 0.1).abs() < 1e-15, "half ball clipped at 0");

        let two = vec![
            RationalTriple { q: 1, p1: 0, p2: 0 },
            RationalTriple { q: 20, p1: 1, p2: 0 },
        ];
        let u = delta_union(&two, 0.1, j).unwrap();
        assert_eq!(u.parts().len(), 1);
        assert!((u.measure() - 0.15).abs() < 1e-15, "merged balls at 0 and 0.05");

        let u = delta_union(&one, 2.0, j).unwrap();
        assert!((u.measure() - j.length()).abs() < 1e-15, "saturation at |J|");

        assert_eq!(delta_union(&one, 0.0, j).unwrap_err(), CountError::BadRho(0.0));
    }

    #[test]
    fn closure_margin_parabola() {
        let j = iv(0.0, 0.5);
        let curve = parabola(j);
        let params = CountParams::exact(1.0, rat(1, 10), 0.0, j).unwrap();
        let m = closure_margin(&curve, &params).unwrap();
        // R* holds (1,0,0) plus the vertically displaced (1,0,+-1)
        assert!(m.r_star_size >= 3);
        assert!(m.eps_star > 0.0);
        assert!(m.eps_star.is_finite());
        // hand margin: nearest non-member is (1,0,1) at distance 1 - 1/10...
        // |0 - 1| - 0.1 = 0.9
        assert!((m.eps_star - 0.9).abs() < 1e-12, "{}", m.eps_star);
    }

    #[test]
    fn oracle_guard_refuses_large_q() {
        let j = iv(0.0, 1.0);
        let curve = parabola(j);
        let params = CountParams::float(5000.0, 0.5, 0.0, j).unwrap();
        assert!(matches!(
            brute_force_oracle(&curve, &params),
            Err(CountError::OracleGuard(..))
        ));
    }

    #[test]
    fn count_params_validation() {
        let j = iv(0.0, 1.0);
        assert!(matches!(CountParams::float(0.5, 0.1, 0.0, j), Err(CountError::BadQ(_))));
        assert!(matches!(CountParams::float(2.0, -0.1, 0.0, j), Err(CountError::BadDelta(_))));
        assert!(matches!(CountParams::float(2.0, 0.1, 1.0, j), Err(CountError::BadCutoff(_))));
    }

    #[test]
    fn exact_mode_requires_rational_curve() {
        let j = iv(0.0, 1.0);
        let curve = Curve::parse("exp(x)", j).unwrap();
        let params = CountParams::exact(5.0, rat(1, 2), 0.0, j).unwrap();
        assert_eq!(enumerate_r(&curve, &params).unwrap_err(), CountError::ExactUnsupported);
    }
}
