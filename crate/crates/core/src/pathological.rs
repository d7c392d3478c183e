//! A weakly non-degenerate curve whose second derivative fails to exist on a
//! dense set.
//!
//! The construction: enumerate a dense set of rationals `a_n` in `(x1, x2)`,
//! give each a summable weight `c_n`, and build the step function
//! `t(x) = 1 + sum of c_n over a_n < x`. Integrating twice gives a C^1
//! function `f` with `f' = v` strictly increasing and a curvature jump of
//! size `c_n` at every `a_n`. Only finite truncations `t_N, v_N, f_N` are
//! represented; every evaluator returns a value together with a rigorous
//! one-sided tail bound (`t_N <= t <= t_N + tail`).
//!
//! Breakpoints are stored sorted with prefix sums, so each query is a binary
//! search. When the query point is rational the evaluators also run in exact
//! rational arithmetic, feeding the exact counting path.

use crate::curves::{Curve, CurveKind};
use crate::interval::Interval;
use crate::rat::{rat, rat_from_f64, rat_int, rat_to_f64, Rat};
use num_traits::Zero;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PathologicalError {
    #[error("need x1 < x2, got [{0}, {1}]")]
    EmptyInterval(f64, f64),
    #[error("breakpoint index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("probe window of half-width {delta} around {center} contains breakpoint #{intruder_index} at {intruder_position}")]
    WindowNotClear {
        center: f64,
        delta: f64,
        intruder_index: usize,
        intruder_position: f64,
    },
    #[error("probe point {0} is outside [{1}, {2}]")]
    OutsideDomain(f64, f64, f64),
}

/// Weight sequence `c_n` with a closed-form tail bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    /// `c_n = n^-2`, tail over `n > N` bounded by `1/N`.
    InverseSquare,
    /// `c_n = 2^-n`, tail over `n > N` equal to `2^-N`.
    PowerOfTwo,
}

impl WeightScheme {
    pub fn weight(self, n: usize) -> Rat {
        match self {
            WeightScheme::InverseSquare => rat(1, (n * n) as i64),
            WeightScheme::PowerOfTwo => rat(1, 1i64 << n.min(62)),
        }
    }

    /// Upper bound on the discarded mass `sum of c_n over n > trunc`,
    /// monotone decreasing in `trunc`.
    pub fn tail_bound(self, trunc: usize) -> f64 {
        match self {
            WeightScheme::InverseSquare => 1.0 / trunc.max(1) as f64,
            WeightScheme::PowerOfTwo => 0.5f64.powi(trunc.min(1022) as i32),
        }
    }
}

/// The dense enumeration: Calkin-Wilf order on the positive rationals,
/// mapped into `(x1, x2)` by `r -> x1 + (x2 - x1) * r / (1 + r)`. Injective
/// (the map is strictly increasing in `r` and the enumeration hits every
/// positive rational exactly once) and dense.
#[derive(Clone, Debug)]
pub struct DenseSetSpec {
    pub x1: f64,
    pub x2: f64,
    pub scheme: WeightScheme,
}

impl DenseSetSpec {
    pub fn new(x1: f64, x2: f64, scheme: WeightScheme) -> Result<Self, PathologicalError> {
        if !(x1.is_finite() && x2.is_finite() && x1 < x2) {
            return Err(PathologicalError::EmptyInterval(x1, x2));
        }
        Ok(DenseSetSpec { x1, x2, scheme })
    }

    /// The first `n` points of the enumeration, as exact rationals.
    fn points(&self, n: usize) -> Vec<Rat> {
        let x1 = rat_from_f64(self.x1).expect("finite");
        let width = rat_from_f64(self.x2).expect("finite") - &x1;
        let mut out = Vec::with_capacity(n);
        let (mut a, mut b) = (1i64, 1i64);
        for _ in 0..n {
            // s = a / (a + b) in (0, 1)
            let s = rat(a, a + b);
            out.push(&x1 + &width * s);
            let k = a / b;
            let next_den = (2 * k + 1) * b - a;
            a = b;
            b = next_den;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Breakpoint {
    /// Position `a_n` (exact and rounded).
    pub position: Rat,
    pub position_f64: f64,
    /// Weight `c_n` (exact and rounded).
    pub weight: Rat,
    pub weight_f64: f64,
    /// 1-based index in the enumeration.
    pub index: usize,
}

struct ExactPrefixes {
    c: Vec<Rat>,
    ca: Vec<Rat>,
    ca2: Vec<Rat>,
}

/// Finite truncation of the singular construction, with prefix sums for
/// logarithmic-time evaluation.
pub struct TruncatedSingular {
    spec: DenseSetSpec,
    n_terms: usize,
    /// Sorted by position.
    breaks: Vec<Breakpoint>,
    /// Sorted-array position of enumeration index `k` (1-based).
    by_index: Vec<usize>,
    prefix_c: Vec<f64>,
    prefix_ca: Vec<f64>,
    prefix_ca2: Vec<f64>,
    t_total: f64,
    tail: f64,
    exact: OnceLock<ExactPrefixes>,
}

/// `(value, err)` pair: the truncation is a one-sided approximation, the
/// true quantity lies in `[value, value + err]`.
pub type Approx = (f64, f64);

impl TruncatedSingular {
    pub fn new(spec: DenseSetSpec, n_terms: usize) -> Result<Arc<Self>, PathologicalError> {
        let positions = spec.points(n_terms);
        let mut breaks: Vec<Breakpoint> = positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| {
                let weight = spec.scheme.weight(i + 1);
                Breakpoint {
                    position_f64: rat_to_f64(&position),
                    weight_f64: rat_to_f64(&weight),
                    position,
                    weight,
                    index: i + 1,
                }
            })
            .collect();
        breaks.sort_by(|a, b| a.position.cmp(&b.position));
        let mut by_index = vec![0usize; n_terms];
        for (sorted_pos, b) in breaks.iter().enumerate() {
            by_index[b.index - 1] = sorted_pos;
        }
        let mut prefix_c = Vec::with_capacity(n_terms + 1);
        let mut prefix_ca = Vec::with_capacity(n_terms + 1);
        let mut prefix_ca2 = Vec::with_capacity(n_terms + 1);
        prefix_c.push(0.0);
        prefix_ca.push(0.0);
        prefix_ca2.push(0.0);
        for b in &breaks {
            prefix_c.push(prefix_c.last().unwrap() + b.weight_f64);
            prefix_ca.push(prefix_ca.last().unwrap() + b.weight_f64 * b.position_f64);
            prefix_ca2
                .push(prefix_ca2.last().unwrap() + b.weight_f64 * b.position_f64 * b.position_f64);
        }
        let t_total = *prefix_c.last().unwrap();
        let tail = spec.scheme.tail_bound(n_terms);
        Ok(Arc::new(TruncatedSingular {
            spec,
            n_terms,
            breaks,
            by_index,
            prefix_c,
            prefix_ca,
            prefix_ca2,
            t_total,
            tail,
            exact: OnceLock::new(),
        }))
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breaks
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// `T_N`: total truncated weight.
    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    /// Upper bound on the mass dropped by the truncation.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.spec.x1, self.spec.x2).expect("validated")
    }

    /// Number of breakpoints strictly below `x` (the paper's sum runs over
    /// `a < x`, so a query exactly at a breakpoint excludes its weight).
    fn count_below(&self, x: f64) -> usize {
        self.breaks.partition_point(|b| b.position_f64 < x)
    }

    fn exact_prefixes(&self) -> &ExactPrefixes {
        self.exact.get_or_init(|| {
            let n = self.breaks.len();
            let mut c = Vec::with_capacity(n + 1);
            let mut ca = Vec::with_capacity(n + 1);
            let mut ca2 = Vec::with_capacity(n + 1);
            c.push(Rat::zero());
            ca.push(Rat::zero());
            ca2.push(Rat::zero());
            for b in &self.breaks {
                c.push(c.last().unwrap() + &b.weight);
                ca.push(ca.last().unwrap() + &b.weight * &b.position);
                ca2.push(ca2.last().unwrap() + &b.weight * &b.position * &b.position);
            }
            ExactPrefixes { c, ca, ca2 }
        })
    }

    fn count_below_exact(&self, x: &Rat) -> usize {
        self.breaks.partition_point(|b| b.position < *x)
    }

    /// `t_N(x) = 1 + sum of c_n over a_n < x`; true `t` is within `err`
    /// above.
    pub fn t_eval(&self, x: f64) -> Approx {
        let k = self.count_below(x);
        (1.0 + self.prefix_c[k], self.tail)
    }

    /// `v_N(x) = integral of t_N from x1`: piecewise linear, strictly
    /// increasing.
    pub fn v_eval(&self, x: f64) -> Approx {
        let k = self.count_below(x);
        let value = (x - self.spec.x1) + self.prefix_c[k] * x - self.prefix_ca[k];
        (value, self.tail * (x - self.spec.x1))
    }

    /// `f_N(x) = integral of v_N from x1`: piecewise quadratic, C^1.
    pub fn f_eval(&self, x: f64) -> Approx {
        let k = self.count_below(x);
        let d = x - self.spec.x1;
        let value = 0.5 * d * d
            + 0.5 * (self.prefix_c[k] * x * x - 2.0 * self.prefix_ca[k] * x + self.prefix_ca2[k]);
        (value, 0.5 * self.tail * d * d)
    }

    pub fn t_eval_exact(&self, x: &Rat) -> Rat {
        let k = self.count_below_exact(x);
        rat_int(1) + &self.exact_prefixes().c[k]
    }

    pub fn v_eval_exact(&self, x: &Rat) -> Rat {
        let k = self.count_below_exact(x);
        let p = self.exact_prefixes();
        let x1 = rat_from_f64(self.spec.x1).expect("finite");
        (x - x1) + &p.c[k] * x - &p.ca[k]
    }

    pub fn f_eval_exact(&self, x: &Rat) -> Rat {
        let k = self.count_below_exact(x);
        let p = self.exact_prefixes();
        let x1 = rat_from_f64(self.spec.x1).expect("finite");
        let d = x - x1;
        let half = rat(1, 2);
        &half * &d * &d + half * (&p.c[k] * x * x - rat_int(2) * &p.ca[k] * x + &p.ca2[k])
    }

    /// Symmetric slope-difference probe at the `k`-th enumerated breakpoint:
    /// `[v(a+d) - v(a)]/d - [v(a) - v(a-d)]/d`. Exactly `c_k` on the
    /// truncation whenever no other breakpoint lies strictly inside the
    /// window.
    pub fn jump_probe(&self, k: usize, delta: f64) -> Result<f64, PathologicalError> {
        if k == 0 || k > self.n_terms {
            return Err(PathologicalError::IndexOutOfRange(k, self.n_terms));
        }
        let sorted_pos = self.by_index[k - 1];
        let a = self.breaks[sorted_pos].position_f64;
        self.check_window(a, delta, Some(sorted_pos))?;
        Ok(self.slope_difference(a, delta))
    }

    /// The same probe at an arbitrary point of the domain.
    pub fn jump_probe_at(&self, x: f64, delta: f64) -> Result<f64, PathologicalError> {
        let dom = self.domain();
        if !dom.contains(x) {
            return Err(PathologicalError::OutsideDomain(x, dom.lo(), dom.hi()));
        }
        let exclude = self
            .breaks
            .binary_search_by(|b| b.position_f64.total_cmp(&x))
            .ok();
        self.check_window(x, delta, exclude)?;
        Ok(self.slope_difference(x, delta))
    }

    fn slope_difference(&self, a: f64, delta: f64) -> f64 {
        let (vp, _) = self.v_eval(a + delta);
        let (v0, _) = self.v_eval(a);
        let (vm, _) = self.v_eval(a - delta);
        (vp - v0) / delta - (v0 - vm) / delta
    }

    fn check_window(
        &self,
        center: f64,
        delta: f64,
        exclude: Option<usize>,
    ) -> Result<(), PathologicalError> {
        let lo = self.breaks.partition_point(|b| b.position_f64 <= center - delta);
        let hi = self.breaks.partition_point(|b| b.position_f64 < center + delta);
        for i in lo..hi {
            if Some(i) != exclude {
                return Err(PathologicalError::WindowNotClear {
                    center,
                    delta,
                    intruder_index: self.breaks[i].index,
                    intruder_position: self.breaks[i].position_f64,
                });
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for TruncatedSingular {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TruncatedSingular")
            .field("n_terms", &self.n_terms)
            .field("t_total", &self.t_total)
            .field("tail", &self.tail)
            .finish()
    }
}

/// Curve adapter: `f = f_N` with `f' = v_N` and `f'' = t_N` (where defined),
/// usable by every other module, including the exact counting path.
pub fn curve(ts: &Arc<TruncatedSingular>) -> Curve {
    let dom = ts.domain();
    let (t0, t1, t2, tr) = (ts.clone(), ts.clone(), ts.clone(), ts.clone());
    Curve::from_fns(
        move |x| t0.f_eval(x).0,
        move |x| t1.v_eval(x).0,
        move |x| t2.t_eval(x).0,
        dom,
        CurveKind::ExactElementary,
    )
    .with_rational(Arc::new(move |x| tr.f_eval_exact(x)), CurveKind::ExactElementary)
}
