//! Curve representation and curvature-class membership tests.
//!
//! A [`Curve`] is an evaluable function with first and second derivatives
//! (exact where available, central finite differences otherwise) on a
//! compact domain. The class tests are samplers, not proofs: the defining
//! inequalities are universally quantified and cannot be decided from point
//! samples, so every report carries its sample count, tolerance and worst
//! witness.

use crate::expr::{CompiledExpr, ParseError};
use crate::interval::Interval;
use crate::rat::{poly_derivative, poly_eval, Rat};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("class bounds must satisfy c2 >= c1 > 0, got c1={0}, c2={1}")]
    BadClassBounds(f64, f64),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("interval [{0}, {1}] is not inside the curve domain [{2}, {3}]")]
    OutsideDomain(f64, f64, f64, f64),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// How the curve's values and derivatives are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveKind {
    /// Polynomial with rational coefficients; derivatives are symbolic and
    /// evaluation at rational points is exact.
    ExactPolynomial,
    /// Elementary closed form with symbolic (or otherwise exact) derivatives.
    ExactElementary,
    /// Values only; derivatives fall back to central finite differences.
    Sampled,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type RatFn = Arc<dyn Fn(&Rat) -> Rat + Send + Sync>;

/// Relative finite-difference step: `h = FD_REL_STEP * (|x| + 1)`.
pub const FD_REL_STEP: f64 = 1e-5;

#[derive(Clone)]
pub struct Curve {
    eval: RealFn,
    d1: RealFn,
    d2: RealFn,
    rational: Option<RatFn>,
    domain: Interval,
    kind: CurveKind,
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Curve")
            .field("domain", &self.domain)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Curve {
    pub fn from_fns(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: Interval,
        kind: CurveKind,
    ) -> Curve {
        Curve {
            eval: Arc::new(eval),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            rational: None,
            domain,
            kind,
        }
    }

    /// Values only; derivatives by central finite differences with relative
    /// step [`FD_REL_STEP`].
    pub fn sampled(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: Interval,
    ) -> Curve {
        let f: RealFn = Arc::new(eval);
        let f1 = f.clone();
        let f2 = f.clone();
        Curve {
            eval: f,
            d1: Arc::new(move |x| {
                let h = FD_REL_STEP * (x.abs() + 1.0);
                (f1(x + h) - f1(x - h)) / (2.0 * h)
            }),
            d2: Arc::new(move |x| {
                let h = FD_REL_STEP * (x.abs() + 1.0);
                (f2(x + h) - 2.0 * f2(x) + f2(x - h)) / (h * h)
            }),
            rational: None,
            domain,
            kind: CurveKind::Sampled,
        }
    }

    /// Polynomial with rational coefficients (ascending degree). Exact
    /// derivatives and exact evaluation at rational points.
    pub fn polynomial(coeffs: Vec<Rat>, domain: Interval) -> Curve {
        let d1c = poly_derivative(&coeffs);
        let d2c = poly_derivative(&d1c);
        let cf: Vec<f64> = coeffs.iter().map(crate::rat::rat_to_f64).collect();
        let d1f: Vec<f64> = d1c.iter().map(crate::rat::rat_to_f64).collect();
        let d2f: Vec<f64> = d2c.iter().map(crate::rat::rat_to_f64).collect();
        let horner = |c: Vec<f64>| move |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x + k);
        let coeffs = Arc::new(coeffs);
        Curve {
            eval: Arc::new(horner(cf)),
            d1: Arc::new(horner(d1f)),
            d2: Arc::new(horner(d2f)),
            rational: Some(Arc::new(move |x| poly_eval(&coeffs, x))),
            domain,
            kind: CurveKind::ExactPolynomial,
        }
    }

    /// Build from a compiled expression; polynomial expressions get the
    /// exact rational path.
    pub fn from_compiled(c: CompiledExpr, domain: Interval) -> Curve {
        if let Some(poly) = &c.poly {
            return Curve::polynomial(poly.as_ref().clone(), domain);
        }
        let (e, d1, d2) = (c.expr, c.d1, c.d2);
        Curve {
            eval: Arc::new(move |x| e.eval(x)),
            d1: Arc::new(move |x| d1.eval(x)),
            d2: Arc::new(move |x| d2.eval(x)),
            rational: None,
            domain,
            kind: CurveKind::ExactElementary,
        }
    }

    pub fn parse(src: &str, domain: Interval) -> Result<Curve, CurveError> {
        Ok(Curve::from_compiled(CompiledExpr::parse(src)?, domain))
    }

    pub(crate) fn with_rational(mut self, f: RatFn, kind: CurveKind) -> Curve {
        self.rational = Some(f);
        self.kind = kind;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }

    /// Exact value at a rational point, when the curve supports it.
    pub fn eval_rational(&self, x: &Rat) -> Option<Rat> {
        self.rational.as_ref().map(|f| f(x))
    }

    pub fn has_rational_eval(&self) -> bool {
        self.rational.is_some()
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// Grid estimate of `max |f|` over an interval.
    pub fn sup_abs_on(&self, iv: Interval, n: usize) -> f64 {
        iv.grid(n.max(2))
            .map(|x| self.eval(x).abs())
            .fold(0.0, f64::max)
    }
}

/// Outcome of a sampled class test.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub passed: bool,
    /// The sampled quotient closest to (or furthest beyond) the allowed
    /// window.
    pub worst_quotient: f64,
    pub worst_location: f64,
    pub samples_used: usize,
    pub tolerance: f64,
    /// Which sign of `f` the verdict refers to: the class conditions are
    /// accepted up to global sign.
    pub sign: i8,
    /// Pairs discarded because the offset fell below the resolution floor.
    pub skipped: usize,
}

fn class_tolerance(c2: f64) -> f64 {
    1e-9 * (1.0 + c2.abs())
}

fn validate_class(
    curve: &Curve,
    iv: &Interval,
    c1: f64,
    c2: f64,
) -> Result<(), CurveError> {
    if !(c1 > 0.0 && c2 >= c1) {
        return Err(CurveError::BadClassBounds(c1, c2));
    }
    if !curve.domain.contains_interval(iv) {
        return Err(CurveError::OutsideDomain(
            iv.lo(),
            iv.hi(),
            curve.domain.lo(),
            curve.domain.hi(),
        ));
    }
    Ok(())
}

/// How far a sample lies outside `[c1, c2]` (negative when inside), less
/// the sample's own floating-point error allowance: a quotient may only be
/// blamed beyond what cancellation can explain.
fn violation(v: f64, err: f64, c1: f64, c2: f64) -> f64 {
    if !v.is_finite() {
        f64::INFINITY
    } else {
        (c1 - v).max(v - c2) - err
    }
}

/// Sample record: location, quotient, numeric error allowance.
type QuotientSample = (f64, f64, f64);

fn pick_sign(samples: &[QuotientSample], c1: f64, c2: f64, tol: f64) -> (bool, f64, f64, i8) {
    // worst witness for f and for -f; pass whichever sign fits
    let assess = |sign: f64| {
        samples
            .iter()
            .map(|&(x, q, err)| (violation(sign * q, err, c1, c2), x, sign * q))
            .fold(
                (f64::NEG_INFINITY, f64::NAN, f64::NAN),
                |acc, (s, x, q)| if s > acc.0 { (s, x, q) } else { acc },
            )
    };
    let plus = assess(1.0);
    let minus = assess(-1.0);
    let (best, sign) = if plus.0 <= minus.0 {
        (plus, 1i8)
    } else {
        (minus, -1i8)
    };
    (best.0 <= tol, best.2, best.1, sign)
}

/// Sample `|f''|` on an equispaced grid and test `c1 <= |f''| <= c2`.
pub fn check_second_derivative_class(
    curve: &Curve,
    iv: Interval,
    c1: f64,
    c2: f64,
    grid_n: usize,
) -> Result<ClassReport, CurveError> {
    validate_class(curve, &iv, c1, c2)?;
    if grid_n < 2 {
        return Err(CurveError::TooFewSamples { min: 2, got: grid_n });
    }
    let tol = class_tolerance(c2);
    let mut worst = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
    for x in iv.grid(grid_n - 1) {
        let v = curve.d2(x).abs();
        let s = violation(v, 0.0, c1, c2);
        if s > worst.0 {
            worst = (s, x, v);
        }
    }
    Ok(ClassReport {
        passed: worst.0 <= tol,
        worst_quotient: worst.2,
        worst_location: worst.1,
        samples_used: grid_n,
        tolerance: tol,
        sign: 1,
        skipped: 0,
    })
}

/// Resolution floor for difference-quotient offsets, relative to `|I|`.
pub const QUOTIENT_DELTA_FLOOR: f64 = 1e-6;

/// Seeded random second-difference quotients
/// `(f(x+d) - 2 f(x) + f(x-d)) / d^2` with `x +- d` in `I`, accepted up to
/// sign.
pub fn check_convexity_quotient(
    curve: &Curve,
    iv: Interval,
    c1: f64,
    c2: f64,
    sample_pairs: usize,
    seed: u64,
) -> Result<ClassReport, CurveError> {
    validate_class(curve, &iv, c1, c2)?;
    let floor = QUOTIENT_DELTA_FLOOR * iv.length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(sample_pairs + 1);
    let mut skipped = 0usize;
    // endpoint pair: x +- d hits both ends of I exactly
    if iv.length() > 0.0 {
        let x = iv.midpoint();
        let d = iv.length() / 2.0;
        samples.push(second_quotient(curve, x, d));
    }
    for _ in 0..sample_pairs {
        let x = rng.gen_range(iv.lo()..=iv.hi());
        let dmax = (x - iv.lo()).min(iv.hi() - x);
        if dmax < floor {
            skipped += 1;
            continue;
        }
        let d = rng.gen_range(floor..=dmax);
        samples.push(second_quotient(curve, x, d));
    }
    let tol = class_tolerance(c2);
    let (passed, worst_q, worst_x, sign) = pick_sign(&samples, c1, c2, tol);
    Ok(ClassReport {
        passed,
        worst_quotient: worst_q,
        worst_location: worst_x,
        samples_used: samples.len(),
        tolerance: tol,
        sign,
        skipped,
    })
}

/// Second difference quotient with its cancellation error allowance: the
/// three values round at machine precision, which divides by `d^2`.
fn second_quotient(curve: &Curve, x: f64, d: f64) -> QuotientSample {
    let (a, b, c) = (curve.eval(x + d), curve.eval(x), curve.eval(x - d));
    let q = (a - 2.0 * b + c) / (d * d);
    let err = 4.0 * f64::EPSILON * (a.abs() + 2.0 * b.abs() + c.abs()) / (d * d);
    (x, q, err)
}

fn derivative_quotient(curve: &Curve, x: f64, d: f64) -> QuotientSample {
    let (a, b) = (curve.d1(x + d), curve.d1(x));
    let q = (a - b) / d;
    let err = 4.0 * f64::EPSILON * (a.abs() + b.abs()) / d;
    (x, q, err)
}

/// Seeded random first-derivative difference quotients
/// `(f'(x+d) - f'(x)) / d` with `x, x+d` in `I`, accepted up to sign.
pub fn check_derivative_quotient(
    curve: &Curve,
    iv: Interval,
    c1: f64,
    c2: f64,
    sample_pairs: usize,
    seed: u64,
) -> Result<ClassReport, CurveError> {
    validate_class(curve, &iv, c1, c2)?;
    let floor = QUOTIENT_DELTA_FLOOR * iv.length();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(sample_pairs + 1);
    let mut skipped = 0usize;
    if iv.length() > 0.0 {
        // full-span pair touching both endpoints
        samples.push(derivative_quotient(curve, iv.lo(), iv.length()));
    }
    for _ in 0..sample_pairs {
        let x = rng.gen_range(iv.lo()..=iv.hi());
        let dmax = iv.hi() - x;
        if dmax < floor {
            skipped += 1;
            continue;
        }
        let d = rng.gen_range(floor..=dmax);
        samples.push(derivative_quotient(curve, x, d));
    }
    let tol = class_tolerance(c2);
    let (passed, worst_q, worst_x, sign) = pick_sign(&samples, c1, c2, tol);
    Ok(ClassReport {
        passed,
        worst_quotient: worst_q,
        worst_location: worst_x,
        samples_used: samples.len(),
        tolerance: tol,
        sign,
        skipped,
    })
}

/// Extend a curve to the whole real line by its degree-2 Taylor polynomials
/// at the domain endpoints. The result is C^2 across the seams and keeps the
/// original values (and exact rational evaluation, where present) inside the
/// domain; rational evaluation outside the original domain is not supported.
pub fn extend_taylor(curve: &Curve) -> Curve {
    let iv = curve.domain;
    let (x1, x2) = (iv.lo(), iv.hi());
    let left = (curve.eval(x1), curve.d1(x1), curve.d2(x1));
    let right = (curve.eval(x2), curve.d1(x2), curve.d2(x2));
    let taylor = |c: (f64, f64, f64), z: f64, x: f64| {
        let t = x - z;
        c.0 + c.1 * t + 0.5 * c.2 * t * t
    };
    let taylor_d1 = |c: (f64, f64, f64), z: f64, x: f64| c.1 + c.2 * (x - z);
    let inner = curve.clone();
    let inner1 = curve.clone();
    let inner2 = curve.clone();
    Curve {
        eval: Arc::new(move |x| {
            if x < x1 {
                taylor(left, x1, x)
            } else if x > x2 {
                taylor(right, x2, x)
            } else {
                inner.eval(x)
            }
        }),
        d1: Arc::new(move |x| {
            if x < x1 {
                taylor_d1(left, x1, x)
            } else if x > x2 {
                taylor_d1(right, x2, x)
            } else {
                inner1.d1(x)
            }
        }),
        d2: Arc::new(move |x| {
            if x < x1 {
                left.2
            } else if x > x2 {
                right.2
            } else {
                inner2.d2(x)
            }
        }),
        rational: curve.rational.clone(),
        domain: iv,
        kind: curve.kind,
    }
}

/// A named curve with hand-derived class bounds, used across the test
/// batteries.
#[derive(Clone, Debug)]
pub struct BatteryCurve {
    pub name: &'static str,
    pub curve: Curve,
    pub c1: f64,
    pub c2: f64,
}

/// Ten curves with known `c1 <= |f''| <= c2` windows on their domains.
pub fn standard_battery() -> Vec<BatteryCurve> {
    let iv = |a, b| Interval::new(a, b).unwrap();
    let c = |src: &str, dom| Curve::parse(src, dom).unwrap();
    vec![
        BatteryCurve { name: "parabola", curve: c("x^2", iv(-1.0, 1.0)), c1: 2.0, c2: 2.0 },
        BatteryCurve { name: "half-parabola", curve: c("x^2/2", iv(0.0, 1.0)), c1: 1.0, c2: 1.0 },
        BatteryCurve { name: "cubic-plus-linear", curve: c("x^3/3+x", iv(1.0, 2.0)), c1: 2.0, c2: 4.0 },
        BatteryCurve { name: "cubic", curve: c("x^3", iv(1.0, 2.0)), c1: 6.0, c2: 12.0 },
        BatteryCurve { name: "quartic", curve: c("x^4", iv(1.0, 2.0)), c1: 12.0, c2: 48.0 },
        BatteryCurve { name: "exponential", curve: c("exp(x)", iv(0.0, 1.0)), c1: 1.0, c2: std::f64::consts::E },
        BatteryCurve { name: "sine-arc", curve: c("sin(x)", iv(0.2, 1.2)), c1: 0.19866933079506122, c2: 0.9320390859672263 },
        BatteryCurve { name: "log-shift", curve: c("log(x+2)", iv(-1.0, 1.0)), c1: 1.0 / 9.0, c2: 1.0 },
        BatteryCurve { name: "wobbly-parabola", curve: c("x^2+sin(x)/2", iv(-1.0, 1.0)), c1: 1.5, c2: 2.5 },
        BatteryCurve { name: "sqrt-shift", curve: c("sqrt(x+2)", iv(-1.0, 1.0)), c1: 0.048112522432468816, c2: 0.25 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn second_derivative_class_parabola() {
        let c = Curve::parse("x^2", iv(-1.0, 1.0)).unwrap();
        let r = check_second_derivative_class(&c, iv(-1.0, 1.0), 2.0, 2.0, 64).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn second_derivative_class_cubic_on_shifted_interval() {
        let c = Curve::parse("x^3", iv(1.0, 2.0)).unwrap();
        let r = check_second_derivative_class(&c, iv(1.0, 2.0), 6.0, 12.0, 64).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn second_derivative_class_fails_near_flat_point() {
        // f'' = 6x < 0.5 for x < 1/12
        let c = Curve::parse("x^3", iv(0.0, 1.0)).unwrap();
        let r = check_second_derivative_class(&c, iv(0.0, 1.0), 0.5, 6.0, 129).unwrap();
        assert!(!r.passed);
        assert!(r.worst_location < 1.0 / 12.0, "{r:?}");
        assert!(r.worst_quotient < 0.5);
    }

    #[test]
    fn convexity_quotient_exact_for_parabola() {
        let c = Curve::parse("x^2", iv(-1.0, 1.0)).unwrap();
        let r = check_convexity_quotient(&c, iv(-1.0, 1.0), 2.0, 2.0, 500, 7).unwrap();
        assert!(r.passed, "{r:?}");
        // cancellation at the delta floor limits attainable accuracy
        assert!((r.worst_quotient - 2.0).abs() < 1e-3);
    }

    #[test]
    fn convexity_quotient_rejects_abs() {
        let c = Curve::sampled(|x: f64| x.abs(), iv(-1.0, 1.0));
        let r = check_convexity_quotient(&c, iv(-1.0, 1.0), 0.1, 10.0, 2000, 11).unwrap();
        // the quotient at x=0 is 2/d, which blows past c2 for small d
        assert!(!r.passed, "{r:?}");
    }

    #[test]
    fn derivative_quotient_sign_normalized() {
        let c = Curve::parse("x^2/2", iv(-1.0, 1.0)).unwrap();
        let r = check_derivative_quotient(&c, iv(-1.0, 1.0), 1.0, 1.0, 200, 3).unwrap();
        assert!(r.passed && r.sign == 1, "{r:?}");

        let c = Curve::parse("-x^2", iv(-1.0, 1.0)).unwrap();
        let r = check_derivative_quotient(&c, iv(-1.0, 1.0), 2.0, 2.0, 200, 3).unwrap();
        assert!(r.passed && r.sign == -1, "{r:?}");
    }

    #[test]
    fn derivative_quotient_quartic() {
        // f'' = 12x^2 in [12, 48] on [1,2]; mean-value puts quotients there
        let c = Curve::parse("x^4", iv(1.0, 2.0)).unwrap();
        let r = check_derivative_quotient(&c, iv(1.0, 2.0), 12.0, 48.0, 500, 5).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn class_checks_validate_inputs() {
        let c = Curve::parse("x^2", iv(0.0, 1.0)).unwrap();
        assert!(matches!(
            check_second_derivative_class(&c, iv(0.0, 1.0), 0.0, 1.0, 8),
            Err(CurveError::BadClassBounds(..))
        ));
        assert!(matches!(
            check_second_derivative_class(&c, iv(0.0, 2.0), 1.0, 2.0, 8),
            Err(CurveError::OutsideDomain(..))
        ));
        assert!(matches!(
            check_second_derivative_class(&c, iv(0.0, 1.0), 1.0, 2.0, 1),
            Err(CurveError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn non_finite_samples_reported_not_crashed() {
        let c = Curve::sampled(|x: f64| (x - 0.5).ln(), iv(0.0, 1.0));
        let r = check_second_derivative_class(&c, iv(0.0, 1.0), 0.1, 10.0, 33).unwrap();
        assert!(!r.passed);
        assert!(!r.worst_quotient.is_finite());
        assert!(r.worst_location.is_finite());
    }

    #[test]
    fn finite_differences_match_symbolic_on_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let polys = ["x^2", "x^3/3+x", "1/2*x^2+3/7", "x^4-2*x+1/3"];
        for src in polys {
            let exact = Curve::parse(src, iv(-2.0, 2.0)).unwrap();
            let e2 = exact.clone();
            let fd = Curve::sampled(move |x| e2.eval(x), iv(-2.0, 2.0));
            for _ in 0..100 {
                let x = rng.gen_range(-2.0..2.0);
                let (d1e, d1f) = (exact.d1(x), fd.d1(x));
                assert!(
                    (d1e - d1f).abs() <= 1e-6 * (1.0 + d1e.abs()),
                    "{src} d1 at {x}: {d1e} vs {d1f}"
                );
                let (d2e, d2f) = (exact.d2(x), fd.d2(x));
                assert!(
                    (d2e - d2f).abs() <= 1e-4 * (1.0 + d2e.abs()),
                    "{src} d2 at {x}: {d2e} vs {d2f}"
                );
            }
        }
    }

    #[test]
    fn class_tests_agree_on_battery() {
        // if the grid |f''| test passes with (c1, c2), the quotient test
        // passes with the same window (mean-value consequence)
        for b in standard_battery() {
            let dom = b.curve.domain();
            let grid = check_second_derivative_class(&b.curve, dom, b.c1, b.c2, 257).unwrap();
            assert!(grid.passed, "{} grid: {grid:?}", b.name);
            let quot = check_convexity_quotient(&b.curve, dom, b.c1, b.c2, 400, 17).unwrap();
            assert!(quot.passed, "{} quotient: {quot:?}", b.name);
            let dq = check_derivative_quotient(&b.curve, dom, b.c1, b.c2, 400, 19).unwrap();
            assert!(dq.passed, "{} derivative quotient: {dq:?}", b.name);
        }
    }

    #[test]
    fn extend_taylor_of_quadratic_is_itself() {
        let c = Curve::parse("x^2", iv(0.0, 1.0)).unwrap();
        let ext = extend_taylor(&c);
        for &x in &[-3.0, -0.5, 0.0, 0.3, 1.0, 2.0, 10.0] {
            assert!((ext.eval(x) - x * x).abs() <= 1e-12 * (1.0 + x * x), "x={x}");
        }
    }

    #[test]
    fn extend_taylor_cubic_hand_value() {
        // T2 at x1=1 of x^3 evaluated at 0: 1 - 3 + 3 = 1
        let c = Curve::parse("x^3", iv(1.0, 2.0)).unwrap();
        let ext = extend_taylor(&c);
        assert!((ext.eval(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extend_taylor_seams_are_c2() {
        let c = Curve::parse("exp(x)", iv(0.0, 1.0)).unwrap();
        let ext = extend_taylor(&c);
        let h = 1e-7;
        for &z in &[0.0, 1.0] {
            assert!((ext.eval(z - h) - ext.eval(z + h)).abs() < 1e-6);
            assert!((ext.d1(z - h) - ext.d1(z + h)).abs() < 1e-6);
            assert!((ext.d2(z - h) - ext.d2(z + h)).abs() < 1e-6);
        }
    }

    #[test]
    fn extend_taylor_identical_inside_domain() {
        let c = Curve::parse("exp(x)*sin(x)", iv(0.0, 1.0)).unwrap();
        let ext = extend_taylor(&c);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            // bit-identical on the original domain
            assert_eq!(ext.eval(x).to_bits(), c.eval(x).to_bits());
        }
    }

    #[test]
    fn rational_eval_on_polynomials() {
        let c = Curve::polynomial(vec![rat(3, 7), rat_int(0), rat(1, 2)], iv(0.0, 1.0));
        let v = c.eval_rational(&rat(2, 3)).unwrap();
        assert_eq!(v, rat(41, 63));
        assert_eq!(c.kind(), CurveKind::ExactPolynomial);
    }
}
