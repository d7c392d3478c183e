//! Bump-kernel convolution smoothing.
//!
//! The pipeline is: extend the curve to the line by constants
//! ([`extend_constant`]), convolve with the scaled bump kernel
//! ([`mollify`]), and check that the curvature window survived on the
//! 2-epsilon-shrunk interval. Derivatives of the mollified curve come from
//! differentiating the kernel (quadrature against `B'` and `B''`), not from
//! finite-differencing the quadrature output.
//!
//! All kernel integrals use the composite trapezoid rule on `[-1, 1]`: the
//! integrands are smooth with all derivatives vanishing at the endpoints,
//! where the trapezoid rule converges faster than any power of the step.

use crate::curves::{Curve, CurveKind};
use crate::interval::Interval;
use crate::sample::trapezoid;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MollifyError {
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("quad_nodes must be at least 16, got {0}")]
    TooFewNodes(usize),
}

/// Smooth bump supported on `[-1, 1]`:
/// `exp(-1/(x-1)^2 - 1/(x+1)^2)` inside, `0` outside. Peak value `e^-2`.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let g = -1.0 / ((x - 1.0) * (x - 1.0)) - 1.0 / ((x + 1.0) * (x + 1.0));
    g.exp()
}

// Writing B = exp(g) with g = -(x-1)^-2 - (x+1)^-2:
//   B'  = g' B,              g'  =  2(x-1)^-3 + 2(x+1)^-3
//   B'' = (g'' + g'^2) B,    g'' = -6(x-1)^-4 - 6(x+1)^-4
// Below the exp underflow threshold the polynomial factors cannot lift the
// product above 1e-300, so the early zero return is exact in doubles and
// avoids overflow of g'^2 right at the support boundary.
const UNDERFLOW_G: f64 = -700.0;

/// First derivative of the bump kernel.
pub fn bump_d1(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let (u, v) = (x - 1.0, x + 1.0);
    let g = -1.0 / (u * u) - 1.0 / (v * v);
    if g < UNDERFLOW_G {
        return 0.0;
    }
    let gd = 2.0 / (u * u * u) + 2.0 / (v * v * v);
    gd * g.exp()
}

/// Second derivative of the bump kernel.
pub fn bump_d2(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let (u, v) = (x - 1.0, x + 1.0);
    let g = -1.0 / (u * u) - 1.0 / (v * v);
    if g < UNDERFLOW_G {
        return 0.0;
    }
    let gd = 2.0 / (u * u * u) + 2.0 / (v * v * v);
    let gdd = -6.0 / (u * u * u * u) - 6.0 / (v * v * v * v);
    (gdd + gd * gd) * g.exp()
}

/// The kernel mass `w = int_{-1}^{1} B`, computed once.
pub fn bump_mass() -> f64 {
    static W: OnceLock<f64> = OnceLock::new();
    *W.get_or_init(|| trapezoid(bump, -1.0, 1.0, 4096))
}

/// Reference value for `w`, agreed by independent quadrature routes.
pub const BUMP_MASS_REF: f64 = 0.084_389_600_748_097_41;

/// Continuous extension of a curve to the whole line by its endpoint values.
/// The result is C^0; its derivative closures are zero outside the domain.
pub fn extend_constant(curve: &Curve) -> Curve {
    let iv = curve.domain();
    let (x1, x2) = (iv.lo(), iv.hi());
    let inner = curve.clone();
    let inner1 = curve.clone();
    let inner2 = curve.clone();
    Curve::from_fns(
        move |x| inner.eval(x.clamp(x1, x2)),
        move |x| if (x1..=x2).contains(&x) { inner1.d1(x) } else { 0.0 },
        move |x| if (x1..=x2).contains(&x) { inner2.d2(x) } else { 0.0 },
        iv,
        CurveKind::Sampled,
    )
}

#[derive(Clone, Copy, Debug)]
pub struct MollifySpec {
    pub epsilon: f64,
    /// Trapezoid panels on `[-1, 1]` per kernel integral.
    pub quad_nodes: usize,
    /// Desired uniform closeness `sup |f_eps - fhat|`; when set, the result
    /// reports whether the sampled closeness met it.
    pub target_eta: Option<f64>,
}

impl MollifySpec {
    pub fn new(epsilon: f64) -> MollifySpec {
        MollifySpec {
            epsilon,
            quad_nodes: 512,
            target_eta: None,
        }
    }
}

/// A mollified curve together with the sampled closeness achieved.
#[derive(Clone, Debug)]
pub struct Mollified {
    pub curve: Curve,
    /// Sampled `sup |f_eps - fhat|` over the domain (257-point grid).
    pub achieved_eta: f64,
    /// Whether `achieved_eta <= target_eta`, when a target was given.
    pub eta_met: Option<bool>,
}

/// Convolve with the scaled bump: `f_eps(x) = (1/w) int B(z) fhat(x - eps z) dz`.
/// `fhat` must be meaningfully evaluable on all reals (the output of
/// [`extend_constant`] or of Taylor extension).
pub fn mollify(fhat: &Curve, spec: &MollifySpec) -> Result<Mollified, MollifyError> {
    if !(spec.epsilon > 0.0 && spec.epsilon.is_finite()) {
        return Err(MollifyError::BadEpsilon(spec.epsilon));
    }
    if spec.quad_nodes < 16 {
        return Err(MollifyError::TooFewNodes(spec.quad_nodes));
    }
    let eps = spec.epsilon;
    let n = spec.quad_nodes;
    let w = bump_mass();
    let conv = |kernel: fn(f64) -> f64, scale: f64, f: Curve| {
        move |x: f64| trapezoid(|z| kernel(z) * f.eval(x - eps * z), -1.0, 1.0, n) / scale
    };
    let curve = Curve::from_fns(
        conv(bump, w, fhat.clone()),
        conv(bump_d1, w * eps, fhat.clone()),
        conv(bump_d2, w * eps * eps, fhat.clone()),
        fhat.domain(),
        CurveKind::Sampled,
    );
    let achieved_eta = fhat
        .domain()
        .grid(256)
        .map(|x| (curve.eval(x) - fhat.eval(x)).abs())
        .fold(0.0, f64::max);
    let eta_met = spec.target_eta.map(|t| achieved_eta <= t);
    Ok(Mollified {
        curve,
        achieved_eta,
        eta_met,
    })
}

/// Sampled modulus of continuity of `fhat` at scale `eps`, padded by the
/// grid resolution error so it upper-bounds the true modulus at sampling
/// accuracy.
pub fn sampled_modulus(fhat: &Curve, eps: f64, domain: Interval) -> f64 {
    let lo = domain.lo() - eps;
    let hi = domain.hi() + eps;
    let span = hi - lo;
    // window of 64 neighbors on each side covers offsets up to eps
    let h = (eps / 64.0).max(span / 200_000.0);
    let n = (span / h).ceil() as usize + 1;
    let vals: Vec<f64> = (0..n).map(|i| fhat.eval(lo + i as f64 * h)).collect();
    let window = (eps / h).floor() as usize;
    let mut omega = 0.0f64;
    let mut lip = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..(i + 1 + window).min(n) {
            omega = omega.max((vals[j] - vals[i]).abs());
        }
        if i + 1 < n {
            lip = lip.max((vals[i + 1] - vals[i]).abs() / h);
        }
    }
    omega + lip * h
}

/// Pick `eps` by bisection so the sampled modulus of continuity stays below
/// `target_eta`. Returns the largest such scale found (at bisection
/// resolution); the modulus is monotone in `eps`.
pub fn choose_epsilon(fhat: &Curve, target_eta: f64, domain: Interval) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = domain.length().max(1e-12);
    if sampled_modulus(fhat, hi, domain) <= target_eta {
        return hi;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if sampled_modulus(fhat, mid, domain) <= target_eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Convenience: constant-extend then mollify.
pub fn mollify_curve(curve: &Curve, spec: &MollifySpec) -> Result<Mollified, MollifyError> {
    mollify(&extend_constant(curve), spec)
}

/// The interval shrunk on both sides by `margin` (e.g. `2 * eps`, where the
/// curvature window provably survives), `None` when nothing is left.
pub fn shrink(iv: Interval, margin: f64) -> Option<Interval> {
    Interval::new(iv.lo() + margin, iv.hi() - margin).ok()
}

/// The same curve with a smaller nominal domain, sharing closures. Used to
/// run class checks on the shrunk interval.
pub fn restrict(curve: &Curve, iv: Interval) -> Curve {
    let inner = curve.clone();
    let inner1 = curve.clone();
    let inner2 = curve.clone();
    Curve::from_fns(
        move |x| inner.eval(x),
        move |x| inner1.d1(x),
        move |x| inner2.d2(x),
        iv,
        curve.kind(),
    )
}
