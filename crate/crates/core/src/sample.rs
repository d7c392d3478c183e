//! Grid-based sup estimation and quadrature helpers shared by the lemma
//! checks and the goodness battery.

use crate::interval::Interval;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A certified-from-below sup estimate: `value` is an attained sample (so a
/// genuine lower bound for the true sup), `grid_err` bounds how far the true
/// sup can exceed it, via the sampled Lipschitz constant.
#[derive(Clone, Copy, Debug)]
pub struct SupEstimate {
    pub value: f64,
    pub grid_err: f64,
    pub argmax: f64,
}

/// Default grid resolution for sup estimation.
pub const SUP_GRID: usize = 1024;

/// Estimate `sup |f|` over `b`: uniform grid plus one ternary refinement
/// around the grid argmax. Violation checks must subtract `grid_err` before
/// declaring a bound broken.
pub fn sup_abs_refined(f: impl Fn(f64) -> f64, b: Interval, n: usize) -> SupEstimate {
    let n = n.max(8);
    let h = b.length() / n as f64;
    let mut best = (f(b.lo()).abs(), b.lo());
    let mut prev = best.0;
    let mut lip = 0.0f64;
    let mut best_idx = 0usize;
    for i in 1..=n {
        let x = if i == n { b.hi() } else { b.lo() + i as f64 * h };
        let v = f(x).abs();
        if h > 0.0 {
            lip = lip.max((v - prev).abs() / h);
        }
        prev = v;
        if v > best.0 {
            best = (v, x);
            best_idx = i;
        }
    }
    // refine in the bracket around the argmax
    let mut lo = b.lo() + best_idx.saturating_sub(1) as f64 * h;
    let mut hi = (b.lo() + (best_idx + 1) as f64 * h).min(b.hi());
    for _ in 0..48 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let (v1, v2) = (f(m1).abs(), f(m2).abs());
        if v1 > best.0 {
            best = (v1, m1);
        }
        if v2 > best.0 {
            best = (v2, m2);
        }
        if v1 < v2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    SupEstimate {
        value: best.0,
        grid_err: lip * h / 2.0,
        argmax: best.1,
    }
}

/// Grid estimate of `inf |f|` over `b` (an upper bound for the true inf).
pub fn inf_abs_grid(f: impl Fn(f64) -> f64, b: Interval, n: usize) -> f64 {
    b.grid(n.max(8))
        .map(|x| f(x).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Composite trapezoid rule with `n` panels.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

/// Composite Simpson rule with `n` panels (`n` rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1usize;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// A random subinterval of `i` with length at least `min_frac * |i|`,
/// endpoints uniform. Used by the lemma and goodness batteries.
pub fn random_subinterval(rng: &mut ChaCha8Rng, i: Interval, min_frac: f64) -> Interval {
    let min_len = min_frac * i.length();
    loop {
        let a = rng.gen_range(i.lo()..=i.hi());
        let b = rng.gen_range(i.lo()..=i.hi());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if hi - lo >= min_len {
            return Interval::new(lo, hi).unwrap();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_estimate_finds_interior_peak() {
        let b = Interval::new(0.0, 1.0).unwrap();
        // peak of x(1-x) at 1/4
        let est = sup_abs_refined(|x| x * (1.0 - x), b, 64);
        assert!((est.value - 0.25).abs() < 1e-10, "{est:?}");
        assert!((est.argmax - 0.5).abs() < 1e-4);
    }

    #[test]
    fn sup_estimate_never_exceeds_true_sup() {
        let b = Interval::new(-1.0, 2.0).unwrap();
        let est = sup_abs_refined(|x: f64| (3.0 * x).sin(), b, 256);
        assert!(est.value <= 1.0 + 1e-15);
        assert!(est.value > 1.0 - 1e-6);
    }

    #[test]
    fn quadrature_rules_agree_on_smooth_integrand() {
        let t = trapezoid(|x: f64| x.exp(), 0.0, 1.0, 4096);
        let s = simpson(|x: f64| x.exp(), 0.0, 1.0, 512);
        let exact = std::f64::consts::E - 1.0;
        assert!((s - exact).abs() < 1e-12);
        assert!((t - exact).abs() < 1e-7);
    }
}
