//! The dual-map lattice machinery.
//!
//! The map `g = (g1, g2) = (x f' - f, -f')` sends Diophantine conditions on
//! the curve to linear forms: `hat-g(x) = (g1, g2, 1)` is orthogonal to both
//! `(1, x, f(x))` and `(0, 1, f'(x))`. Scaling the form matrix `G_x` by
//! `diag(t1, t2, t3)` with `t1 t2 t3 = 1` turns the small-solutions set
//! `B_g` into a sublevel set of lattice norms, which is where the
//! quantitative non-divergence bound applies.
//!
//! Wedge coordinates are ordered `(12), (13), (23)` throughout, which is the
//! ordering that makes `hat-g ^ hat-g' = f''(x) (f(x), -x, 1)` and the
//! Laplace identity `det = <u^w, hat-g ^ hat-g'>` hold coordinate-wise.
//!
//! Every evaluation extends the curve by Taylor polynomials first, so the
//! matrix map is defined on the tripled interval the covering argument
//! needs.

use crate::counting::{gcd3, RationalTriple};
use crate::curves::{extend_taylor, Curve};
use crate::interval::Interval;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("basis vector must be nonzero")]
    ZeroVector,
    #[error("wedge of the basis vectors vanishes (linearly dependent)")]
    ZeroWedge,
    #[error("transformed rank-2 basis is rank-deficient beyond tolerance")]
    RankDeficient,
    #[error("curvature vanishes at x = {0}: the coefficient search is unbounded")]
    DegenerateCurvature(f64),
    #[error("coefficient search needs {0:.0} candidates, above the cap of {1:.0}")]
    SearchTooWide(f64, f64),
    #[error("parameter {name} must be positive and finite, got {value}")]
    BadParam { name: &'static str, value: f64 },
    #[error("grid must have at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
}

pub type Vec3 = [f64; 3];
pub type Vec3i = [i64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn mat_det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn mat_mul_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn inf_norm(v: Vec3) -> f64 {
    v[0].abs().max(v[1].abs()).max(v[2].abs())
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn to_f64(v: Vec3i) -> Vec3 {
    [v[0] as f64, v[1] as f64, v[2] as f64]
}

/// Wedge of two vectors in `(12), (13), (23)` coordinate order.
pub fn wedge2(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[0] * b[1] - a[1] * b[0],
        a[0] * b[2] - a[2] * b[0],
        a[1] * b[2] - a[2] * b[1],
    ]
}

pub fn wedge2_int(u: Vec3i, w: Vec3i) -> Vec3i {
    [
        u[0] * w[1] - u[1] * w[0],
        u[0] * w[2] - u[2] * w[0],
        u[1] * w[2] - u[2] * w[1],
    ]
}

/// The dual map attached to a curve, with derivatives
/// `g1' = x f''`, `g2' = -f''`.
pub struct GMap {
    curve: Curve,
}

impl GMap {
    /// Wraps the Taylor-extended curve so all evaluations remain valid
    /// beyond the nominal domain.
    pub fn new(curve: &Curve) -> GMap {
        GMap {
            curve: extend_taylor(curve),
        }
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn g1(&self, x: f64) -> f64 {
        x * self.curve.d1(x) - self.curve.eval(x)
    }

    pub fn g2(&self, x: f64) -> f64 {
        -self.curve.d1(x)
    }

    pub fn g1d(&self, x: f64) -> f64 {
        x * self.curve.d2(x)
    }

    pub fn g2d(&self, x: f64) -> f64 {
        -self.curve.d2(x)
    }

    /// `(g1, g2, 1)`
    pub fn ghat(&self, x: f64) -> Vec3 {
        [self.g1(x), self.g2(x), 1.0]
    }

    /// `(g1', g2', 0)`
    pub fn ghat_d(&self, x: f64) -> Vec3 {
        [self.g1d(x), self.g2d(x), 0.0]
    }
}

/// Parameters of the small-solutions system, with the balanced scaling
/// `t1 = theta/delta`, `t2 = theta/K`, `t3 = theta/T`, `t1 t2 t3 = 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KMParams {
    pub delta: f64,
    pub k: f64,
    pub t: f64,
    pub j: Interval,
}

impl KMParams {
    pub fn new(delta: f64, k: f64, t: f64, j: Interval) -> Result<Self, LatticeError> {
        for (name, value) in [("delta", delta), ("K", k), ("T", t)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LatticeError::BadParam { name, value });
            }
        }
        Ok(KMParams { delta, k, t, j })
    }

    pub fn theta(&self) -> f64 {
        (self.delta * self.k * self.t).cbrt()
    }

    pub fn t1(&self) -> f64 {
        self.theta() / self.delta
    }

    pub fn t2(&self) -> f64 {
        self.theta() / self.k
    }

    pub fn t3(&self) -> f64 {
        self.theta() / self.t
    }

    /// Whether the bound's parameter window holds (recorded, not enforced).
    pub fn deltakt_ok(&self) -> bool {
        self.delta <= 1.0 && self.t > 1.0 && self.delta * self.k * self.t <= 1.0
    }
}

/// `h(x) = diag(t1, t2, t3) * G_x` with `G_x` rows
/// `(g1, g2, 1)`, `(g1', g2', 0)`, `(1, 0, 0)`; `det h = -g2'(x)`, the
/// curvature of the underlying curve up to the sign of `g2 = -f'`.
pub fn h_matrix(g: &GMap, x: f64, p: &KMParams) -> Mat3 {
    let (t1, t2, t3) = (p.t1(), p.t2(), p.t3());
    [
        [t1 * g.g1(x), t1 * g.g2(x), t1],
        [t2 * g.g1d(x), t2 * g.g2d(x), 0.0],
        [t3, 0.0, 0.0],
    ]
}

/// Basis of a nonzero complete sublattice of Z^3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeBasis {
    Rank1(Vec3i),
    Rank2(Vec3i, Vec3i),
    /// The full lattice Z^3.
    Rank3,
}

impl LatticeBasis {
    pub fn rank1(w: Vec3i) -> Result<Self, LatticeError> {
        if w == [0, 0, 0] {
            return Err(LatticeError::ZeroVector);
        }
        Ok(LatticeBasis::Rank1(w))
    }

    pub fn rank2(u: Vec3i, w: Vec3i) -> Result<Self, LatticeError> {
        if wedge2_int(u, w) == [0, 0, 0] {
            return Err(LatticeError::ZeroWedge);
        }
        Ok(LatticeBasis::Rank2(u, w))
    }

    pub fn rank(&self) -> usize {
        match self {
            LatticeBasis::Rank1(_) => 1,
            LatticeBasis::Rank2(..) => 2,
            LatticeBasis::Rank3 => 3,
        }
    }
}

/// Sup-norm of the wedge of the transformed basis: `|h w|` for rank 1, the
/// three 2x2 minors for rank 2, `|det h|` for rank 3.
pub fn lattice_norm(h: &Mat3, basis: &LatticeBasis) -> Result<f64, LatticeError> {
    match basis {
        LatticeBasis::Rank1(w) => Ok(inf_norm(mat_mul_vec(h, to_f64(*w)))),
        LatticeBasis::Rank2(u, w) => {
            let hu = mat_mul_vec(h, to_f64(*u));
            let hw = mat_mul_vec(h, to_f64(*w));
            let wedge = wedge2(hu, hw);
            let norm = inf_norm(wedge);
            if norm < 1e-12 * inf_norm(hu) * inf_norm(hw) {
                return Err(LatticeError::RankDeficient);
            }
            Ok(norm)
        }
        LatticeBasis::Rank3 => Ok(mat_det(h).abs()),
    }
}

/// Rank-2 norm via the closed-form wedge components: skew-gradient first,
/// then the reduced-vector forms. Cross-checks the minor expansion.
pub fn lattice_norm_rank2_formula(
    g: &GMap,
    x: f64,
    p: &KMParams,
    u: Vec3i,
    w: Vec3i,
) -> Result<f64, LatticeError> {
    if wedge2_int(u, w) == [0, 0, 0] {
        return Err(LatticeError::ZeroWedge);
    }
    let skew = skew_gradient(g, u, w, x)?;
    let reduced = [
        w[0] as f64 * to_f64(u)[0] - u[0] as f64 * to_f64(w)[0],
        w[0] as f64 * to_f64(u)[1] - u[0] as f64 * to_f64(w)[1],
        w[0] as f64 * to_f64(u)[2] - u[0] as f64 * to_f64(w)[2],
    ];
    let c1 = p.t1() * p.t2() * skew.via_det;
    let c2 = p.t1() * p.t3() * dot(reduced, g.ghat(x));
    let c3 = p.t2() * p.t3() * dot(reduced, g.ghat_d(x));
    Ok(c1.abs().max(c2.abs()).max(c3.abs()))
}

/// Both routes to the skew-gradient
/// `grad~(u . hat-g, w . hat-g) = (u.hat-g)(w.hat-g') - (u.hat-g')(w.hat-g)`:
/// the 2x2 determinant and the collapsed form
/// `f''(x) (p f(x) - q x + r)` with `(p, q, r) = u ^ w`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SkewGradientCheck {
    pub via_det: f64,
    pub via_formula: f64,
}

pub fn skew_gradient(
    g: &GMap,
    u: Vec3i,
    w: Vec3i,
    x: f64,
) -> Result<SkewGradientCheck, LatticeError> {
    let wedge = wedge2_int(u, w);
    if wedge == [0, 0, 0] {
        return Err(LatticeError::ZeroWedge);
    }
    let (gh, ghd) = (g.ghat(x), g.ghat_d(x));
    let (uf, wf) = (to_f64(u), to_f64(w));
    let via_det = dot(uf, gh) * dot(wf, ghd) - dot(uf, ghd) * dot(wf, gh);
    let (p, q, r) = (wedge[0] as f64, wedge[1] as f64, wedge[2] as f64);
    let f = g.curve.eval(x);
    let via_formula = g.curve.d2(x) * (p * f - q * x + r);
    Ok(SkewGradientCheck {
        via_det,
        via_formula,
    })
}

/// Per-`q` cap on the coefficient window in the scanning searches.
const SEARCH_CAP: f64 = 1e7;

/// Integer window `[lo, hi]` of `p1` allowed by
/// `|q g1'(x) + p1 g2'(x)| <= bound`.
fn p1_window(g: &GMap, x: f64, q: i64, bound: f64) -> Result<(i64, i64), LatticeError> {
    let g2d = g.g2d(x);
    if g2d == 0.0 || !g2d.is_finite() {
        return Err(LatticeError::DegenerateCurvature(x));
    }
    let center = -(q as f64) * g.g1d(x);
    let (a, b) = ((center - bound) / g2d, (center + bound) / g2d);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi - lo > SEARCH_CAP {
        return Err(LatticeError::SearchTooWide(hi - lo, SEARCH_CAP));
    }
    Ok((lo.ceil() as i64, hi.floor() as i64))
}

/// Integer window of `p2` allowed by `|q g1(x) + p1 g2(x) + p2| <= bound`.
fn p2_window(g: &GMap, x: f64, q: i64, p1: i64, bound: f64) -> (i64, i64) {
    let s = q as f64 * g.g1(x) + p1 as f64 * g.g2(x);
    ((-bound - s).ceil() as i64, (bound - s).floor() as i64)
}

/// First nonzero integer vector `(q, p1, p2)` (scan order: `q` ascending
/// from `-T`, then `p1`, then `p2` ascending) satisfying
/// `|q g1 + p1 g2 + p2| <= delta`, `|q g1' + p1 g2'| <= K`, `|q| <= T`;
/// `None` when the system has no nonzero solution.
pub fn bg_membership(
    g: &GMap,
    x: f64,
    p: &KMParams,
) -> Result<Option<Vec3i>, LatticeError> {
    let t_floor = p.t.floor() as i64;
    for q in -t_floor..=t_floor {
        let (p1_lo, p1_hi) = p1_window(g, x, q, p.k)?;
        for p1 in p1_lo..=p1_hi {
            let (p2_lo, p2_hi) = p2_window(g, x, q, p1, p.delta);
            for p2 in p2_lo..=p2_hi {
                if (q, p1, p2) != (0, 0, 0) {
                    return Ok(Some([q, p1, p2]));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BgEstimate {
    /// Fraction of grid points belonging to `B_g`.
    pub fraction: f64,
    /// Grid resolution `|J| / grid_n`; membership sets are finite interval
    /// unions, so the estimate converges at this rate.
    pub half_width: f64,
    pub members: usize,
    pub grid_points: usize,
}

/// Grid estimate of `|B_g(J, delta, K, T)| / |J|`.
pub fn bg_measure_estimate(
    g: &GMap,
    p: &KMParams,
    grid_n: usize,
) -> Result<BgEstimate, LatticeError> {
    if grid_n < 100 {
        return Err(LatticeError::GridTooSmall {
            min: 100,
            got: grid_n,
        });
    }
    let mut members = 0usize;
    let mut total = 0usize;
    for x in p.j.grid(grid_n) {
        total += 1;
        if bg_membership(g, x, p)?.is_some() {
            members += 1;
        }
    }
    Ok(BgEstimate {
        fraction: members as f64 / total as f64,
        half_width: p.j.length() / grid_n as f64,
        members,
        grid_points: total,
    })
}

/// Exhaustive scan for a nonzero coprime solution of the anchored system
/// `|q g1 + p1 g2 + p2| <= c0 delta`,
/// `|q g1' + p1 g2'| <= c2 / (c0 Q delta)`, `0 <= q <= Q`.
/// The box volume is `8 c2`, so a solution exists whenever
/// `c2 >= |f''(x)|` by the linear-forms theorem; the scan finds the first
/// one in deterministic order.
pub fn minkowski_solve(
    g: &GMap,
    x: f64,
    q_max: f64,
    delta: f64,
    c0_star: f64,
    c2: f64,
) -> Result<Option<Vec3i>, LatticeError> {
    for (name, value) in [("Q", q_max), ("delta", delta), ("c0", c0_star), ("c2", c2)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(LatticeError::BadParam { name, value });
        }
    }
    let row1 = c0_star * delta;
    let row2 = c2 / (c0_star * q_max * delta);
    for q in 0..=(q_max.floor() as i64) {
        let (p1_lo, p1_hi) = p1_window(g, x, q, row2)?;
        for p1 in p1_lo..=p1_hi {
            let (p2_lo, p2_hi) = p2_window(g, x, q, p1, row1);
            for p2 in p2_lo..=p2_hi {
                if (q, p1, p2) != (0, 0, 0) && gcd3(q, p1, p2) == 1 {
                    return Ok(Some([q, p1, p2]));
                }
            }
        }
    }
    Ok(None)
}

/// Constants driving the point-attachment pipeline. The paper values make
/// `c0` astronomically small (around 1e-30 for a unit curvature window), so
/// the pipeline also runs with caller-chosen relaxed constants; reports are
/// stamped with which mode produced them.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AttachConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub mode: ConstantsMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConstantsMode {
    Paper,
    Relaxed,
}

impl AttachConstants {
    pub fn paper(c1: f64, c2: f64) -> Result<Self, crate::bounds::BoundsError> {
        let pc = crate::bounds::PaperConstants::new(c1, c2)?;
        Ok(AttachConstants {
            c0: pc.c0,
            c1,
            c2,
            mode: ConstantsMode::Paper,
        })
    }

    pub fn relaxed(c0: f64, c1: f64, c2: f64) -> AttachConstants {
        AttachConstants {
            c0,
            c1,
            c2,
            mode: ConstantsMode::Relaxed,
        }
    }

    /// Localization constant `C1* = c2 / (2 c1 c0^2)`.
    pub fn big_c1(&self) -> f64 {
        self.c2 / (2.0 * self.c1 * self.c0 * self.c0)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum AttachStage {
    /// The linear-forms scan produced nothing (possible only when
    /// `c2 < |f''(x)|` or a guard fired upstream).
    NoLatticePoint,
    /// The solution has `q <= 2 c0 Q`, so the localization step does not
    /// apply at this `x`.
    SmallQ { q: i64 },
    /// The attached abscissa `p1/q` landed outside the window.
    OutsideWindow { x_rat: f64 },
    /// The vertical check `|f(p1/q) - p2/q| <= delta/Q` failed.
    FinalInequality { dist: f64, threshold: f64 },
    /// The coefficient window is too wide to scan (the unrelaxed constants
    /// put it around 1e30 candidates per `q`).
    SearchGuard { width: f64 },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum AttachOutcome {
    Attached {
        triple: RationalTriple,
        /// `|x - p1/q|`; bounded by `C1*/(delta Q^2)` when the stage
        /// filters pass.
        x_dist: f64,
        dist: f64,
    },
    Failed { stage: AttachStage },
}

impl AttachOutcome {
    pub fn attached(&self) -> Option<RationalTriple> {
        match self {
            AttachOutcome::Attached { triple, .. } => Some(*triple),
            AttachOutcome::Failed { .. } => None,
        }
    }
}

/// One point of the covering argument: solve the anchored system at `x`,
/// keep solutions with `q > 2 c0 Q`, and verify directly that the triple is
/// a near-curve point. Stage-tagged so grid runs can report where the
/// mechanism stops.
pub fn attach_point_pipeline(
    curve: &Curve,
    x: f64,
    q_max: f64,
    delta: f64,
    consts: &AttachConstants,
) -> Result<AttachOutcome, LatticeError> {
    let g = GMap::new(curve);
    let solution = match minkowski_solve(&g, x, q_max, delta, consts.c0, consts.c2) {
        Ok(s) => s,
        Err(LatticeError::SearchTooWide(width, _)) => {
            return Ok(AttachOutcome::Failed {
                stage: AttachStage::SearchGuard { width },
            })
        }
        Err(e) => return Err(e),
    };
    let Some([q, p1, p2]) = solution else {
        return Ok(AttachOutcome::Failed {
            stage: AttachStage::NoLatticePoint,
        });
    };
    if (q as f64) <= 2.0 * consts.c0 * q_max {
        return Ok(AttachOutcome::Failed {
            stage: AttachStage::SmallQ { q },
        });
    }
    let x_rat = p1 as f64 / q as f64;
    if !curve.domain().contains(x_rat) {
        return Ok(AttachOutcome::Failed {
            stage: AttachStage::OutsideWindow { x_rat },
        });
    }
    let dist = (curve.eval(x_rat) - p2 as f64 / q as f64).abs();
    let threshold = delta / q_max;
    if dist <= threshold {
        Ok(AttachOutcome::Attached {
            triple: RationalTriple { q, p1, p2 },
            x_dist: (x - x_rat).abs(),
            dist,
        })
    } else {
        Ok(AttachOutcome::Failed {
            stage: AttachStage::FinalInequality { dist, threshold },
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AttachGridReport {
    pub outcomes: Vec<(f64, AttachOutcome)>,
    pub success_fraction: f64,
    pub mode: ConstantsMode,
}

/// Run the pipeline over an equispaced grid of the three-quarters window.
pub fn attach_grid(
    curve: &Curve,
    q_max: f64,
    delta: f64,
    consts: &AttachConstants,
    grid_n: usize,
) -> Result<AttachGridReport, LatticeError> {
    let window = curve.domain().scale(0.75);
    let mut outcomes = Vec::with_capacity(grid_n + 1);
    let mut attached = 0usize;
    for x in window.grid(grid_n) {
        let out = attach_point_pipeline(curve, x, q_max, delta, consts)?;
        if matches!(out, AttachOutcome::Attached { .. }) {
            attached += 1;
        }
        outcomes.push((x, out));
    }
    let total = outcomes.len();
    Ok(AttachGridReport {
        outcomes,
        success_fraction: attached as f64 / total as f64,
        mode: consts.mode,
    })
}
