//! Explicit constants, hypothesis checklists, bound evaluation and verdicts.
//!
//! Two constant families live here. The headline family
//! ([`PaperConstants`]) depends on the curvature window `(c1, c2)` only and
//! feeds the counting theorems; its `C1` has two algebraically equal closed
//! forms which are cross-checked on construction. The measure-estimate
//! family ([`KMConstants`]) additionally depends on `(L, J, delta, K, T)`
//! and feeds the small-linear-forms bound.
//!
//! Naming: the literature reuses `C1`, `C2` for both families; the lemma
//! constants are suffixed `_km` everywhere here so reports stay unambiguous.

use crate::interval::Interval;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("class bounds must satisfy c2 >= c1 > 0, got c1={0}, c2={1}")]
    BadClassBounds(f64, f64),
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("dual closed forms of C1 disagree: {0} vs {1}")]
    IdentityDrift(f64, f64),
    #[error("polynomial degree must be at least 1")]
    BadDegree,
}

fn require_positive(name: &'static str, value: f64) -> Result<(), BoundsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::NonPositive { name, value })
    }
}

/// Constants depending on the curvature window only.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PaperConstants {
    pub c1: f64,
    pub c2: f64,
    /// `3^6 * 2^5 * c2 / (c1 * min(1, sqrt(c1)))`
    pub e_hat: f64,
    /// `2^-13 * e_hat^-6 * c2^-1`
    pub c0: f64,
    /// `c2 / (2 c1 c0^2)`, equivalently `2^25 e_hat^12 c2^3 / c1`
    #[serde(rename = "C1")]
    pub big_c1: f64,
    /// `(c2 C1 / (2 c0))^(1/3)`
    #[serde(rename = "C2")]
    pub big_c2: f64,
}

impl PaperConstants {
    pub fn new(c1: f64, c2: f64) -> Result<Self, BoundsError> {
        if !(c1 > 0.0 && c2 >= c1 && c2.is_finite()) {
            return Err(BoundsError::BadClassBounds(c1, c2));
        }
        let e_hat = 729.0 * 32.0 * c2 / (c1 * c1.sqrt().min(1.0));
        let c0 = 2.0f64.powi(-13) * e_hat.powi(-6) / c2;
        let (form_a, form_b) = Self::c1_dual_forms(c1, c2, e_hat, c0);
        if form_a.is_finite()
            && form_b.is_finite()
            && (form_a - form_b).abs() > 1e-12 * form_a.abs()
        {
            return Err(BoundsError::IdentityDrift(form_a, form_b));
        }
        let big_c1 = form_a;
        let big_c2 = (c2 * big_c1 / (2.0 * c0)).cbrt();
        Ok(PaperConstants {
            c1,
            c2,
            e_hat,
            c0,
            big_c1,
            big_c2,
        })
    }

    /// Both closed forms of `C1`; they agree as an algebraic identity.
    pub fn c1_dual_forms(c1: f64, c2: f64, e_hat: f64, c0: f64) -> (f64, f64) {
        let a = c2 / (2.0 * c1 * c0 * c0);
        let b = 2.0f64.powi(25) * e_hat.powi(12) * c2.powi(3) / c1;
        (a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `T` large in terms of `|J|`: `rho = min(1, c1)` with no side
    /// condition.
    E1,
    /// Smaller `T` threshold, needs `delta <= K`.
    E2,
    General,
}

/// Constants for the measure estimate: `|B_g| <= E (delta K T)^(1/6) |J|`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KMConstants {
    pub c1: f64,
    pub c2: f64,
    /// `max |x|` over the ambient interval.
    pub l: f64,
    /// `sqrt(1 + 4 L^2)`
    pub m: f64,
    /// `4 c2 / c1`
    #[serde(rename = "C0")]
    pub c0: f64,
    /// `max(C0 sqrt(32), 24 sqrt(6 C0 M))`
    #[serde(rename = "C")]
    pub c: f64,
    /// `(delta K T)^(1/3)`
    pub theta: f64,
    pub rho: f64,
    /// `648 C / sqrt(rho)`
    pub e: f64,
    pub delta: f64,
    pub k: f64,
    pub t: f64,
    pub j_len: f64,
    pub regime: Regime,
}

impl KMConstants {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c1: f64,
        c2: f64,
        l: f64,
        j: Interval,
        delta: f64,
        k: f64,
        t: f64,
    ) -> Result<Self, BoundsError> {
        if !(c1 > 0.0 && c2 >= c1 && c2.is_finite()) {
            return Err(BoundsError::BadClassBounds(c1, c2));
        }
        require_positive("L", l.max(f64::MIN_POSITIVE))?;
        require_positive("delta", delta)?;
        require_positive("K", k)?;
        require_positive("T", t)?;
        let m = (1.0 + 4.0 * l * l).sqrt();
        let c0 = 4.0 * c2 / c1;
        let c = (c0 * 32.0f64.sqrt()).max(24.0 * (6.0 * c0 * m).sqrt());
        let theta = (delta * k * t).cbrt();
        let j_len = j.length();
        let rho = 1.0f64
            .min(c1)
            .min(c1 * j_len * theta / (32.0 * m) * (16.0 / delta).max(j_len / k))
            .min(c1 * c1 * j_len * j_len * t / (32.0 * theta));
        let e = 648.0 * c / rho.sqrt();
        let regime = if t >= (64.0 * m * m / j_len.powi(3)).max(32.0 / (c1 * j_len * j_len)) {
            Regime::E1
        } else if delta <= k && t >= (4.0 * m * m).max(32.0 / (c1 * c1)) / (j_len * j_len) {
            Regime::E2
        } else {
            Regime::General
        };
        Ok(KMConstants {
            c1,
            c2,
            l,
            m,
            c0,
            c,
            theta,
            rho,
            e,
            delta,
            k,
            t,
            j_len,
            regime,
        })
    }

    /// Shortcut taking `L` from the interval itself.
    pub fn for_interval(
        c1: f64,
        c2: f64,
        j: Interval,
        delta: f64,
        k: f64,
        t: f64,
    ) -> Result<Self, BoundsError> {
        Self::new(c1, c2, j.max_abs(), j, delta, k, t)
    }

    /// The parameter conditions recorded (never enforced) alongside
    /// verdicts: `0 < delta <= 1`, `K > 0`, `T > 1`, `delta K T <= 1`.
    pub fn deltakt_checklist(&self) -> Vec<ChecklistItem> {
        vec![
            ChecklistItem::bool_item("delta_in_(0,1]", self.delta > 0.0 && self.delta <= 1.0),
            ChecklistItem::bool_item("K_positive", self.k > 0.0),
            ChecklistItem::bool_item("T_above_1", self.t > 1.0),
            ChecklistItem {
                name: "deltaKT_le_1".into(),
                holds: self.delta * self.k * self.t <= 1.0,
                actual: self.delta * self.k * self.t,
                required: 1.0,
            },
        ]
    }

    /// Lemma constant `C1_km = 2 max(C0, sqrt(32 C0 M))`.
    pub fn c1_km(&self) -> f64 {
        2.0 * self.c0.max((32.0 * self.c0 * self.m).sqrt())
    }

    /// Lemma constant `C2_km = C0 sqrt(32)`.
    pub fn c2_km(&self) -> f64 {
        self.c0 * 32.0f64.sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChecklistItem {
    pub name: String,
    pub holds: bool,
    pub actual: f64,
    pub required: f64,
}

impl ChecklistItem {
    fn bool_item(name: &str, holds: bool) -> ChecklistItem {
        ChecklistItem {
            name: name.into(),
            holds,
            actual: f64::NAN,
            required: f64::NAN,
        }
    }

    fn at_least(name: &str, actual: f64, required: f64) -> ChecklistItem {
        ChecklistItem {
            name: name.into(),
            holds: actual >= required,
            actual,
            required,
        }
    }

    fn at_most(name: &str, actual: f64, required: f64) -> ChecklistItem {
        ChecklistItem {
            name: name.into(),
            holds: actual <= required,
            actual,
            required,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictStatus {
    Satisfied,
    Violated,
    /// The bound exceeds the trivial ceiling or its hypotheses fail, so
    /// holding it carries no information.
    Vacuous,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundVerdict {
    pub bound_value: f64,
    pub measured: f64,
    pub status: VerdictStatus,
    pub hypothesis_checklist: Vec<ChecklistItem>,
}

/// Hypothesis checklist plus asserted lower bound for the counting theorem.
#[derive(Clone, Debug, Serialize)]
pub struct Thm1Report {
    pub checklist: Vec<ChecklistItem>,
    pub all_pass: bool,
    /// `delta Q^2 |J| / (4 C1)`, asserted only when every hypothesis holds.
    pub lower_bound: Option<f64>,
}

/// Evaluate every hypothesis of the counting lower bound at the given
/// parameters, with the thresholds spelled out.
pub fn thm1_check(q: f64, delta: f64, j: Interval, pc: &PaperConstants) -> Thm1Report {
    let j_len = j.length();
    let branch_a = ChecklistItem::at_least(
        "q_ge_128_over_c0c1sq_jcubed",
        q,
        128.0 / (pc.c0 * pc.c1 * pc.c1) / j_len.powi(3),
    );
    let branch_b_lower = ChecklistItem::at_least(
        "q_ge_16_over_c0c1sq_jsq",
        q,
        16.0 / (pc.c0 * pc.c1 * pc.c1) / (j_len * j_len),
    );
    let branch_b_upper = ChecklistItem::at_most(
        "q_le_c0sq_over_c2_deltasq",
        q,
        pc.c0 * pc.c0 / pc.c2 / (delta * delta),
    );
    let either = branch_a.holds || (branch_b_lower.holds && branch_b_upper.holds);
    let checklist = vec![
        ChecklistItem::at_most("j_len_le_half", j_len, 0.5),
        ChecklistItem::at_most("delta_le_1", delta, 1.0),
        ChecklistItem::at_least("delta_q2_j_ge_8C1", delta * q * q * j_len, 8.0 * pc.big_c1),
        ChecklistItem::at_least("q_delta_ge_C2", q * delta, pc.big_c2),
        branch_a,
        branch_b_lower,
        branch_b_upper,
        ChecklistItem::bool_item("q_growth_either_branch", either),
    ];
    let essentials = [0usize, 1, 2, 3, 7];
    let all_pass = essentials.iter().all(|&i| checklist[i].holds);
    Thm1Report {
        all_pass,
        lower_bound: all_pass.then(|| delta * q * q * j_len / (4.0 * pc.big_c1)),
        checklist,
    }
}

/// Measure bound `E (delta K T)^(1/6) |J|`.
pub fn thm9_bound(kc: &KMConstants, j: Interval) -> f64 {
    kc.e * (kc.delta * kc.k * kc.t).powf(1.0 / 6.0) * j.length()
}

/// Verdict for a measured `|B_g|` estimate against the measure bound.
pub fn thm9_verdict(kc: &KMConstants, j: Interval, measured: f64) -> BoundVerdict {
    let bound_value = thm9_bound(kc, j);
    let checklist = kc.deltakt_checklist();
    let hypotheses_ok = checklist.iter().all(|c| c.holds);
    let status = if !hypotheses_ok || bound_value >= j.length() {
        VerdictStatus::Vacuous
    } else if measured <= bound_value {
        VerdictStatus::Satisfied
    } else {
        VerdictStatus::Violated
    };
    BoundVerdict {
        bound_value,
        measured,
        status,
        hypothesis_checklist: checklist,
    }
}

/// The literature's bound shapes with their implicit constant left to the
/// caller.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum BoundShape {
    /// `C^(10/3) delta^(1-eps) Q^2 + C^(1/3) Q` with `C = max(c2, 1/c1)`.
    Huxley { c_class: f64, eps: f64 },
    /// `delta Q^2 + delta^(-1/2) Q`
    Vv1,
    /// `delta Q^2 + delta^(-1/2) Q^(1/2+eps) + delta^((theta-1)/2) Q^((3-theta)/2)`
    Vv2 { theta: f64, eps: f64 },
    /// Lower shape `delta Q^2`.
    Bdvv,
}

pub fn shape_value(shape: &BoundShape, q: f64, delta: f64) -> f64 {
    match *shape {
        BoundShape::Huxley { c_class, eps } => {
            c_class.powf(10.0 / 3.0) * delta.powf(1.0 - eps) * q * q
                + c_class.powf(1.0 / 3.0) * q
        }
        BoundShape::Vv1 => delta * q * q + q / delta.sqrt(),
        BoundShape::Vv2 { theta, eps } => {
            delta * q * q
                + delta.powf(-0.5) * q.powf(0.5 + eps)
                + delta.powf((theta - 1.0) / 2.0) * q.powf((3.0 - theta) / 2.0)
        }
        BoundShape::Bdvv => delta * q * q,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShapeFit {
    /// Smallest multiplicative constant making the bound hold over the
    /// sweep (largest, for the lower shape).
    pub constant: f64,
    /// Per-point implied constants `N / shape`.
    pub ratios: Vec<f64>,
    /// Max over min of the implied constants; near 1 means the shape tracks
    /// the data.
    pub stability: f64,
}

/// Fit the smallest constant `kappa` with `N <= kappa * shape(Q, delta)`
/// over a measured sweep (least max-ratio). For the lower shape the fit is
/// the largest `kappa` with `N >= kappa * shape`.
pub fn fit_shape_constant(shape: &BoundShape, sweep: &[(f64, f64, f64)]) -> ShapeFit {
    let ratios: Vec<f64> = sweep
        .iter()
        .map(|&(q, delta, n)| n / shape_value(shape, q, delta))
        .collect();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let constant = match shape {
        BoundShape::Bdvv => min,
        _ => max,
    };
    ShapeFit {
        constant,
        stability: max / min,
        ratios,
    }
}

/// The named goodness constants.
#[derive(Clone, Copy, Debug)]
pub enum GoodnessConstant {
    /// Degree-`k` polynomials are `(2k(k+1)^(1/k), 1/k)`-good.
    Polynomial { k: u32 },
    /// `C_kappa = max(4, 4(k1 k + k2)/k, (r+1) sqrt(2(k1 k + k2)/k0))`.
    LemmaCk {
        kappa: f64,
        kappa0: f64,
        kappa1: f64,
        kappa2: f64,
        r: u32,
    },
    C0 { c1: f64, c2: f64 },
    C1Km { c1: f64, c2: f64, l: f64 },
    C2Km { c1: f64, c2: f64 },
}

pub fn goodness_constant(gc: &GoodnessConstant) -> Result<f64, BoundsError> {
    match *gc {
        GoodnessConstant::Polynomial { k } => {
            if k == 0 {
                return Err(BoundsError::BadDegree);
            }
            let k = k as f64;
            Ok(2.0 * k * (k + 1.0).powf(1.0 / k))
        }
        GoodnessConstant::LemmaCk {
            kappa,
            kappa0,
            kappa1,
            kappa2,
            r,
        } => {
            require_positive("kappa", kappa)?;
            require_positive("kappa0", kappa0)?;
            require_positive("kappa1", kappa1)?;
            require_positive("kappa2", kappa2)?;
            let top = kappa1 * kappa + kappa2;
            Ok(4.0f64
                .max(4.0 * top / kappa)
                .max((r as f64 + 1.0) * (2.0 * top / kappa0).sqrt()))
        }
        GoodnessConstant::C0 { c1, c2 } => {
            require_positive("c1", c1)?;
            Ok(4.0 * c2 / c1)
        }
        GoodnessConstant::C1Km { c1, c2, l } => {
            require_positive("c1", c1)?;
            let c0 = 4.0 * c2 / c1;
            let m = (1.0 + 4.0 * l * l).sqrt();
            Ok(2.0 * c0.max((32.0 * c0 * m).sqrt()))
        }
        GoodnessConstant::C2Km { c1, c2 } => {
            require_positive("c1", c1)?;
            Ok(4.0 * c2 / c1 * 32.0f64.sqrt())
        }
    }
}
