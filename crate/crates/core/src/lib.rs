//! Rational points near planar curves: a desk-scale workbench.
//!
//! The crate enumerates rational points `(p1/q, p2/q)` lying within vertical
//! distance `delta/Q` of the graph of a planar function, together with the
//! analytic machinery that controls their distribution:
//!
//! - [`curves`] — curve representation, curvature-class membership tests
//!   (`c1 <= |f''| <= c2` and its finite-difference analogues), Taylor
//!   extension of the domain;
//! - [`mollify`] — bump-kernel convolution smoothing that preserves the
//!   curvature window;
//! - [`pathological`] — a piecewise construction whose second derivative
//!   fails to exist on a dense set while the difference-quotient class
//!   conditions still hold;
//! - [`counting`] — exact-rational and floating enumeration of near-curve
//!   rational triples, interval-union measures, closure margins, plus an
//!   independent brute-force oracle;
//! - [`lattice`] — the dual map `g = (x f' - f, -f')`, scaled lattice norms
//!   via wedge products, membership in the small-linear-forms set `B_g`, and
//!   the Minkowski point-attachment pipeline;
//! - [`bounds`] — every explicit constant bundle and bound evaluator, with
//!   hypothesis checklists and vacuity detection;
//! - [`goodness`] — empirical `(C, alpha)`-good testing and sup lower-bound
//!   batteries;
//! - [`expr`] — the expression grammar (with symbolic differentiation) used
//!   to construct curves from text.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod counting;
pub mod curves;
pub mod expr;
pub mod goodness;
pub mod interval;
pub mod lattice;
pub mod mollify;
pub mod pathological;
pub mod rat;
pub mod sample;

pub use curves::{Curve, CurveKind};
pub use interval::{Interval, IntervalUnion};
pub use rat::Rat;
