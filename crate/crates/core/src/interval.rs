//! Compact intervals and maximally-merged interval unions.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IntervalError {
    #[error("interval endpoints must be finite and ordered: [{0}, {1}]")]
    Invalid(f64, f64),
}

/// A compact interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(IntervalError::Invalid(lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// The interval scaled about its midpoint, e.g. `scale(0.75)` is the
    /// "three-quarters" subinterval used when attaching points away from
    /// the boundary.
    pub fn scale(&self, factor: f64) -> Interval {
        let m = self.midpoint();
        let h = 0.5 * self.length() * factor;
        Interval {
            lo: m - h,
            hi: m + h,
        }
    }

    /// `n + 1` equispaced points including both endpoints (`n >= 1`).
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let n = n.max(1);
        let h = self.length() / n as f64;
        (0..=n).map(move |i| {
            if i == n {
                self.hi
            } else {
                self.lo + i as f64 * h
            }
        })
    }

    /// Largest `|x|` over the interval (the constant `L` of the lattice
    /// machinery).
    pub fn max_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// A sorted list of pairwise disjoint, non-touching intervals.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from arbitrary intervals, merging overlaps and touches.
    pub fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut parts: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match parts.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    last.hi = last.hi.max(iv.hi);
                }
                _ => parts.push(iv),
            }
        }
        IntervalUnion { parts }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn measure(&self) -> f64 {
        self.parts.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        // parts are sorted by lo
        let idx = self.parts.partition_point(|iv| iv.lo <= x);
        idx > 0 && self.parts[idx - 1].contains(x)
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}
