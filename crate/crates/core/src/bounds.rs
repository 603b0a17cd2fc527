//! Two-sided modulus bounds from internal distances, and the large-disk
//! corollary built on them.
//!
//! With `t = s_b / s_a`,
//!
//! ```text
//! (log(1 + 2t))² / (π + 2π log(1 + 2t))  ≤  M(Q)  ≤  (π + 2π log(1 + 2/t)) / (log(1 + 2/t))²
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;
use crate::geometry::{PolygonalQuadrilateral, SideLabel, SideSet};
use crate::tridisk::ContactDisk;

/// Relative slack allowed for discretization when comparing a numerical
/// modulus with exact bounds.
pub const MODULUS_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvBounds {
    pub lower: f64,
    pub upper: f64,
    /// `s_b / s_a`.
    pub ratio_ba: f64,
    /// `s_a / s_b`.
    pub ratio_ab: f64,
}

impl LvBounds {
    /// Whether `m` lies in `[lower, upper]` up to relative `slack`.
    pub fn brackets(&self, m: f64, slack: f64) -> bool {
        self.lower * (1.0 - slack) <= m && m <= self.upper * (1.0 + slack)
    }
}

/// `t ↦ (log(1+2t))² / (π + 2π log(1+2t))`, increasing in `t > 0`.
pub fn lower_bound_fn(t: f64) -> f64 {
    let x = (1.0 + 2.0 * t).ln();
    x * x / (PI + 2.0 * PI * x)
}

pub fn lv_bounds(s_a: f64, s_b: f64) -> Result<LvBounds, BoundsError> {
    if !(s_a > 0.0 && s_b > 0.0) {
        return Err(BoundsError::NonPositiveDistance(s_a, s_b));
    }
    let (ratio_ba, ratio_ab) = (s_b / s_a, s_a / s_b);
    let y = (1.0 + 2.0 * ratio_ab).ln();
    Ok(LvBounds {
        lower: lower_bound_fn(ratio_ba),
        upper: (PI + 2.0 * PI * y) / (y * y),
        ratio_ba,
        ratio_ab,
    })
}

/// Smallest `L` such that `M(Q) ∈ [1/K, K]` forces `s_a / s_b ∈ [1/L, L]`.
///
/// Solves `lower_bound_fn(L) = K` by bisection on `x = log(1 + 2L)`, where
/// the equation is the quadratic `x² − 2πK x − πK = 0`.
pub fn l_from_k(k: f64) -> Result<f64, BoundsError> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(BoundsError::BadK(k));
    }
    let g = |x: f64| x * x / (PI + 2.0 * PI * x) - k;
    let (mut lo, mut hi) = (3f64.ln(), 2.0 * (PI * k + (PI * PI * k * k + PI * k).sqrt()) + 1.0);
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l = 0.5 * (0.5 * (lo + hi)).exp_m1();
    if !l.is_finite() {
        return Err(BoundsError::Overflow(k));
    }
    Ok(l)
}

/// `δ(K) = 1 / (2 L(K))`.
pub fn delta(k: f64) -> Result<f64, BoundsError> {
    Ok(0.5 / l_from_k(k)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub k: f64,
    pub l: f64,
    pub delta: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub modulus: f64,
    pub radius: f64,
    /// `r ≥ δ · max(s_a, s_b)`.
    pub radius_bound: bool,
    /// `2r ≥ s` for the opposite pair the disk touches.
    pub diameter_chain: bool,
    /// `s ≥ s_other / L` for the touched pair.
    pub ratio_chain: bool,
}

impl CorollaryReport {
    pub fn pass(&self) -> bool {
        self.radius_bound && self.diameter_chain && self.ratio_chain
    }
}

/// Checks the large-disk corollary for a three-side disk, given the internal
/// distances and the modulus, at tolerance `τ_geom` of `q`.
pub fn verify_corollary(
    q: &PolygonalQuadrilateral,
    disk: &ContactDisk,
    k: f64,
    s_a: f64,
    s_b: f64,
    modulus: f64,
) -> Result<CorollaryReport, BoundsError> {
    verify_corollary_with_tolerance(disk, k, s_a, s_b, modulus, q.tau_geom())
}

/// As [`verify_corollary`] with an explicit length tolerance, used when the
/// disk comes from an inner approximation.
pub fn verify_corollary_with_tolerance(
    disk: &ContactDisk,
    k: f64,
    s_a: f64,
    s_b: f64,
    modulus: f64,
    tau: f64,
) -> Result<CorollaryReport, BoundsError> {
    let l = l_from_k(k)?;
    if !(modulus * (1.0 + MODULUS_SLACK) >= 1.0 / k && modulus <= k * (1.0 + MODULUS_SLACK)) {
        return Err(BoundsError::ModulusOutOfRange { modulus, k });
    }
    let delta = 0.5 / l;
    let r = disk.radius;
    let labels = disk.labels();
    let a_pair = labels.contains_all(SideSet::of(&[SideLabel::A1, SideLabel::A2]));
    let b_pair = labels.contains_all(SideSet::of(&[SideLabel::B1, SideLabel::B2]));
    let chain = |s: f64, other: f64| (2.0 * r >= s - tau, s >= other / l - tau);
    let (diameter_chain, ratio_chain) = match (a_pair, b_pair) {
        (true, true) => {
            let (da, ra) = chain(s_a, s_b);
            let (db, rb) = chain(s_b, s_a);
            (da && db, ra && rb)
        }
        (true, false) => chain(s_a, s_b),
        (false, true) => chain(s_b, s_a),
        (false, false) => (false, false),
    };
    Ok(CorollaryReport {
        k,
        l,
        delta,
        s_a,
        s_b,
        modulus,
        radius: r,
        radius_bound: r >= delta * s_a.max(s_b) - tau,
        diameter_chain,
        ratio_chain,
    })
}
