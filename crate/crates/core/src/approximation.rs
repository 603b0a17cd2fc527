//! Inner approximations with right angles at the quad-vertices.
//!
//! Level `k` insets the target by the margin `m_k = diam / 2^(k+3)` (a miter
//! offset with reversed edges trimmed), then replaces the boundary near each
//! quad-vertex by a right corner whose bisector points inward. All surgery
//! happens within `0.8·m_k` of the offset boundary point nearest the target
//! quad-vertex, so the cut-away region stays closer than `m_{k-1}` to the
//! target boundary and consecutive levels are nested.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::ApproximationError;
use crate::geometry::{
    closest_on_segment, hausdorff_distance, point_polyline_distance, Point, PolygonalQuadrilateral,
    SideLabel, SideSet,
};
use crate::modulus::{estimate_modulus, ModulusOptions};
use crate::tridisk::ContactDisk;

/// Surgery stays within this multiple of the margin around each corner.
const SURGERY_RADIUS: f64 = 0.8;

/// Corners this close to a right angle are left alone.
const RIGHT_ANGLE_TOL: f64 = 1e-6;

pub fn margin(target: &PolygonalQuadrilateral, k: u32) -> f64 {
    target.diameter() / 2f64.powi(k as i32 + 3)
}

fn collapse(margin: f64, reason: impl Into<String>) -> ApproximationError {
    ApproximationError::InsetCollapse {
        margin,
        reason: reason.into(),
    }
}

/// Miter offset of a counter-clockwise polygon by `m` to the inside, with
/// edges that would reverse removed.
fn miter_offset(v: &[Point], m: f64) -> Result<Vec<Point>, ApproximationError> {
    let n = v.len();
    let lines: Vec<(Point, Point)> = (0..n)
        .map(|j| {
            let (a, b) = (v[j], v[(j + 1) % n]);
            let d = (b - a).normalized();
            (a + d.perp() * m, d)
        })
        .collect();
    let meet = |i: usize, j: usize| -> Option<Point> {
        let (p, d) = lines[i];
        let (q, e) = lines[j];
        let den = d.cross(e);
        if den.abs() < 1e-12 {
            return None;
        }
        Some(p + d * ((q - p).cross(e) / den))
    };
    let mut active: Vec<usize> = (0..n).collect();
    loop {
        let k = active.len();
        if k < 3 {
            return Err(collapse(m, "offset has fewer than three edges"));
        }
        let mut corners = Vec::with_capacity(k);
        let mut parallel = None;
        for idx in 0..k {
            match meet(active[(idx + k - 1) % k], active[idx]) {
                Some(p) => corners.push(p),
                None => {
                    parallel = Some(idx);
                    break;
                }
            }
        }
        if let Some(idx) = parallel {
            let (a, b) = (lines[active[(idx + k - 1) % k]].1, lines[active[idx]].1);
            if a.dot(b) < 0.0 {
                return Err(collapse(m, "offset folds onto itself"));
            }
            active.remove(idx);
            continue;
        }
        // Signed length of each offset edge along its original direction.
        let worst = (0..k)
            .map(|idx| (idx, (corners[(idx + 1) % k] - corners[idx]).dot(lines[active[idx]].1)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if worst.1 > 0.0 {
            return Ok(corners);
        }
        active.remove(worst.0);
    }
}

fn interior_angle(prev: Point, p: Point, next: Point) -> f64 {
    let a = (next - p).normalized();
    let b = (prev - p).normalized();
    let ang = a.cross(b).atan2(a.dot(b));
    if ang <= 0.0 {
        ang + 2.0 * PI
    } else {
        ang
    }
}

/// Inner approximation at level `k`.
pub fn inner_right_angle_approximation(
    target: &PolygonalQuadrilateral,
    k: u32,
) -> Result<PolygonalQuadrilateral, ApproximationError> {
    inner_right_angle_approximation_with_margin(target, margin(target, k))
}

/// Inner approximation at an explicit margin.
pub fn inner_right_angle_approximation_with_margin(
    target: &PolygonalQuadrilateral,
    m: f64,
) -> Result<PolygonalQuadrilateral, ApproximationError> {
    let diam = target.diameter();
    let eps = 1e-12 * diam;
    let mut o = miter_offset(target.vertices(), m)?;
    if let Some(p) = o.iter().find(|&&p| target.clearance(p) < m * (1.0 - 1e-6) || !target.contains_strict(p)) {
        return Err(collapse(m, format!("offset vertex {p} is closer than the margin")));
    }

    // Nearest offset boundary point to each target quad-vertex, inserted as
    // a vertex.
    let mut marks = [0usize; 4];
    for kq in 0..4 {
        let v = target.quad_vertex(kq);
        let n = o.len();
        let (mut best, mut be, mut bp) = (f64::INFINITY, 0, Point::default());
        for j in 0..n {
            let (_, f) = closest_on_segment(v, o[j], o[(j + 1) % n]);
            let d = f.dist(v);
            if d < best - eps {
                best = d;
                be = j;
                bp = f;
            }
        }
        let idx = if bp.dist(o[be]) <= eps {
            be
        } else if bp.dist(o[(be + 1) % n]) <= eps {
            (be + 1) % n
        } else {
            o.insert(be + 1, bp);
            for mk in marks.iter_mut().take(kq) {
                if *mk > be {
                    *mk += 1;
                }
            }
            be + 1
        };
        marks[kq] = idx;
    }
    let n = o.len();
    if (0..4).any(|a| (a + 1..4).any(|b| marks[a] == marks[b])) {
        return Err(collapse(m, "quad-vertices map to the same offset point"));
    }
    let descents = (0..4).filter(|&a| marks[(a + 1) % 4] < marks[a]).count();
    if descents != 1 {
        return Err(collapse(m, "quad-vertices change cyclic order"));
    }

    let edge_len = |j: usize| o[j].dist(o[(j + 1) % n]);
    let arc = |from: usize, to: usize| -> f64 {
        let mut s = 0.0;
        let mut j = from;
        while j != to {
            s += edge_len(j);
            j = (j + 1) % n;
        }
        s
    };

    struct Corner {
        chain: Vec<Point>,
        w_pos: usize,
        window: f64,
        /// Edges holding the ends of the replaced boundary stretch.
        back_edge: usize,
        fwd_edge: usize,
    }
    let mut corners = Vec::with_capacity(4);
    let radius = SURGERY_RADIUS * m;
    for kq in 0..4 {
        let ic = marks[kq];
        let c = o[ic];
        let alpha = interior_angle(o[(ic + n - 1) % n], c, o[(ic + 1) % n]);
        let window = if (alpha - FRAC_PI_2).abs() < RIGHT_ANGLE_TOL { 0.0 } else { radius };

        // Forward: edge containing the point at arclength `window`.
        let (mut j, mut s) = (ic, 0.0);
        while s + edge_len(j) < window {
            s += edge_len(j);
            j = (j + 1) % n;
            if j == ic {
                return Err(collapse(m, "surgery window wraps around"));
            }
        }
        let p_plus = o[j].lerp(o[(j + 1) % n], ((window - s) / edge_len(j)).min(1.0));
        let fwd_edge = j;
        let (mut j, mut s) = ((ic + n - 1) % n, 0.0);
        while s + edge_len(j) < window {
            s += edge_len(j);
            j = (j + n - 1) % n;
            if j == ic {
                return Err(collapse(m, "surgery window wraps around"));
            }
        }
        let p_minus = o[(j + 1) % n].lerp(o[j], ((window - s) / edge_len(j)).min(1.0));
        let back_edge = j;

        let mut chain = vec![p_minus];
        let w_pos;
        if window == 0.0 {
            w_pos = chain.len();
            chain.push(c);
        } else {
            let e_plus = (o[(ic + 1) % n] - c).normalized();
            let b = e_plus.rotate(0.5 * alpha);
            let u_plus = b.rotate(-FRAC_PI_4);
            let u_minus = b.rotate(FRAC_PI_4);
            let (w, lambda) = if alpha >= FRAC_PI_2 {
                (c, 0.4 * m)
            } else {
                let s4 = (FRAC_PI_4 - 0.5 * alpha).sin();
                let d = (0.4 * m).min(0.6 * m * s4 / (3.0 * FRAC_PI_4).sin());
                (c + b * d, 0.9 * d * (0.5 * alpha).sin() / s4)
            };
            chain.push(w + u_minus * lambda);
            w_pos = chain.len();
            chain.push(w);
            chain.push(w + u_plus * lambda);
        }
        chain.push(p_plus);
        corners.push(Corner {
            chain,
            w_pos,
            window,
            back_edge,
            fwd_edge,
        });
    }

    // Windows must not overlap.
    for kq in 0..4 {
        let gap = arc(marks[kq], marks[(kq + 1) % 4]);
        if corners[kq].window + corners[(kq + 1) % 4].window >= gap {
            return Err(collapse(m, "surgery windows overlap"));
        }
    }

    let mut verts: Vec<Point> = Vec::new();
    let mut quad = [0usize; 4];
    let push = |verts: &mut Vec<Point>, p: Point| {
        if verts.last().map_or(true, |&l: &Point| l.dist(p) > eps) {
            verts.push(p);
        }
    };
    for kq in 0..4 {
        let c = &corners[kq];
        for (i, &p) in c.chain.iter().enumerate() {
            push(&mut verts, p);
            if i == c.w_pos {
                quad[kq] = verts.len() - 1;
            }
        }
        // Kept vertices up to the next window.
        let next = &corners[(kq + 1) % 4];
        let mut j = (c.fwd_edge + 1) % n;
        let stop = (next.back_edge + 1) % n;
        while j != stop {
            push(&mut verts, o[j]);
            j = (j + 1) % n;
        }
    }
    if verts.first().unwrap().dist(*verts.last().unwrap()) <= eps {
        verts.pop();
    }
    let level = PolygonalQuadrilateral::new(verts, quad)
        .map_err(|e| collapse(m, format!("approximation invalid: {e}")))?;
    if !target.contains_polygon(&level) {
        return Err(collapse(m, "approximation leaves the target"));
    }
    Ok(level)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub k: u32,
    pub margin: f64,
    pub polygon: PolygonalQuadrilateral,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproximationSequence {
    pub target: PolygonalQuadrilateral,
    pub levels: Vec<Level>,
}

impl ApproximationSequence {
    /// Levels `ks` of the inner approximation of `target`.
    pub fn build(
        target: &PolygonalQuadrilateral,
        ks: impl IntoIterator<Item = u32>,
    ) -> Result<Self, ApproximationError> {
        let levels = ks
            .into_iter()
            .map(|k| {
                Ok(Level {
                    k,
                    margin: margin(target, k),
                    polygon: inner_right_angle_approximation(target, k)?,
                })
            })
            .collect::<Result<_, ApproximationError>>()?;
        Ok(ApproximationSequence {
            target: target.clone(),
            levels,
        })
    }

    /// Hausdorff distance of each side of level `i` to the target side.
    pub fn side_distances(&self, i: usize) -> [f64; 4] {
        let p = &self.levels[i].polygon;
        SideLabel::ALL.map(|s| hausdorff_distance(&p.side_polyline(s), &self.target.side_polyline(s)))
    }
}

/// The longest run of consecutive feasible levels ending at the finest
/// feasible level `k ≤ max_k`. Thin targets collapse at the coarse levels.
pub fn feasible_levels(target: &PolygonalQuadrilateral, max_k: u32) -> Option<std::ops::RangeInclusive<u32>> {
    let ok = |k: u32| inner_right_angle_approximation(target, k).is_ok();
    let top = (1..=max_k).rev().find(|&k| ok(k))?;
    let bottom = (1..top).rev().take_while(|&k| ok(k)).last().unwrap_or(top);
    Some(bottom..=top)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub margins: Vec<f64>,
    /// Per level, the side Hausdorff distances in the order `A1, B1, A2, B2`.
    pub side_distances: Vec<[f64; 4]>,
    /// Per consecutive pair, the largest ratio `d_{k+1} / d_k` over sides.
    pub distance_ratios: Vec<f64>,
    pub target_modulus: f64,
    pub level_moduli: Vec<f64>,
    pub modulus_gaps: Vec<f64>,
    /// `|M(h) − M(2h)|` for the target, an a posteriori error estimate.
    pub target_modulus_error: f64,
    /// The same estimate per level.
    pub modulus_errors: Vec<f64>,
    pub right_angles: bool,
}

impl ConvergenceReport {
    /// Every side distance at most `(1/2)(1 + rel)` of the previous one.
    pub fn halving(&self, rel: f64) -> bool {
        self.distance_ratios.iter().all(|&r| r <= 0.5 * (1.0 + rel))
    }

    /// Strictly decreasing modulus gaps.
    pub fn gaps_decreasing(&self) -> bool {
        self.modulus_gaps.windows(2).all(|w| w[1] < w[0])
    }

    /// No gap exceeds the previous one by more than the error estimates of
    /// the three moduli involved.
    pub fn gaps_non_increasing_within_error(&self) -> bool {
        (1..self.modulus_gaps.len()).all(|i| {
            let slack = self.modulus_errors[i - 1] + self.modulus_errors[i] + 2.0 * self.target_modulus_error;
            self.modulus_gaps[i] <= self.modulus_gaps[i - 1] + slack
        })
    }
}

/// Checks nesting and side convergence of the levels and reports the
/// modulus gaps, all moduli taken on a grid of spacing `diam(target)/cells`
/// and compared against spacing twice that for an error estimate.
pub fn check_convergence_from_inside(
    seq: &ApproximationSequence,
    cells: usize,
) -> Result<ConvergenceReport, ApproximationError> {
    let n = seq.levels.len();
    if n < 2 {
        return Err(ApproximationError::TooFewLevels(n));
    }
    for i in 0..n {
        let outer = if i + 1 < n {
            &seq.levels[i + 1].polygon
        } else {
            &seq.target
        };
        if !outer.contains_polygon(&seq.levels[i].polygon) {
            return Err(ApproximationError::NotNested(i, i + 1));
        }
    }
    let side_distances: Vec<[f64; 4]> = (0..n).map(|i| seq.side_distances(i)).collect();
    let mut distance_ratios = Vec::new();
    for i in 0..n - 1 {
        let mut worst: f64 = 0.0;
        for s in 0..4 {
            let (a, b) = (side_distances[i][s], side_distances[i + 1][s]);
            if b > a {
                return Err(ApproximationError::SideDistanceIncreased {
                    side: SideLabel::ALL[s],
                    level: i,
                    next: i + 1,
                });
            }
            worst = worst.max(b / a);
        }
        distance_ratios.push(worst);
    }
    let right_angles = seq.levels.iter().all(|l| {
        (0..4).all(|k| (l.polygon.interior_angle(l.polygon.quad_indices()[k]) - FRAC_PI_2).abs() < 1e-9)
    });
    let h = seq.target.diameter() / cells as f64;
    let (fine, coarse) = (ModulusOptions::with_spacing(h), ModulusOptions::with_spacing(2.0 * h));
    let with_error = |q: &PolygonalQuadrilateral| -> Result<(f64, f64), ApproximationError> {
        let m = estimate_modulus(q, &fine)?.value;
        Ok((m, (m - estimate_modulus(q, &coarse)?.value).abs()))
    };
    let (target_modulus, target_modulus_error) = with_error(&seq.target)?;
    let (level_moduli, modulus_errors): (Vec<f64>, Vec<f64>) = seq
        .levels
        .iter()
        .map(|l| with_error(&l.polygon))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .unzip();
    let modulus_gaps = level_moduli.iter().map(|m| (m - target_modulus).abs()).collect();
    Ok(ConvergenceReport {
        margins: seq.levels.iter().map(|l| l.margin).collect(),
        side_distances,
        distance_ratios,
        target_modulus,
        level_moduli,
        modulus_gaps,
        target_modulus_error,
        modulus_errors,
        right_angles,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub disk: ContactDisk,
    /// Three labels shared by the disks of every level.
    pub triple: SideSet,
    pub tau_limit: f64,
}

const TRIPLES: [[SideLabel; 3]; 4] = {
    use SideLabel::*;
    [[A1, A2, B1], [A1, A2, B2], [B1, B2, A1], [B1, B2, A2]]
};

/// Validates the finest-level disk as a three-side disk of the target at
/// tolerance twice the final side distance.
pub fn limit_disk(
    seq: &ApproximationSequence,
    disks: &[ContactDisk],
) -> Result<LimitReport, ApproximationError> {
    if disks.len() != seq.levels.len() || disks.is_empty() {
        return Err(ApproximationError::LimitInvalid(format!(
            "{} disks for {} levels",
            disks.len(),
            seq.levels.len()
        )));
    }
    let triple = TRIPLES
        .iter()
        .map(|t| SideSet::of(t))
        .find(|&t| disks.iter().all(|d| d.labels().contains_all(t)))
        .ok_or(ApproximationError::LabelMismatch)?;
    let last = seq.levels.len() - 1;
    let tau_limit = 2.0 * seq.side_distances(last).iter().copied().fold(0.0, f64::max);
    let disk = disks[last].clone();
    let t = &seq.target;
    if !t.contains(disk.center) {
        return Err(ApproximationError::LimitInvalid("center outside the target".into()));
    }
    if disk.radius > t.clearance(disk.center) + t.tau_geom() {
        return Err(ApproximationError::LimitInvalid("disk leaves the target".into()));
    }
    for side in triple.iter() {
        let line = t.side_polyline(side);
        let ok = disk
            .contacts
            .iter()
            .filter(|c| c.labels.contains(side))
            .any(|c| point_polyline_distance(c.point, &line) <= tau_limit);
        if !ok {
            return Err(ApproximationError::LimitInvalid(format!(
                "no contact within {tau_limit} of side {side}"
            )));
        }
    }
    Ok(LimitReport {
        disk,
        triple,
        tau_limit,
    })
}
