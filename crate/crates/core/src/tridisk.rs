//! Disks whose boundary meets three sides of a quadrilateral.
//!
//! The sweep walks the medial-axis path from the tip at `v1` to the tip at
//! `v3`. The maximal disk starts out touching the two sides at `v1` and ends
//! touching the two sides at `v3`; at the last parameter where it still
//! touches both sides at `v1` it must touch a third one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::TridiskError;
use crate::geometry::{
    closest_on_segment, crossing_inside, BoundaryFeature, Point, PolygonalQuadrilateral, SideLabel,
    SideSet,
};
use crate::medial_axis::{compute_medial_axis, MedialAxisGraph, PathStep};

/// Samples per medial-axis edge before bisection.
pub const SWEEP_SAMPLES_PER_EDGE: usize = 256;

/// Parameter tolerance of every bisection along the sweep path.
pub const SWEEP_BISECTION_TOL: f64 = 1e-10;

/// Contact band `max(1e-9, 1e-7 · diam)`.
pub fn tau_contact(q: &PolygonalQuadrilateral) -> f64 {
    (1e-7 * q.diameter()).max(1e-9)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub point: Point,
    pub labels: SideSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactDisk {
    pub center: Point,
    pub radius: f64,
    pub contacts: Vec<Contact>,
}

impl ContactDisk {
    /// Union of the labels of all contacts.
    pub fn labels(&self) -> SideSet {
        self.contacts
            .iter()
            .fold(SideSet::default(), |acc, c| acc.union(c.labels))
    }

    pub fn is_three_side(&self) -> bool {
        let l = self.labels();
        l.len() >= 3 && l.has_opposite_pair()
    }

    /// How far `samples` points of the circle stick out of the polygon.
    pub fn inside_residual(&self, q: &PolygonalQuadrilateral, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let a = std::f64::consts::TAU * i as f64 / samples as f64;
            let p = self.center + Point::new(a.cos(), a.sin()) * self.radius;
            if !crossing_inside(q.vertices(), p) {
                worst = worst.max(q.clearance(p));
            }
        }
        worst.max(self.radius - q.clearance(self.center))
    }

    /// Largest deviation of a contact from lying on both circle and boundary.
    pub fn contact_residual(&self, q: &PolygonalQuadrilateral) -> f64 {
        self.contacts
            .iter()
            .map(|c| (c.point.dist(self.center) - self.radius).abs().max(q.clearance(c.point)))
            .fold(0.0, f64::max)
    }
}

/// Contacts of the disk `D(center, radius)` with the boundary within `tol`.
///
/// Contacts closer than `tol` to each other are merged; a contact near a
/// quad-vertex carries both adjacent labels.
pub fn classify_contacts(
    q: &PolygonalQuadrilateral,
    center: Point,
    radius: f64,
    tol: f64,
) -> ContactDisk {
    let n = q.len();
    let mut contacts: Vec<Contact> = Vec::new();
    for j in 0..n {
        let (a, b) = q.edge(j);
        let (t, foot) = closest_on_segment(center, a, b);
        if foot.dist(center) > radius + tol {
            continue;
        }
        let feature = if t <= 0.0 && q.is_reflex(j) {
            BoundaryFeature::ReflexVertex(j)
        } else if t >= 1.0 && q.is_reflex((j + 1) % n) {
            BoundaryFeature::ReflexVertex((j + 1) % n)
        } else {
            BoundaryFeature::Edge(j)
        };
        let labels = q.labels_at(foot, feature, tol);
        match contacts.iter_mut().find(|c| c.point.dist(foot) <= tol) {
            Some(c) => c.labels = c.labels.union(labels),
            None => contacts.push(Contact { point: foot, labels }),
        }
    }
    ContactDisk {
        center,
        radius,
        contacts,
    }
}

/// Label set of the maximal disk at `p`.
fn labels_of(q: &PolygonalQuadrilateral, p: Point, tol: f64) -> SideSet {
    classify_contacts(q, p, q.clearance(p), tol).labels()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub t: f64,
    pub center: Point,
    pub radius: f64,
    pub labels: SideSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub t: f64,
    pub before: SideSet,
    pub after: SideSet,
}

/// Record of one sweep. Parameters `t ∈ [0, 1]` are normalized so that each
/// path edge covers an equal share.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTranscript {
    /// Quad positions (0-based) of the tips the sweep ran between.
    pub from_vertex: usize,
    pub to_vertex: usize,
    pub path_edges: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SweepSample>,
    pub transitions: Vec<Transition>,
    /// Parameter of the returned disk.
    pub found_at: f64,
    /// Samples whose disk misses one of the two boundary arcs between the
    /// sweep endpoints.
    pub component_violations: usize,
    /// Whether the sweep had to fall back to the `v2 → v4` path.
    pub retried: bool,
}

impl SweepTranscript {
    pub fn without_samples(mut self) -> Self {
        self.samples.clear();
        self
    }
}

struct SweepPath<'a> {
    graph: &'a MedialAxisGraph,
    steps: Vec<PathStep>,
}

impl SweepPath<'_> {
    fn point(&self, t: f64) -> Point {
        let m = self.steps.len() as f64;
        let u = (t * m).clamp(0.0, m);
        let i = (u.floor() as usize).min(self.steps.len() - 1);
        self.graph.step_point(self.steps[i], u - i as f64)
    }
}

fn bisect(mut good: f64, mut bad: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
    while (bad - good).abs() > SWEEP_BISECTION_TOL {
        let mid = 0.5 * (good + bad);
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    (good, bad)
}

fn sweep(
    q: &PolygonalQuadrilateral,
    graph: &MedialAxisGraph,
    from: usize,
    to: usize,
) -> Result<(ContactDisk, SweepTranscript), TridiskError> {
    let a = graph.quad_tip(q, from)?;
    let b = graph.quad_tip(q, to)?;
    let path = SweepPath {
        graph,
        steps: graph.tree_path(a, b)?,
    };
    let tol = tau_contact(q);
    // Sides meeting at the start vertex, and the two boundary arcs between
    // the endpoints.
    let start = SideSet::of(&[SideLabel::from_index(from), SideLabel::from_index(from + 3)]);
    let arc1 = SideSet::of(&[SideLabel::from_index(from), SideLabel::from_index(from + 1)]);
    let arc2 = SideSet::of(&[SideLabel::from_index(from + 2), SideLabel::from_index(from + 3)]);

    let total = path.steps.len() * SWEEP_SAMPLES_PER_EDGE;
    let samples: Vec<SweepSample> = (0..=total)
        .map(|i| {
            let t = i as f64 / total as f64;
            let center = path.point(t);
            let radius = q.clearance(center);
            SweepSample {
                t,
                center,
                radius,
                labels: labels_of(q, center, tol),
            }
        })
        .collect();
    let holds = |t: f64| labels_of(q, path.point(t), tol).contains_all(start);

    let mut transitions = Vec::new();
    for w in samples.windows(2) {
        if w[0].labels != w[1].labels {
            let before = w[0].labels;
            let (lo, hi) = bisect(w[0].t, w[1].t, |t| labels_of(q, path.point(t), tol) == before);
            transitions.push(Transition {
                t: 0.5 * (lo + hi),
                before,
                after: labels_of(q, path.point(hi), tol),
            });
        }
    }
    let component_violations = samples
        .iter()
        .filter(|s| s.labels.intersection(arc1).is_empty() || s.labels.intersection(arc2).is_empty())
        .count();

    let last = samples
        .iter()
        .rposition(|s| s.labels.contains_all(start))
        .ok_or_else(|| TridiskError::SweepFailure("start sides never touched".into()))?;
    let mut candidates = vec![samples[last].t];
    if last + 1 < samples.len() {
        let (lo, hi) = bisect(samples[last].t, samples[last + 1].t, holds);
        candidates = vec![lo, hi, samples[last].t];
        // Labels only change at path nodes; the contact band blurs the
        // transition past the node by up to a sample cell.
        let node = last / SWEEP_SAMPLES_PER_EDGE * SWEEP_SAMPLES_PER_EDGE;
        if last - node <= 1 && samples[node].labels.contains_all(start) {
            candidates.insert(0, samples[node].t);
        }
    }
    for t in candidates {
        let center = path.point(t);
        let disk = classify_contacts(q, center, q.clearance(center), tol);
        if disk.labels().len() >= 3 {
            let transcript = SweepTranscript {
                from_vertex: from,
                to_vertex: to,
                path_edges: path.steps.len(),
                samples,
                transitions,
                found_at: t,
                component_violations,
                retried: false,
            };
            return Ok((disk, transcript));
        }
    }
    Err(TridiskError::SweepFailure(format!(
        "no third side at t = {}",
        samples[last].t
    )))
}

/// Three-side disk of `q` by the medial-axis sweep from `v1` to `v3`,
/// retrying from `v2` to `v4` on failure.
pub fn find_three_side_disk(
    q: &PolygonalQuadrilateral,
) -> Result<(ContactDisk, SweepTranscript), TridiskError> {
    let graph = compute_medial_axis(q)?;
    find_three_side_disk_with(q, &graph)
}

/// As [`find_three_side_disk`], reusing a computed medial axis.
pub fn find_three_side_disk_with(
    q: &PolygonalQuadrilateral,
    graph: &MedialAxisGraph,
) -> Result<(ContactDisk, SweepTranscript), TridiskError> {
    for k in 0..4 {
        if q.interior_angle(q.quad_indices()[k]) >= std::f64::consts::PI {
            return Err(TridiskError::ReflexQuadVertex(k + 1));
        }
    }
    let first = sweep(q, graph, 0, 2);
    let ok = |r: &Result<(ContactDisk, SweepTranscript), TridiskError>| {
        matches!(r, Ok((d, _)) if d.is_three_side())
    };
    if ok(&first) {
        return first;
    }
    let second = sweep(q, graph, 1, 3).map(|(d, mut t)| {
        t.retried = true;
        (d, t)
    });
    if ok(&second) {
        return second;
    }
    match (first, second) {
        (Ok((d, _)), _) | (_, Ok((d, _))) => Err(TridiskError::SweepFailure(format!(
            "best disk only touches {}",
            d.labels()
        ))),
        (Err(e), _) => Err(e),
    }
}

/// Grid oracle: the largest maximal disk centred on a `grid_n × grid_n`
/// lattice whose contacts, at tolerance `2 · diam / grid_n`, cover three
/// sides.
pub fn brute_force_three_side_disk(
    q: &PolygonalQuadrilateral,
    grid_n: usize,
) -> Result<ContactDisk, TridiskError> {
    if grid_n < 16 {
        return Err(TridiskError::GridTooSmall(grid_n));
    }
    let bb = q.bbox();
    let tol = 2.0 * q.diameter() / grid_n as f64;
    let (w, h) = (bb.width() / grid_n as f64, bb.height() / grid_n as f64);
    let best = (0..grid_n)
        .into_par_iter()
        .filter_map(|i| {
            let mut best: Option<ContactDisk> = None;
            for j in 0..grid_n {
                let p = Point::new(bb.min.x + (i as f64 + 0.5) * w, bb.min.y + (j as f64 + 0.5) * h);
                if !q.contains_strict(p) {
                    continue;
                }
                let d = classify_contacts(q, p, q.clearance(p), tol);
                if d.labels().len() >= 3 && best.as_ref().map_or(true, |b| better(&d, b)) {
                    best = Some(d);
                }
            }
            best
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a });
    best.ok_or(TridiskError::NoneFound)
}

/// Larger radius wins; ties go to the lexicographically smaller center.
fn better(a: &ContactDisk, b: &ContactDisk) -> bool {
    match a.radius.total_cmp(&b.radius) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            (a.center.x, a.center.y).partial_cmp(&(b.center.x, b.center.y))
                == Some(std::cmp::Ordering::Less)
        }
    }
}
