//! Medial axis of a simple polygon.
//!
//! Sites are the polygon edges and its reflex vertices. For every pair of
//! sites we build the analytic bisector (a line for edge/edge and
//! vertex/vertex pairs, a parabola for edge/vertex pairs) and clip it to the
//! parameters where both sites realize the clearance and no other boundary
//! piece is strictly closer. Along a bisector every comparison with a third
//! piece reduces to the sign of a polynomial of degree at most two in the
//! curve parameter, so the clipping breakpoints are exact roots and never
//! depend on a sampling density. Surviving pieces are stitched into a tree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::MedialAxisError;
use crate::geometry::{BoundaryFeature, Point, PolygonalQuadrilateral};
use crate::tridisk::{classify_contacts, tau_contact, ContactDisk};

/// Hausdorff tolerance between the computed axis and the true one, relative
/// to the diameter.
pub const TAU_MA_REL: f64 = 1e-6;

/// Endpoints closer than this (relative to the diameter) are one node.
const TAU_NODE_REL: f64 = 1e-7;

/// Default number of samples used when a curve is drawn or tested.
pub const DEFAULT_EDGE_SAMPLES: usize = 64;

/// Polynomial `c0 + c1 t + c2 t²`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Poly([f64; 3]);

impl Poly {
    fn constant(c: f64) -> Poly {
        Poly([c, 0.0, 0.0])
    }

    fn add(self, o: Poly) -> Poly {
        Poly([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    fn scale(self, s: f64) -> Poly {
        Poly([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    fn sub(self, o: Poly) -> Poly {
        self.add(o.scale(-1.0))
    }

    /// Product of two polynomials of degree at most one.
    fn mul_linear(self, o: Poly) -> Poly {
        debug_assert!(self.0[2] == 0.0 && o.0[2] == 0.0);
        Poly([
            self.0[0] * o.0[0],
            self.0[0] * o.0[1] + self.0[1] * o.0[0],
            self.0[1] * o.0[1],
        ])
    }

    /// Real roots strictly inside `(lo, hi)`.
    fn roots_in(self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let [c, b, a] = self.0;
        let mut push = |r: f64| {
            if r.is_finite() && r > lo && r < hi {
                out.push(r);
            }
        };
        if a == 0.0 {
            if b != 0.0 {
                push(-c / b);
            }
            return;
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            // A vanishing discriminant marks a tangency; keep the vertex.
            if disc > -1e-14 * (b * b).max((4.0 * a * c).abs()) {
                push(-b / (2.0 * a));
            }
            return;
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            push(0.0);
            return;
        }
        push(q / a);
        push(c / q);
    }
}

/// A pair of coordinate polynomials `p(t) = (x(t), y(t))`.
#[derive(Clone, Copy, Debug)]
struct PolyPoint {
    x: Poly,
    y: Poly,
}

impl PolyPoint {
    /// `u · p(t) + c`.
    fn dot_plus(&self, u: Point, c: f64) -> Poly {
        self.x.scale(u.x).add(self.y.scale(u.y)).add(Poly::constant(c))
    }

    /// `|p(t) - c|²`, requires a linear parameterization.
    fn dist2_linear(&self, c: Point) -> Poly {
        let dx = self.x.sub(Poly::constant(c.x));
        let dy = self.y.sub(Poly::constant(c.y));
        dx.mul_linear(dx).add(dy.mul_linear(dy))
    }
}

/// Curve supporting a medial-axis edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    /// `origin + t · dir` with `dir` a unit vector.
    Line { origin: Point, dir: Point },
    /// Points equidistant from `focus` and the directrix through
    /// `focus - delta · normal` with direction `tangent`:
    /// `focus + t · tangent + (t² − δ²)/(2δ) · normal`.
    Parabola {
        focus: Point,
        tangent: Point,
        normal: Point,
        delta: f64,
    },
}

impl Curve {
    pub fn point(&self, t: f64) -> Point {
        match *self {
            Curve::Line { origin, dir } => origin + dir * t,
            Curve::Parabola {
                focus,
                tangent,
                normal,
                delta,
            } => focus + tangent * t + normal * ((t * t - delta * delta) / (2.0 * delta)),
        }
    }

    fn poly(&self) -> PolyPoint {
        match *self {
            Curve::Line { origin, dir } => PolyPoint {
                x: Poly([origin.x, dir.x, 0.0]),
                y: Poly([origin.y, dir.y, 0.0]),
            },
            Curve::Parabola {
                focus,
                tangent,
                normal,
                delta,
            } => PolyPoint {
                x: Poly([
                    focus.x - 0.5 * delta * normal.x,
                    tangent.x,
                    normal.x / (2.0 * delta),
                ]),
                y: Poly([
                    focus.y - 0.5 * delta * normal.y,
                    tangent.y,
                    normal.y / (2.0 * delta),
                ]),
            },
        }
    }

    pub fn is_parabola(&self) -> bool {
        matches!(self, Curve::Parabola { .. })
    }

    /// Parameter in `[t0, t1]` of the curve point closest to `x`.
    fn project(&self, x: Point, t0: f64, t1: f64) -> f64 {
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        match *self {
            Curve::Line { origin, dir } => (x - origin).dot(dir).clamp(lo, hi),
            Curve::Parabola { .. } => {
                let n = 64;
                let mut best = lo;
                let mut best_d = f64::INFINITY;
                for i in 0..=n {
                    let t = lo + (hi - lo) * i as f64 / n as f64;
                    let d = self.point(t).dist(x);
                    if d < best_d {
                        best_d = d;
                        best = t;
                    }
                }
                // Golden-section refinement in the bracketing cell.
                let step = (hi - lo) / n as f64;
                let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
                let g = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..80 {
                    let c = b - g * (b - a);
                    let d = a + g * (b - a);
                    if self.point(c).dist(x) < self.point(d).dist(x) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                0.5 * (a + b)
            }
        }
    }
}

/// How the clearance is measured along an edge: the signed distance to an
/// edge line, or the distance to a point site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Clearance {
    Line { normal: Point, offset: f64 },
    Point { center: Point },
}

impl Clearance {
    pub fn at(&self, p: Point) -> f64 {
        match *self {
            Clearance::Line { normal, offset } => normal.dot(p) - offset,
            Clearance::Point { center } => p.dist(center),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedialAxisNode {
    pub point: Point,
    pub clearance: f64,
    pub degree: usize,
}

/// One edge of the medial axis, traced from `nodes.0` (at `t0`) to
/// `nodes.1` (at `t1`).
#[derive(Clone, Debug, PartialEq)]
pub struct MedialAxisEdge {
    pub feature_pair: (BoundaryFeature, BoundaryFeature),
    pub curve: Curve,
    pub clearance: Clearance,
    pub t0: f64,
    pub t1: f64,
    pub nodes: (usize, usize),
}

impl MedialAxisEdge {
    /// Point at normalized parameter `s ∈ [0, 1]`.
    pub fn point_at(&self, s: f64) -> Point {
        self.curve.point(self.t0 + s * (self.t1 - self.t0))
    }

    pub fn clearance_at(&self, s: f64) -> f64 {
        self.clearance.at(self.point_at(s))
    }

    pub fn sample(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        (0..=n).map(|i| self.point_at(i as f64 / n as f64)).collect()
    }

    pub fn is_parabolic(&self) -> bool {
        self.curve.is_parabola()
    }

    /// Arc length estimated from a 256-piece polyline.
    pub fn length(&self) -> f64 {
        if let Curve::Line { .. } = self.curve {
            return (self.t1 - self.t0).abs();
        }
        self.sample(256).windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

/// The medial axis as a tree of bisector curves.
#[derive(Clone, Debug, PartialEq)]
pub struct MedialAxisGraph {
    pub nodes: Vec<MedialAxisNode>,
    pub edges: Vec<MedialAxisEdge>,
}

/// One step of a tree path: an edge and the direction it is walked in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub edge: usize,
    pub forward: bool,
}

impl MedialAxisGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.nodes.0].push((i, e.nodes.1));
            adj[e.nodes.1].push((i, e.nodes.0));
        }
        adj
    }

    pub fn component_count(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes.len()];
        let mut count = 0;
        for s in 0..self.nodes.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(_, w) in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_tree(&self) -> bool {
        self.nodes.len() == self.edges.len() + 1 && self.component_count() == 1
    }

    /// Node sitting at `p` (within `tol`).
    pub fn node_at(&self, p: Point, tol: f64) -> Option<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.point.dist(p) <= tol)
            .min_by(|a, b| a.1.point.dist(p).total_cmp(&b.1.point.dist(p)))
            .map(|(i, _)| i)
    }

    /// Tip node at quad-vertex `k` of `q`.
    pub fn quad_tip(&self, q: &PolygonalQuadrilateral, k: usize) -> Result<usize, MedialAxisError> {
        self.node_at(q.quad_vertex(k), TAU_NODE_REL * q.diameter() * 10.0)
            .ok_or(MedialAxisError::MissingTip(k + 1))
    }

    /// The unique simple path between two nodes.
    pub fn tree_path(&self, from: usize, to: usize) -> Result<Vec<PathStep>, MedialAxisError> {
        if from == to {
            return Err(MedialAxisError::SameEndpoints);
        }
        let adj = self.adjacency();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[from] = true;
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &(e, w) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((e, u));
                    queue.push_back(w);
                }
            }
        }
        if !seen[to] {
            return Err(MedialAxisError::Disconnected(from, to));
        }
        let mut steps = Vec::new();
        let mut cur = to;
        while cur != from {
            let (e, prev) = parent[cur].unwrap();
            steps.push(PathStep {
                edge: e,
                forward: self.edges[e].nodes.0 == prev,
            });
            cur = prev;
        }
        steps.reverse();
        Ok(steps)
    }

    /// Point at `s ∈ [0, 1]` along edge `step` of a path, in walking order.
    pub fn step_point(&self, step: PathStep, s: f64) -> Point {
        let e = &self.edges[step.edge];
        e.point_at(if step.forward { s } else { 1.0 - s })
    }

    /// Dense polyline sampling of every edge.
    pub fn polylines(&self, samples: usize) -> Vec<Vec<Point>> {
        self.edges
            .iter()
            .map(|e| match e.curve {
                Curve::Line { .. } => vec![e.point_at(0.0), e.point_at(1.0)],
                Curve::Parabola { .. } => e.sample(samples),
            })
            .collect()
    }

    /// Distance from `p` to the union of the edge curves.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let t = e.curve.project(p, e.t0, e.t1);
                e.curve.point(t).dist(p)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn export(&self) -> GraphExport {
        GraphExport {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeExport {
                    x: n.point.x,
                    y: n.point.y,
                    clearance: n.clearance,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| {
                    let (kind, geometry) = match e.curve {
                        Curve::Line { .. } => (
                            "segment",
                            EdgeGeometry::Segment {
                                from: e.point_at(0.0),
                                to: e.point_at(1.0),
                            },
                        ),
                        Curve::Parabola {
                            focus,
                            tangent,
                            normal,
                            delta,
                        } => (
                            "parabola",
                            EdgeGeometry::Parabola {
                                focus,
                                directrix_point: focus - normal * delta,
                                directrix_direction: tangent,
                                t_range: [e.t0, e.t1],
                            },
                        ),
                    };
                    EdgeExport {
                        node_ids: [e.nodes.0, e.nodes.1],
                        kind: kind.to_string(),
                        geometry,
                        feature_pair: [e.feature_pair.0, e.feature_pair.1],
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<NodeExport>,
    pub edges: Vec<EdgeExport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub x: f64,
    pub y: f64,
    pub clearance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeExport {
    pub node_ids: [usize; 2],
    #[serde(rename = "type")]
    pub kind: String,
    pub geometry: EdgeGeometry,
    pub feature_pair: [BoundaryFeature; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeGeometry {
    Segment {
        from: Point,
        to: Point,
    },
    Parabola {
        focus: Point,
        directrix_point: Point,
        directrix_direction: Point,
        t_range: [f64; 2],
    },
}

impl EdgeGeometry {
    pub fn polyline(&self, samples: usize) -> Vec<Point> {
        match *self {
            EdgeGeometry::Segment { from, to } => vec![from, to],
            EdgeGeometry::Parabola {
                focus,
                directrix_point,
                directrix_direction,
                t_range,
            } => {
                let delta = focus.dist(directrix_point);
                let curve = Curve::Parabola {
                    focus,
                    tangent: directrix_direction,
                    normal: (focus - directrix_point) * (1.0 / delta),
                    delta,
                };
                let n = samples.max(1);
                (0..=n)
                    .map(|i| {
                        curve.point(t_range[0] + (t_range[1] - t_range[0]) * i as f64 / n as f64)
                    })
                    .collect()
            }
        }
    }
}

/// Cached per-edge data.
struct EdgeData {
    a: Point,
    dir: Point,
    len: f64,
    normal: Point,
    offset: f64,
}

impl EdgeData {
    fn sd(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    fn proj(&self, p: Point) -> f64 {
        (p - self.a).dot(self.dir)
    }
}

struct Context<'a> {
    q: &'a PolygonalQuadrilateral,
    edges: Vec<EdgeData>,
    tol: f64,
    lo: Point,
    hi: Point,
}

/// A candidate piece before stitching.
#[derive(Clone, Debug)]
struct Piece {
    features: (BoundaryFeature, BoundaryFeature),
    curve: Curve,
    clearance: Clearance,
    t0: f64,
    t1: f64,
}

/// Bisector of a pair of sites, with the parameter window it can occupy.
struct Bisector {
    curve: Curve,
    poly: PolyPoint,
    lo: f64,
    hi: f64,
    /// Edge site whose signed distance is the clearance, if any.
    edge_site: Option<usize>,
    /// Point site (focus or vertex) at clearance distance, if any.
    point_site: Option<Point>,
    own_edges: Vec<usize>,
    own_vertices: Vec<usize>,
}

impl Bisector {
    fn clearance(&self, ctx: &Context, p: Point) -> f64 {
        match (self.edge_site, self.point_site) {
            (Some(e), _) => ctx.edges[e].sd(p),
            (None, Some(c)) => p.dist(c),
            (None, None) => unreachable!(),
        }
    }

    fn clearance_model(&self, ctx: &Context) -> Clearance {
        match (self.edge_site, self.point_site) {
            (Some(e), _) => Clearance::Line {
                normal: ctx.edges[e].normal,
                offset: ctx.edges[e].offset,
            },
            (None, Some(center)) => Clearance::Point { center },
            (None, None) => unreachable!(),
        }
    }

    /// The clearance as a polynomial, when it is one.
    fn clearance_poly(&self, ctx: &Context) -> Option<Poly> {
        self.edge_site.map(|e| {
            let ed = &ctx.edges[e];
            self.poly.dot_plus(ed.normal, -ed.offset)
        })
    }
}

/// Parameter window of the line `origin + t dir` inside the box.
fn clip_line(origin: Point, dir: Point, lo: Point, hi: Point) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (o, d, l, h) in [(origin.x, dir.x, lo.x, hi.x), (origin.y, dir.y, lo.y, hi.y)] {
        if d.abs() < 1e-15 {
            if o < l || o > h {
                return None;
            }
        } else {
            let (a, b) = ((l - o) / d, (h - o) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 < t1).then_some((t0, t1))
}

impl<'a> Context<'a> {
    fn new(q: &'a PolygonalQuadrilateral) -> Self {
        let edges = (0..q.len())
            .map(|j| {
                let (a, b) = q.edge(j);
                let len = a.dist(b);
                let dir = (b - a) * (1.0 / len);
                let normal = dir.perp();
                EdgeData {
                    a,
                    dir,
                    len,
                    normal,
                    offset: normal.dot(a),
                }
            })
            .collect();
        let bb = q.bbox();
        let pad = 1e-6 * q.diameter();
        Context {
            q,
            edges,
            tol: q.tau_geom(),
            lo: Point::new(bb.min.x - pad, bb.min.y - pad),
            hi: Point::new(bb.max.x + pad, bb.max.y + pad),
        }
    }

    fn bisector(&self, s1: BoundaryFeature, s2: BoundaryFeature) -> Option<Bisector> {
        let n = self.q.len();
        let center = self.lo.lerp(self.hi, 0.5);
        let make_line = |m: Point, rhs: f64| -> Option<(Curve, f64, f64)> {
            // Line {p : m·p = rhs}.
            let m2 = m.norm2();
            let origin = center + m * ((rhs - m.dot(center)) / m2);
            let dir = m.perp().normalized();
            let (lo, hi) = clip_line(origin, dir, self.lo, self.hi)?;
            Some((Curve::Line { origin, dir }, lo, hi))
        };
        match (s1, s2) {
            (BoundaryFeature::Edge(a), BoundaryFeature::Edge(b)) => {
                let (ea, eb) = (&self.edges[a], &self.edges[b]);
                let m = ea.normal - eb.normal;
                if m.norm() < 1e-9 {
                    return None;
                }
                let (curve, lo, hi) = make_line(m, ea.offset - eb.offset)?;
                Some(Bisector {
                    poly: curve.poly(),
                    curve,
                    lo,
                    hi,
                    edge_site: Some(a),
                    point_site: None,
                    own_edges: vec![a, b],
                    own_vertices: vec![],
                })
            }
            (BoundaryFeature::Edge(e), BoundaryFeature::ReflexVertex(v))
            | (BoundaryFeature::ReflexVertex(v), BoundaryFeature::Edge(e)) => {
                if v == e || v == (e + 1) % n {
                    return None;
                }
                let ed = &self.edges[e];
                let focus = self.q.vertex(v);
                let delta = ed.sd(focus);
                if delta <= self.tol {
                    return None;
                }
                let diag = self.lo.dist(self.hi);
                let span = (delta * diag).sqrt() + diag;
                let curve = Curve::Parabola {
                    focus,
                    tangent: ed.dir,
                    normal: ed.normal,
                    delta,
                };
                Some(Bisector {
                    poly: curve.poly(),
                    curve,
                    lo: -span,
                    hi: span,
                    edge_site: Some(e),
                    point_site: Some(focus),
                    own_edges: vec![e],
                    own_vertices: vec![v],
                })
            }
            (BoundaryFeature::ReflexVertex(v), BoundaryFeature::ReflexVertex(w)) => {
                let (pv, pw) = (self.q.vertex(v), self.q.vertex(w));
                let m = pw - pv;
                let (curve, lo, hi) = make_line(m, 0.5 * (pw.norm2() - pv.norm2()))?;
                Some(Bisector {
                    poly: curve.poly(),
                    curve,
                    lo,
                    hi,
                    edge_site: None,
                    point_site: Some(pv),
                    own_edges: vec![],
                    own_vertices: vec![v, w],
                })
            }
        }
    }

    /// Valid parameter intervals of a bisector.
    fn clip(&self, b: &Bisector) -> Vec<(f64, f64)> {
        let mut valid = vec![(b.lo, b.hi)];
        let d1_poly = b.clearance_poly(self);
        let mut breaks = Vec::with_capacity(8);

        // Edge sites must realize their distance: foot inside the segment and
        // the point on the inner side.
        for &e in &b.own_edges {
            let ed = &self.edges[e];
            breaks.clear();
            let proj = b.poly.dot_plus(ed.dir, -ed.dir.dot(ed.a));
            proj.roots_in(b.lo, b.hi, &mut breaks);
            proj.sub(Poly::constant(ed.len))
                .roots_in(b.lo, b.hi, &mut breaks);
            b.poly
                .dot_plus(ed.normal, -ed.offset)
                .roots_in(b.lo, b.hi, &mut breaks);
            subtract_where(&mut valid, &mut breaks, |t| {
                let p = b.curve.point(t);
                let s = ed.proj(p);
                s < 0.0 || s > ed.len || ed.sd(p) < 0.0
            });
        }

        // Vertex sites must be the nearest point of both incident edges. Exact
        // here, because the neighbouring edge bisector meets this one
        // tangentially and a tolerance test would leave an overlap.
        let n = self.q.len();
        for &v in &b.own_vertices {
            let (ein, eout) = (&self.edges[(v + n - 1) % n], &self.edges[v]);
            breaks.clear();
            b.poly
                .dot_plus(ein.dir, -ein.dir.dot(ein.a) - ein.len)
                .roots_in(b.lo, b.hi, &mut breaks);
            b.poly
                .dot_plus(eout.dir, -eout.dir.dot(eout.a))
                .roots_in(b.lo, b.hi, &mut breaks);
            subtract_where(&mut valid, &mut breaks, |t| {
                let p = b.curve.point(t);
                ein.proj(p) < ein.len || eout.proj(p) > 0.0
            });
        }

        for g in 0..self.edges.len() {
            if valid.is_empty() {
                return valid;
            }
            if b.own_edges.contains(&g) {
                continue;
            }
            let ed = &self.edges[g];
            let (lo, hi) = span(&valid);
            breaks.clear();
            let proj = b.poly.dot_plus(ed.dir, -ed.dir.dot(ed.a));
            proj.roots_in(lo, hi, &mut breaks);
            proj.sub(Poly::constant(ed.len)).roots_in(lo, hi, &mut breaks);
            let sd = b.poly.dot_plus(ed.normal, -ed.offset);
            match d1_poly {
                Some(d1) => {
                    sd.sub(d1).roots_in(lo, hi, &mut breaks);
                    sd.scale(-1.0).sub(d1).roots_in(lo, hi, &mut breaks);
                }
                None => {
                    let c = b.point_site.unwrap();
                    sd.mul_linear(sd)
                        .sub(b.poly.dist2_linear(c))
                        .roots_in(lo, hi, &mut breaks);
                }
            }
            subtract_where(&mut valid, &mut breaks, |t| {
                let p = b.curve.point(t);
                let s = ed.proj(p);
                s >= 0.0 && s <= ed.len && ed.sd(p).abs() < b.clearance(self, p)
            });
        }

        for k in 0..self.q.len() {
            if valid.is_empty() {
                return valid;
            }
            if b.own_vertices.contains(&k) {
                continue;
            }
            let c = self.q.vertex(k);
            let (lo, hi) = span(&valid);
            breaks.clear();
            let f = match (b.point_site, d1_poly) {
                // |p-c|² − |p-f|² is linear in p.
                (Some(f), _) => b.poly.dot_plus((f - c) * 2.0, c.norm2() - f.norm2()),
                (None, Some(d1)) => b.poly.dist2_linear(c).sub(d1.mul_linear(d1)),
                (None, None) => unreachable!(),
            };
            f.roots_in(lo, hi, &mut breaks);
            subtract_where(&mut valid, &mut breaks, |t| {
                let p = b.curve.point(t);
                p.dist(c) < b.clearance(self, p)
            });
        }
        valid
    }
}

fn span(valid: &[(f64, f64)]) -> (f64, f64) {
    (valid[0].0, valid[valid.len() - 1].1)
}

/// Removes from `valid` every sub-interval between consecutive breakpoints
/// whose midpoint satisfies `blocked`.
fn subtract_where(valid: &mut Vec<(f64, f64)>, breaks: &mut Vec<f64>, blocked: impl Fn(f64) -> bool) {
    if valid.is_empty() {
        return;
    }
    let (lo, hi) = span(valid);
    breaks.push(lo);
    breaks.push(hi);
    breaks.retain(|&t| t >= lo && t <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut cut: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        // Skip cells that do not meet any valid interval.
        if !valid.iter().any(|&(c, d)| c < b && a < d) {
            continue;
        }
        if blocked(0.5 * (a + b)) {
            match cut.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => cut.push((a, b)),
            }
        }
    }
    if cut.is_empty() {
        return;
    }
    let mut out = Vec::with_capacity(valid.len() + cut.len());
    for &(c, d) in valid.iter() {
        let mut start = c;
        for &(a, b) in &cut {
            if b <= start || a >= d {
                continue;
            }
            if a > start {
                out.push((start, a));
            }
            start = start.max(b);
        }
        if start < d {
            out.push((start, d));
        }
    }
    *valid = out;
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = i;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Computes the medial axis of `q` as a tree.
pub fn compute_medial_axis(q: &PolygonalQuadrilateral) -> Result<MedialAxisGraph, MedialAxisError> {
    let tol = q.tau_geom();
    for j in 0..q.len() {
        let (a, b) = q.edge(j);
        if a.dist(b) <= tol {
            return Err(MedialAxisError::DegenerateInput(format!(
                "edge {j} has zero length"
            )));
        }
    }
    let ctx = Context::new(q);
    let mut sites: Vec<BoundaryFeature> = (0..q.len()).map(BoundaryFeature::Edge).collect();
    sites.extend(q.reflex_vertices().into_iter().map(BoundaryFeature::ReflexVertex));
    let pairs: Vec<(BoundaryFeature, BoundaryFeature)> = (0..sites.len())
        .flat_map(|i| (i + 1..sites.len()).map(move |j| (i, j)))
        .map(|(i, j)| (sites[i], sites[j]))
        .collect();
    let min_len = 1e-9 * q.diameter();
    let pieces: Vec<Piece> = pairs
        .par_iter()
        .flat_map_iter(|&(s1, s2)| {
            let mut out = Vec::new();
            if let Some(b) = ctx.bisector(s1, s2) {
                for (t0, t1) in ctx.clip(&b) {
                    if t1 - t0 <= min_len {
                        continue;
                    }
                    let mid = b.curve.point(0.5 * (t0 + t1));
                    if !crate::geometry::crossing_inside(q.vertices(), mid)
                        || b.clearance(&ctx, mid) <= tol
                    {
                        continue;
                    }
                    out.push(Piece {
                        features: (s1, s2),
                        curve: b.curve,
                        clearance: b.clearance_model(&ctx),
                        t0,
                        t1,
                    });
                }
            }
            out
        })
        .collect();
    stitch(q, pieces)
}

fn stitch(q: &PolygonalQuadrilateral, pieces: Vec<Piece>) -> Result<MedialAxisGraph, MedialAxisError> {
    let tol_node = TAU_NODE_REL * q.diameter();
    let mut pieces = pieces;

    // Endpoint positions, snapped to polygon vertices where they meet one.
    let snap = |p: Point| -> Point {
        q.vertices()
            .iter()
            .copied()
            .find(|v| v.dist(p) <= tol_node)
            .unwrap_or(p)
    };

    for _round in 0..4 {
        let ends: Vec<Point> = pieces
            .iter()
            .flat_map(|pc| [snap(pc.curve.point(pc.t0)), snap(pc.curve.point(pc.t1))])
            .collect();
        // Split pieces at endpoints of other pieces that land on their interior.
        let mut changed = false;
        let mut next: Vec<Piece> = Vec::with_capacity(pieces.len());
        for (i, pc) in pieces.iter().enumerate() {
            let mut cuts: Vec<f64> = Vec::new();
            for (k, &x) in ends.iter().enumerate() {
                if k / 2 == i {
                    continue;
                }
                let t = pc.curve.project(x, pc.t0, pc.t1);
                let p = pc.curve.point(t);
                if p.dist(x) <= tol_node
                    && p.dist(pc.curve.point(pc.t0)) > tol_node
                    && p.dist(pc.curve.point(pc.t1)) > tol_node
                {
                    cuts.push(t);
                }
            }
            if cuts.is_empty() {
                next.push(pc.clone());
                continue;
            }
            changed = true;
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
            let mut start = pc.t0;
            for t in cuts.into_iter().chain(std::iter::once(pc.t1)) {
                let mut s = pc.clone();
                s.t0 = start;
                s.t1 = t;
                next.push(s);
                start = t;
            }
        }
        pieces = next;
        if !changed {
            break;
        }
    }

    let ends: Vec<Point> = pieces
        .iter()
        .flat_map(|pc| [snap(pc.curve.point(pc.t0)), snap(pc.curve.point(pc.t1))])
        .collect();
    let mut uf = UnionFind((0..ends.len()).collect());
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            if ends[i].dist(ends[j]) <= tol_node {
                uf.union(i, j);
            }
        }
    }
    let mut root_to_node = std::collections::BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..ends.len() {
        let r = uf.find(i);
        let id = *root_to_node.entry(r).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[id].push(i);
    }
    let node_of = |i: usize, uf: &mut UnionFind| root_to_node[&uf.find(i)];
    let node_points: Vec<Point> = members
        .iter()
        .map(|m| {
            if let Some(v) = m.iter().map(|&i| ends[i]).find(|p| q.vertices().contains(p)) {
                return v;
            }
            let mut s = Point::default();
            for &i in m {
                s += ends[i];
            }
            s * (1.0 / m.len() as f64)
        })
        .collect();

    let mut edges: Vec<MedialAxisEdge> = Vec::new();
    for (i, pc) in pieces.into_iter().enumerate() {
        let (a, b) = (node_of(2 * i, &mut uf), node_of(2 * i + 1, &mut uf));
        if a == b {
            continue;
        }
        edges.push(MedialAxisEdge {
            feature_pair: pc.features,
            curve: pc.curve,
            clearance: pc.clearance,
            t0: pc.t0,
            t1: pc.t1,
            nodes: (a, b),
        });
    }

    // Dissolve degree-2 nodes joining two pieces of the same bisector.
    loop {
        let mut degree = vec![0usize; node_points.len()];
        for e in &edges {
            degree[e.nodes.0] += 1;
            degree[e.nodes.1] += 1;
        }
        let mut merged = false;
        'outer: for n in 0..node_points.len() {
            if degree[n] != 2 {
                continue;
            }
            let inc: Vec<usize> = (0..edges.len())
                .filter(|&i| edges[i].nodes.0 == n || edges[i].nodes.1 == n)
                .collect();
            let (i, j) = (inc[0], inc[1]);
            if edges[i].feature_pair != edges[j].feature_pair || edges[i].curve != edges[j].curve {
                continue;
            }
            let far = |e: &MedialAxisEdge| if e.nodes.0 == n { (e.nodes.1, e.t1) } else { (e.nodes.0, e.t0) };
            let (ni, ti) = far(&edges[i]);
            let (nj, tj) = far(&edges[j]);
            let mut e = edges[i].clone();
            if ti <= tj {
                e.t0 = ti;
                e.t1 = tj;
                e.nodes = (ni, nj);
            } else {
                e.t0 = tj;
                e.t1 = ti;
                e.nodes = (nj, ni);
            }
            edges[i] = e;
            edges.remove(j);
            merged = true;
            break 'outer;
        }
        if !merged {
            break;
        }
    }

    // Drop nodes no edge uses and renumber.
    let mut used = vec![false; node_points.len()];
    for e in &edges {
        used[e.nodes.0] = true;
        used[e.nodes.1] = true;
    }
    let mut remap = vec![usize::MAX; node_points.len()];
    let mut nodes = Vec::new();
    for (i, &p) in node_points.iter().enumerate() {
        if used[i] {
            remap[i] = nodes.len();
            nodes.push(MedialAxisNode {
                point: p,
                clearance: q.clearance(p),
                degree: 0,
            });
        }
    }
    for e in edges.iter_mut() {
        e.nodes = (remap[e.nodes.0], remap[e.nodes.1]);
        nodes[e.nodes.0].degree += 1;
        nodes[e.nodes.1].degree += 1;
    }
    for n in nodes.iter_mut() {
        if n.clearance <= q.tau_geom() {
            n.clearance = 0.0;
        }
    }
    let graph = MedialAxisGraph { nodes, edges };
    if !graph.is_tree() {
        return Err(MedialAxisError::NotATree {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            components: graph.component_count(),
        });
    }
    Ok(graph)
}

/// Maximal disk centred at `p`, with its boundary contacts labelled by side.
pub fn maximal_disk(q: &PolygonalQuadrilateral, p: Point) -> Result<ContactDisk, MedialAxisError> {
    let radius = q.distance_to_boundary(p)?;
    Ok(classify_contacts(q, p, radius, tau_contact(q)))
}
