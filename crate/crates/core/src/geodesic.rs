//! Internal distances between opposite sides.
//!
//! A shortest path between two sides bends only at reflex vertices, and its
//! first and last legs either meet the side perpendicularly or end at a side
//! vertex. Distances from every reflex vertex to each side are therefore
//! exact over a finite candidate set, and a visibility graph on the reflex
//! vertices finishes the job.

use serde::{Deserialize, Serialize};

use crate::geometry::{closest_on_segment, segment_segment_closest, Point, PolygonalQuadrilateral, SideLabel};

/// Which pair of opposite sides to join.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SidePair {
    /// `A1` with `A2`.
    A,
    /// `B1` with `B2`.
    B,
}

impl SidePair {
    pub fn sides(self) -> (SideLabel, SideLabel) {
        match self {
            SidePair::A => (SideLabel::A1, SideLabel::A2),
            SidePair::B => (SideLabel::B1, SideLabel::B2),
        }
    }
}

/// A polyline inside the closed polygon joining the two sides of a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicWitness {
    pub pair: SidePair,
    pub path: Vec<Point>,
    pub length: f64,
}

impl GeodesicWitness {
    /// Every leg lies in the closed polygon.
    pub fn is_inside(&self, q: &PolygonalQuadrilateral) -> bool {
        self.path.windows(2).all(|w| q.segment_inside(w[0], w[1]))
    }
}

fn side_segments(q: &PolygonalQuadrilateral, side: SideLabel) -> Vec<(Point, Point)> {
    q.side_edges(side).into_iter().map(|j| q.edge(j)).collect()
}

/// Shortest visible straight leg from `p` to a side: `(length, foot)`.
fn leg_to_side(q: &PolygonalQuadrilateral, p: Point, segs: &[(Point, Point)]) -> Option<(f64, Point)> {
    let mut best: Option<(f64, Point)> = None;
    for &(a, b) in segs {
        for x in [closest_on_segment(p, a, b).1, a, b] {
            let d = p.dist(x);
            if best.map_or(true, |(bd, _)| d < bd) && q.segment_inside(p, x) {
                best = Some((d, x));
            }
        }
    }
    best
}

/// Shortest visible straight segment between two sides.
fn direct_leg(
    q: &PolygonalQuadrilateral,
    s: &[(Point, Point)],
    t: &[(Point, Point)],
) -> Option<(f64, Point, Point)> {
    let mut best: Option<(f64, Point, Point)> = None;
    let consider = |x: Point, y: Point, best: &mut Option<(f64, Point, Point)>| {
        let d = x.dist(y);
        if best.map_or(true, |(bd, _, _)| d < bd) && q.segment_inside(x, y) {
            *best = Some((d, x, y));
        }
    };
    for &(a, b) in s {
        for &(c, e) in t {
            let (x, y) = segment_segment_closest(a, b, c, e);
            consider(x, y, &mut best);
            for p in [a, b] {
                consider(p, closest_on_segment(p, c, e).1, &mut best);
            }
            for p in [c, e] {
                consider(closest_on_segment(p, a, b).1, p, &mut best);
            }
        }
    }
    best
}

/// Geodesic distance inside the closed polygon between the two sides of
/// `pair`, with a witness path realizing it.
pub fn internal_side_distance(q: &PolygonalQuadrilateral, pair: SidePair) -> (f64, GeodesicWitness) {
    let (s1, s2) = pair.sides();
    let src = side_segments(q, s1);
    let dst = side_segments(q, s2);
    let reflex: Vec<Point> = q.reflex_vertices().into_iter().map(|k| q.vertex(k)).collect();
    let r = reflex.len();

    // Nodes: 0..r reflex vertices, r source, r + 1 target.
    let (source, target) = (r, r + 1);
    let nn = r + 2;
    let mut w = vec![vec![f64::INFINITY; nn]; nn];
    let mut feet = vec![[Point::default(); 2]; r];
    for (i, &p) in reflex.iter().enumerate() {
        if let Some((d, foot)) = leg_to_side(q, p, &src) {
            w[source][i] = d;
            feet[i][0] = foot;
        }
        if let Some((d, foot)) = leg_to_side(q, p, &dst) {
            w[i][target] = d;
            feet[i][1] = foot;
        }
        for j in i + 1..r {
            if q.segment_inside(p, reflex[j]) {
                let d = p.dist(reflex[j]);
                w[i][j] = d;
                w[j][i] = d;
            }
        }
    }
    let direct = direct_leg(q, &src, &dst);
    if let Some((d, _, _)) = direct {
        w[source][target] = d;
    }

    // Dense Dijkstra from the source.
    let mut dist = vec![f64::INFINITY; nn];
    let mut prev = vec![usize::MAX; nn];
    let mut done = vec![false; nn];
    dist[source] = 0.0;
    for _ in 0..nn {
        let Some(u) = (0..nn)
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        if u == target {
            break;
        }
        for v in 0..nn {
            if !done[v] && v != source && dist[u] + w[u][v] < dist[v] {
                dist[v] = dist[u] + w[u][v];
                prev[v] = u;
            }
        }
    }

    let mut nodes = vec![target];
    while *nodes.last().unwrap() != source {
        nodes.push(prev[*nodes.last().unwrap()]);
    }
    nodes.reverse();
    let mut path = Vec::with_capacity(nodes.len());
    if nodes.len() == 2 {
        let (_, x, y) = direct.expect("direct leg");
        path.extend([x, y]);
    } else {
        path.push(feet[nodes[1]][0]);
        path.extend(nodes[1..nodes.len() - 1].iter().map(|&i| reflex[i]));
        path.push(feet[nodes[nodes.len() - 2]][1]);
    }
    let length = dist[target];
    (length, GeodesicWitness { pair, path, length })
}

/// Both internal distances `(s_a, s_b)`.
pub fn internal_distances(q: &PolygonalQuadrilateral) -> (f64, f64) {
    (
        internal_side_distance(q, SidePair::A).0,
        internal_side_distance(q, SidePair::B).0,
    )
}

/// Sampled oracle: each side is sampled at `samples` points per side, the
/// visibility graph over side samples and all polygon vertices is searched
/// with Dijkstra.
pub fn sampled_side_distance(q: &PolygonalQuadrilateral, pair: SidePair, samples: usize) -> f64 {
    let sample_side = |side: SideLabel| -> Vec<Point> {
        let line = q.side_polyline(side);
        let lens: Vec<f64> = line.windows(2).map(|w| w[0].dist(w[1])).collect();
        let total: f64 = lens.iter().sum();
        let mut out = Vec::with_capacity(samples + line.len());
        out.extend(line.iter().copied());
        for i in 0..=samples {
            let mut s = total * i as f64 / samples as f64;
            for (k, &l) in lens.iter().enumerate() {
                if s <= l || k + 1 == lens.len() {
                    out.push(line[k].lerp(line[k + 1], (s / l).min(1.0)));
                    break;
                }
                s -= l;
            }
        }
        out
    };
    let (s1, s2) = pair.sides();
    let src = sample_side(s1);
    let dst = sample_side(s2);
    let mut pts: Vec<Point> = q.vertices().to_vec();
    let nv = pts.len();
    pts.extend(&src);
    pts.extend(&dst);
    let is_src = |i: usize| i >= nv && i < nv + src.len();
    let is_dst = |i: usize| i >= nv + src.len();
    let n = pts.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    for i in 0..n {
        if is_src(i) {
            dist[i] = 0.0;
        }
    }
    loop {
        let Some(u) = (0..n)
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            return f64::INFINITY;
        };
        if is_dst(u) {
            return dist[u];
        }
        done[u] = true;
        for v in 0..n {
            if done[v] || is_src(v) {
                continue;
            }
            let d = dist[u] + pts[u].dist(pts[v]);
            if d < dist[v] && q.segment_inside(pts[u], pts[v]) {
                dist[v] = d;
            }
        }
    }
}
