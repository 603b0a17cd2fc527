#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tridisk::corpus::{self, generate, random_convex_polygon, Family, Instance};
use tridisk::geometry::{point_segment_distance, BoundaryFeature};
use tridisk::medial_axis::TAU_MA_REL;
use tridisk::{compute_medial_axis, MedialAxisGraph, Point, PolygonalQuadrilateral, SideLabel};

/// Fixtures, both sampled targets and a few seeded instances per family.
pub fn full_corpus() -> Vec<Instance> {
    let mut all = corpus::fixture_corpus();
    for (name, quad) in [("circle_256", corpus::sampled_circle(256)), ("crescent", corpus::crescent())] {
        all.push(Instance {
            name: name.into(),
            quad,
            sampled: true,
        });
    }
    for family in [Family::Convex, Family::Orthogonal, Family::PerturbedRect] {
        all.extend(generate(family, 2024, 8));
    }
    all.extend(generate(Family::CrescentSampled, 2024, 2));
    all
}

/// Random convex polygons with 5 to 8 vertices, marked at the first four.
pub fn convex_polygons(seed: u64, count: usize) -> Vec<PolygonalQuadrilateral> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| PolygonalQuadrilateral::new(random_convex_polygon(&mut rng, 5..=8), [0, 1, 2, 3]).unwrap())
        .collect()
}

/// Nearest site of `p`: an edge, or a reflex vertex when the nearest edge
/// foot is that vertex.
fn nearest_site(q: &PolygonalQuadrilateral, p: Point) -> BoundaryFeature {
    let n = q.len();
    let mut best = (f64::INFINITY, BoundaryFeature::Edge(0));
    for j in 0..n {
        let (a, b) = q.edge(j);
        let d = point_segment_distance(p, a, b);
        if d < best.0 {
            best = (d, BoundaryFeature::Edge(j));
        }
    }
    let BoundaryFeature::Edge(j) = best.1 else { unreachable!() };
    let (a, b) = q.edge(j);
    for (k, v) in [(j, a), ((j + 1) % n, b)] {
        if q.is_reflex(k) && (p.dist(v) - best.0).abs() <= 1e-12 * q.diameter() {
            return BoundaryFeature::ReflexVertex(k);
        }
    }
    best.1
}

/// Sites whose regions meet along a curve that is not part of the medial
/// axis: an edge and its own reflex endpoint.
fn continuous(q: &PolygonalQuadrilateral, f: BoundaryFeature, g: BoundaryFeature) -> bool {
    let n = q.len();
    match (f, g) {
        (BoundaryFeature::Edge(j), BoundaryFeature::ReflexVertex(k))
        | (BoundaryFeature::ReflexVertex(k), BoundaryFeature::Edge(j)) => k == j || k == (j + 1) % n,
        _ => f == g,
    }
}

/// Clearance-ridge oracle on an `n × n` lattice over the bounding box: the
/// midpoints of lattice edges whose endpoints have different nearest sites,
/// both endpoints at clearance at least `min_clearance`. Returns the points
/// and the lattice spacing.
pub fn ridge_oracle(q: &PolygonalQuadrilateral, n: usize, min_clearance: f64) -> (Vec<Point>, f64) {
    let bb = q.bbox();
    let h = bb.width().max(bb.height()) / (n - 1) as f64;
    let origin = Point::new(
        0.5 * (bb.min.x + bb.max.x) - 0.5 * h * (n - 1) as f64,
        0.5 * (bb.min.y + bb.max.y) - 0.5 * h * (n - 1) as f64,
    );
    let at = |i: usize, j: usize| origin + Point::new(i as f64 * h, j as f64 * h);
    let sites: Vec<Option<BoundaryFeature>> = (0..n * n)
        .map(|idx| {
            let p = at(idx % n, idx / n);
            (q.contains_strict(p) && q.clearance(p) >= min_clearance).then(|| nearest_site(q, p))
        })
        .collect();
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let Some(f) = sites[j * n + i] else { continue };
            for (di, dj) in [(1, 0), (0, 1)] {
                let (i2, j2) = (i + di, j + dj);
                if i2 >= n || j2 >= n {
                    continue;
                }
                if let Some(g) = sites[j2 * n + i2] {
                    if !continuous(q, f, g) {
                        out.push(at(i, j).lerp(at(i2, j2), 0.5));
                    }
                }
            }
        }
    }
    (out, h)
}

/// Two directed distances between the computed medial axis and the oracle:
/// oracle to axis, and axis (restricted to clearance at least
/// `min_clearance`) to oracle.
pub fn oracle_distances(
    q: &PolygonalQuadrilateral,
    g: &MedialAxisGraph,
    oracle: &[Point],
    h: f64,
    min_clearance: f64,
) -> (f64, f64) {
    let to_axis = oracle.iter().map(|&p| g.distance_to(p)).fold(0.0, f64::max);
    let mut to_oracle: f64 = 0.0;
    for e in &g.edges {
        let samples = ((e.length() / (0.25 * h)).ceil() as usize).max(2);
        for p in e.sample(samples) {
            if q.clearance(p) < min_clearance {
                continue;
            }
            let d = oracle.iter().map(|&o| o.dist(p)).fold(f64::INFINITY, f64::min);
            to_oracle = to_oracle.max(d);
        }
    }
    (to_axis, to_oracle)
}

/// Minimum distance between the two side polylines over all segment pairs.
pub fn segment_pair_distance(q: &PolygonalQuadrilateral, s: SideLabel, t: SideLabel) -> f64 {
    let (ls, lt) = (q.side_polyline(s), q.side_polyline(t));
    let mut best = f64::INFINITY;
    for u in ls.windows(2) {
        for v in lt.windows(2) {
            for d in [
                point_segment_distance(u[0], v[0], v[1]),
                point_segment_distance(u[1], v[0], v[1]),
                point_segment_distance(v[0], u[0], u[1]),
                point_segment_distance(v[1], u[0], u[1]),
            ] {
                best = best.min(d);
            }
        }
    }
    best
}

/// Tree invariant and two-sided agreement with the 256-point ridge oracle
/// within `τ_ma + 2h`. The oracle keeps lattice points at clearance `2h` or
/// more, the axis side samples at `4h` or more. Returns the worst distance
/// and the tolerance.
pub fn axis_agreement(q: &PolygonalQuadrilateral) -> Result<(f64, f64), String> {
    let g = compute_medial_axis(q).map_err(|e| e.to_string())?;
    if !g.is_tree() || g.node_count() != g.edge_count() + 1 {
        return Err(format!("|V| = {}, |E| = {}", g.node_count(), g.edge_count()));
    }
    let bb = q.bbox();
    let h = bb.width().max(bb.height()) / 255.0;
    let (oracle, _) = ridge_oracle(q, 256, 2.0 * h);
    if oracle.is_empty() {
        return Err("empty oracle".into());
    }
    let (to_axis, to_oracle) = oracle_distances(q, &g, &oracle, h, 4.0 * h);
    let tol = TAU_MA_REL * q.diameter() + 2.0 * h;
    let worst = to_axis.max(to_oracle);
    if worst > tol {
        return Err(format!("oracle to axis {to_axis}, axis to oracle {to_oracle}, tolerance {tol}"));
    }
    Ok((worst, tol))
}
