//! Planar primitives, the polygonal quadrilateral model and boundary queries.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::GeometryError;

/// Relative geometric tolerance; multiply by the polygon diameter.
pub const TAU_GEOM_REL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Twice the signed area of the triangle `a b c`.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Parameter in `[0, 1]` and foot of the closest point of segment `ab` to `p`.
pub fn closest_on_segment(p: Point, a: Point, b: Point) -> (f64, Point) {
    let d = b - a;
    let len2 = d.norm2();
    if len2 == 0.0 {
        return (0.0, a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    (t, a + d * t)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    p.dist(closest_on_segment(p, a, b).1)
}

/// Closed segment intersection test with an absolute tolerance.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    if point_segment_distance(a, c, d) <= tol
        || point_segment_distance(b, c, d) <= tol
        || point_segment_distance(c, a, b) <= tol
        || point_segment_distance(d, a, b) <= tol
    {
        return true;
    }
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Closest pair of points between segments `ab` and `cd`.
pub fn segment_segment_closest(a: Point, b: Point, c: Point, d: Point) -> (Point, Point) {
    if segments_intersect(a, b, c, d, 0.0) {
        let o1 = orient(a, b, c);
        let o2 = orient(a, b, d);
        if o1 != o2 {
            let t = o1 / (o1 - o2);
            let x = c.lerp(d, t);
            return (x, x);
        }
    }
    let candidates = [
        (a, closest_on_segment(a, c, d).1),
        (b, closest_on_segment(b, c, d).1),
        (closest_on_segment(c, a, b).1, c),
        (closest_on_segment(d, a, b).1, d),
    ];
    candidates
        .into_iter()
        .min_by(|x, y| x.0.dist(x.1).total_cmp(&y.0.dist(y.1)))
        .unwrap()
}

/// One of the four sides of a quadrilateral, in counter-clockwise order
/// starting at the first quad-vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SideLabel {
    A1,
    B1,
    A2,
    B2,
}

impl SideLabel {
    pub const ALL: [SideLabel; 4] = [SideLabel::A1, SideLabel::B1, SideLabel::A2, SideLabel::B2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> SideLabel {
        Self::ALL[i % 4]
    }

    pub fn opposite(self) -> SideLabel {
        Self::from_index(self.index() + 2)
    }

    pub fn is_a(self) -> bool {
        matches!(self, SideLabel::A1 | SideLabel::A2)
    }
}

impl fmt::Display for SideLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A set of side labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<SideLabel>", into = "Vec<SideLabel>")]
pub struct SideSet(u8);

impl SideSet {
    pub const EMPTY: SideSet = SideSet(0);

    pub fn of(labels: &[SideLabel]) -> SideSet {
        let mut s = SideSet::EMPTY;
        for &l in labels {
            s.insert(l);
        }
        s
    }

    pub fn insert(&mut self, l: SideLabel) {
        self.0 |= 1 << l.index();
    }

    pub fn contains(self, l: SideLabel) -> bool {
        self.0 & (1 << l.index()) != 0
    }

    pub fn contains_all(self, other: SideSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn union(self, other: SideSet) -> SideSet {
        SideSet(self.0 | other.0)
    }

    pub fn intersection(self, other: SideSet) -> SideSet {
        SideSet(self.0 & other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Both a-sides or both b-sides present.
    pub fn has_opposite_pair(self) -> bool {
        self.contains_all(SideSet::of(&[SideLabel::A1, SideLabel::A2]))
            || self.contains_all(SideSet::of(&[SideLabel::B1, SideLabel::B2]))
    }

    pub fn iter(self) -> impl Iterator<Item = SideLabel> {
        SideLabel::ALL.into_iter().filter(move |&l| self.contains(l))
    }
}

impl From<Vec<SideLabel>> for SideSet {
    fn from(v: Vec<SideLabel>) -> Self {
        SideSet::of(&v)
    }
}

impl From<SideSet> for Vec<SideLabel> {
    fn from(s: SideSet) -> Self {
        s.iter().collect()
    }
}

impl fmt::Display for SideSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// A boundary site of the medial axis: an edge, or a reflex vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundaryFeature {
    Edge(usize),
    ReflexVertex(usize),
}

/// A boundary feature near a query point together with its foot point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureContact {
    pub feature: BoundaryFeature,
    pub foot: Point,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn of(points: &[Point]) -> BoundingBox {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BoundingBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Validates raw polygon data against the quadrilateral invariants.
///
/// Checks run in order: finiteness, vertex count, quad indices, simplicity,
/// area, orientation. The first violation is returned.
pub fn validate(vertices: &[Point], quad: [usize; 4]) -> Result<(), GeometryError> {
    if vertices.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let n = vertices.len();
    if n < 3 {
        return Err(GeometryError::TooFewVertices(n));
    }
    check_quad_indices(n, quad)?;
    let diam = diameter(vertices);
    let tol = TAU_GEOM_REL * diam;
    check_simple(vertices, tol)?;
    let area = signed_area(vertices);
    if area.abs() <= tol * diam {
        return Err(GeometryError::DegenerateArea);
    }
    if area < 0.0 {
        return Err(GeometryError::WrongOrientation);
    }
    Ok(())
}

fn check_quad_indices(n: usize, quad: [usize; 4]) -> Result<(), GeometryError> {
    if let Some(&i) = quad.iter().find(|&&i| i >= n) {
        return Err(GeometryError::BadQuadIndices(format!(
            "index {i} out of range for {n} vertices"
        )));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if quad[i] == quad[j] {
                return Err(GeometryError::BadQuadIndices(format!(
                    "quad-vertices {} and {} coincide (index {})",
                    i + 1,
                    j + 1,
                    quad[i]
                )));
            }
        }
    }
    let descents = (0..4).filter(|&i| quad[(i + 1) % 4] < quad[i]).count();
    if descents != 1 {
        return Err(GeometryError::BadQuadIndices(
            "quad-vertices are not in counter-clockwise cyclic order".into(),
        ));
    }
    Ok(())
}

fn check_simple(v: &[Point], tol: f64) -> Result<(), GeometryError> {
    let n = v.len();
    for i in 0..n {
        if v[i].dist(v[(i + 1) % n]) <= tol {
            return Err(GeometryError::NotSimple(i, (i + 1) % n));
        }
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in i + 1..n {
            let (c, d) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Shared endpoint is expected; the far endpoints must not fold back.
                let (shared, fa, fb) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if point_segment_distance(fb, fa, shared) <= tol
                    || point_segment_distance(fa, shared, fb) <= tol
                {
                    return Err(GeometryError::NotSimple(i, j));
                }
            } else if segments_intersect(a, b, c, d, tol) {
                return Err(GeometryError::NotSimple(i, j));
            }
        }
    }
    Ok(())
}

pub fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() / 2.0
}

pub fn diameter(v: &[Point]) -> f64 {
    let mut d2 = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d2 = d2.max((v[i] - v[j]).norm2());
        }
    }
    d2.sqrt()
}

/// Crossing-number point-in-polygon test (boundary handling left to caller).
pub fn crossing_inside(v: &[Point], p: Point) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// A simple, counter-clockwise polygon with four marked quad-vertices.
///
/// Side `A1` runs from `v1` to `v2`, `B1` from `v2` to `v3`, `A2` from `v3`
/// to `v4` and `B2` from `v4` back to `v1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalQuadrilateral {
    vertices: Vec<Point>,
    quad: [usize; 4],
    edge_side: Vec<SideLabel>,
    diam: f64,
}

impl PolygonalQuadrilateral {
    /// Builds a quadrilateral, reversing clockwise input and merging collinear
    /// edges first.
    ///
    /// Reversal keeps `v1` and restores counter-clockwise order of the marks,
    /// so the input marks `(v1, v2, v3, v4)` become `(v1, v4, v3, v2)`.
    pub fn new(vertices: Vec<Point>, quad: [usize; 4]) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        check_quad_indices(vertices.len(), quad).or_else(|e| {
            // A clockwise polygon lists its marks in decreasing cyclic order.
            let rev = [quad[0], quad[3], quad[2], quad[1]];
            check_quad_indices(vertices.len(), rev).map_err(|_| e)
        })?;
        let (mut vertices, mut quad) = (vertices, quad);
        if signed_area(&vertices) < 0.0 {
            let n = vertices.len();
            vertices.reverse();
            let m = |i: usize| n - 1 - i;
            quad = [m(quad[0]), m(quad[3]), m(quad[2]), m(quad[1])];
        }
        let (vertices, quad) = merge_collinear(vertices, quad);
        Self::from_validated(vertices, quad)
    }

    fn from_validated(vertices: Vec<Point>, quad: [usize; 4]) -> Result<Self, GeometryError> {
        validate(&vertices, quad)?;
        let diam = diameter(&vertices);
        let n = vertices.len();
        let mut edge_side = vec![SideLabel::A1; n];
        for s in 0..4 {
            let (start, end) = (quad[s], quad[(s + 1) % 4]);
            let mut j = start;
            while j != end {
                edge_side[j] = SideLabel::from_index(s);
                j = (j + 1) % n;
            }
        }
        Ok(PolygonalQuadrilateral {
            vertices,
            quad,
            edge_side,
            diam,
        })
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        validate(&self.vertices, self.quad)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i % self.vertices.len()]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn quad_indices(&self) -> [usize; 4] {
        self.quad
    }

    /// Quad-vertex `v_{k+1}` for `k` in `0..4`.
    pub fn quad_vertex(&self, k: usize) -> Point {
        self.vertices[self.quad[k % 4]]
    }

    pub fn diameter(&self) -> f64 {
        self.diam
    }

    pub fn tau_geom(&self) -> f64 {
        TAU_GEOM_REL * self.diam
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::of(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Endpoints of edge `j` (from vertex `j` to vertex `j + 1`).
    pub fn edge(&self, j: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[j % n], self.vertices[(j + 1) % n])
    }

    pub fn edge_side(&self, j: usize) -> SideLabel {
        self.edge_side[j % self.vertices.len()]
    }

    /// Inward unit normal of edge `j`.
    pub fn inward_normal(&self, j: usize) -> Point {
        let (a, b) = self.edge(j);
        (b - a).normalized().perp()
    }

    /// Interior angle at vertex `k`, in `(0, 2π)`.
    pub fn interior_angle(&self, k: usize) -> f64 {
        let n = self.vertices.len();
        let c = self.vertices[k % n];
        let next = self.vertices[(k + 1) % n] - c;
        let prev = self.vertices[(k + n - 1) % n] - c;
        let a = next.cross(prev).atan2(next.dot(prev));
        if a <= 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    pub fn is_reflex(&self, k: usize) -> bool {
        let n = self.vertices.len();
        let c = self.vertices[k % n];
        let next = self.vertices[(k + 1) % n] - c;
        let prev = self.vertices[(k + n - 1) % n] - c;
        next.cross(prev) < -self.tau_geom() * next.norm().max(prev.norm())
    }

    pub fn reflex_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_reflex(k)).collect()
    }

    /// Which quad-vertex (0..4) sits at vertex index `k`, if any.
    pub fn quad_position(&self, k: usize) -> Option<usize> {
        self.quad.iter().position(|&q| q == k)
    }

    /// Sides owning vertex `k`; quad-vertices belong to both adjacent sides.
    pub fn vertex_sides(&self, k: usize) -> SideSet {
        let n = self.len();
        SideSet::of(&[self.edge_side(k), self.edge_side((k + n - 1) % n)])
    }

    /// Edge indices making up a side, in boundary order.
    pub fn side_edges(&self, side: SideLabel) -> Vec<usize> {
        let n = self.len();
        let s = side.index();
        let (start, end) = (self.quad[s], self.quad[(s + 1) % 4]);
        let mut out = Vec::new();
        let mut j = start;
        while j != end {
            out.push(j);
            j = (j + 1) % n;
        }
        out
    }

    /// The side as a polyline from its first to its last quad-vertex.
    pub fn side_polyline(&self, side: SideLabel) -> Vec<Point> {
        let edges = self.side_edges(side);
        let mut out: Vec<Point> = edges.iter().map(|&j| self.vertex(j)).collect();
        out.push(self.vertex(edges.last().unwrap() + 1));
        out
    }

    /// The quadrilateral with quad-vertices shifted by one, `Q(v2, v3, v4, v1)`.
    pub fn conjugate(&self) -> PolygonalQuadrilateral {
        let q = self.quad;
        Self::from_validated(self.vertices.clone(), [q[1], q[2], q[3], q[0]])
            .expect("conjugate of a valid quadrilateral is valid")
    }

    /// Applies `f` to every vertex and rebuilds (orientation is renormalized).
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Self, GeometryError> {
        Self::new(self.vertices.iter().map(|&p| f(p)).collect(), self.quad)
    }

    /// Distance from `p` to the boundary without the inside check.
    pub fn clearance(&self, p: Point) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for j in 0..n {
            let (a, b) = (self.vertices[j], self.vertices[(j + 1) % n]);
            best = best.min(point_segment_distance(p, a, b));
        }
        best
    }

    /// Closed containment with tolerance `tau_geom`.
    pub fn contains(&self, p: Point) -> bool {
        crossing_inside(&self.vertices, p) || self.clearance(p) <= self.tau_geom()
    }

    /// Strictly interior: inside and farther than `tau_geom` from the boundary.
    pub fn contains_strict(&self, p: Point) -> bool {
        crossing_inside(&self.vertices, p) && self.clearance(p) > self.tau_geom()
    }

    pub fn distance_to_boundary(&self, p: Point) -> Result<f64, GeometryError> {
        let d = self.clearance(p);
        if d <= self.tau_geom() || crossing_inside(&self.vertices, p) {
            Ok(d)
        } else {
            Err(GeometryError::OutsidePolygon(p))
        }
    }

    /// All boundary features whose distance to `p` is within `tol` of the
    /// clearance of `p`, with their foot points.
    ///
    /// A foot at the end of an edge is reported as the reflex vertex when the
    /// vertex is reflex, and as the edge otherwise.
    pub fn nearest_boundary_features(
        &self,
        p: Point,
        tol: f64,
    ) -> Result<Vec<FeatureContact>, GeometryError> {
        let d = self.distance_to_boundary(p)?;
        let n = self.len();
        let mut out: Vec<FeatureContact> = Vec::new();
        for j in 0..n {
            let (a, b) = self.edge(j);
            let (t, foot) = closest_on_segment(p, a, b);
            let dist = p.dist(foot);
            if dist > d + tol {
                continue;
            }
            let end = if t <= 0.0 {
                Some(j)
            } else if t >= 1.0 {
                Some((j + 1) % n)
            } else {
                None
            };
            let feature = match end {
                Some(k) if self.is_reflex(k) => BoundaryFeature::ReflexVertex(k),
                _ => BoundaryFeature::Edge(j),
            };
            if !out.iter().any(|c| c.feature == feature) {
                out.push(FeatureContact {
                    feature,
                    foot,
                    distance: dist,
                });
            }
        }
        out.sort_by(|x, y| x.feature.cmp(&y.feature));
        Ok(out)
    }

    /// Side labels for a boundary point lying on edge `edge` (or at vertex
    /// `vertex`); points within `tol` of a quad-vertex get both adjacent labels.
    pub fn labels_at(&self, foot: Point, feature: BoundaryFeature, tol: f64) -> SideSet {
        for (k, &qi) in self.quad.iter().enumerate() {
            if foot.dist(self.vertices[qi]) <= tol {
                return SideSet::of(&[SideLabel::from_index(k), SideLabel::from_index(k + 3)]);
            }
        }
        match feature {
            BoundaryFeature::Edge(j) => SideSet::of(&[self.edge_side(j)]),
            BoundaryFeature::ReflexVertex(k) => self.vertex_sides(k),
        }
    }

    /// Whether the closed segment `ab` lies in the closed polygon.
    pub fn segment_inside(&self, a: Point, b: Point) -> bool {
        let tol = self.tau_geom();
        let d = b - a;
        let len = d.norm();
        if len <= tol {
            return self.contains(a.lerp(b, 0.5));
        }
        let mut params = vec![0.0, 1.0];
        let n = self.len();
        for j in 0..n {
            let (c, e) = self.edge(j);
            let o1 = orient(a, b, c);
            let o2 = orient(a, b, e);
            let o3 = orient(c, e, a);
            let o4 = orient(c, e, b);
            let s1 = len * tol;
            let s2 = c.dist(e) * tol;
            if (o1 > s1 && o2 < -s1 || o1 < -s1 && o2 > s1)
                && (o3 > s2 && o4 < -s2 || o3 < -s2 && o4 > s2)
            {
                return false;
            }
            for q in [c, e] {
                if point_segment_distance(q, a, b) <= tol {
                    params.push(((q - a).dot(d) / (len * len)).clamp(0.0, 1.0));
                }
            }
            if o1.abs() > s1 && o2.abs() > s1 && (o1 > 0.0) != (o2 > 0.0) {
                let t = o1 / (o1 - o2);
                let x = c.lerp(e, t);
                params.push(((x - a).dot(d) / (len * len)).clamp(0.0, 1.0));
            }
        }
        params.sort_by(f64::total_cmp);
        params
            .windows(2)
            .filter(|w| w[1] - w[0] > 1e-12)
            .all(|w| self.contains(a.lerp(b, 0.5 * (w[0] + w[1]))))
    }

    /// Whether every point of `other` lies in the closure of `self`.
    pub fn contains_polygon(&self, other: &PolygonalQuadrilateral) -> bool {
        (0..other.len()).all(|j| {
            let (a, b) = other.edge(j);
            self.segment_inside(a, b)
        })
    }
}

/// Removes non-quad vertices whose two edges continue in the same direction.
fn merge_collinear(mut v: Vec<Point>, mut quad: [usize; 4]) -> (Vec<Point>, [usize; 4]) {
    let tol = TAU_GEOM_REL * diameter(&v);
    loop {
        let n = v.len();
        if n <= 3 {
            return (v, quad);
        }
        let found = (0..n).find(|&k| {
            if quad.contains(&k) {
                return false;
            }
            let (p, c, q) = (v[(k + n - 1) % n], v[k], v[(k + 1) % n]);
            let (u, w) = (c - p, q - c);
            u.dot(w) > 0.0 && u.cross(w).abs() <= tol * (u.norm() + w.norm())
        });
        match found {
            None => return (v, quad),
            Some(k) => {
                v.remove(k);
                for q in quad.iter_mut() {
                    if *q > k {
                        *q -= 1;
                    }
                }
            }
        }
    }
}

/// Distance from `p` to a polyline (a single point counts as a polyline).
pub fn point_polyline_distance(p: Point, line: &[Point]) -> f64 {
    match line.len() {
        0 => f64::INFINITY,
        1 => p.dist(line[0]),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Directed Hausdorff distance `sup_{a ∈ from} d(a, to)`.
///
/// The distance-to-set function is 1-Lipschitz, so on a sub-segment of length
/// `ℓ` with end values `f0`, `f1` it is bounded by `(f0 + f1 + ℓ) / 2`;
/// branch-and-bound on that bound gives the supremum to within `1e-12` of the
/// polyline scale.
pub fn directed_hausdorff(from: &[Point], to: &[Point]) -> f64 {
    let scale = {
        let bb = BoundingBox::of(&[from, to].concat());
        bb.width().max(bb.height()).max(1e-300)
    };
    let eps = 1e-12 * scale;
    // Distances to each piece of `to`; each is convex along a segment, so on
    // an interval it is bounded by its larger endpoint value.
    let pieces = |p: Point| -> Vec<f64> {
        if to.len() == 1 {
            return vec![p.dist(to[0])];
        }
        to.windows(2).map(|w| point_segment_distance(p, w[0], w[1])).collect()
    };
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = from.iter().map(|&p| min(&pieces(p))).fold(0.0, f64::max);
    let mut stack: Vec<(Point, Point, Vec<f64>, Vec<f64>)> = from
        .windows(2)
        .map(|w| (w[0], w[1], pieces(w[0]), pieces(w[1])))
        .collect();
    while let Some((a, b, da, db)) = stack.pop() {
        let bound = da
            .iter()
            .zip(&db)
            .map(|(x, y)| x.max(*y))
            .fold(f64::INFINITY, f64::min)
            .min(0.5 * (min(&da) + min(&db) + a.dist(b)));
        if bound <= best + eps {
            continue;
        }
        let m = a.lerp(b, 0.5);
        let dm = pieces(m);
        best = best.max(min(&dm));
        stack.push((a, m, da, dm.clone()));
        stack.push((m, b, dm, db));
    }
    best
}

/// Symmetric Hausdorff distance between two polylines.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn unit_square() -> PolygonalQuadrilateral {
        PolygonalQuadrilateral::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)],
            [0, 1, 2, 3],
        )
        .unwrap()
    }

    fn l_hexagon() -> PolygonalQuadrilateral {
        PolygonalQuadrilateral::new(
            vec![
                p(0.0, 0.0),
                p(2.0, 0.0),
                p(2.0, 1.0),
                p(1.0, 1.0),
                p(1.0, 2.0),
                p(0.0, 2.0),
            ],
            [0, 1, 4, 5],
        )
        .unwrap()
    }

    #[test]
    fn square_validates() {
        assert!(unit_square().validate().is_ok());
    }

    #[test]
    fn bowtie_is_not_simple() {
        let v = vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(matches!(
            validate(&v, [0, 1, 2, 3]),
            Err(GeometryError::NotSimple(..))
        ));
    }

    #[test]
    fn repeated_quad_index_rejected() {
        let v = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert!(matches!(
            validate(&v, [0, 0, 1, 2]),
            Err(GeometryError::BadQuadIndices(_))
        ));
    }

    #[test]
    fn clockwise_reported_then_normalized() {
        let v = vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 1.0), p(1.0, 0.0)];
        assert_eq!(
            validate(&v, [0, 1, 2, 3]),
            Err(GeometryError::WrongOrientation)
        );
        let q = PolygonalQuadrilateral::new(v, [0, 1, 2, 3]).unwrap();
        assert!(q.area() > 0.0);
        assert_eq!(q.quad_vertex(0), p(0.0, 0.0));
        assert_eq!(q.quad_vertex(1), p(1.0, 0.0));
    }

    #[test]
    fn degenerate_area() {
        let v = vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 1e-14), p(3.0, 0.0)];
        assert!(validate(&v, [0, 1, 2, 3]).is_err());
    }

    #[test]
    fn collinear_vertices_merged() {
        let q = PolygonalQuadrilateral::new(
            vec![
                p(0.0, 0.0),
                p(0.5, 0.0),
                p(1.0, 0.0),
                p(1.0, 1.0),
                p(0.0, 1.0),
            ],
            [0, 2, 3, 4],
        )
        .unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(q.quad_indices(), [0, 1, 2, 3]);
    }

    #[test]
    fn distances_in_square() {
        let q = unit_square();
        assert!((q.distance_to_boundary(p(0.5, 0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert!((q.distance_to_boundary(p(0.25, 0.5)).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(q.distance_to_boundary(p(1.0, 0.3)).unwrap(), 0.0);
        assert!(matches!(
            q.distance_to_boundary(p(2.0, 0.5)),
            Err(GeometryError::OutsidePolygon(_))
        ));
    }

    #[test]
    fn l_hexagon_distance_matches_direct_minimum() {
        let q = l_hexagon();
        let x = p(0.6, 0.6);
        let v = q.vertices();
        let direct = (0..6)
            .map(|j| point_segment_distance(x, v[j], v[(j + 1) % 6]))
            .fold(f64::INFINITY, f64::min);
        // Nearest edges are x=0 and y=0 at 0.6; (1,1) is 0.566 away.
        assert!((direct - (0.4f64 * 0.4 * 2.0).sqrt()).abs() < 1e-15);
        assert_eq!(q.distance_to_boundary(x).unwrap(), direct);
    }

    #[test]
    fn nearest_features_counts() {
        let q = unit_square();
        assert_eq!(q.nearest_boundary_features(p(0.5, 0.5), 1e-9).unwrap().len(), 4);
        let one = q.nearest_boundary_features(p(0.25, 0.5), 1e-9).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].feature, BoundaryFeature::Edge(3));
        let r = PolygonalQuadrilateral::new(
            vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(0.0, 1.0)],
            [0, 1, 2, 3],
        )
        .unwrap();
        let f = r.nearest_boundary_features(p(0.5, 0.5), 1e-9).unwrap();
        let feats: Vec<_> = f.iter().map(|c| c.feature).collect();
        assert_eq!(
            feats,
            vec![
                BoundaryFeature::Edge(0),
                BoundaryFeature::Edge(2),
                BoundaryFeature::Edge(3)
            ]
        );
    }

    #[test]
    fn reflex_vertex_reported_as_feature() {
        let q = l_hexagon();
        let f = q.nearest_boundary_features(p(0.8, 0.8), 1e-9).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].feature, BoundaryFeature::ReflexVertex(3));
    }

    #[test]
    fn sides_of_square() {
        let q = unit_square();
        assert_eq!(q.edge_side(0), SideLabel::A1);
        assert_eq!(q.edge_side(1), SideLabel::B1);
        assert_eq!(q.edge_side(2), SideLabel::A2);
        assert_eq!(q.edge_side(3), SideLabel::B2);
        assert_eq!(
            q.vertex_sides(1),
            SideSet::of(&[SideLabel::A1, SideLabel::B1])
        );
    }

    #[test]
    fn segment_inside_l_shape() {
        let q = l_hexagon();
        assert!(q.segment_inside(p(0.0, 0.0), p(1.0, 1.0)));
        assert!(q.segment_inside(p(2.0, 1.0), p(1.0, 1.0)));
        assert!(!q.segment_inside(p(2.0, 1.0), p(1.0, 2.0)));
        assert!(q.segment_inside(p(0.5, 1.5), p(1.5, 0.5)));
    }

    #[test]
    fn hausdorff_of_parallel_segments() {
        let a = [p(0.0, 0.0), p(1.0, 0.0)];
        let b = [p(0.0, 0.1), p(1.0, 0.1)];
        assert!((hausdorff_distance(&a, &b) - 0.1).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
    }

    #[test]
    fn hausdorff_interior_maximum() {
        // The farthest point of the bottom segment from the open box sits at
        // x = 2, not at a vertex.
        let a = [p(0.0, 0.0), p(4.0, 0.0)];
        let to = [p(0.0, 1.0), p(0.0, 3.0), p(4.0, 3.0), p(4.0, 1.0)];
        let d = directed_hausdorff(&a, &to);
        assert!((d - 5f64.sqrt()).abs() < 1e-10);
        let far = directed_hausdorff(&[p(2.0, -1.0)], &a);
        assert!((far - 1.0).abs() < 1e-12);
    }

    #[test]
    fn side_set_display_and_pairs() {
        let s = SideSet::of(&[SideLabel::A1, SideLabel::A2, SideLabel::B2]);
        assert_eq!(s.to_string(), "{A1,A2,B2}");
        assert!(s.has_opposite_pair());
        assert!(!SideSet::of(&[SideLabel::A1, SideLabel::B1]).has_opposite_pair());
    }
}
