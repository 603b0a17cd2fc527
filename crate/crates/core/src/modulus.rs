//! Conformal modulus by a discrete harmonic potential.
//!
//! The interior is covered by a square grid of spacing `h`; every grid cell
//! is clipped against the polygon. Neighbouring cells exchange flux through
//! the part of their common face inside the polygon, cells meeting `A1` or
//! `A2` are tied to the boundary values 0 and 1 through the boundary pieces
//! they contain, and the `B` sides carry no flux. The Dirichlet energy of the
//! discrete solution approximates the modulus of the curve family joining the
//! a-sides. For any linear potential whose gradient is parallel to a grid
//! axis the two-point fluxes are exact, so rectangles are reproduced at every
//! spacing.

use serde::{Deserialize, Serialize};

use crate::error::ModulusError;
use crate::geometry::{crossing_inside, signed_area, Point, PolygonalQuadrilateral, SideLabel};

/// Relative residual the linear solve is run to.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulusOptions {
    /// Grid spacing.
    pub h: f64,
    /// Combine the estimates at `h` and `h/2` as `2·M(h/2) − M(h)`.
    pub richardson: bool,
    pub tol: f64,
}

impl ModulusOptions {
    pub fn with_spacing(h: f64) -> Self {
        ModulusOptions {
            h,
            richardson: false,
            tol: DEFAULT_SOLVER_TOL,
        }
    }

    /// Spacing `diam / cells`.
    pub fn with_cells(q: &PolygonalQuadrilateral, cells: usize) -> Self {
        Self::with_spacing(q.diameter() / cells as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub value: f64,
    pub resolution: f64,
    pub residual: f64,
    pub method: String,
    pub cells: usize,
    pub iterations: usize,
}

struct Grid {
    x0: f64,
    y0: f64,
    h: f64,
    nx: usize,
    ny: usize,
}

impl Grid {
    fn cell_box(&self, i: usize, j: usize) -> (Point, Point) {
        let lo = Point::new(self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h);
        (lo, lo + Point::new(self.h, self.h))
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn col(&self, x: f64) -> f64 {
        (x - self.x0) / self.h
    }

    fn row(&self, y: f64) -> f64 {
        (y - self.y0) / self.h
    }
}

/// Clips a polygon against an axis-aligned box; returns area and centroid.
fn clip_area(poly: &[Point], lo: Point, hi: Point) -> (f64, Point) {
    let mut cur: Vec<Point> = poly.to_vec();
    let planes: [(usize, f64, bool); 4] = [(0, lo.x, true), (0, hi.x, false), (1, lo.y, true), (1, hi.y, false)];
    for (axis, v, keep_ge) in planes {
        if cur.is_empty() {
            break;
        }
        let coord = |p: Point| if axis == 0 { p.x } else { p.y };
        let inside = |p: Point| if keep_ge { coord(p) >= v } else { coord(p) <= v };
        let mut next = Vec::with_capacity(cur.len() + 4);
        for k in 0..cur.len() {
            let a = cur[k];
            let b = cur[(k + 1) % cur.len()];
            let (ia, ib) = (inside(a), inside(b));
            if ia {
                next.push(a);
            }
            if ia != ib {
                let t = (v - coord(a)) / (coord(b) - coord(a));
                let mut p = a.lerp(b, t);
                if axis == 0 {
                    p.x = v;
                } else {
                    p.y = v;
                }
                next.push(p);
            }
        }
        cur = next;
    }
    if cur.len() < 3 {
        return (0.0, Point::default());
    }
    let mut a2 = 0.0;
    let mut c = Point::default();
    for k in 0..cur.len() {
        let (p, r) = (cur[k], cur[(k + 1) % cur.len()]);
        let w = p.cross(r);
        a2 += w;
        c += (p + r) * w;
    }
    if a2.abs() < 1e-300 {
        return (0.0, Point::default());
    }
    (0.5 * a2, c * (1.0 / (3.0 * a2)))
}

/// Length of the segment `ab` inside the polygon.
fn length_inside(poly: &[Point], a: Point, b: Point) -> f64 {
    let d = b - a;
    let len = d.norm();
    let mut ts = vec![0.0, 1.0];
    let n = poly.len();
    for k in 0..n {
        let (c, e) = (poly[k], poly[(k + 1) % n]);
        let f = e - c;
        let den = d.cross(f);
        if den.abs() < 1e-300 {
            // Parallel: collinear endpoints become breakpoints.
            if (c - a).cross(d).abs() <= 1e-12 * len * len {
                for p in [c, e] {
                    let t = (p - a).dot(d) / (len * len);
                    if t > 0.0 && t < 1.0 {
                        ts.push(t);
                    }
                }
            }
            continue;
        }
        let t = (c - a).cross(f) / den;
        let s = (c - a).cross(d) / den;
        if (0.0..=1.0).contains(&s) && t > 0.0 && t < 1.0 {
            ts.push(t);
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.windows(2)
        .filter(|w| w[1] > w[0] && crossing_inside(poly, a.lerp(b, 0.5 * (w[0] + w[1]))))
        .map(|w| (w[1] - w[0]) * len)
        .sum()
}

/// Liang–Barsky clip of segment `ab` to a box.
fn clip_segment(a: Point, b: Point, lo: Point, hi: Point) -> Option<(Point, Point)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x - lo.x),
        (d.x, hi.x - a.x),
        (-d.y, a.y - lo.y),
        (d.y, hi.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 < t1).then(|| (a.lerp(b, t0), a.lerp(b, t1)))
}

/// Discrete network: cells, links and Dirichlet ties.
struct Network {
    cells: usize,
    links: Vec<(usize, usize, f64)>,
    /// `(cell, conductance, boundary value)`.
    ties: Vec<(usize, f64, f64)>,
}

fn build_network(q: &PolygonalQuadrilateral, h: f64) -> Result<Network, ModulusError> {
    let poly = q.vertices();
    let bb = q.bbox();
    let dims = |w: f64| ((w / h - 1e-9).ceil() as usize).max(1);
    let g = Grid {
        x0: bb.min.x,
        y0: bb.min.y,
        h,
        nx: dims(bb.width()),
        ny: dims(bb.height()),
    };
    let ncell = g.nx * g.ny;

    // Cells met by some edge, with the edges meeting them.
    let mut boundary: Vec<Vec<usize>> = vec![Vec::new(); ncell];
    let clampc = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
    for j in 0..q.len() {
        let (a, b) = q.edge(j);
        let c0 = clampc((g.col(a.x.min(b.x)) - 1e-9).floor(), g.nx);
        let c1 = clampc((g.col(a.x.max(b.x)) + 1e-9).floor(), g.nx);
        for ci in c0..=c1 {
            let (xl, xr) = (g.x0 + ci as f64 * h, g.x0 + (ci + 1) as f64 * h);
            let seg = clip_segment(
                a,
                b,
                Point::new(xl - 1e-9 * h, bb.min.y - h),
                Point::new(xr + 1e-9 * h, bb.max.y + h),
            );
            let Some((p, r)) = seg else { continue };
            let r0 = clampc((g.row(p.y.min(r.y)) - 1e-9).floor(), g.ny);
            let r1 = clampc((g.row(p.y.max(r.y)) + 1e-9).floor(), g.ny);
            for rj in r0..=r1 {
                let k = g.index(ci, rj);
                if boundary[k].last() != Some(&j) {
                    boundary[k].push(j);
                }
            }
        }
    }

    // Area and centroid of every cell.
    let mut area = vec![0.0; ncell];
    let mut centroid = vec![Point::default(); ncell];
    let mut xs: Vec<f64> = Vec::new();
    for rj in 0..g.ny {
        let yc = g.y0 + (rj as f64 + 0.5) * h;
        xs.clear();
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            if (a.y > yc) != (b.y > yc) {
                xs.push(a.x + (yc - a.y) / (b.y - a.y) * (b.x - a.x));
            }
        }
        xs.sort_by(f64::total_cmp);
        for ci in 0..g.nx {
            let k = g.index(ci, rj);
            let (lo, hi) = g.cell_box(ci, rj);
            if !boundary[k].is_empty() {
                let (a, c) = clip_area(poly, lo, hi);
                area[k] = a;
                centroid[k] = c;
            } else {
                let xc = lo.x + 0.5 * h;
                if xs.iter().filter(|&&x| x < xc).count() % 2 == 1 {
                    area[k] = h * h;
                    centroid[k] = Point::new(xc, yc);
                }
            }
        }
    }
    let min_area = 1e-12 * h * h;
    let active = |k: usize| area[k] > min_area;

    let mut links = Vec::new();
    for rj in 0..g.ny {
        for ci in 0..g.nx {
            let k = g.index(ci, rj);
            if !active(k) {
                continue;
            }
            let (_, hi) = g.cell_box(ci, rj);
            // Right and top neighbours.
            for (ni, nj, axis) in [(ci + 1, rj, 0), (ci, rj + 1, 1)] {
                if ni >= g.nx || nj >= g.ny {
                    continue;
                }
                let m = g.index(ni, nj);
                if !active(m) {
                    continue;
                }
                let (fa, fb) = if axis == 0 {
                    (Point::new(hi.x, hi.y - h), hi)
                } else {
                    (Point::new(hi.x - h, hi.y), hi)
                };
                let len = if boundary[k].is_empty() && boundary[m].is_empty() {
                    h
                } else {
                    length_inside(poly, fa, fb)
                };
                let dist = if axis == 0 {
                    centroid[m].x - centroid[k].x
                } else {
                    centroid[m].y - centroid[k].y
                };
                if len > 1e-12 * h {
                    links.push((k, m, len / dist.max(1e-6 * h)));
                }
            }
        }
    }

    let mut ties = Vec::new();
    for k in (0..ncell).filter(|&k| active(k)) {
        for &j in &boundary[k] {
            let value = match q.edge_side(j) {
                SideLabel::A1 => 0.0,
                SideLabel::A2 => 1.0,
                _ => continue,
            };
            let (a, b) = q.edge(j);
            let n = q.inward_normal(j);
            let (lo, hi) = g.cell_box(k % g.nx, k / g.nx);
            let Some((p, r)) = clip_segment(a, b, lo, hi) else { continue };
            let len = p.dist(r);
            if len <= 1e-12 * h {
                continue;
            }
            // A piece on a cell face belongs to the cell on its inner side.
            let probe = p.lerp(r, 0.5) + n * (1e-7 * h);
            if probe.x < lo.x || probe.x > hi.x || probe.y < lo.y || probe.y > hi.y {
                continue;
            }
            let d = n.dot(centroid[k] - a).max(1e-6 * h);
            ties.push((k, len / d, value));
        }
    }

    // Keep the component carrying most of the area.
    let mut parent: Vec<usize> = (0..ncell).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    for &(a, b, _) in &links {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut comp_area = std::collections::BTreeMap::<usize, f64>::new();
    for k in (0..ncell).filter(|&k| active(k)) {
        *comp_area.entry(find(&mut parent, k)).or_default() += area[k];
    }
    let total: f64 = comp_area.values().sum();
    let (&main, _) = comp_area
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| ModulusError::RasterTooCoarse("no interior cells".into()))?;
    if comp_area
        .iter()
        .any(|(&r, &a)| r != main && a > 1e-6 * total)
    {
        return Err(ModulusError::RasterTooCoarse(format!(
            "interior raster splits into {} components",
            comp_area.len()
        )));
    }
    let mut id = vec![usize::MAX; ncell];
    let mut cells = 0;
    for k in 0..ncell {
        if active(k) && find(&mut parent, k) == main {
            id[k] = cells;
            cells += 1;
        }
    }
    let links: Vec<_> = links
        .into_iter()
        .filter(|l| id[l.0] != usize::MAX)
        .map(|(a, b, c)| (id[a], id[b], c))
        .collect();
    let ties: Vec<_> = ties
        .into_iter()
        .filter(|t| id[t.0] != usize::MAX)
        .map(|(a, c, v)| (id[a], c, v))
        .collect();
    for (v, name) in [(0.0, "A1"), (1.0, "A2")] {
        if !ties.iter().any(|t| t.2 == v) {
            return Err(ModulusError::RasterTooCoarse(format!(
                "side {name} owns no boundary cells"
            )));
        }
    }
    Ok(Network { cells, links, ties })
}

/// Jacobi-preconditioned conjugate gradients; returns the solution, the
/// relative residual and the iteration count.
fn solve(net: &Network, tol: f64) -> Result<(Vec<f64>, f64, usize), ModulusError> {
    let n = net.cells;
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, c) in &net.links {
        diag[a] += c;
        diag[b] += c;
        adj[a].push((b, c));
        adj[b].push((a, c));
    }
    for &(k, c, v) in &net.ties {
        diag[k] += c;
        rhs[k] += c * v;
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut s = diag[i] * x[i];
            for &(j, c) in &adj[i] {
                s -= c * x[j];
            }
            out[i] = s;
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(&rhs, &rhs).sqrt();
    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_iter = 20 * n + 1000;
    for it in 0..max_iter {
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok((x, res, it));
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(ModulusError::NoConvergence(dot(&r, &r).sqrt() / bnorm))
}

fn single_estimate(q: &PolygonalQuadrilateral, h: f64, tol: f64) -> Result<ModulusEstimate, ModulusError> {
    let net = build_network(q, h)?;
    let (u, residual, iterations) = solve(&net, tol)?;
    let mut energy = 0.0;
    for &(a, b, c) in &net.links {
        energy += c * (u[a] - u[b]).powi(2);
    }
    for &(k, c, v) in &net.ties {
        energy += c * (u[k] - v).powi(2);
    }
    Ok(ModulusEstimate {
        value: energy,
        resolution: h,
        residual,
        method: "cut-cell".into(),
        cells: net.cells,
        iterations,
    })
}

/// Modulus of the family of curves joining `A1` and `A2`.
pub fn estimate_modulus(
    q: &PolygonalQuadrilateral,
    opts: &ModulusOptions,
) -> Result<ModulusEstimate, ModulusError> {
    let max = q.diameter() / 32.0;
    if !(opts.h > 0.0 && opts.h <= max * (1.0 + 1e-12)) {
        return Err(ModulusError::SpacingTooLarge { h: opts.h, max });
    }
    debug_assert!(signed_area(q.vertices()) > 0.0);
    let coarse = single_estimate(q, opts.h, opts.tol)?;
    if !opts.richardson {
        return Ok(coarse);
    }
    let fine = single_estimate(q, 0.5 * opts.h, opts.tol)?;
    Ok(ModulusEstimate {
        value: 2.0 * fine.value - coarse.value,
        resolution: opts.h,
        residual: coarse.residual.max(fine.residual),
        method: "cut-cell+richardson".into(),
        cells: fine.cells,
        iterations: coarse.iterations + fine.iterations,
    })
}

/// Product of the moduli of `q` and of its conjugate; tends to 1.
pub fn conjugate_modulus_check(q: &PolygonalQuadrilateral, opts: &ModulusOptions) -> Result<f64, ModulusError> {
    let m = estimate_modulus(q, opts)?;
    let c = estimate_modulus(&q.conjugate(), opts)?;
    Ok(m.value * c.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: f64, h: f64) -> PolygonalQuadrilateral {
        PolygonalQuadrilateral::new(
            vec![Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)],
            [0, 1, 2, 3],
        )
        .unwrap()
    }

    #[test]
    fn clip_area_of_triangle() {
        let tri = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 2.0)];
        let (a, c) = clip_area(&tri, Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        assert!((a - 1.0).abs() < 1e-15);
        assert!(c.dist(Point::new(0.5, 0.5)) < 1e-15);
        let (a, _) = clip_area(&tri, Point::new(1.0, 1.0), Point::new(2.0, 2.0));
        assert!(a.abs() < 1e-15);
    }

    #[test]
    fn rectangles_are_exact() {
        for (w, h) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
            let r = rect(w, h);
            let m = estimate_modulus(&r, &ModulusOptions::with_cells(&r, 64)).unwrap();
            assert!((m.value - w / h).abs() < 1e-8, "{w}x{h}: {}", m.value);
        }
    }

    #[test]
    fn spacing_checked() {
        let r = rect(1.0, 1.0);
        assert!(matches!(
            estimate_modulus(&r, &ModulusOptions::with_spacing(0.5)),
            Err(ModulusError::SpacingTooLarge { .. })
        ));
    }

    #[test]
    fn reciprocity_on_rectangle() {
        let r = rect(2.0, 1.0);
        let p = conjugate_modulus_check(&r, &ModulusOptions::with_cells(&r, 64)).unwrap();
        assert!((p - 1.0).abs() < 1e-8);
    }
}
