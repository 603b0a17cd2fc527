//! Named fixtures and seeded instance generators.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{orient, Point, PolygonalQuadrilateral};

/// A quadrilateral with a name, and whether its boundary samples a smooth curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub quad: PolygonalQuadrilateral,
    pub sampled: bool,
}

fn build(v: &[(f64, f64)], quad: [usize; 4]) -> PolygonalQuadrilateral {
    PolygonalQuadrilateral::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect(), quad)
        .expect("fixture is a valid quadrilateral")
}

pub fn unit_square() -> PolygonalQuadrilateral {
    rectangle(1.0, 1.0)
}

/// `[0, w] × [0, h]` with its corners as quad-vertices, `A1` along the bottom.
pub fn rectangle(w: f64, h: f64) -> PolygonalQuadrilateral {
    build(&[(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)], [0, 1, 2, 3])
}

pub fn right_trapezoid() -> PolygonalQuadrilateral {
    build(&[(0.0, 0.0), (3.0, 0.0), (2.0, 1.0), (0.0, 1.0)], [0, 1, 2, 3])
}

/// L-shaped hexagon with one reflex vertex at `(1, 1)` and quad-vertices
/// `(0,0), (2,0), (1,2), (0,2)`.
pub fn l_hexagon() -> PolygonalQuadrilateral {
    build(
        &[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
        [0, 1, 4, 5],
    )
}

/// U-shaped octagon whose a-sides are the two tops of the arms, so the
/// shortest crossing bends around the notch.
pub fn u_shape() -> PolygonalQuadrilateral {
    build(
        &[
            (0.0, 0.0),
            (4.0, 0.0),
            (4.0, 3.0),
            (3.0, 3.0),
            (2.5, 1.0),
            (1.5, 1.2),
            (1.0, 3.0),
            (0.0, 3.0),
        ],
        [2, 3, 6, 7],
    )
}

/// Unit circle sampled at `n` points (n divisible by 4), marked at the
/// angles `0, π/2, π, 3π/2`.
pub fn sampled_circle(n: usize) -> PolygonalQuadrilateral {
    assert!(n >= 8 && n % 4 == 0, "circle needs a multiple of 4 samples");
    let v: Vec<Point> = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            Point::new(t.cos(), t.sin())
        })
        .collect();
    PolygonalQuadrilateral::new(v, [0, n / 4, n / 2, 3 * n / 4]).expect("sampled circle")
}

/// Crescent between the unit circle and a circle centred at `(c, 0)` through
/// the tips `(cos β, ±sin β)`.
///
/// Marks: upper tip, `(-1, 0)`, lower tip, and the inner point at fraction
/// `f` of the inner arc measured from the lower tip. The tips are the
/// convex endpoints where two of the three contacts of a three-side disk
/// may coincide.
pub fn crescent_with(beta: f64, c: f64, f: f64, samples: usize) -> PolygonalQuadrilateral {
    let (cb, sb) = (beta.cos(), beta.sin());
    let rho = ((c - cb).powi(2) + sb * sb).sqrt();
    let psi1 = sb.atan2(cb - c);
    let outer_len = 2.0 * (PI - beta);
    let inner_len = rho * (TAU - 2.0 * psi1);
    // Even so (-1, 0) is a sample.
    let n_out = (((samples as f64) * outer_len / (outer_len + inner_len)).round() as usize / 2 * 2).max(8);
    let n_in = samples.saturating_sub(n_out).max(8);
    let mut v = Vec::with_capacity(n_out + n_in);
    for j in 0..=n_out {
        let t = beta + outer_len * j as f64 / n_out as f64;
        v.push(Point::new(t.cos(), t.sin()));
    }
    for j in 1..n_in {
        let psi = (TAU - psi1) - (TAU - 2.0 * psi1) * j as f64 / n_in as f64;
        v.push(Point::new(c + rho * psi.cos(), rho * psi.sin()));
    }
    let mark = n_out + ((f * n_in as f64).round() as usize).clamp(1, n_in - 1);
    PolygonalQuadrilateral::new(v, [0, n_out / 2, n_out, mark]).expect("crescent")
}

/// The standard crescent: inner circle centred at `(0.6, 0)` with radius
/// `0.8`, tips at `(0.6, ±0.8)`, 256 samples.
pub fn crescent() -> PolygonalQuadrilateral {
    crescent_with(0.8f64.atan2(0.6), 0.6, 2.0 / 3.0, 256)
}

/// Polygonal fixtures with convex quad-vertices.
pub fn fixture_corpus() -> Vec<Instance> {
    let named = |name: &str, quad| Instance {
        name: name.to_string(),
        quad,
        sampled: false,
    };
    vec![
        named("square", unit_square()),
        named("rect_2x1", rectangle(2.0, 1.0)),
        named("right_trapezoid", right_trapezoid()),
        named("l_hexagon", l_hexagon()),
        named("u_shape", u_shape()),
    ]
}

/// Seeded instance families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Convex polygons with 4 to 8 vertices.
    Convex,
    /// Axis-parallel polygons bounded by two staircases.
    Orthogonal,
    /// Rectangles whose sides carry small normal perturbations.
    PerturbedRect,
    /// Sampled crescents with random tip position and thickness.
    CrescentSampled,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Convex,
        Family::Orthogonal,
        Family::PerturbedRect,
        Family::CrescentSampled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Convex => "convex",
            Family::Orthogonal => "orthogonal",
            Family::PerturbedRect => "perturbed-rect",
            Family::CrescentSampled => "crescent-sampled",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Instance `index` of `family` under `seed`; independent of how many
/// instances are drawn.
pub fn generate_one(family: Family, seed: u64, index: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let quad = loop {
        let candidate = match family {
            Family::Convex => random_convex(&mut rng),
            Family::Orthogonal => random_orthogonal(&mut rng),
            Family::PerturbedRect => random_perturbed_rect(&mut rng),
            Family::CrescentSampled => Some(random_crescent(&mut rng)),
        };
        if let Some(q) = candidate {
            break q;
        }
    };
    Instance {
        name: format!("{}_{:04}", family.name().replace('-', "_"), index),
        quad,
        sampled: family == Family::CrescentSampled,
    }
}

pub fn generate(family: Family, seed: u64, count: usize) -> Vec<Instance> {
    (0..count as u64).map(|i| generate_one(family, seed, i)).collect()
}

/// Convex polygon with `n` vertices chosen in `sizes`, under the stream of `rng`.
pub fn random_convex_polygon(rng: &mut impl Rng, sizes: std::ops::RangeInclusive<usize>) -> Vec<Point> {
    let n = rng.gen_range(sizes);
    let gaps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.3)).collect();
    let total: f64 = gaps.iter().sum();
    let (b, phase, rot) = (rng.gen_range(0.3..1.0), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
    let scale = rng.gen_range(0.5..3.0);
    let shift = Point::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    let mut t = phase;
    gaps.iter()
        .map(|g| {
            t += TAU * g / total;
            Point::new(t.cos(), b * t.sin()).rotate(rot) * scale + shift
        })
        .collect()
}

fn random_quad_indices(rng: &mut impl Rng, candidates: &[usize]) -> [usize; 4] {
    let mut pick: Vec<usize> = sample(rng, candidates.len(), 4).into_iter().map(|i| candidates[i]).collect();
    pick.sort_unstable();
    [pick[0], pick[1], pick[2], pick[3]]
}

fn random_convex(rng: &mut impl Rng) -> Option<PolygonalQuadrilateral> {
    let v = random_convex_polygon(rng, 4..=8);
    let all: Vec<usize> = (0..v.len()).collect();
    let quad = random_quad_indices(rng, &all);
    PolygonalQuadrilateral::new(v, quad).ok()
}

fn random_orthogonal(rng: &mut impl Rng) -> Option<PolygonalQuadrilateral> {
    let cols = rng.gen_range(2..=6);
    let h = rng.gen_range(1.0..3.0);
    let mut xs = vec![0.0];
    for _ in 0..cols {
        let w = rng.gen_range(0.5..2.0);
        xs.push(xs.last().unwrap() + w);
    }
    let low: Vec<f64> = (0..cols).map(|_| h * rng.gen_range(0.0..0.35)).collect();
    let high: Vec<f64> = (0..cols).map(|_| h * rng.gen_range(0.65..1.0)).collect();
    let distinct = |s: &[f64]| s.windows(2).all(|w| (w[0] - w[1]).abs() > 0.02 * h);
    if !distinct(&low) || !distinct(&high) {
        return None;
    }
    let mut v = vec![Point::new(xs[0], low[0])];
    for i in 0..cols - 1 {
        v.push(Point::new(xs[i + 1], low[i]));
        v.push(Point::new(xs[i + 1], low[i + 1]));
    }
    v.push(Point::new(xs[cols], low[cols - 1]));
    v.push(Point::new(xs[cols], high[cols - 1]));
    for i in (0..cols - 1).rev() {
        v.push(Point::new(xs[i + 1], high[i + 1]));
        v.push(Point::new(xs[i + 1], high[i]));
    }
    v.push(Point::new(xs[0], high[0]));
    let n = v.len();
    let convex: Vec<usize> = (0..n)
        .filter(|&k| orient(v[(k + n - 1) % n], v[k], v[(k + 1) % n]) > 0.0)
        .collect();
    let quad = random_quad_indices(rng, &convex);
    PolygonalQuadrilateral::new(v, quad).ok()
}

fn random_perturbed_rect(rng: &mut impl Rng) -> Option<PolygonalQuadrilateral> {
    let (w, h): (f64, f64) = (rng.gen_range(1.0..3.0), rng.gen_range(0.5..2.0));
    let amp = 0.05 * w.min(h);
    let corners = [Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)];
    let mut v = Vec::new();
    let mut quad = [0; 4];
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        let normal = (b - a).normalized().perp();
        quad[s] = v.len();
        v.push(a);
        let k = rng.gen_range(1..=4);
        for i in 1..=k {
            let t = (i as f64 + rng.gen_range(-0.3..0.3)) / (k + 1) as f64;
            v.push(a.lerp(b, t) + normal * rng.gen_range(-amp..amp));
        }
    }
    PolygonalQuadrilateral::new(v, quad).ok()
}

fn random_crescent(rng: &mut impl Rng) -> PolygonalQuadrilateral {
    let beta = rng.gen_range(0.25 * PI..0.4 * PI);
    let c = beta.cos() + rng.gen_range(0.0..0.6);
    let f = rng.gen_range(0.55..0.85);
    crescent_with(beta, c, f, 256)
}
