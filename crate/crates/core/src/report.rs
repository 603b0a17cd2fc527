//! End-to-end verification of one quadrilateral.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::approximation::{
    check_convergence_from_inside, feasible_levels, limit_disk, ApproximationSequence,
};
use crate::bounds::{l_from_k, lv_bounds, verify_corollary_with_tolerance, MODULUS_SLACK};
use crate::geodesic::{internal_side_distance, SidePair};
use crate::geometry::{Point, PolygonalQuadrilateral, SideSet};
use crate::medial_axis::{compute_medial_axis, MedialAxisGraph};
use crate::modulus::{estimate_modulus, ModulusOptions};
use crate::tridisk::{brute_force_three_side_disk, find_three_side_disk_with, tau_contact, ContactDisk};

/// Identifier of the report layout; bumped on any incompatible change.
pub const REPORT_SCHEMA: &str = "tridisk/verification-report/v1";

/// Grid size of the brute-force disk oracle.
pub const ORACLE_GRID: usize = 128;

/// Boundary samples used for the disk-inside check.
pub const INSIDE_SAMPLES: usize = 1024;

/// Finest inner-approximation level tried for sampled or reflex-cornered input.
pub const MAX_LEVEL: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// `h = diam / cells`.
    Cells(usize),
    /// Absolute `h`.
    Absolute(f64),
}

impl Spacing {
    pub fn for_quad(self, q: &PolygonalQuadrilateral) -> f64 {
        match self {
            Spacing::Cells(n) => q.diameter() / n as f64,
            Spacing::Absolute(h) => h,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub spacing: Spacing,
    pub oracle: bool,
    pub timings: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            spacing: Spacing::Cells(256),
            oracle: false,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputIdentity {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Swept on the input polygon.
    Direct,
    /// Swept on inner right-angle approximations, then passed to the limit.
    Approximation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub a: Vec<Point>,
    pub b: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub grid_n: usize,
    pub center: Point,
    pub radius: f64,
    pub labels: SideSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub k: u32,
    pub margin: f64,
    pub vertices: usize,
    /// Hausdorff distance of each side to the target side, `A1, B1, A2, B2`.
    pub side_distances: [f64; 4],
    pub radius: Option<f64>,
    pub labels: Option<SideSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub levels: Vec<LevelReport>,
    pub triple: Option<SideSet>,
    pub tau_limit: Option<f64>,
    pub modulus_gaps: Option<Vec<f64>>,
}

/// One flag per checked invariant; `None` when the check does not apply.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PassFlags {
    /// Lower and upper modulus bounds bracket the estimate, with slack.
    pub sandwich: bool,
    /// Radius and diameter chain of the large-disk corollary.
    pub corollary: bool,
    /// The disk touches both sides of an opposite pair.
    pub opposite_pair: bool,
    /// The disk touches at least three sides.
    pub three_sides: bool,
    /// The sampled circle stays in the closed polygon within `τ_geom`.
    pub disk_inside: bool,
    /// Every contact lies on circle and boundary within `τ_contact`.
    pub contacts: bool,
    /// Oracle radius at least the sweep radius minus `4·diam/grid_n`.
    pub oracle: Option<bool>,
    /// Levels are nested inside each other and the target.
    pub nested: Option<bool>,
    /// Side distances to the target do not increase.
    pub side_convergence: Option<bool>,
    /// The finest disk is a three-side disk of the target at `τ_limit`.
    pub limit: Option<bool>,
}

impl PassFlags {
    pub fn all(&self) -> bool {
        self.sandwich
            && self.corollary
            && self.opposite_pair
            && self.three_sides
            && self.disk_inside
            && self.contacts
            && [self.oracle, self.nested, self.side_convergence, self.limit]
                .iter()
                .all(|f| f.unwrap_or(true))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub input: InputIdentity,
    pub route: Route,
    pub s_a: Option<f64>,
    pub s_b: Option<f64>,
    pub modulus: Option<f64>,
    pub modulus_resolution: f64,
    pub lv_lower: Option<f64>,
    pub lv_upper: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub delta: Option<f64>,
    pub radius: Option<f64>,
    pub disk: Option<ContactDisk>,
    pub witnesses: Option<Witnesses>,
    pub oracle: Option<OracleReport>,
    pub approximation: Option<ApproximationReport>,
    pub pass: PassFlags,
    pub errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.pass.all()
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A report with the geometry it was computed on, for rendering.
#[derive(Clone, Debug)]
pub struct Verification {
    pub report: VerificationReport,
    /// The polygon the sweep ran on: the input, or the finest level.
    pub swept: PolygonalQuadrilateral,
    pub graph: Option<MedialAxisGraph>,
}

struct Clock {
    enabled: bool,
    last: Instant,
    spent: BTreeMap<String, f64>,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Clock {
            enabled,
            last: Instant::now(),
            spent: BTreeMap::new(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        if self.enabled {
            *self.spent.entry(name.to_string()).or_default() += (now - self.last).as_secs_f64();
        }
        self.last = now;
    }
}

/// Whether `q` must be approximated before the sweep.
pub fn needs_approximation(q: &PolygonalQuadrilateral, sampled: bool) -> bool {
    sampled || (0..4).any(|k| q.interior_angle(q.quad_indices()[k]) >= std::f64::consts::PI)
}

/// Runs internal distances, modulus, bounds, the three-side disk and the
/// corollary on `q`, routing sampled or reflex-cornered input through the
/// inner approximation.
pub fn verify(
    q: &PolygonalQuadrilateral,
    sampled: bool,
    input: InputIdentity,
    opts: &VerifyOptions,
) -> Verification {
    let mut clock = Clock::new(opts.timings);
    let mut errors = Vec::new();
    let mut pass = PassFlags::default();
    let route = if needs_approximation(q, sampled) {
        Route::Approximation
    } else {
        Route::Direct
    };

    let (s_a, wa) = internal_side_distance(q, SidePair::A);
    let (s_b, wb) = internal_side_distance(q, SidePair::B);
    clock.lap("geodesic");

    let h = opts.spacing.for_quad(q);
    let modulus = match estimate_modulus(q, &ModulusOptions::with_spacing(h)) {
        Ok(m) => Some(m.value),
        Err(e) => {
            errors.push(format!("modulus: {e}"));
            None
        }
    };
    clock.lap("modulus");

    let bounds = match lv_bounds(s_a, s_b) {
        Ok(b) => Some(b),
        Err(e) => {
            errors.push(format!("bounds: {e}"));
            None
        }
    };
    if let (Some(b), Some(m)) = (bounds, modulus) {
        pass.sandwich = b.brackets(m, MODULUS_SLACK);
    }

    let mut swept = q.clone();
    let mut graph = None;
    let mut disk = None;
    let mut approximation = None;
    let mut tau = q.tau_geom();
    match route {
        Route::Direct => match compute_medial_axis(q) {
            Ok(g) => {
                match find_three_side_disk_with(q, &g) {
                    Ok((d, _)) => disk = Some(d),
                    Err(e) => errors.push(format!("sweep: {e}")),
                }
                graph = Some(g);
            }
            Err(e) => errors.push(format!("medial axis: {e}")),
        },
        Route::Approximation => {
            let (rep, finest) = approximate(q, h, &mut pass, &mut errors);
            if let Some((poly, g, d)) = finest {
                swept = poly;
                graph = Some(g);
                disk = d;
            }
            if let Some(t) = rep.tau_limit {
                tau = tau.max(t);
            }
            approximation = Some(rep);
        }
    }
    clock.lap("tridisk");

    if let Some(d) = &disk {
        let labels = d.labels();
        pass.three_sides = labels.len() >= 3;
        pass.opposite_pair = labels.has_opposite_pair();
        pass.disk_inside = d.inside_residual(&swept, INSIDE_SAMPLES) <= swept.tau_geom();
        pass.contacts = d.contact_residual(&swept) <= tau_contact(&swept);
    }

    let k = modulus.map(|m| 1.05 * m.max(1.0 / m));
    let l = k.and_then(|k| l_from_k(k).ok());
    if let (Some(d), Some(k), Some(m)) = (&disk, k, modulus) {
        match verify_corollary_with_tolerance(d, k, s_a, s_b, m, tau) {
            Ok(c) => pass.corollary = c.pass(),
            Err(e) => errors.push(format!("corollary: {e}")),
        }
    }
    clock.lap("bounds");

    let mut oracle = None;
    if opts.oracle {
        match brute_force_three_side_disk(&swept, ORACLE_GRID) {
            Ok(o) => {
                let slack = 4.0 * swept.diameter() / ORACLE_GRID as f64;
                pass.oracle = Some(disk.as_ref().is_some_and(|d| o.radius >= d.radius - slack));
                oracle = Some(OracleReport {
                    grid_n: ORACLE_GRID,
                    center: o.center,
                    radius: o.radius,
                    labels: o.labels(),
                });
            }
            Err(e) => {
                pass.oracle = Some(false);
                errors.push(format!("oracle: {e}"));
            }
        }
        clock.lap("oracle");
    }

    let report = VerificationReport {
        schema: REPORT_SCHEMA.to_string(),
        input,
        route,
        s_a: Some(s_a),
        s_b: Some(s_b),
        modulus,
        modulus_resolution: h,
        lv_lower: bounds.map(|b| b.lower),
        lv_upper: bounds.map(|b| b.upper),
        k,
        l,
        delta: l.map(|l| 0.5 / l),
        radius: disk.as_ref().map(|d| d.radius),
        disk,
        witnesses: Some(Witnesses { a: wa.path, b: wb.path }),
        oracle,
        approximation,
        pass,
        errors,
        timings: opts.timings.then_some(clock.spent),
    };
    Verification { report, swept, graph }
}

type Finest = (PolygonalQuadrilateral, MedialAxisGraph, Option<ContactDisk>);

fn approximate(
    target: &PolygonalQuadrilateral,
    h: f64,
    pass: &mut PassFlags,
    errors: &mut Vec<String>,
) -> (ApproximationReport, Option<Finest>) {
    let mut rep = ApproximationReport {
        levels: Vec::new(),
        triple: None,
        tau_limit: None,
        modulus_gaps: None,
    };
    let Some(ks) = feasible_levels(target, MAX_LEVEL) else {
        errors.push("approximation: no feasible inset level".into());
        return (rep, None);
    };
    let seq = match ApproximationSequence::build(target, ks) {
        Ok(s) => s,
        Err(e) => {
            errors.push(format!("approximation: {e}"));
            return (rep, None);
        }
    };
    if seq.levels.len() >= 2 {
        let cells = (target.diameter() / h).round().max(64.0) as usize;
        match check_convergence_from_inside(&seq, cells) {
            Ok(c) => {
                pass.nested = Some(true);
                pass.side_convergence = Some(true);
                rep.modulus_gaps = Some(c.modulus_gaps);
            }
            Err(e) => {
                use crate::error::ApproximationError as E;
                match e {
                    E::NotNested(..) => pass.nested = Some(false),
                    E::SideDistanceIncreased { .. } => {
                        pass.nested = Some(true);
                        pass.side_convergence = Some(false);
                    }
                    _ => {}
                }
                errors.push(format!("convergence: {e}"));
            }
        }
    }
    let mut disks = Vec::new();
    let mut finest = None;
    for (i, level) in seq.levels.iter().enumerate() {
        let side_distances = seq.side_distances(i);
        let mut entry = LevelReport {
            k: level.k,
            margin: level.margin,
            vertices: level.polygon.len(),
            side_distances,
            radius: None,
            labels: None,
        };
        match compute_medial_axis(&level.polygon) {
            Ok(g) => {
                let d = match find_three_side_disk_with(&level.polygon, &g) {
                    Ok((d, _)) => {
                        entry.radius = Some(d.radius);
                        entry.labels = Some(d.labels());
                        disks.push(d.clone());
                        Some(d)
                    }
                    Err(e) => {
                        errors.push(format!("sweep at level {}: {e}", level.k));
                        None
                    }
                };
                if i + 1 == seq.levels.len() {
                    finest = Some((level.polygon.clone(), g, d));
                }
            }
            Err(e) => errors.push(format!("medial axis at level {}: {e}", level.k)),
        }
        rep.levels.push(entry);
    }
    if disks.len() == seq.levels.len() {
        match limit_disk(&seq, &disks) {
            Ok(l) => {
                pass.limit = Some(true);
                rep.triple = Some(l.triple);
                rep.tau_limit = Some(l.tau_limit);
            }
            Err(e) => {
                pass.limit = Some(false);
                errors.push(format!("limit: {e}"));
            }
        }
    } else {
        pass.limit = Some(false);
    }
    (rep, finest)
}
