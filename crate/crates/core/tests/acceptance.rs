//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use tridisk::approximation::{check_convergence_from_inside, limit_disk, ApproximationSequence};
use tridisk::bounds::{delta, lv_bounds};
use tridisk::corpus::{self, generate, Family, Instance};
use tridisk::geodesic::{internal_distances, internal_side_distance, sampled_side_distance, SidePair};
use tridisk::modulus::{conjugate_modulus_check, estimate_modulus, ModulusOptions};
use tridisk::report::{verify, InputIdentity, Route, Verification, VerifyOptions};
use tridisk::tridisk::tau_contact;
use tridisk::{find_three_side_disk, ContactDisk, Point, PolygonalQuadrilateral, SideLabel, SideSet};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    check(spent < limit, || format!("took {:.1}s, limit {}s", spent.as_secs_f64(), limit.as_secs()))
}

fn three_side_disk_suite() -> Outcome {
    let start = Instant::now();
    let mut all = generate(Family::Convex, 1, 1000);
    all.extend(generate(Family::Orthogonal, 1, 200));
    let failures: Vec<String> = all
        .par_iter()
        .filter_map(|inst| {
            let q = &inst.quad;
            let (d, _) = match find_three_side_disk(q) {
                Ok(r) => r,
                Err(e) => return Some(format!("{}: {e}", inst.name)),
            };
            let l = d.labels();
            let inside = d.inside_residual(q, 1024);
            let contact = d.contact_residual(q);
            let ok = l.len() >= 3 && l.has_opposite_pair() && inside <= 1e-9 * q.diameter() && contact <= tau_contact(q);
            (!ok).then(|| format!("{}: labels {l}, inside {inside:e}, contact {contact:e}", inst.name))
        })
        .collect();
    check(failures.is_empty(), || format!("{} failures, first {}", failures.len(), failures[0]))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("{} instances", all.len()))
}

fn analytic_disks() -> Outcome {
    let (sq, _) = find_three_side_disk(&corpus::unit_square()).map_err(|e| e.to_string())?;
    check((sq.radius - 0.5).abs() <= 1e-9 && sq.center.dist(Point::new(0.5, 0.5)) <= 1e-9, || {
        format!("square: r = {}, center {}", sq.radius, sq.center)
    })?;
    let (r, _) = find_three_side_disk(&corpus::rectangle(2.0, 1.0)).map_err(|e| e.to_string())?;
    let x_ok = [0.5, 1.5].iter().any(|x| (r.center.x - x).abs() <= 1e-6);
    check((r.radius - 0.5).abs() <= 1e-9 && x_ok, || format!("rectangle: r = {}, center {}", r.radius, r.center))?;
    Ok(format!("square r = {:.12}, rectangle center x = {:.9}", sq.radius, r.center.x))
}

fn medial_axis_oracle() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<(String, PolygonalQuadrilateral)> = vec![
        ("square".into(), corpus::unit_square()),
        ("rect_2x1".into(), corpus::rectangle(2.0, 1.0)),
        ("l_hexagon".into(), corpus::l_hexagon()),
    ];
    for (i, q) in common::convex_polygons(3, 10).into_iter().enumerate() {
        cases.push((format!("convex_{i}"), q));
    }
    let results: Vec<Result<f64, String>> = cases
        .par_iter()
        .map(|(name, q)| common::axis_agreement(q).map(|(w, t)| w / t).map_err(|e| format!("{name}: {e}")))
        .collect();
    let mut worst: f64 = 0.0;
    for r in results {
        worst = worst.max(r?);
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("{} instances, worst distance {:.2} of tolerance", cases.len(), worst))
}

fn modulus_cases() -> Outcome {
    let start = Instant::now();
    let mut worst_rect: f64 = 0.0;
    for (w, h) in [(1.0, 1.0), (2.0, 1.0), (4.0, 1.0), (1.0, 2.0), (1.0, 5.0)] {
        let q = corpus::rectangle(w, h);
        let m = estimate_modulus(&q, &ModulusOptions::with_cells(&q, 256)).map_err(|e| e.to_string())?;
        let err = (m.value - w / h).abs() / (w / h);
        check(err <= 0.02, || format!("{w}x{h}: {} vs {}", m.value, w / h))?;
        worst_rect = worst_rect.max(err);
    }
    let mut inst = generate(Family::Convex, 11, 20);
    inst.extend(generate(Family::Orthogonal, 11, 15));
    inst.extend(generate(Family::PerturbedRect, 11, 15));
    let products: Vec<Result<f64, String>> = inst
        .par_iter()
        .map(|i| {
            conjugate_modulus_check(&i.quad, &ModulusOptions::with_cells(&i.quad, 256))
                .map_err(|e| format!("{}: {e}", i.name))
        })
        .collect();
    let mut worst_product: f64 = 0.0;
    for (i, p) in inst.iter().zip(products) {
        let p = p?;
        check((p - 1.0).abs() <= 0.05, || format!("{}: product {p}", i.name))?;
        worst_product = worst_product.max((p - 1.0).abs());
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!(
        "rectangle error {:.2e}, {} reciprocity products within {:.2e} of 1",
        worst_rect,
        inst.len(),
        worst_product
    ))
}

fn verified_corpus() -> Vec<(Instance, Verification)> {
    common::full_corpus()
        .into_par_iter()
        .map(|inst| {
            let id = InputIdentity {
                file: inst.name.clone(),
                sha256: String::new(),
            };
            let v = verify(&inst.quad, inst.sampled, id, &VerifyOptions::default());
            (inst, v)
        })
        .collect()
}

fn sandwich(corpus: &[(Instance, Verification)]) -> Outcome {
    let b = lv_bounds(1.0, 1.0).map_err(|e| e.to_string())?;
    let l3 = 3f64.ln();
    let (lower, upper) = (l3 * l3 / (PI + 2.0 * PI * l3), (PI + 2.0 * PI * l3) / (l3 * l3));
    check((b.lower - lower).abs() <= 1e-12 && (b.upper - upper).abs() <= 1e-12, || {
        format!("(1,1): {} {} vs {lower} {upper}", b.lower, b.upper)
    })?;
    for (inst, v) in corpus {
        let r = &v.report;
        check(r.pass.sandwich, || {
            format!("{}: {:?} not in [{:?}, {:?}]", inst.name, r.modulus, r.lv_lower, r.lv_upper)
        })?;
    }
    Ok(format!("{} instances, lower(1,1) = {:.12}, upper(1,1) = {:.12}", corpus.len(), b.lower, b.upper))
}

fn corollary(corpus: &[(Instance, Verification)]) -> Outcome {
    for (inst, v) in corpus {
        let r = &v.report;
        check(r.pass.corollary, || format!("{}: corollary fails, errors {:?}", inst.name, r.errors))?;
    }
    let ds: Vec<f64> = [1.0, 1.5, 2.0, 5.0, 10.0]
        .iter()
        .map(|&k| delta(k))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    check(ds.iter().all(|d| 0.0 < *d && *d < 1.0), || format!("delta {ds:?}"))?;
    check(ds.windows(2).all(|w| w[1] <= w[0]), || format!("delta not non-increasing {ds:?}"))?;
    Ok(format!("{} instances, delta(1) = {:.4e}, delta(10) = {:.4e}", corpus.len(), ds[0], ds[4]))
}

/// Levels 1 to 4 of `target`, and the limit of their disks.
fn convergence_of(name: &str, target: &PolygonalQuadrilateral, strict: bool) -> Result<String, String> {
    let seq = ApproximationSequence::build(target, 1..=4).map_err(|e| format!("{name}: {e}"))?;
    let c = check_convergence_from_inside(&seq, 256).map_err(|e| format!("{name}: {e}"))?;
    check(c.halving(0.02), || format!("{name}: distance ratios {:?}", c.distance_ratios))?;
    let gaps_ok = if strict {
        c.gaps_decreasing()
    } else {
        c.gaps_non_increasing_within_error()
    };
    check(gaps_ok, || {
        format!("{name}: modulus gaps {:?}, errors {:?}", c.modulus_gaps, c.modulus_errors)
    })?;
    let disks: Vec<ContactDisk> = seq
        .levels
        .par_iter()
        .map(|l| find_three_side_disk(&l.polygon).map(|r| r.0))
        .collect::<Result<_, _>>()
        .map_err(|e| format!("{name}: {e}"))?;
    let lim = limit_disk(&seq, &disks).map_err(|e| format!("{name}: {e}"))?;
    let gaps: Vec<String> = c.modulus_gaps.iter().map(|g| format!("{g:.1e}")).collect();
    Ok(format!(
        "{name}: ratios max {:.4}, gaps [{}] (strictly decreasing: {}), limit r = {:.4} on {}",
        c.distance_ratios.iter().copied().fold(0.0, f64::max),
        gaps.join(", "),
        c.gaps_decreasing(),
        lim.disk.radius,
        lim.triple
    ))
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let square = convergence_of("square", &corpus::unit_square(), false)?;
    let circle = convergence_of("circle", &corpus::sampled_circle(256), false)?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("{square}; {circle}"))
}

fn geodesics() -> Outcome {
    for (w, h) in [(1.0, 1.0), (2.0, 1.0), (3.5, 0.5)] {
        let (sa, sb) = internal_distances(&corpus::rectangle(w, h));
        check((sa - h).abs() <= 1e-9 && (sb - w).abs() <= 1e-9, || format!("{w}x{h}: {sa} {sb}"))?;
    }
    let convex = generate(Family::Convex, 8, 200);
    for inst in &convex {
        let q = &inst.quad;
        for (pair, s, t) in [(SidePair::A, SideLabel::A1, SideLabel::A2), (SidePair::B, SideLabel::B1, SideLabel::B2)] {
            let g = internal_side_distance(q, pair).0;
            let d = common::segment_pair_distance(q, s, t);
            check((g - d).abs() <= 1e-9, || format!("{}: {g} vs {d}", inst.name))?;
        }
    }
    let u = corpus::u_shape();
    let s = internal_side_distance(&u, SidePair::A).0;
    let o = sampled_side_distance(&u, SidePair::A, 512);
    check((s - o).abs() <= 1e-4 * u.diameter(), || format!("U: {s} vs {o}"))?;
    Ok(format!("{} convex instances, U-shape {:.6} vs oracle {:.6}", convex.len(), s, o))
}

/// The chain is checked on the polygon the disk was found on: the input,
/// or for the approximation route the finest inner level.
fn radius_chain(corpus: &[(Instance, Verification)]) -> Outcome {
    let mut worst = f64::INFINITY;
    for (inst, v) in corpus {
        let r = &v.report;
        let d = r.disk.as_ref().ok_or_else(|| format!("{}: no disk", inst.name))?;
        let q = &v.swept;
        let (sa, sb) = match r.route {
            Route::Direct => (r.s_a.unwrap(), r.s_b.unwrap()),
            Route::Approximation => internal_distances(q),
        };
        let tau = 1e-9 * q.diameter();
        let l = d.labels();
        let mut touched = Vec::new();
        if l.contains_all(SideSet::of(&[SideLabel::A1, SideLabel::A2])) {
            touched.push(sa);
        }
        if l.contains_all(SideSet::of(&[SideLabel::B1, SideLabel::B2])) {
            touched.push(sb);
        }
        check(!touched.is_empty(), || format!("{}: no opposite pair in {l}", inst.name))?;
        for s in touched {
            check(2.0 * d.radius >= s - tau, || format!("{}: 2r = {} < s = {s}", inst.name, 2.0 * d.radius))?;
            worst = worst.min(2.0 * d.radius - s);
        }
        let delta = r.delta.ok_or_else(|| format!("{}: no delta", inst.name))?;
        check(d.radius >= delta * sa.max(sb) - tau, || format!("{}: r = {} below delta bound", inst.name, d.radius))?;
    }
    Ok(format!("{} instances, min 2r - s = {:.3e}", corpus.len(), worst))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {n}: PASS {name} ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {name} ({secs:.1}s) {detail}");
            }
        }
    };
    report(1, "three-side disk suite", &three_side_disk_suite);
    report(2, "analytic disks", &analytic_disks);
    report(3, "medial axis oracle", &medial_axis_oracle);
    report(4, "modulus", &modulus_cases);
    let start = Instant::now();
    let corpus = verified_corpus();
    println!("verified {} corpus instances in {:.1}s", corpus.len(), start.elapsed().as_secs_f64());
    report(5, "modulus sandwich", &|| sandwich(&corpus));
    report(6, "large-disk corollary", &|| corollary(&corpus));
    report(7, "convergence from inside", &convergence);
    report(8, "geodesics", &geodesics);
    report(9, "radius chain", &|| radius_chain(&corpus));
    match convergence_of("crescent", &corpus::crescent(), true) {
        Ok(d) => println!("extra: strict modulus gap decrease on the crescent: PASS {d}"),
        Err(d) => println!("extra: strict modulus gap decrease on the crescent: FAIL {d}"),
    }
    if failed == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
