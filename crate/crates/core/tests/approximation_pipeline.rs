use std::f64::consts::FRAC_PI_2;

use tridisk::approximation::{
    check_convergence_from_inside, inner_right_angle_approximation, inner_right_angle_approximation_with_margin,
    limit_disk, margin, ApproximationSequence,
};
use tridisk::corpus;
use tridisk::geodesic::internal_distances;
use tridisk::geometry::hausdorff_distance;
use tridisk::{find_three_side_disk, ApproximationError, ContactDisk, PolygonalQuadrilateral};

fn targets() -> Vec<(&'static str, PolygonalQuadrilateral)> {
    vec![
        ("square", corpus::unit_square()),
        ("circle", corpus::sampled_circle(256)),
        ("crescent", corpus::crescent()),
        ("l_hexagon", corpus::l_hexagon()),
    ]
}

fn closed(q: &PolygonalQuadrilateral) -> Vec<tridisk::Point> {
    let mut v = q.vertices().to_vec();
    v.push(v[0]);
    v
}

fn disks(seq: &ApproximationSequence) -> Vec<ContactDisk> {
    seq.levels
        .iter()
        .map(|l| find_three_side_disk(&l.polygon).unwrap().0)
        .collect()
}

#[test]
fn levels_are_valid_right_angled_and_inside() {
    for (name, t) in targets() {
        for k in 1..=4 {
            let p = inner_right_angle_approximation(&t, k).unwrap();
            p.validate().unwrap();
            assert!(t.contains_polygon(&p), "{name} level {k} leaves the target");
            for i in 0..4 {
                let a = p.interior_angle(p.quad_indices()[i]);
                assert!((a - FRAC_PI_2).abs() < 1e-9, "{name} level {k} corner {i}: {a}");
            }
        }
    }
}

#[test]
fn circle_levels_hug_the_boundary() {
    let t = corpus::sampled_circle(256);
    for k in 1..=4 {
        let p = inner_right_angle_approximation(&t, k).unwrap();
        let d = hausdorff_distance(&closed(&p), &closed(&t));
        assert!(d <= 4.0 * margin(&t, k), "level {k}: {d}");
    }
}

#[test]
fn large_margin_collapses_the_crescent() {
    let t = corpus::crescent();
    assert!(matches!(
        inner_right_angle_approximation_with_margin(&t, 0.25 * t.diameter()),
        Err(ApproximationError::InsetCollapse { .. })
    ));
}

#[test]
fn out_of_order_levels_are_not_nested() {
    let seq = ApproximationSequence::build(&corpus::sampled_circle(256), [3, 1]).unwrap();
    assert!(matches!(
        check_convergence_from_inside(&seq, 128),
        Err(ApproximationError::NotNested(0, 1))
    ));
}

#[test]
fn internal_distances_converge_with_the_margin() {
    for (name, t) in targets() {
        let (sa, sb) = internal_distances(&t);
        for k in 1..=4 {
            let p = inner_right_angle_approximation(&t, k).unwrap();
            let (pa, pb) = internal_distances(&p);
            let m = margin(&t, k);
            assert!((pa - sa).abs() <= 4.0 * m, "{name} level {k}: s_a {pa} vs {sa}");
            assert!((pb - sb).abs() <= 4.0 * m, "{name} level {k}: s_b {pb} vs {sb}");
        }
    }
}

#[test]
fn crescent_limit_touches_exactly_three_sides() {
    let t = corpus::crescent();
    let seq = ApproximationSequence::build(&t, 1..=4).unwrap();
    let ds = disks(&seq);
    let lim = limit_disk(&seq, &ds).unwrap();
    assert_eq!(lim.triple.len(), 3);
    assert!(lim.triple.has_opposite_pair());
    // The crescent is too thin between its horns for the fourth side.
    assert!(ds.iter().all(|d| d.labels().len() == 3), "{:?}", ds.iter().map(|d| d.labels()).collect::<Vec<_>>());
}

#[test]
fn level_radii_settle() {
    for (name, t) in targets() {
        let seq = ApproximationSequence::build(&t, 1..=4).unwrap();
        let ds = disks(&seq);
        for (i, w) in ds.windows(2).enumerate() {
            let m = seq.levels[i].margin;
            assert!((w[1].radius - w[0].radius).abs() <= 4.0 * m, "{name} levels {i}-{}: {} vs {}", i + 1, w[0].radius, w[1].radius);
        }
    }
}
