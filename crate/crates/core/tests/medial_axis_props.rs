use proptest::prelude::*;

use tridisk::corpus::{self, generate_one, Family};
use tridisk::geometry::point_segment_distance;
use tridisk::medial_axis::{compute_medial_axis, TAU_MA_REL};
use tridisk::{BoundaryFeature, PolygonalQuadrilateral};

fn shapes() -> impl Strategy<Value = PolygonalQuadrilateral> {
    prop_oneof![
        any::<u64>().prop_map(|s| generate_one(Family::Convex, s, 0).quad),
        any::<u64>().prop_map(|s| generate_one(Family::Orthogonal, s, 0).quad),
        any::<u64>().prop_map(|s| generate_one(Family::PerturbedRect, s, 0).quad),
        Just(corpus::l_hexagon()),
        Just(corpus::u_shape()),
    ]
}

fn feature_distance(q: &PolygonalQuadrilateral, f: BoundaryFeature, p: tridisk::Point) -> f64 {
    match f {
        BoundaryFeature::Edge(j) => {
            let (a, b) = q.edge(j);
            point_segment_distance(p, a, b)
        }
        BoundaryFeature::ReflexVertex(k) => p.dist(q.vertex(k)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edge_points_are_equidistant(q in shapes()) {
        let g = compute_medial_axis(&q).unwrap();
        let tau = TAU_MA_REL * q.diameter();
        for e in &g.edges {
            for i in 0..=32 {
                let s = i as f64 / 32.0;
                let p = e.point_at(s);
                let c = e.clearance_at(s);
                let (f0, f1) = e.feature_pair;
                prop_assert!((feature_distance(&q, f0, p) - c).abs() <= tau);
                prop_assert!((feature_distance(&q, f1, p) - c).abs() <= tau);
                prop_assert!((q.clearance(p) - c).abs() <= tau);
            }
        }
    }

    #[test]
    fn axis_is_a_tree(q in shapes()) {
        let g = compute_medial_axis(&q).unwrap();
        prop_assert!(g.is_tree());
        prop_assert_eq!(g.node_count(), g.edge_count() + 1);
        for k in 0..4 {
            prop_assert!(g.quad_tip(&q, k).is_ok());
        }
    }

    #[test]
    fn clearance_is_continuous_at_nodes(q in shapes()) {
        let g = compute_medial_axis(&q).unwrap();
        let tau = TAU_MA_REL * q.diameter();
        for e in &g.edges {
            let (n0, n1) = e.nodes;
            prop_assert!(e.point_at(0.0).dist(g.nodes[n0].point) <= tau);
            prop_assert!(e.point_at(1.0).dist(g.nodes[n1].point) <= tau);
            prop_assert!((e.clearance_at(0.0) - g.nodes[n0].clearance).abs() <= tau);
            prop_assert!((e.clearance_at(1.0) - g.nodes[n1].clearance).abs() <= tau);
        }
    }

    #[test]
    fn convex_axes_are_straight(seed in any::<u64>()) {
        let q = generate_one(Family::Convex, seed, 0).quad;
        let g = compute_medial_axis(&q).unwrap();
        prop_assert!(g.edges.iter().all(|e| !e.is_parabolic()));
    }

    #[test]
    fn radius_is_one_lipschitz_along_paths(q in shapes(), a in 0usize..4, b in 0usize..4) {
        prop_assume!(a != b);
        let g = compute_medial_axis(&q).unwrap();
        let tau = TAU_MA_REL * q.diameter();
        let (from, to) = (g.quad_tip(&q, a).unwrap(), g.quad_tip(&q, b).unwrap());
        let steps = g.tree_path(from, to).unwrap();
        let mut prev: Option<(tridisk::Point, f64)> = None;
        for step in steps {
            for i in 0..=16 {
                let p = g.step_point(step, i as f64 / 16.0);
                let r = q.clearance(p);
                if let Some((pp, pr)) = prev {
                    prop_assert!((r - pr).abs() <= pp.dist(p) + tau);
                }
                prev = Some((p, r));
            }
        }
    }
}
