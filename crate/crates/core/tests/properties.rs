mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use proptest::prelude::*;
use rangeshape::assembly::{assemble, AssemblyConfig};
use rangeshape::estimator::{AdjacencyCount, AngleClass, ClassMember, LengthClass, VertexHypothesis};
use rangeshape::geometry::{inner_angle, Point, PolygonTarget};
use rangeshape::prob::{blocking_f, q_d_edge, q_d_edge_concave, ArenaParams};
use rangeshape::sim::sensor_config;

const SCENARIOS: [&str; 4] = ["right_triangle", "building_a", "building_b", "square"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Scaling the whole scene (target, sensor path, speed and range) by `k`
    /// scales every reading by `k` at the same times.
    #[test]
    fn traces_scale_with_the_scene(which in 0usize..4, id in 0u32..2000, k in 0.2f64..5.0) {
        let sc = common::scenario(SCENARIOS[which]);
        let s = sensor_config(&sc, id);
        let (big, t) = common::scale_scene(&sc, &s, k);
        prop_assert!(common::scaled_readings(&common::readings(&s, &sc, 97), &common::readings(&t, &big, 97), k));
    }

    /// Rotating target and sensor together leaves the trace unchanged.
    #[test]
    fn traces_are_rotation_invariant(which in 0usize..4, id in 0u32..2000, a in 0.0f64..TAU) {
        let sc = common::scenario(SCENARIOS[which]);
        let s = sensor_config(&sc, id);
        let (rot, t) = common::rotate_scene(&sc, &s, a);
        prop_assert!(common::scaled_readings(&common::readings(&s, &sc, 97), &common::readings(&t, &rot, 97), 1.0));
    }

    #[test]
    fn detection_probabilities_are_scale_free(
        lambda in 1.0f64..300.0, theta in 0.05f64..3.1, dxi in 0.01f64..3.13, k in 0.1f64..10.0,
    ) {
        let a = ArenaParams::disk(200.0, 100.0);
        let b = ArenaParams::disk(200.0 * k, 100.0 * k);
        let p = q_d_edge(lambda, theta, &a);
        prop_assert!((p - q_d_edge(k * lambda, theta, &b)).abs() <= 1e-12);
        let f = blocking_f(lambda, theta, dxi, 100.0);
        prop_assert!((k * f - blocking_f(k * lambda, theta, dxi, 100.0 * k)).abs() <= 1e-9 * (1.0 + k * f));
        let c = q_d_edge_concave(lambda, theta, dxi, &a);
        prop_assert!((c - q_d_edge_concave(k * lambda, theta, dxi, &b)).abs() <= 1e-12);
    }

    #[test]
    fn edge_detection_peaks_at_a_right_angle(lambda in 1.0f64..350.0, r_max in 10.0f64..200.0) {
        let arena = ArenaParams::disk(200.0, r_max);
        let grid: Vec<f64> = (0..64).map(|i| PI * i as f64 / 64.0).collect();
        let q: Vec<f64> = grid.iter().map(|&t| q_d_edge(lambda, t, &arena)).collect();
        let best = (0..64).max_by(|&a, &b| q[a].total_cmp(&q[b])).unwrap();
        prop_assert!(q[best] > 0.0);
        // π/2 attains the maximum; other grid points may tie with it
        prop_assert!(q[32] >= q[best] - 1e-15, "max at {} ({} vs {})", grid[best], q[best], q[32]);
        prop_assert_eq!(grid[32], FRAC_PI_2);
    }

    #[test]
    fn blocking_never_helps(lambda in 1.0f64..300.0, theta in 0.01f64..6.27, dxi in 0.001f64..PI) {
        let arena = ArenaParams::disk(200.0, 100.0);
        prop_assert!(q_d_edge_concave(lambda, theta, dxi, &arena) <= q_d_edge(lambda, theta, &arena) + 1e-15);
    }

    /// Exact classes of a random convex polygon with distinct edges and one
    /// two-sided hypothesis per vertex assemble to that polygon only; with
    /// perturbed class values every emitted shape still meets the closure
    /// and turning tolerances.
    #[test]
    fn assembly_closes(
        cuts in prop::collection::vec(0.0f64..1.0, 3..7),
        jitter in prop::collection::vec(-1.0f64..1.0, 14),
        amount in 0.0f64..0.03,
    ) {
        let mut a: Vec<f64> = cuts.iter().map(|c| c * TAU).collect();
        a.sort_by(f64::total_cmp);
        let gaps_ok = (0..a.len()).all(|i| {
            let next = if i + 1 < a.len() { a[i + 1] } else { a[0] + TAU };
            next - a[i] > 0.3 && next - a[i] < PI - 0.05
        });
        prop_assume!(gaps_ok);
        let poly = PolygonTarget::from_vertices(&a.iter().map(|&t| Point::unit(t) * 50.0).collect::<Vec<_>>()).unwrap();
        let n = poly.n_edges();
        let lens: Vec<f64> = poly.edges().iter().map(|e| e.lambda).collect();
        let angs: Vec<f64> = (0..n).map(|j| inner_angle(poly.edges()[j].xi, poly.edges()[(j + 1) % n].xi).unwrap()).collect();
        let distinct = |v: &[f64], tol: f64| v.iter().enumerate().all(|(i, x)| v[..i].iter().all(|y| (x - y).abs() > tol));
        prop_assume!(distinct(&lens, 2.0) && distinct(&angs, 0.05));

        let member = |value: f64| ClassMember { sensor_id: 0, k: 0, value, sd: 0.0 };
        let classes = |shift: f64| {
            let lc: Vec<LengthClass> = lens.iter().enumerate().map(|(i, &l)| {
                let v = l * (1.0 + shift * jitter[i]);
                LengthClass { members: vec![member(v)], lambda_hat: v, expected: 1.0, count_plain: 1, count_hat: 1 }
            }).collect();
            let ac: Vec<AngleClass> = angs.iter().enumerate().map(|(i, &g)| {
                let v = g + shift * jitter[7 + i];
                AngleClass { members: vec![member(v)], gamma_hat: v, expected: 1.0, count_hat: 1 }
            }).collect();
            (lc, ac)
        };
        let hyps: Vec<VertexHypothesis> = (0..n)
            .map(|j| VertexHypothesis { angle_class: j, incoming: Some(j), outgoing: Some((j + 1) % n), support: 10 })
            .collect();
        let cfg = AssemblyConfig::default();

        let (lc, ac) = classes(0.0);
        let shapes = assemble(&lc, &ac, &hyps, &AdjacencyCount::default(), &cfg).unwrap();
        prop_assert_eq!(shapes.len(), 1);
        let mut order: Vec<usize> = shapes[0].edges.iter().map(|e| e.length_class).collect();
        let start = order.iter().position(|&c| c == 0).unwrap();
        order.rotate_left(start);
        prop_assert_eq!(order, (0..n).collect::<Vec<_>>());

        let (lc, ac) = classes(amount);
        if let Ok(shapes) = assemble(&lc, &ac, &hyps, &AdjacencyCount::default(), &cfg) {
            for s in shapes {
                prop_assert!(s.closure_residual <= 0.02 * s.perimeter());
                prop_assert!(s.angle_residual <= 0.05);
            }
        }
    }
}
