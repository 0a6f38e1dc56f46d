//! Cut sampled traces into linear segments and extract whole-edge, vertex
//! and adjacency observations. Only the known parameters (θ, v, r_max and
//! the report period) are used.

use rangeshape::analysis::{extract_observations, segment_trace, SegmentationConfig};
use rangeshape::geometry::{Point, PolygonTarget};
use rangeshape::sim::{simulate_sensor, Scenario};

fn main() {
    let square = PolygonTarget::from_vertices(&[
        Point::new(-30.0, -30.0),
        Point::new(30.0, -30.0),
        Point::new(30.0, 30.0),
        Point::new(-30.0, 30.0),
    ])
    .unwrap();
    let sc = Scenario::with_polygon(square);
    let cfg = SegmentationConfig::default();

    let mut shown = 0;
    for id in 0..sc.n_s as u32 {
        let (sensor, samples) = simulate_sensor(&sc, id);
        let segs = segment_trace(&samples, sc.report_period, sc.r_max, sensor.v, &cfg);
        let obs = extract_observations(&segs);
        if obs.vertices.is_empty() {
            continue;
        }
        println!("sensor {id}: {} segments", segs.len());
        for (k, s) in segs.iter().enumerate() {
            println!(
                "  {k}: t = [{:.2}, {:.2}] ±{:.2}  slope {:+.4}  {:?} .. {:?}",
                s.t_s, s.t_e, s.t_err, s.s_d, s.start_event, s.end_event
            );
        }
        for e in &obs.edges {
            println!("  whole edge k={} l_d={:.2} s_d={:+.4}", e.k, e.l_d, e.s_d);
        }
        for v in &obs.vertices {
            println!("  vertex between {} and {}", v.k, v.k + 1);
        }
        for a in &obs.adjacency {
            println!("  adjacency {} -> {}", a.k, a.k1);
        }
        shown += 1;
        if shown == 3 {
            break;
        }
    }
}
