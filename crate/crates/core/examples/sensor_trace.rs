//! Simulate one sensor passing a right triangle and print its distance
//! trace next to the exact piecewise-linear reading.

use rangeshape::geometry::{Point, PolygonTarget};
use rangeshape::sim::{analytic_trace, simulate_sensor, PieceState, Scenario};

fn main() {
    let tri = PolygonTarget::from_vertices(&[
        Point::new(0.0, 0.0),
        Point::new(50.0 * 3f64.sqrt(), 0.0),
        Point::new(0.0, 50.0),
    ])
    .unwrap()
    .centered();
    let sc = Scenario::with_polygon(tri);

    // find a sensor that actually sees something
    let (cfg, samples) = (0..sc.n_s as u32)
        .map(|id| simulate_sensor(&sc, id))
        .find(|(_, s)| s.iter().filter(|x| x.r.is_some_and(|r| r > 0.0)).count() > 20)
        .expect("some sensor detects the triangle");

    println!(
        "sensor {} heading {:.3} rad, beam {:.3} rad, {} reports",
        cfg.id,
        cfg.phi,
        cfg.beam_direction(),
        samples.len()
    );
    let exact = analytic_trace(&cfg, &sc);
    for p in &exact.pieces {
        let what = match p.state {
            PieceState::Edge { edge, slope, .. } => format!("edge {edge}, slope {slope:+.4}"),
            PieceState::Inside => "inside".into(),
            PieceState::Empty => "nothing in range".into(),
        };
        println!(
            "  [{:8.3}, {:8.3}] {what:<24} {:?} -> {:?}",
            p.t_start, p.t_end, p.start_event, p.end_event
        );
    }

    println!("\n     t   sampled     exact");
    for s in samples.iter().filter(|s| s.r.is_some()).step_by(5) {
        println!(
            "{:6.0} {:9.3} {:9.3}",
            s.t,
            s.r.unwrap(),
            exact.reading_at(s.t).unwrap_or(f64::NAN)
        );
    }
}
