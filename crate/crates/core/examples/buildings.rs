//! Two building footprints: a convex pentagon and a concave octagon whose
//! reflex corners hide part of the long walls. The concave correction
//! restores the edge counts lost to that blocking.

use std::f64::consts::PI;

use rangeshape::geometry::{Point, PolygonTarget};
use rangeshape::pipeline::{run_pipeline, PipelineConfig};
use rangeshape::sim::Scenario;

fn show(name: &str, poly: PolygonTarget, cfg: &PipelineConfig) -> rangeshape::Result<()> {
    let sc = Scenario::with_polygon(poly.centered());
    let run = run_pipeline(&sc, cfg)?;
    println!("==== {name}\n{}", run.report.to_text());
    Ok(())
}

fn main() -> rangeshape::Result<()> {
    let diag = 75.0 * 2f64.sqrt();
    let pentagon = PolygonTarget::from_turtle(&[
        (100.0, PI / 2.0),
        (25.0, 0.75 * PI),
        (diag, 0.75 * PI),
        (25.0, PI / 2.0),
        (100.0, PI / 2.0),
    ])?;
    let octagon = PolygonTarget::from_vertices(
        &[
            (0.0, 0.0),
            (50.0, 0.0),
            (50.0, 30.0),
            (100.0, 30.0),
            (100.0, 80.0),
            (50.0, 80.0),
            (50.0, 50.0),
            (0.0, 50.0),
        ]
        .map(|(x, y)| Point::new(x, y)),
    )?;

    let cfg = PipelineConfig::default();
    show("pentagon", pentagon, &cfg)?;
    show("octagon", octagon.clone(), &cfg)?;

    let mut plain = cfg;
    plain.estimator.concave_correction = false;
    show("octagon, no concave correction", octagon, &plain)?;
    Ok(())
}
