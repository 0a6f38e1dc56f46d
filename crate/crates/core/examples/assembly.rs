//! Closure of edge/angle sequences and the search for a closed arrangement
//! from estimated classes.

use std::f64::consts::FRAC_PI_2;

use rangeshape::assembly::{assemble, closure_check, AssemblyConfig};
use rangeshape::geometry::{Point, PolygonTarget};
use rangeshape::pipeline::{run_pipeline, PipelineConfig};
use rangeshape::sim::Scenario;

fn main() -> rangeshape::Result<()> {
    let square = [(1.0, FRAC_PI_2); 4];
    let (c, a) = closure_check(&square);
    println!("unit square: closure {c:.2e}, angle residual {a:.2e}");
    let (c, a) = closure_check(&square[..3]);
    println!("three sides of it: closure {c:.3}, angle residual {a:.3}");

    let lshape = PolygonTarget::from_vertices(
        &[
            (0.0, 0.0),
            (80.0, 0.0),
            (80.0, 30.0),
            (30.0, 30.0),
            (30.0, 70.0),
            (0.0, 70.0),
        ]
        .map(|(x, y)| Point::new(x, y)),
    )?
    .centered();
    let run = run_pipeline(&Scenario::with_polygon(lshape), &PipelineConfig::default())?;
    let r = &run.report;
    println!(
        "\nL-shaped target, {} length and {} angle classes",
        r.length_classes.len(),
        r.angle_classes.len()
    );

    for joints in 0..=2 {
        let cfg = AssemblyConfig {
            max_unbacked_joints: joints,
            ..Default::default()
        };
        match assemble(
            &r.length_classes,
            &r.angle_classes,
            &r.vertex_hypotheses,
            &r.adjacency,
            &cfg,
        ) {
            Ok(shapes) => {
                println!("up to {joints} unbacked joint(s): {} arrangement(s)", shapes.len());
                for s in shapes.iter().take(3) {
                    let seq: Vec<String> = s
                        .sequence()
                        .iter()
                        .map(|(l, g)| format!("{l:.1}/{:.0}°", g.to_degrees()))
                        .collect();
                    println!(
                        "  support {:5} closure {:.3}: {}",
                        s.support,
                        s.closure_residual,
                        seq.join(" ")
                    );
                }
            }
            Err(e) => println!("up to {joints} unbacked joint(s): {e}"),
        }
    }
    Ok(())
}
