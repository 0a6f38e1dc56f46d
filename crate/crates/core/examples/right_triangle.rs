//! End-to-end estimation of the right triangle with edges 50, 50√3 and 100,
//! without and with measurement noise, over several seeds.

use rangeshape::geometry::{Point, PolygonTarget};
use rangeshape::pipeline::{run_pipeline, PipelineConfig};
use rangeshape::sim::Scenario;

fn main() -> rangeshape::Result<()> {
    let tri = PolygonTarget::from_vertices(&[
        Point::new(0.0, 0.0),
        Point::new(50.0 * 3f64.sqrt(), 0.0),
        Point::new(0.0, 50.0),
    ])?
    .centered();
    let cfg = PipelineConfig::default();

    for (eps_s, eps_l) in [(0.0, 0.0), (0.03, 0.002)] {
        println!("slope noise {eps_s}, report loss {eps_l}");
        for seed in 1..=5 {
            let mut sc = Scenario::with_polygon(tri.clone());
            sc.seed = seed;
            sc.epsilon_s = eps_s;
            sc.epsilon_l = eps_l;
            let run = run_pipeline(&sc, &cfg)?;
            let r = &run.report;
            let lengths: Vec<String> = r.lambda_hats().iter().map(|l| format!("{l:.2}")).collect();
            let angles: Vec<String> = r
                .gamma_hats()
                .iter()
                .map(|g| format!("{:.1}°", g.to_degrees()))
                .collect();
            println!(
                "  seed {seed}: {} whole edges, lengths [{}], angles [{}], shape {}",
                run.observations.edges.len(),
                lengths.join(", "),
                angles.join(", "),
                if r.shapes.is_empty() { "none" } else { "found" }
            );
        }
    }
    Ok(())
}
