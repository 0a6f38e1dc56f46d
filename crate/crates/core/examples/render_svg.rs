//! Write the ground truth, the estimated shape and a q_d chart as SVG files.
//!
//!     cargo run --release --example render_svg -- /tmp/svg

use std::f64::consts::PI;
use std::path::PathBuf;

use rangeshape::geometry::{Point, PolygonTarget};
use rangeshape::pipeline::{run_pipeline, PipelineConfig};
use rangeshape::prob::{q_d_edge, ArenaParams};
use rangeshape::render::{chart_svg, polygon_svg, shape_svg, Series};
use rangeshape::sim::Scenario;

fn main() -> rangeshape::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("rangeshape_svg"), PathBuf::from);
    std::fs::create_dir_all(&dir)?;

    let truth = PolygonTarget::from_vertices(
        &[(0.0, 0.0), (70.0, 0.0), (70.0, 40.0), (35.0, 65.0), (0.0, 40.0)].map(|(x, y)| Point::new(x, y)),
    )?
    .centered();
    let run = run_pipeline(&Scenario::with_polygon(truth.clone()), &PipelineConfig::default())?;
    std::fs::write(dir.join("truth.svg"), polygon_svg(&truth, "house"))?;
    if let Some(best) = run.report.shapes.first() {
        std::fs::write(
            dir.join("estimate.svg"),
            shape_svg(best, Some(&truth), "estimate over truth"),
        )?;
    }

    let arena = ArenaParams::disk(200.0, 100.0);
    let curve = |lambda: f64| Series {
        name: format!("edge {lambda}"),
        points: (0..=64)
            .map(|k| {
                let t = k as f64 * PI / 64.0;
                (t, q_d_edge(lambda, t, &arena))
            })
            .collect(),
        markers: false,
    };
    let chart = chart_svg(
        "q_d against theta",
        "theta",
        "q_d",
        &[curve(25.0), curve(50.0), curve(100.0)],
    );
    std::fs::write(dir.join("qd.svg"), chart)?;
    println!("wrote SVG files to {}", dir.display());
    Ok(())
}
