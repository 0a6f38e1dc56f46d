//! Closed-form detection probabilities against a Monte Carlo run of the
//! sensor process, plus the q_d(θ) curve.
//!
//!     cargo run --release --example detection_probability -- 50000

use std::f64::consts::{FRAC_PI_2, PI};

use rangeshape::mc::{mc_edge, mc_edge_concave, mc_vertex, McSetup};
use rangeshape::prob::{q_d_edge, q_d_edge_concave, q_d_vertex};

fn main() -> rangeshape::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let setup = McSetup::new(samples, 11);
    let arena = setup.arena();

    println!("{samples} sensors per row, R = 200, r_max = 100\n");
    println!("{:<28} {:>10} {:>10} {:>7}", "", "formula", "simulated", "z");
    let row = |name: &str, q: f64, est: rangeshape::mc::McEstimate| {
        println!("{name:<28} {q:>10.6} {:>10.6} {:>7.2}", est.fraction(), est.z(q));
    };
    for lambda in [100.0, 50.0] {
        row(
            &format!("edge {lambda}"),
            q_d_edge(lambda, FRAC_PI_2, &arena),
            mc_edge(lambda, FRAC_PI_2, &setup)?,
        );
    }
    for gamma in [FRAC_PI_2, 1.5 * PI] {
        row(
            &format!("vertex {gamma:.4}"),
            q_d_vertex(gamma, FRAC_PI_2, &arena)?,
            mc_vertex(gamma, FRAC_PI_2, &setup)?,
        );
    }
    row(
        "edge 50 after reflex pi/2",
        q_d_edge_concave(50.0, FRAC_PI_2, FRAC_PI_2, &arena),
        mc_edge_concave(50.0, FRAC_PI_2, FRAC_PI_2, &setup)?,
    );

    println!("\ntheta    q_d(edge 50)");
    for k in 0..=12 {
        let t = k as f64 * PI / 12.0;
        let q = q_d_edge(50.0, t, &arena);
        println!("{t:5.3}  {q:.5} {}", "#".repeat((q * 600.0) as usize));
    }
    Ok(())
}
