//! One-dimensional mixture clustering with BIC model selection, on linear
//! and on circular data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rangeshape::cluster::{circular_mean, cluster_1d, cluster_circular, ClusterConfig};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut values = Vec::new();
    for (mean, sd, n) in [(25.0, 0.6, 80), (50.0, 0.8, 150), (100.0, 1.5, 60)] {
        let d = Normal::new(mean, sd).unwrap();
        values.extend((0..n).map(|_| d.sample(&mut rng)));
    }
    let cfg = ClusterConfig::default();
    let c = cluster_1d(&values, &cfg);
    println!(
        "{} values -> {} classes ({} mixture components)",
        values.len(),
        c.k(),
        c.components
    );
    for (m, n) in c.means.iter().zip(&c.sizes) {
        println!("  mean {m:8.3}  members {n}");
    }

    // angles near 0 and 2π belong together
    let d = Normal::new(0.0_f64, 0.05).unwrap();
    let tau = std::f64::consts::TAU;
    let angles: Vec<f64> = (0..100).map(|_| d.sample(&mut rng).rem_euclid(tau)).collect();
    let c = cluster_circular(&angles, &cfg);
    println!(
        "\nwrapped angles -> {} class(es), circular mean {:.4}",
        c.k(),
        circular_mean(&angles)
    );
}
