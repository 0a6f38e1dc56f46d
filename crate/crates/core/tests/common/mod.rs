#![allow(dead_code)]

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangeshape::estimator::{relative_direction, temp_length};
use rangeshape::geometry::{modone, DirectedEdge, Point};
use rangeshape::io::load_scenario;
use rangeshape::sim::{
    analytic_trace, analytic_trace_scene, place_in_window, sample_line, LineMode, PieceState, Scenario, SensorConfig,
};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"))
}

pub fn scenario(name: &str) -> Scenario {
    load_scenario(&scenario_path(name)).expect("bundled scenario loads")
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation.
pub fn sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn nearest(v: f64, set: &[f64]) -> usize {
    (0..set.len())
        .min_by(|&a, &b| (set[a] - v).abs().total_cmp(&(set[b] - v).abs()))
        .expect("nonempty set")
}

/// Largest relative length error and largest direction error (radians)
/// when whole-edge pieces of `n` random isolated edges are turned back
/// into lengths and relative directions.
pub fn edge_identity_errors(n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut len_err, mut dir_err) = (0.0_f64, 0.0_f64);
    let mut checked = 0;
    while checked < n {
        let lambda = rng.random_range(5.0..150.0);
        let xi = rng.random_range(0.0..TAU);
        let theta = if rng.random_bool(0.5) {
            rng.random_range(0.3..PI - 0.3)
        } else {
            rng.random_range(PI + 0.3..TAU - 0.3)
        };
        let v = rng.random_range(0.5..2.0);
        let r_max = 100.0;
        let half = Point::unit(xi) * (lambda / 2.0);
        let edge = DirectedEdge::new(Point::new(0.0, 0.0) - half, half);
        let (phi, offset) = sample_line(&mut rng, LineMode::MonitorOmega, 80.0, r_max, theta);
        let sensor = place_in_window(0, theta, v, phi, offset, 80.0 + r_max);
        if !sensor.faces(&edge) {
            continue;
        }
        let trace = analytic_trace_scene(&sensor, &[edge], None, r_max);
        if let Some(p) = trace.pieces.iter().find(|p| p.is_whole_edge()) {
            let PieceState::Edge { slope, .. } = p.state else {
                unreachable!()
            };
            let l = temp_length(p.t_end - p.t_start, slope, v, theta);
            len_err = len_err.max((l - lambda).abs() / lambda);
            let d = (relative_direction(slope, v, theta) - modone(xi - phi)).abs();
            dir_err = dir_err.max(d.min(TAU - d));
            checked += 1;
        }
    }
    (len_err, dir_err)
}

/// Readings of `sensor` at `n` fixed fractions of its run.
pub fn readings(sensor: &SensorConfig, sc: &Scenario, n: usize) -> Vec<Option<f64>> {
    let tr = analytic_trace(sensor, sc);
    (0..n)
        .map(|i| tr.reading_at(sensor.duration * (i as f64 + 0.37) / n as f64))
        .collect()
}

/// Whether `b` equals `a` scaled by `k`, reading by reading.
pub fn scaled_readings(a: &[Option<f64>], b: &[Option<f64>], k: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (None, None) => true,
        (Some(x), Some(y)) => (x * k - y).abs() <= 1e-7 * (1.0 + y.abs()),
        _ => false,
    })
}

/// Scene and sensor scaled by `k` about the origin.
pub fn scale_scene(sc: &Scenario, s: &SensorConfig, k: f64) -> (Scenario, SensorConfig) {
    let mut big = sc.clone();
    big.polygon = sc.polygon.transformed(k, 0.0, Point::default());
    big.r_max *= k;
    big.omega_radius *= k;
    (
        big,
        SensorConfig {
            start: s.start.scale(k),
            v: s.v * k,
            offset: s.offset * k,
            ..*s
        },
    )
}

/// Scene and sensor rotated by `a` about the origin.
pub fn rotate_scene(sc: &Scenario, s: &SensorConfig, a: f64) -> (Scenario, SensorConfig) {
    let mut rot = sc.clone();
    rot.polygon = sc.polygon.transformed(1.0, a, Point::default());
    (
        rot,
        SensorConfig {
            start: s.start.rotate(a),
            phi: s.phi + a,
            ..*s
        },
    )
}
