//! Monte Carlo detection frequencies for isolated edges and corners.
//!
//! Sensors are drawn exactly as in the simulator and traced analytically
//! against a bare set of segments, so the frequencies can be compared with
//! the closed-form probabilities in [`crate::prob`].

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DirectedEdge, Point};
use crate::prob::ArenaParams;
use crate::sim::{
    analytic_trace_scene, place_in_window, sample_line, sensor_rng, AnalyticTrace, LineMode, SensorConfig,
    StreamPurpose,
};
use crate::trace::Event;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSetup {
    pub omega_radius: f64,
    pub r_max: f64,
    pub mode: LineMode,
    pub samples: usize,
    pub seed: u64,
}

impl McSetup {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            omega_radius: 200.0,
            r_max: 100.0,
            mode: LineMode::MonitorOmega,
            samples,
            seed,
        }
    }

    pub fn arena(&self) -> ArenaParams {
        ArenaParams::disk(self.omega_radius, self.r_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub hits: usize,
    pub samples: usize,
}

impl McEstimate {
    pub fn fraction(&self) -> f64 {
        self.hits as f64 / self.samples as f64
    }

    /// Binomial standard deviation of the fraction when the true
    /// probability is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// Deviation from `p` in units of [`Self::sigma_at`].
    pub fn z(&self, p: f64) -> f64 {
        let s = self.sigma_at(p);
        if s > 0.0 {
            (self.fraction() - p) / s
        } else if self.fraction() == p {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Fraction of sensors looking at `theta` whose exact trace against `edges`
/// satisfies `hit`.
pub fn mc_fraction<F>(setup: &McSetup, theta: f64, edges: &[DirectedEdge], hit: F) -> Result<McEstimate>
where
    F: Fn(&SensorConfig, &AnalyticTrace) -> bool + Sync,
{
    if setup.samples == 0 {
        return Err(Error::Config("Monte Carlo needs at least one sample".into()));
    }
    let window = setup.omega_radius + setup.r_max;
    let hits = (0..setup.samples as u32)
        .into_par_iter()
        .filter(|&id| {
            let mut rng = sensor_rng(setup.seed, StreamPurpose::Line, id);
            let (phi, offset) = sample_line(&mut rng, setup.mode, setup.omega_radius, setup.r_max, theta);
            let sensor = place_in_window(id, theta, 1.0, phi, offset, window);
            hit(&sensor, &analytic_trace_scene(&sensor, edges, None, setup.r_max))
        })
        .count();
    Ok(McEstimate {
        hits,
        samples: setup.samples,
    })
}

fn whole(trace: &AnalyticTrace, edge: usize) -> bool {
    trace.pieces.iter().any(|p| p.edge() == Some(edge) && p.is_whole_edge())
}

fn corner(trace: &AnalyticTrace, a: usize, b: usize) -> bool {
    trace.pieces.windows(2).any(|w| {
        let pair = (w[0].edge(), w[1].edge());
        w[0].end_event == Some(Event::SlopeChange) && (pair == (Some(a), Some(b)) || pair == (Some(b), Some(a)))
    })
}

/// Single edge of length `lambda` centred at the origin.
pub fn single_edge(lambda: f64) -> Vec<DirectedEdge> {
    vec![DirectedEdge::new(
        Point::new(-lambda / 2.0, 0.0),
        Point::new(lambda / 2.0, 0.0),
    )]
}

/// Two edges of length `arm` meeting at the origin with inner angle `gamma`.
pub fn corner_chain(gamma: f64, arm: f64) -> Vec<DirectedEdge> {
    let o = Point::new(0.0, 0.0);
    vec![
        DirectedEdge::new(Point::new(-arm, 0.0), o),
        DirectedEdge::new(o, Point::unit(PI - gamma) * arm),
    ]
}

/// An edge of length `lambda` along +x preceded by an edge of length `arm`
/// that meets its tail at the concave inner angle `π + delta_xi`.
pub fn concave_chain(lambda: f64, delta_xi: f64, arm: f64) -> Vec<DirectedEdge> {
    let tail = Point::new(-lambda / 2.0, 0.0);
    vec![
        DirectedEdge::new(tail - Point::unit(delta_xi) * arm, tail),
        DirectedEdge::new(tail, Point::new(lambda / 2.0, 0.0)),
    ]
}

/// Whole-edge detection frequency of an isolated edge.
pub fn mc_edge(lambda: f64, theta: f64, setup: &McSetup) -> Result<McEstimate> {
    let edges = single_edge(lambda);
    mc_fraction(setup, theta, &edges, |s, t| s.faces(&edges[0]) && whole(t, 0))
}

/// Detection frequency of a corner with inner angle `gamma`.
pub fn mc_vertex(gamma: f64, theta: f64, setup: &McSetup) -> Result<McEstimate> {
    let arm = 0.75 * setup.omega_radius;
    let edges = corner_chain(gamma, arm);
    mc_fraction(setup, theta, &edges, |s, t| {
        s.faces(&edges[0]) && s.faces(&edges[1]) && corner(t, 0, 1)
    })
}

/// Whole-edge detection frequency of an edge whose tail sits at a concave
/// vertex, blocked only by the preceding edge.
pub fn mc_edge_concave(lambda: f64, theta: f64, delta_xi: f64, setup: &McSetup) -> Result<McEstimate> {
    let arm = 2.0 * setup.r_max;
    let edges = concave_chain(lambda, delta_xi, arm);
    mc_fraction(setup, theta, &edges, |s, t| s.faces(&edges[1]) && whole(t, 1))
}
