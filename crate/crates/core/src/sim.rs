//! Ground-truth trace generation.
//!
//! Each sensor drives at constant speed along a random directed line and
//! ray-casts the hidden polygon once per report period. Besides the sampled
//! traces, [`analytic_trace`] describes `r(t)` exactly as a sequence of
//! linear pieces and is the reference the sampled pipeline is checked
//! against.
//!
//! Randomness comes from one master seed. Every sensor gets its own ChaCha
//! stream per purpose, so sensor `i` produces the same trace whatever `n_s`
//! is and however the work is scheduled.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ray_cast, DirectedEdge, Point, PolygonTarget};
use crate::trace::{Event, KnownParams, KnownSensor, TraceSample};

/// How random sensor lines are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LineMode {
    /// Lines that intersect the disk Ω.
    ThroughOmega,
    /// Lines from which the sensing strip can reach Ω. Matches the measure
    /// `2|∂Ω| + 2π r_max |sin θ|` used by the detection probabilities.
    #[default]
    MonitorOmega,
}

/// Purposes that get independent random streams.
#[derive(Clone, Copy, Debug)]
pub enum StreamPurpose {
    Line,
    Loss,
    SlopeNoise,
}

impl StreamPurpose {
    fn salt(self) -> u64 {
        match self {
            StreamPurpose::Line => 0x6c69_6e65_0000_0001,
            StreamPurpose::Loss => 0x6c6f_7373_0000_0002,
            StreamPurpose::SlopeNoise => 0x6e6f_6973_0000_0003,
        }
    }
}

/// Deterministic per-sensor random stream.
pub fn sensor_rng(seed: u64, purpose: StreamPurpose, sensor_id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.salt());
    rng.set_stream(sensor_id as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Radius of the disk Ω centred at the origin.
    pub omega_radius: f64,
    pub r_max: f64,
    pub n_s: usize,
    pub polygon: PolygonTarget,
    pub report_period: f64,
    /// Optional cap on the traversal time; `None` traverses the full window.
    pub duration: Option<f64>,
    /// Standard deviation of the slope noise, applied during analysis.
    pub epsilon_s: f64,
    /// Probability that a report is lost.
    pub epsilon_l: f64,
    pub seed: u64,
    pub line_mode: LineMode,
    /// Sensing directions, assigned to sensors cyclically.
    pub thetas: Vec<f64>,
    /// Speed shared by all sensors.
    pub speed: f64,
}

impl Scenario {
    /// Defaults used throughout the numerical experiments: Ω of radius 200,
    /// `r_max = 100`, 2000 sensors looking sideways at unit speed, one report
    /// per time unit.
    pub fn with_polygon(polygon: PolygonTarget) -> Self {
        Self {
            omega_radius: 200.0,
            r_max: 100.0,
            n_s: 2000,
            polygon,
            report_period: 1.0,
            duration: None,
            epsilon_s: 0.0,
            epsilon_l: 0.0,
            seed: 1,
            line_mode: LineMode::MonitorOmega,
            thetas: vec![PI / 2.0],
            speed: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidScenario(m.to_string()));
        if !(self.omega_radius > 0.0) {
            return bad("omega_radius must be positive");
        }
        if !(self.r_max > 0.0) {
            return bad("r_max must be positive");
        }
        if !(self.report_period > 0.0) {
            return bad("report_period must be positive");
        }
        if !(self.speed > 0.0) {
            return bad("speed must be positive");
        }
        if !(self.epsilon_s >= 0.0) {
            return bad("epsilon_s must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.epsilon_l) {
            return bad("epsilon_l must lie in [0, 1]");
        }
        if self.thetas.is_empty() || self.thetas.iter().any(|t| !t.is_finite()) {
            return bad("theta list must be nonempty and finite");
        }
        if let Some(d) = self.duration {
            if !(d > 0.0) {
                return bad("duration must be positive");
            }
        }
        if self.polygon.max_radius() > self.omega_radius {
            return Err(Error::InvalidScenario(format!(
                "polygon reaches radius {:.3}, outside omega (radius {})",
                self.polygon.max_radius(),
                self.omega_radius
            )));
        }
        Ok(())
    }

    pub fn theta_for(&self, sensor_id: u32) -> f64 {
        self.thetas[sensor_id as usize % self.thetas.len()]
    }

    pub fn omega_perimeter(&self) -> f64 {
        TAU * self.omega_radius
    }

    /// Radius of the disk that contains every position from which the beam
    /// can reach Ω.
    pub fn window_radius(&self) -> f64 {
        self.omega_radius + self.r_max
    }

    /// The estimator-visible subset of the scenario.
    pub fn known_params(&self) -> KnownParams {
        KnownParams {
            r_max: self.r_max,
            omega_perimeter: self.omega_perimeter(),
            report_period: self.report_period,
            sensors: (0..self.n_s as u32)
                .map(|id| KnownSensor {
                    id,
                    theta: self.theta_for(id),
                    v: self.speed,
                })
                .collect(),
        }
    }
}

/// A sensor's full (partly hidden) configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub id: u32,
    /// Known: sensing direction relative to the motion.
    pub theta: f64,
    /// Known: speed.
    pub v: f64,
    /// Hidden: heading.
    pub phi: f64,
    /// Hidden: signed offset of the line along its left normal.
    pub offset: f64,
    /// Hidden: position at `t = 0`.
    pub start: Point,
    /// Time needed to cross the sampling window.
    pub duration: f64,
}

impl SensorConfig {
    pub fn direction(&self) -> Point {
        Point::unit(self.phi)
    }

    pub fn beam_direction(&self) -> f64 {
        self.phi + self.theta
    }

    pub fn position(&self, t: f64) -> Point {
        self.start + self.direction() * (self.v * t)
    }

    /// Whether the beam meets `edge` from its exterior (right-hand) side.
    pub fn faces(&self, edge: &DirectedEdge) -> bool {
        Point::unit(self.beam_direction()).cross(edge.vector()) < 0.0
    }

    /// Report epochs `k * period` inside `[0, duration]`.
    pub fn epochs(&self, period: f64) -> impl Iterator<Item = f64> {
        let n = (self.duration / period + 1e-9).floor() as u64;
        (0..=n).map(move |k| k as f64 * period)
    }
}

/// Draw a random directed line: heading uniform on `[0, 2π)` and an offset
/// uniform over the band of lines admitted by `mode`.
pub fn sample_line<R: Rng + ?Sized>(
    rng: &mut R,
    mode: LineMode,
    omega_radius: f64,
    r_max: f64,
    theta: f64,
) -> (f64, f64) {
    let phi = rng.random::<f64>() * TAU;
    let (lo, hi) = offset_band(mode, omega_radius, r_max, theta);
    let offset = lo + rng.random::<f64>() * (hi - lo);
    (phi, offset)
}

/// Offsets (along the line's left normal) admitted by `mode`.
pub fn offset_band(mode: LineMode, omega_radius: f64, r_max: f64, theta: f64) -> (f64, f64) {
    match mode {
        LineMode::ThroughOmega => (-omega_radius, omega_radius),
        LineMode::MonitorOmega => {
            // the strip swept by the beam sits on the side the sensor faces
            let reach = r_max * theta.sin();
            if reach >= 0.0 {
                (-omega_radius - reach, omega_radius)
            } else {
                (-omega_radius, omega_radius - reach)
            }
        }
    }
}

/// Place a sensor on the line `(phi, offset)` at its entry into the sampling
/// window and size its run to cross the window.
pub fn place_sensor(id: u32, theta: f64, v: f64, phi: f64, offset: f64, scenario: &Scenario) -> SensorConfig {
    let mut s = place_in_window(id, theta, v, phi, offset, scenario.window_radius());
    if let Some(d) = scenario.duration {
        s.duration = s.duration.min(d);
    }
    s
}

/// Place a sensor on the line `(phi, offset)` at its entry into the disk of
/// radius `window` about the origin, running until it leaves.
pub fn place_in_window(id: u32, theta: f64, v: f64, phi: f64, offset: f64, window: f64) -> SensorConfig {
    let u = Point::unit(phi);
    let n = Point::new(-u.y, u.x);
    let half = (window * window - offset * offset).max(0.0).sqrt();
    SensorConfig {
        id,
        theta,
        v,
        phi,
        offset,
        start: n * offset - u * half,
        duration: 2.0 * half / v,
    }
}

/// Hidden configuration of sensor `id` in `scenario`.
pub fn sensor_config(scenario: &Scenario, id: u32) -> SensorConfig {
    let theta = scenario.theta_for(id);
    let mut rng = sensor_rng(scenario.seed, StreamPurpose::Line, id);
    let (phi, offset) = sample_line(
        &mut rng,
        scenario.line_mode,
        scenario.omega_radius,
        scenario.r_max,
        theta,
    );
    place_sensor(id, theta, scenario.speed, phi, offset, scenario)
}

/// Sampled trace of one sensor. Each report is dropped independently with
/// probability `epsilon_l`, drawing from `rng`.
pub fn simulate_trace<R: Rng + ?Sized>(sensor: &SensorConfig, scenario: &Scenario, rng: &mut R) -> Vec<TraceSample> {
    let beam = sensor.beam_direction();
    let mut out = Vec::new();
    for t in sensor.epochs(scenario.report_period) {
        let lost = rng.random::<f64>() < scenario.epsilon_l;
        if lost {
            continue;
        }
        let r = ray_cast(sensor.position(t), beam, &scenario.polygon).filter(|&d| d <= scenario.r_max);
        out.push(TraceSample {
            sensor_id: sensor.id,
            t,
            r,
        });
    }
    out
}

/// Configuration and sampled trace of sensor `id`.
pub fn simulate_sensor(scenario: &Scenario, id: u32) -> (SensorConfig, Vec<TraceSample>) {
    let sensor = sensor_config(scenario, id);
    let mut rng = sensor_rng(scenario.seed, StreamPurpose::Loss, id);
    let trace = simulate_trace(&sensor, scenario, &mut rng);
    (sensor, trace)
}

/// All traces, ordered by sensor id. Runs on the current rayon pool.
pub fn simulate_all(scenario: &Scenario) -> Vec<Vec<TraceSample>> {
    (0..scenario.n_s as u32)
        .into_par_iter()
        .map(|id| simulate_sensor(scenario, id).1)
        .collect()
}

/// State of the exact trace on one time interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PieceState {
    /// The beam hits `edge`; `r(t) = intercept + slope * t`.
    Edge { edge: usize, intercept: f64, slope: f64 },
    /// The sensor is inside the target, `r = 0`.
    Inside,
    /// Nothing within range.
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPiece {
    pub t_start: f64,
    pub t_end: f64,
    pub state: PieceState,
    /// Bounding events, set for `Edge` pieces only.
    pub start_event: Option<Event>,
    pub end_event: Option<Event>,
}

impl AnalyticPiece {
    pub fn value_at(&self, t: f64) -> Option<f64> {
        match self.state {
            PieceState::Edge { intercept, slope, .. } => Some(intercept + slope * t),
            PieceState::Inside => Some(0.0),
            PieceState::Empty => None,
        }
    }

    pub fn edge(&self) -> Option<usize> {
        match self.state {
            PieceState::Edge { edge, .. } => Some(edge),
            _ => None,
        }
    }

    /// Whether this piece sees one edge from end to end.
    pub fn is_whole_edge(&self) -> bool {
        self.edge().is_some()
            && self.start_event.is_some_and(Event::qualifies_start)
            && self.end_event.is_some_and(Event::qualifies_end)
    }
}

/// Exact continuous-time description of `r(t)` for one sensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTrace {
    pub sensor_id: u32,
    pub duration: f64,
    pub pieces: Vec<AnalyticPiece>,
}

impl AnalyticTrace {
    /// Reading at `t` with the range cutoff applied; `None` is NO DETECTION.
    pub fn reading_at(&self, t: f64) -> Option<f64> {
        let i = self.pieces.partition_point(|p| p.t_end < t);
        self.pieces.get(i).and_then(|p| p.value_at(t))
    }

    /// Interior piece boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.t_start).collect()
    }

    pub fn edge_pieces(&self) -> impl Iterator<Item = (usize, &AnalyticPiece)> {
        self.pieces.iter().enumerate().filter(|(_, p)| p.edge().is_some())
    }
}

/// Exact trace of `sensor` against the scenario polygon.
pub fn analytic_trace(sensor: &SensorConfig, scenario: &Scenario) -> AnalyticTrace {
    analytic_trace_scene(
        sensor,
        scenario.polygon.edges(),
        Some(&scenario.polygon),
        scenario.r_max,
    )
}

struct EdgeTrack {
    s0: f64,
    s1: f64,
    a0: f64,
    a1: f64,
}

impl EdgeTrack {
    fn valid_at(&self, t: f64) -> Option<f64> {
        let a = self.a0 + self.a1 * t;
        let s = self.s0 + self.s1 * t;
        ((0.0..=1.0).contains(&a) && s >= 0.0).then_some(s)
    }
}

/// Exact trace against an arbitrary set of opaque segments. `interior`
/// supplies the closed region whose inside reads 0; pass `None` for an open
/// chain of segments, which then block from both sides (see
/// [`SensorConfig::faces`]).
pub fn analytic_trace_scene(
    sensor: &SensorConfig,
    edges: &[DirectedEdge],
    interior: Option<&PolygonTarget>,
    r_max: f64,
) -> AnalyticTrace {
    let u = sensor.direction();
    let b = Point::unit(sensor.beam_direction());
    let v = sensor.v;
    let dur = sensor.duration;

    let mut cuts = vec![0.0, dur];
    let mut push = |t: f64| {
        if t.is_finite() && t > 0.0 && t < dur {
            cuts.push(t);
        }
    };
    let mut tracks: Vec<Option<EdgeTrack>> = Vec::with_capacity(edges.len());
    for e in edges {
        let ev = e.vector();
        let q = e.tail - sensor.start;
        let d = b.cross(ev);
        // crossing of the path itself with the edge
        let ue = u.cross(ev);
        if ue.abs() > 1e-15 * e.lambda {
            let t = q.cross(ev) / (v * ue);
            let c = q.cross(u) / ue;
            if (-1e-12..=1.0 + 1e-12).contains(&c) {
                push(t);
            }
        }
        if d.abs() < 1e-15 * e.lambda {
            tracks.push(None);
            continue;
        }
        let tr = EdgeTrack {
            s0: q.cross(ev) / d,
            s1: -v * u.cross(ev) / d,
            a0: q.cross(b) / d,
            a1: -v * u.cross(b) / d,
        };
        if tr.a1 != 0.0 {
            push(-tr.a0 / tr.a1);
            push((1.0 - tr.a0) / tr.a1);
        }
        if tr.s1 != 0.0 {
            push(-tr.s0 / tr.s1);
            push((r_max - tr.s0) / tr.s1);
        }
        tracks.push(Some(tr));
    }
    cuts.sort_by(f64::total_cmp);
    let eps = 1e-12 * (1.0 + dur);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= eps);

    let state_at = |t: f64| -> PieceState {
        if interior.is_some_and(|poly| poly.contains(sensor.position(t))) {
            return PieceState::Inside;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, tr) in tracks.iter().enumerate() {
            if let Some(s) = tr.as_ref().and_then(|tr| tr.valid_at(t)) {
                if best.is_none_or(|(_, bs)| s < bs) {
                    best = Some((j, s));
                }
            }
        }
        match best {
            Some((j, s)) if s <= r_max => {
                let tr = tracks[j].as_ref().unwrap();
                PieceState::Edge {
                    edge: j,
                    intercept: tr.s0,
                    slope: tr.s1,
                }
            }
            _ => PieceState::Empty,
        }
    };

    let same = |a: &PieceState, b: &PieceState| match (a, b) {
        (PieceState::Edge { edge: x, .. }, PieceState::Edge { edge: y, .. }) => x == y,
        (PieceState::Inside, PieceState::Inside) | (PieceState::Empty, PieceState::Empty) => true,
        _ => false,
    };

    let mut pieces: Vec<AnalyticPiece> = Vec::new();
    for w in cuts.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        let st = state_at(0.5 * (ta + tb));
        match pieces.last_mut() {
            Some(last) if same(&last.state, &st) => last.t_end = tb,
            _ => pieces.push(AnalyticPiece {
                t_start: ta,
                t_end: tb,
                state: st,
                start_event: None,
                end_event: None,
            }),
        }
    }

    let tol = |r: f64| 1e-9 * (1.0 + r.abs());
    for i in 0..pieces.len() {
        let PieceState::Edge { .. } = pieces[i].state else {
            continue;
        };
        let p = pieces[i];
        let r_start = p.value_at(p.t_start).unwrap();
        let r_end = p.value_at(p.t_end).unwrap();
        let start = match i.checked_sub(1).map(|k| &pieces[k]) {
            None => Event::TraceEdge,
            // the path itself crosses the edge
            Some(_) if r_start <= tol(r_max) => Event::ZeroContact,
            Some(prev) => match prev.state {
                PieceState::Inside => Event::ZeroContact,
                PieceState::Empty if r_start < r_max - tol(r_max) => Event::FromEmptyBelowMax,
                PieceState::Empty => Event::RangeBoundary,
                PieceState::Edge { .. } => {
                    let before = prev.value_at(p.t_start).unwrap();
                    if (before - r_start).abs() <= tol(r_start) {
                        Event::SlopeChange
                    } else if r_start < before {
                        Event::JumpDown
                    } else {
                        Event::JumpUp
                    }
                }
            },
        };
        let end = match pieces.get(i + 1) {
            None => Event::TraceEdge,
            Some(_) if r_end <= tol(r_max) => Event::ZeroContact,
            Some(next) => match next.state {
                PieceState::Inside => Event::ZeroContact,
                PieceState::Empty if r_end < r_max - tol(r_max) => Event::ToEmptyBelowMax,
                PieceState::Empty => Event::RangeBoundary,
                PieceState::Edge { .. } => {
                    let after = next.value_at(p.t_end).unwrap();
                    if (after - r_end).abs() <= tol(r_end) {
                        Event::SlopeChange
                    } else if after < r_end {
                        Event::JumpDown
                    } else {
                        Event::JumpUp
                    }
                }
            },
        };
        pieces[i].start_event = Some(start);
        pieces[i].end_event = Some(end);
    }

    AnalyticTrace {
        sensor_id: sensor.id,
        duration: dur,
        pieces,
    }
}
