//! Segmentation of sampled traces into linear pieces and extraction of the
//! observations used by the estimator.
//!
//! A trace is first cut into *runs*: maximal stretches of consecutive
//! positive readings. Inside a run, every sample whose two neighbouring
//! difference quotients agree is the centre of a collinear triple; maximal
//! chains of such centres form the pieces. Adjacent pieces either share a
//! sample or meet between two samples, where their fitted lines tell a
//! continuous slope change apart from a jump.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sim::{sensor_rng, AnalyticTrace, PieceState, StreamPurpose};
use crate::trace::{Event, KnownParams, TraceSample};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    /// Relative tolerance when comparing consecutive difference quotients.
    pub slope_tol: f64,
    /// Minimum number of samples in a piece.
    pub min_support: usize,
    /// A spacing above `gap_factor * Δt` means reports were lost.
    pub gap_factor: f64,
    /// Multiplier of the local step bound used to call a jump across
    /// discarded samples.
    pub jump_factor: f64,
    /// Treat a lost report as if the run continued.
    pub merge_lost_reports: bool,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            slope_tol: 1e-7,
            min_support: 3,
            gap_factor: 1.5,
            jump_factor: 3.0,
            merge_lost_reports: false,
        }
    }
}

/// A maximal linear piece of `r(t)` with `r > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub sensor_id: u32,
    pub t_s: f64,
    pub t_e: f64,
    /// Duration `t_e - t_s`.
    pub l_d: f64,
    /// Slope `dr/dt`.
    pub s_d: f64,
    /// `r` of the fitted line at `t = 0`.
    pub intercept: f64,
    pub start_event: Event,
    pub end_event: Event,
    /// Number of samples the fit used (0 for exact segments).
    pub n_samples: usize,
    /// Combined half-width of the uncertainty in `t_s` and `t_e`. Boundaries
    /// placed halfway between reports contribute half a report gap each.
    #[serde(default)]
    pub t_err: f64,
    /// The next segment starts exactly where this one ends, with no jump and
    /// no unresolved samples in between.
    pub continuous_with_next: bool,
}

impl Segment {
    pub fn is_whole_edge(&self) -> bool {
        self.start_event.qualifies_start() && self.end_event.qualifies_end()
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.intercept + self.s_d * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WholeEdgeObservation {
    pub sensor_id: u32,
    /// Index of the segment within its trace.
    pub k: usize,
    pub l_d: f64,
    pub s_d: f64,
    /// Uncertainty of `l_d` from boundary placement.
    #[serde(default)]
    pub l_err: f64,
}

/// Two consecutive segments joined continuously at a slope change.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexObservation {
    pub sensor_id: u32,
    /// Index of the first segment; the second is `k + 1`.
    pub k: usize,
    pub s_k: f64,
    pub s_k1: f64,
}

/// Two whole-edge observations of one sensor joined at a continuous
/// slope change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyObservation {
    pub sensor_id: u32,
    pub k: usize,
    pub k1: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Observation {
    Edge(WholeEdgeObservation),
    Vertex(VertexObservation),
    Adjacency(AdjacencyObservation),
}

/// Everything extracted from a set of traces, in sensor-id order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    pub edges: Vec<WholeEdgeObservation>,
    pub vertices: Vec<VertexObservation>,
    pub adjacency: Vec<AdjacencyObservation>,
}

impl Observations {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.vertices.is_empty() && self.adjacency.is_empty()
    }

    pub fn extend(&mut self, other: Observations) {
        self.edges.extend(other.edges);
        self.vertices.extend(other.vertices);
        self.adjacency.extend(other.adjacency);
    }

    /// Flat list ordered by sensor, then edges, vertices, adjacency.
    pub fn to_records(&self) -> Vec<Observation> {
        let mut out: Vec<(u32, u8, usize, Observation)> = Vec::new();
        out.extend(self.edges.iter().map(|o| (o.sensor_id, 0, o.k, Observation::Edge(*o))));
        out.extend(
            self.vertices
                .iter()
                .map(|o| (o.sensor_id, 1, o.k, Observation::Vertex(*o))),
        );
        out.extend(
            self.adjacency
                .iter()
                .map(|o| (o.sensor_id, 2, o.k, Observation::Adjacency(*o))),
        );
        out.sort_by_key(|&(s, kind, k, _)| (s, kind, k));
        out.into_iter().map(|x| x.3).collect()
    }

    pub fn from_records(records: impl IntoIterator<Item = Observation>) -> Self {
        let mut o = Observations::default();
        for r in records {
            match r {
                Observation::Edge(e) => o.edges.push(e),
                Observation::Vertex(v) => o.vertices.push(v),
                Observation::Adjacency(a) => o.adjacency.push(a),
            }
        }
        o
    }

    /// Whole-edge observation for segment `k` of `sensor_id`.
    pub fn edge(&self, sensor_id: u32, k: usize) -> Option<&WholeEdgeObservation> {
        self.edges
            .binary_search_by_key(&(sensor_id, k), |e| (e.sensor_id, e.k))
            .ok()
            .map(|i| &self.edges[i])
            .or_else(|| self.edges.iter().find(|e| e.sensor_id == sensor_id && e.k == k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Context {
    Empty,
    Zero,
    Missing,
}

struct Piece {
    first: usize,
    last: usize,
    intercept: f64,
    slope: f64,
}

fn fit(t: &[f64], r: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let rm = r.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&ti, &ri) in t.iter().zip(r) {
        sxy += (ti - tm) * (ri - rm);
        sxx += (ti - tm) * (ti - tm);
    }
    let slope = sxy / sxx;
    (rm - slope * tm, slope)
}

/// Event and time of a segment boundary, with the half-width of the
/// interval it is known to lie in.
#[derive(Clone, Copy)]
struct Cut {
    ev: Event,
    t: f64,
    err: f64,
}

impl Cut {
    fn exact(ev: Event, t: f64) -> Self {
        Cut { ev, t, err: 0.0 }
    }

    fn between(ev: Event, a: f64, b: f64) -> Self {
        Cut {
            ev,
            t: 0.5 * (a + b),
            err: 0.5 * (a - b).abs(),
        }
    }
}

/// Split one sensor's samples into linear segments.
///
/// `period` is the report period, `r_max` the sensing range and `v` the
/// sensor speed. Samples must be sorted by time.
pub fn segment_trace(
    samples: &[TraceSample],
    period: f64,
    r_max: f64,
    v: f64,
    cfg: &SegmentationConfig,
) -> Vec<Segment> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let sensor_id = first.sensor_id;
    let gap = if cfg.merge_lost_reports {
        f64::INFINITY
    } else {
        cfg.gap_factor * period
    };
    let positive = |s: &TraceSample| s.r.is_some_and(|r| r > 0.0);

    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        if !positive(&samples[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < samples.len() && positive(&samples[j + 1]) && samples[j + 1].t - samples[j].t <= gap {
            j += 1;
        }
        let context = |k: Option<usize>, other: usize| match k {
            Some(k) if (samples[other].t - samples[k].t).abs() <= gap => match samples[k].r {
                None => (Context::Empty, samples[k].t),
                Some(_) => (Context::Zero, samples[k].t),
            },
            _ => (Context::Missing, samples[other].t),
        };
        let before = context(i.checked_sub(1), i);
        let after = context((j + 1 < samples.len()).then_some(j + 1), j);
        let t: Vec<f64> = samples[i..=j].iter().map(|s| s.t).collect();
        let r: Vec<f64> = samples[i..=j].iter().map(|s| s.r.unwrap()).collect();
        segment_run(sensor_id, &t, &r, before, after, r_max, v, period, cfg, &mut out);
        i = j + 1;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn segment_run(
    sensor_id: u32,
    t: &[f64],
    r: &[f64],
    before: (Context, f64),
    after: (Context, f64),
    r_max: f64,
    v: f64,
    period: f64,
    cfg: &SegmentationConfig,
    out: &mut Vec<Segment>,
) {
    let n = t.len();
    let min_support = cfg.min_support.max(2);
    if n < min_support {
        return;
    }
    let m: Vec<f64> = (1..n).map(|k| (r[k] - r[k - 1]) / (t[k] - t[k - 1])).collect();
    // centre c (1..n-1) is collinear when m[c-1] ≈ m[c]
    let collinear = |c: usize| {
        let (a, b) = (m[c - 1], m[c]);
        (a - b).abs() <= cfg.slope_tol * (1.0 + a.abs() + b.abs())
    };
    let mut pieces: Vec<Piece> = Vec::new();
    let mut c = 1;
    while c + 1 < n {
        if !collinear(c) {
            c += 1;
            continue;
        }
        let c1 = c;
        while c + 1 < n - 1 && collinear(c + 1) {
            c += 1;
        }
        let (first, last) = (c1 - 1, c + 1);
        if last + 1 - first >= min_support {
            let (intercept, slope) = fit(&t[first..=last], &r[first..=last]);
            pieces.push(Piece {
                first,
                last,
                intercept,
                slope,
            });
        }
        c += 1;
    }
    if n == 2 && min_support <= 2 {
        let (intercept, slope) = fit(t, r);
        pieces.push(Piece {
            first: 0,
            last: 1,
            intercept,
            slope,
        });
    }
    if pieces.is_empty() {
        return;
    }

    let line = |p: &Piece, x: f64| p.intercept + p.slope * x;
    // slope through sample k on the side away from the piece at `toward`
    let far_slope = |k: usize, toward: usize| {
        if toward > k {
            if k > 0 {
                m[k - 1].abs()
            } else {
                0.0
            }
        } else if k + 1 < n {
            m[k].abs()
        } else {
            0.0
        }
    };

    // joints between consecutive pieces: (end of p, start of q, continuous)
    let mut joints: Vec<(Cut, Cut, bool)> = Vec::new();
    for w in pieces.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if q.first <= p.last {
            // shared sample: continuous corner
            let tc = if p.slope != q.slope {
                (q.intercept - p.intercept) / (p.slope - q.slope)
            } else {
                t[q.first]
            };
            let c = Cut::exact(Event::SlopeChange, tc);
            joints.push((c, c, true));
        } else if q.first == p.last + 1 {
            let (ta, tb) = (t[p.last], t[q.first]);
            let tc = (q.intercept - p.intercept) / (p.slope - q.slope);
            if tc.is_finite() && tc >= ta && tc <= tb {
                let c = Cut::exact(Event::SlopeChange, tc);
                joints.push((c, c, true));
            } else {
                let tm = 0.5 * (ta + tb);
                let ev = if line(q, tm) < line(p, tm) {
                    Event::JumpDown
                } else {
                    Event::JumpUp
                };
                let c = Cut::between(ev, ta, tb);
                joints.push((c, c, false));
            }
        } else {
            // unresolved samples in between: judge each side against its
            // nearest unexplained sample
            let judge = |piece: &Piece, k: usize, k_edge: usize| {
                let dt = (t[k] - t[k_edge]).abs();
                let dr = r[k] - line(piece, t[k]);
                let thr = cfg.jump_factor * dt.max(period) * (v + piece.slope.abs() + far_slope(k, k_edge));
                let ev = if dr.abs() <= thr {
                    Event::SlopeChange
                } else if dr < 0.0 {
                    Event::JumpDown
                } else {
                    Event::JumpUp
                };
                Cut::between(ev, t[k], t[k_edge])
            };
            let pc = judge(p, p.last + 1, p.last);
            let mut qc = judge(q, q.first - 1, q.first);
            // a drop seen from the far side is a rise from the near side
            qc.ev = match qc.ev {
                Event::JumpDown => Event::JumpUp,
                Event::JumpUp => Event::JumpDown,
                e => e,
            };
            joints.push((pc, qc, false));
        }
    }

    let boundary = |p: &Piece, at_start: bool| -> Cut {
        let (edge_k, ctx, t_ctx) = if at_start {
            (0usize, before.0, before.1)
        } else {
            (n - 1, after.0, after.1)
        };
        let own_k = if at_start { p.first } else { p.last };
        if own_k != edge_k {
            // discarded samples before the run edge
            let k = if at_start { own_k - 1 } else { own_k + 1 };
            let dt = (t[k] - t[own_k]).abs();
            let dr = r[k] - line(p, t[k]);
            let thr = cfg.jump_factor * dt.max(period) * (v + p.slope.abs() + far_slope(k, own_k));
            let ev = if dr.abs() <= thr {
                Event::SlopeChange
            } else if (dr < 0.0) == at_start {
                Event::JumpUp
            } else {
                Event::JumpDown
            };
            return Cut::between(ev, t[k], t[own_k]);
        }
        let t_own = t[own_k];
        match ctx {
            Context::Missing => Cut::exact(Event::TraceEdge, t_own),
            Context::Zero => {
                let tz = if p.slope != 0.0 { -p.intercept / p.slope } else { t_own };
                let (lo, hi) = if t_ctx < t_own { (t_ctx, t_own) } else { (t_own, t_ctx) };
                Cut::exact(Event::ZeroContact, tz.clamp(lo, hi))
            }
            Context::Empty if line(p, t_ctx) <= 0.0 => {
                // the path crossed an edge with nothing behind it
                let tz = -p.intercept / p.slope;
                let (lo, hi) = if t_ctx < t_own { (t_ctx, t_own) } else { (t_own, t_ctx) };
                Cut::exact(Event::ZeroContact, tz.clamp(lo, hi))
            }
            Context::Empty => {
                let ev = if line(p, t_ctx) > r_max {
                    Event::RangeBoundary
                } else if at_start {
                    Event::FromEmptyBelowMax
                } else {
                    Event::ToEmptyBelowMax
                };
                Cut::between(ev, t_ctx, t_own)
            }
        }
    };

    let last = pieces.len() - 1;
    for (idx, p) in pieces.iter().enumerate() {
        let start = if idx == 0 { boundary(p, true) } else { joints[idx - 1].1 };
        let (end, cont) = if idx == last {
            (boundary(p, false), false)
        } else {
            (joints[idx].0, joints[idx].2)
        };
        out.push(Segment {
            sensor_id,
            t_s: start.t,
            t_e: end.t,
            l_d: end.t - start.t,
            s_d: p.slope,
            intercept: p.intercept,
            start_event: start.ev,
            end_event: end.ev,
            n_samples: p.last + 1 - p.first,
            t_err: start.err + end.err,
            continuous_with_next: cont,
        });
    }
}

/// Exact segments of an analytic trace: one per edge piece.
pub fn segments_from_analytic(trace: &AnalyticTrace) -> Vec<Segment> {
    let mut out = Vec::new();
    for (i, p) in trace.pieces.iter().enumerate() {
        let PieceState::Edge { intercept, slope, .. } = p.state else {
            continue;
        };
        let end_event = p.end_event.unwrap_or(Event::TraceEdge);
        let next_is_edge = trace
            .pieces
            .get(i + 1)
            .is_some_and(|q| matches!(q.state, PieceState::Edge { .. }));
        out.push(Segment {
            sensor_id: trace.sensor_id,
            t_s: p.t_start,
            t_e: p.t_end,
            l_d: p.t_end - p.t_start,
            s_d: slope,
            intercept,
            start_event: p.start_event.unwrap_or(Event::TraceEdge),
            end_event,
            n_samples: 0,
            t_err: 0.0,
            continuous_with_next: next_is_edge && end_event == Event::SlopeChange,
        });
    }
    out
}

pub fn extract_whole_edge_observations(segments: &[Segment]) -> Vec<WholeEdgeObservation> {
    segments
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_whole_edge())
        .map(|(k, s)| WholeEdgeObservation {
            sensor_id: s.sensor_id,
            k,
            l_d: s.l_d,
            s_d: s.s_d,
            l_err: s.t_err,
        })
        .collect()
}

pub fn extract_vertex_observations(segments: &[Segment]) -> Vec<VertexObservation> {
    segments
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].continuous_with_next && w[0].s_d != w[1].s_d)
        .map(|(k, w)| VertexObservation {
            sensor_id: w[0].sensor_id,
            k,
            s_k: w[0].s_d,
            s_k1: w[1].s_d,
        })
        .collect()
}

pub fn extract_adjacency_observations(segments: &[Segment]) -> Vec<AdjacencyObservation> {
    segments
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].continuous_with_next && w[0].is_whole_edge() && w[1].is_whole_edge())
        .map(|(k, w)| AdjacencyObservation {
            sensor_id: w[0].sensor_id,
            k,
            k1: k + 1,
        })
        .collect()
}

/// All three observation kinds from one trace's segments.
pub fn extract_observations(segments: &[Segment]) -> Observations {
    Observations {
        edges: extract_whole_edge_observations(segments),
        vertices: extract_vertex_observations(segments),
        adjacency: extract_adjacency_observations(segments),
    }
}

/// `tan(atan(s) + N(0, ε))`.
pub fn apply_slope_noise<R: Rng + ?Sized>(s_d: f64, epsilon_s: f64, rng: &mut R) -> f64 {
    if epsilon_s == 0.0 {
        return s_d;
    }
    let n = Normal::new(0.0, epsilon_s).expect("finite noise level");
    (s_d.atan() + n.sample(rng)).tan()
}

/// Perturb every segment slope of one sensor, drawing from that sensor's
/// noise stream.
pub fn perturb_segments(segments: &mut [Segment], epsilon_s: f64, seed: u64) {
    if epsilon_s == 0.0 || segments.is_empty() {
        return;
    }
    let mut rng = sensor_rng(seed, StreamPurpose::SlopeNoise, segments[0].sensor_id);
    for s in segments {
        s.s_d = apply_slope_noise(s.s_d, epsilon_s, &mut rng);
    }
}

/// Settings of the analysis stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub segmentation: SegmentationConfig,
    /// Slope noise standard deviation in radians.
    pub epsilon_s: f64,
    /// Seed of the slope-noise streams.
    pub noise_seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            segmentation: SegmentationConfig::default(),
            epsilon_s: 0.0,
            noise_seed: 0,
        }
    }
}

/// Segment, perturb and extract one sensor's trace.
pub fn analyze_trace(samples: &[TraceSample], known: &KnownParams, cfg: &AnalysisConfig) -> Observations {
    let Some(first) = samples.first() else {
        return Observations::default();
    };
    let v = known.sensor(first.sensor_id).map_or(1.0, |s| s.v);
    let mut segs = segment_trace(samples, known.report_period, known.r_max, v, &cfg.segmentation);
    perturb_segments(&mut segs, cfg.epsilon_s, cfg.noise_seed);
    extract_observations(&segs)
}

/// Analyze many traces in parallel; results stay in input order.
pub fn analyze_traces(traces: &[Vec<TraceSample>], known: &KnownParams, cfg: &AnalysisConfig) -> Observations {
    let parts: Vec<Observations> = traces.par_iter().map(|tr| analyze_trace(tr, known, cfg)).collect();
    let mut out = Observations::default();
    for p in parts {
        out.extend(p);
    }
    out
}

/// Observations from exact analytic traces, with optional slope noise.
pub fn analyze_analytic(traces: &[AnalyticTrace], epsilon_s: f64, seed: u64) -> Observations {
    let mut out = Observations::default();
    for tr in traces {
        let mut segs = segments_from_analytic(tr);
        perturb_segments(&mut segs, epsilon_s, seed);
        out.extend(extract_observations(&segs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn samples(rs: &[Option<f64>]) -> Vec<TraceSample> {
        rs.iter()
            .enumerate()
            .map(|(i, &r)| TraceSample {
                sensor_id: 7,
                t: i as f64,
                r,
            })
            .collect()
    }

    fn seg(rs: &[Option<f64>]) -> Vec<Segment> {
        segment_trace(&samples(rs), 1.0, 100.0, 1.0, &SegmentationConfig::default())
    }

    #[test]
    fn empty_trace_has_no_segments() {
        assert!(seg(&[None; 20]).is_empty());
        assert!(seg(&[]).is_empty());
    }

    #[test]
    fn one_line_between_empties() {
        let mut rs = vec![None; 3];
        rs.extend((0..10).map(|k| Some(40.0 + 0.5 * k as f64)));
        rs.extend([None, None]);
        let s = seg(&rs);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].start_event, Event::FromEmptyBelowMax);
        assert_eq!(s[0].end_event, Event::ToEmptyBelowMax);
        assert!((s[0].s_d - 0.5).abs() < 1e-12);
        assert!((s[0].t_s - 2.5).abs() < 1e-12);
        assert!((s[0].l_d - 10.0).abs() < 1e-12);
        assert!(s[0].is_whole_edge());
    }

    #[test]
    fn corner_between_samples() {
        // r = 50 - t for t <= 4.5, then 41 + t
        let rs: Vec<Option<f64>> = (0..10)
            .map(|k| {
                let t = k as f64;
                Some(if t <= 4.5 { 50.0 - t } else { 41.0 + t })
            })
            .collect();
        let mut all = vec![None];
        all.extend(rs);
        all.push(None);
        let s = seg(&all);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].end_event, Event::SlopeChange);
        assert!((s[0].t_e - 5.5).abs() < 1e-9);
        assert!(s[0].continuous_with_next);
        let v = extract_vertex_observations(&s);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].s_k, v[0].s_k1), (s[0].s_d, s[1].s_d));
        assert_eq!(extract_adjacency_observations(&s).len(), 1);
    }

    #[test]
    fn jump_is_signed() {
        let mut rs = vec![None];
        rs.extend((0..6).map(|_| Some(80.0)));
        rs.extend((0..6).map(|_| Some(30.0)));
        rs.push(None);
        let s = seg(&rs);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].end_event, Event::JumpDown);
        assert_eq!(s[1].start_event, Event::JumpDown);
        assert!(!s[0].is_whole_edge());
        assert!(s[1].start_event.qualifies_start());
        assert!(extract_vertex_observations(&s).is_empty());
    }

    #[test]
    fn range_boundary_and_trace_edge() {
        let mut rs: Vec<Option<f64>> = vec![None];
        rs.extend((0..8).map(|k| Some(99.5 - 2.0 * k as f64)));
        let s = seg(&rs);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].start_event, Event::RangeBoundary);
        assert_eq!(s[0].end_event, Event::TraceEdge);
        assert!(extract_whole_edge_observations(&s).is_empty());
    }

    #[test]
    fn lost_report_splits_run() {
        let mut tr = samples(
            &std::iter::once(None)
                .chain((0..12).map(|k| Some(20.0 + k as f64)))
                .chain(std::iter::once(None))
                .collect::<Vec<_>>(),
        );
        tr.remove(6);
        let cfg = SegmentationConfig::default();
        let s = segment_trace(&tr, 1.0, 100.0, 1.0, &cfg);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].end_event, Event::TraceEdge);
        assert!((s[0].s_d - s[1].s_d).abs() < 1e-12);
        let merged = SegmentationConfig {
            merge_lost_reports: true,
            ..cfg
        };
        assert_eq!(segment_trace(&tr, 1.0, 100.0, 1.0, &merged).len(), 1);
    }

    #[test]
    fn zero_contact() {
        let mut rs: Vec<Option<f64>> = vec![None];
        rs.extend((0..6).map(|k| Some(12.0 - 2.0 * k as f64)));
        rs.push(Some(0.0));
        let s = seg(&rs);
        assert_eq!(s[0].end_event, Event::ZeroContact);
    }

    #[test]
    fn slope_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(apply_slope_noise(0.7, 0.0, &mut rng), 0.7);
        let want = (std::f64::consts::FRAC_PI_4 + 0.03).tan();
        assert!((want - 1.0619).abs() < 1e-4);
        let n = 100_000;
        let d: Vec<f64> = (0..n)
            .map(|_| apply_slope_noise(1.0, 0.03, &mut rng).atan() - 1f64.atan())
            .collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((sd / 0.03 - 1.0).abs() < 0.02, "sd {sd}");
    }

    #[test]
    fn observation_records_round_trip() {
        let obs = Observations {
            edges: vec![WholeEdgeObservation {
                sensor_id: 1,
                k: 0,
                l_d: 3.0,
                s_d: 0.5,
                l_err: 0.0,
            }],
            vertices: vec![VertexObservation {
                sensor_id: 1,
                k: 0,
                s_k: 0.5,
                s_k1: -1.0,
            }],
            adjacency: vec![],
        };
        let recs = obs.to_records();
        let line = serde_json::to_string(&recs[0]).unwrap();
        assert!(line.starts_with(r#"{"kind":"edge""#));
        assert_eq!(Observations::from_records(recs), obs);
    }
}
