//! Shape estimation from observations and the known sensor parameters.
//!
//! The parts run in order: edge lengths, inner angles, vertex composition,
//! edge order, the concave correction of edge counts, and finally assembly
//! into closed polygons.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{Observations, WholeEdgeObservation};
use crate::assembly::{assemble, AssemblyConfig, ShapeEstimate};
use crate::cluster::{
    circular_cut, cluster_1d_noisy, cluster_circular_noisy, merge_unresolved, unwrap_from, ClusterConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{modone, PolygonTarget};
use crate::prob::{
    expected_detectors_edge, expected_detectors_edge_concave, expected_detectors_vertex, q_d_edge_concave_incoming,
    ArenaParams,
};
use crate::trace::KnownParams;

/// Edge length from a whole-edge detection of duration `l_d` and slope
/// `s_d`, for a sensor of speed `v` looking at `theta`.
pub fn temp_length(l_d: f64, s_d: f64, v: f64, theta: f64) -> f64 {
    l_d * (s_d * s_d + 2.0 * s_d * v * theta.cos() + v * v).sqrt()
}

/// Half-width of the [`temp_length`] error from boundary timing.
pub fn length_timing_error(e: &WholeEdgeObservation, v: f64, theta: f64) -> f64 {
    temp_length(e.l_err, e.s_d, v, theta)
}

/// Standard deviation of [`temp_length`] for an error of `slope_noise`
/// radians in `atan(s_d)`.
pub fn length_slope_sd(e: &WholeEdgeObservation, v: f64, theta: f64, slope_noise: f64) -> f64 {
    let norm = (e.s_d * e.s_d + 2.0 * e.s_d * v * theta.cos() + v * v).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    e.l_d * (e.s_d + v * theta.cos()).abs() / norm * (1.0 + e.s_d * e.s_d) * slope_noise
}

/// Standard deviation of [`relative_direction`] for an error of
/// `slope_noise` radians in `atan(s_d)`.
pub fn direction_slope_sd(s_d: f64, v: f64, theta: f64, slope_noise: f64) -> f64 {
    let den = s_d * s_d + 2.0 * s_d * v * theta.cos() + v * v;
    if den == 0.0 {
        return 0.0;
    }
    v * theta.sin().abs() * (1.0 + s_d * s_d) / den * slope_noise
}

/// Edge direction relative to the heading, `ξ − φ` in `[0, 2π)`.
///
/// The tangent fixes the direction up to a half turn; the beam must strike
/// the outer side of the edge, which selects the representative `x` with
/// `x − θ` in `[π, 2π)`.
pub fn relative_direction(s_d: f64, v: f64, theta: f64) -> f64 {
    let den = s_d * theta.cos() + v;
    let a = if den == 0.0 {
        PI / 2.0
    } else {
        (s_d * theta.sin() / den).atan()
    };
    if modone(a - theta) < PI {
        modone(a + PI)
    } else {
        modone(a)
    }
}

/// Inner angle at the vertex joining two consecutive segments.
pub fn temp_angle(s_k: f64, s_k1: f64, v: f64, theta: f64) -> Result<f64> {
    let sin = theta.sin();
    if sin == 0.0 {
        return Err(Error::UndefinedOrientation);
    }
    let d = relative_direction(s_k, v, theta) - relative_direction(s_k1, v, theta);
    Ok(if sin > 0.0 { modone(PI + d) } else { modone(PI - d) })
}

/// `round(size / expected)`, at least 1 for a nonempty class.
pub fn class_count(class_size: usize, expected: f64) -> Result<usize> {
    if !(expected > 0.0) {
        return Err(Error::NonPositiveExpectation(expected));
    }
    if class_size == 0 {
        return Ok(0);
    }
    Ok(((class_size as f64 / expected).round() as usize).max(1))
}

pub fn class_edge_count(class_size: usize, expected: f64) -> Result<usize> {
    class_count(class_size, expected)
}

pub fn class_vertex_count(class_size: usize, expected: f64) -> Result<usize> {
    class_count(class_size, expected)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMember {
    pub sensor_id: u32,
    pub k: usize,
    pub value: f64,
    /// Standard deviation of `value` from timing and slope noise.
    #[serde(default)]
    pub sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthClass {
    pub members: Vec<ClassMember>,
    pub lambda_hat: f64,
    /// Expected number of whole-edge detections per edge of this length.
    pub expected: f64,
    /// Count before the concave correction.
    pub count_plain: usize,
    pub count_hat: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleClass {
    pub members: Vec<ClassMember>,
    pub gamma_hat: f64,
    pub expected: f64,
    pub count_hat: usize,
}

impl AngleClass {
    pub fn is_concave(&self) -> bool {
        self.gamma_hat > PI
    }
}

pub fn class_length_estimate(class: &LengthClass) -> Result<f64> {
    weighted_mean(&class.members).ok_or(Error::EmptyClass)
}

pub fn class_angle_estimate(class: &AngleClass) -> Result<f64> {
    weighted_circular_mean(&class.members).ok_or(Error::EmptyClass)
}

/// Mean weighted by `1 / (sd² + s0²)`, where `s0` is the median member sd
/// (plain mean when no member carries an uncertainty). Members more than
/// five robust standard deviations (1.4826 · MAD) from the median are left
/// out.
pub fn weighted_mean(members: &[ClassMember]) -> Option<f64> {
    if members.is_empty() {
        return None;
    }
    let med = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    let center = med(members.iter().map(|m| m.value).collect());
    let spread = 1.4826 * med(members.iter().map(|m| (m.value - center).abs()).collect());
    let s0 = med(members.iter().map(|m| m.sd).collect());
    let w = |m: &ClassMember| if s0 > 0.0 { 1.0 / (m.sd * m.sd + s0 * s0) } else { 1.0 };
    let (num, den) = members
        .iter()
        .filter(|m| spread == 0.0 || (m.value - center).abs() <= 5.0 * spread)
        .fold((0.0, 0.0), |(n, d), m| (n + w(m) * m.value, d + w(m)));
    Some(num / den)
}

/// [`weighted_mean`] of angles, unwrapped at the widest empty arc.
pub fn weighted_circular_mean(members: &[ClassMember]) -> Option<f64> {
    let values: Vec<f64> = members.iter().map(|m| m.value).collect();
    let u = unwrap_from(&values, circular_cut(&values));
    let shifted: Vec<ClassMember> = members
        .iter()
        .zip(u)
        .map(|(m, value)| ClassMember { value, ..*m })
        .collect();
    weighted_mean(&shifted).map(modone)
}

/// A vertex of angle class `angle_class` joining an edge of class
/// `incoming` to one of class `outgoing` (counterclockwise order). One side
/// may be unknown when that segment was only partly observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexHypothesis {
    pub angle_class: usize,
    pub incoming: Option<usize>,
    pub outgoing: Option<usize>,
    pub support: usize,
}

impl VertexHypothesis {
    pub fn is_two_sided(&self) -> bool {
        self.incoming.is_some() && self.outgoing.is_some()
    }
}

/// Counts of consecutive whole-edge pairs `(incoming, outgoing)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyCount {
    pub matrix: Vec<Vec<usize>>,
    /// Pairs whose count reaches the support threshold.
    pub judged: Vec<(usize, usize)>,
}

impl AdjacencyCount {
    pub fn count(&self, a: usize, b: usize) -> usize {
        self.matrix.get(a).and_then(|r| r.get(b)).copied().unwrap_or(0)
    }

    pub fn is_judged(&self, a: usize, b: usize) -> bool {
        self.judged.contains(&(a, b))
    }
}

/// Maps `(sensor, segment)` to a length class.
type EdgeIndex = BTreeMap<(u32, usize), usize>;

fn edge_index(classes: &[LengthClass]) -> EdgeIndex {
    let mut idx = EdgeIndex::new();
    for (c, cl) in classes.iter().enumerate() {
        for m in &cl.members {
            idx.insert((m.sensor_id, m.k), c);
        }
    }
    idx
}

fn orientation_positive(known: &KnownParams, sensor_id: u32) -> Option<bool> {
    let s = known.sensor(sensor_id)?.theta.sin();
    (s != 0.0).then_some(s > 0.0)
}

/// Combine vertex observations with the length classes of their flanking
/// whole-edge observations.
pub fn combine_vertices(
    known: &KnownParams,
    length_classes: &[LengthClass],
    angle_classes: &[AngleClass],
    min_support: usize,
) -> Vec<VertexHypothesis> {
    let idx = edge_index(length_classes);
    let mut counts: BTreeMap<(usize, Option<usize>, Option<usize>), usize> = BTreeMap::new();
    for (g, ac) in angle_classes.iter().enumerate() {
        for m in &ac.members {
            let Some(pos) = orientation_positive(known, m.sensor_id) else {
                continue;
            };
            let a = idx.get(&(m.sensor_id, m.k)).copied();
            let b = idx.get(&(m.sensor_id, m.k + 1)).copied();
            let (inc, out) = if pos { (a, b) } else { (b, a) };
            if inc.is_none() && out.is_none() {
                continue;
            }
            *counts.entry((g, inc, out)).or_default() += 1;
        }
    }
    let mut hyps: Vec<VertexHypothesis> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min_support)
        .map(|((angle_class, incoming, outgoing), support)| VertexHypothesis {
            angle_class,
            incoming,
            outgoing,
            support,
        })
        .collect();
    hyps.sort_by(|a, b| b.support.cmp(&a.support));
    hyps
}

/// Count consecutive whole-edge pairs per ordered pair of length classes.
pub fn order_adjacency(
    obs: &Observations,
    known: &KnownParams,
    length_classes: &[LengthClass],
    min_support: usize,
) -> AdjacencyCount {
    let n = length_classes.len();
    let idx = edge_index(length_classes);
    let mut matrix = vec![vec![0usize; n]; n];
    for a in &obs.adjacency {
        let (Some(&ca), Some(&cb)) = (idx.get(&(a.sensor_id, a.k)), idx.get(&(a.sensor_id, a.k1))) else {
            continue;
        };
        match orientation_positive(known, a.sensor_id) {
            Some(true) => matrix[ca][cb] += 1,
            Some(false) => matrix[cb][ca] += 1,
            None => {}
        }
    }
    let mut judged = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c >= min_support && c > 0 {
                judged.push((i, j));
            }
        }
    }
    AdjacencyCount { matrix, judged }
}

/// Revised edge count of one length class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcaveAdjustment {
    pub length_class: usize,
    /// Edges of this class leaving / entering a concave vertex.
    pub outgoing: usize,
    pub incoming: usize,
    pub count_plain: usize,
    pub count_corrected: usize,
}

/// Recompute edge counts for length classes that flank concave vertices,
/// using the blocking-aware expectation for those edges.
///
/// The class is modelled as `k_out` edges leaving a concave vertex, `k_in`
/// edges entering one and the rest unblocked, so the count solves
/// `♯ = k_out E_out + k_in E_in + (n − k_out − k_in) E`.
pub fn concave_correction(
    length_classes: &[LengthClass],
    angle_classes: &[AngleClass],
    hypotheses: &[VertexHypothesis],
    thetas: &[f64],
    arena: &ArenaParams,
) -> Vec<ConcaveAdjustment> {
    let n = length_classes.len();
    let mut k_out = vec![0usize; n];
    let mut k_in = vec![0usize; n];
    let mut dxi_out = vec![Vec::new(); n];
    let mut dxi_in = vec![Vec::new(); n];
    for (g, ac) in angle_classes.iter().enumerate() {
        if !ac.is_concave() {
            continue;
        }
        let dxi = ac.gamma_hat - PI;
        let best = |pick: fn(&VertexHypothesis) -> Option<usize>| {
            hypotheses
                .iter()
                .filter(|h| h.angle_class == g && h.is_two_sided())
                .max_by_key(|h| h.support)
                .and_then(pick)
                .or_else(|| {
                    hypotheses
                        .iter()
                        .filter(|h| h.angle_class == g && pick(h).is_some())
                        .max_by_key(|h| h.support)
                        .and_then(pick)
                })
        };
        if let Some(m) = best(|h| h.outgoing) {
            k_out[m] += ac.count_hat;
            dxi_out[m].push((dxi, ac.count_hat));
        }
        if let Some(m) = best(|h| h.incoming) {
            k_in[m] += ac.count_hat;
            dxi_in[m].push((dxi, ac.count_hat));
        }
    }
    let mut out = Vec::new();
    for (m, lc) in length_classes.iter().enumerate() {
        if k_out[m] + k_in[m] == 0 {
            continue;
        }
        let l = lc.lambda_hat;
        let e_plain = lc.expected;
        let blocked_out: f64 = dxi_out[m]
            .iter()
            .map(|&(d, c)| c as f64 * expected_detectors_edge_concave(l, thetas, d, arena))
            .sum();
        let blocked_in: f64 = dxi_in[m]
            .iter()
            .map(|&(d, c)| {
                c as f64
                    * thetas
                        .iter()
                        .map(|&t| q_d_edge_concave_incoming(l, t, d, arena))
                        .sum::<f64>()
            })
            .sum();
        let k = (k_out[m] + k_in[m]) as f64;
        let n_hat = k + (lc.members.len() as f64 - blocked_out - blocked_in) / e_plain;
        let corrected = n_hat.round().max(1.0) as usize;
        out.push(ConcaveAdjustment {
            length_class: m,
            outgoing: k_out[m],
            incoming: k_in[m],
            count_plain: lc.count_plain,
            count_corrected: corrected,
        });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub cluster: ClusterConfig,
    /// Support threshold for classes and for vertex and adjacency
    /// judgments; `None` uses `max(3, 10% of the median angle-class size)`.
    pub min_support: Option<usize>,
    /// Temporary angles this close to π are discarded as straight.
    pub straight_tol: f64,
    pub concave_correction: bool,
    /// Merge length classes closer than the typical length uncertainty of
    /// their members.
    pub merge_unresolved: bool,
    /// Assumed standard deviation, in radians, of the slope angle
    /// `atan(s_d)`; adds to the length uncertainty used when merging.
    pub slope_noise: f64,
    /// Drop classes with fewer members than the support threshold; they are
    /// listed in the report instead.
    pub set_aside_small: bool,
    pub assembly: AssemblyConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            cluster: ClusterConfig::default(),
            min_support: None,
            straight_tol: 0.02,
            concave_correction: true,
            merge_unresolved: true,
            slope_noise: 0.0,
            set_aside_small: true,
            assembly: AssemblyConfig::default(),
        }
    }
}

/// Relative errors against a known polygon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison {
    /// Per length class: nearest true length and `(est − truth) / truth`.
    pub lengths: Vec<(f64, f64)>,
    pub angles: Vec<(f64, f64)>,
}

/// A class with fewer members than the support threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetAsideClass {
    /// `length` or `angle`.
    pub kind: String,
    pub value: f64,
    pub members: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub length_classes: Vec<LengthClass>,
    pub angle_classes: Vec<AngleClass>,
    pub vertex_hypotheses: Vec<VertexHypothesis>,
    pub adjacency: AdjacencyCount,
    pub concave: Vec<ConcaveAdjustment>,
    pub min_support: usize,
    pub discarded_straight: usize,
    /// Classes too small to count as edges or vertices.
    #[serde(default)]
    pub set_aside: Vec<SetAsideClass>,
    pub shapes: Vec<ShapeEstimate>,
    pub diagnostics: Vec<String>,
    pub truth: Option<TruthComparison>,
}

impl EstimationReport {
    pub fn is_empty(&self) -> bool {
        self.length_classes.is_empty() && self.angle_classes.is_empty()
    }

    pub fn lambda_hats(&self) -> Vec<f64> {
        self.length_classes.iter().map(|c| c.lambda_hat).collect()
    }

    pub fn gamma_hats(&self) -> Vec<f64> {
        self.angle_classes.iter().map(|c| c.gamma_hat).collect()
    }

    pub fn edge_counts(&self) -> Vec<usize> {
        self.length_classes.iter().map(|c| c.count_hat).collect()
    }

    pub fn angle_counts(&self) -> Vec<usize> {
        self.angle_classes.iter().map(|c| c.count_hat).collect()
    }

    /// Attach relative errors against the true polygon: each class is
    /// compared with the nearest true value.
    pub fn compare_with(&mut self, truth: &PolygonTarget) {
        let lens: Vec<f64> = truth.edges().iter().map(|e| e.lambda).collect();
        let angs = truth.inner_angles();
        let nearest = |v: f64, set: &[f64]| {
            set.iter()
                .copied()
                .min_by(|a, b| (a - v).abs().total_cmp(&(b - v).abs()))
                .unwrap_or(f64::NAN)
        };
        self.truth = Some(TruthComparison {
            lengths: self
                .lambda_hats()
                .iter()
                .map(|&l| {
                    let t = nearest(l, &lens);
                    (t, (l - t) / t)
                })
                .collect(),
            angles: self
                .gamma_hats()
                .iter()
                .map(|&g| {
                    let t = nearest(g, &angs);
                    (t, (g - t) / t)
                })
                .collect(),
        });
    }

    /// Plain-text tables in the spirit of the classic result tables.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let rel = |v: Option<&(f64, f64)>| v.map_or(String::from("-"), |(_, e)| format!("{e:+.3}"));
        let _ = writeln!(s, "Edge lengths");
        let _ = writeln!(
            s,
            "{:<6} {:>10} {:>6} {:>9} {:>5} {:>5} {:>8}",
            "class", "lambda", "#", "E[#]", "n", "n*", "rel.err"
        );
        for (i, c) in self.length_classes.iter().enumerate() {
            let t = self.truth.as_ref().and_then(|t| t.lengths.get(i));
            let _ = writeln!(
                s,
                "{:<6} {:>10.3} {:>6} {:>9.2} {:>5} {:>5} {:>8}",
                format!("L{}", i + 1),
                c.lambda_hat,
                c.members.len(),
                c.expected,
                c.count_plain,
                c.count_hat,
                rel(t)
            );
        }
        let _ = writeln!(s, "\nInner angles");
        let _ = writeln!(
            s,
            "{:<6} {:>10} {:>6} {:>9} {:>5} {:>8}",
            "class", "gamma", "#", "E[#]", "n", "rel.err"
        );
        for (i, c) in self.angle_classes.iter().enumerate() {
            let t = self.truth.as_ref().and_then(|t| t.angles.get(i));
            let _ = writeln!(
                s,
                "{:<6} {:>10.4} {:>6} {:>9.2} {:>5} {:>8}",
                format!("G{}", i + 1),
                c.gamma_hat,
                c.members.len(),
                c.expected,
                c.count_hat,
                rel(t)
            );
        }
        let side = |c: Option<usize>| c.map_or("-".to_string(), |c| format!("L{}", c + 1));
        let _ = writeln!(s, "\nVertex hypotheses (min support {})", self.min_support);
        for h in &self.vertex_hypotheses {
            let _ = writeln!(
                s,
                "  G{} between {} -> {}: {}",
                h.angle_class + 1,
                side(h.incoming),
                side(h.outgoing),
                h.support
            );
        }
        let _ = writeln!(s, "\nAdjacency counts (row -> column)");
        for (i, row) in self.adjacency.matrix.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>5}")).collect();
            let _ = writeln!(s, "  L{:<3}{}", i + 1, cells.join(""));
        }
        if !self.set_aside.is_empty() {
            let _ = writeln!(s, "\nSet aside (fewer than {} members)", self.min_support);
            for c in &self.set_aside {
                let _ = writeln!(s, "  {} {:.4}: {}", c.kind, c.value, c.members);
            }
        }
        if !self.concave.is_empty() {
            let _ = writeln!(s, "\nConcave correction");
            for c in &self.concave {
                let _ = writeln!(
                    s,
                    "  L{}: {} -> {} (out {}, in {})",
                    c.length_class + 1,
                    c.count_plain,
                    c.count_corrected,
                    c.outgoing,
                    c.incoming
                );
            }
        }
        let _ = writeln!(s, "\nShapes");
        if self.shapes.is_empty() {
            let _ = writeln!(s, "  none");
        }
        for (i, sh) in self.shapes.iter().enumerate() {
            let seq: Vec<String> = sh
                .edges
                .iter()
                .map(|e| format!("{:.2}, {:.3}", e.length, e.angle))
                .collect();
            let _ = writeln!(
                s,
                "  #{} support {} unbacked {} closure {:.3} (z {:.1}) angle {:.4}: ({})",
                i + 1,
                sh.support,
                sh.unbacked_joints,
                sh.closure_residual,
                sh.closure_z,
                sh.angle_residual,
                seq.join(", ")
            );
        }
        for d in &self.diagnostics {
            let _ = writeln!(s, "note: {d}");
        }
        s
    }
}

fn median(v: &mut [usize]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2]) as f64
    }
}

/// Run every estimation part on `obs`.
pub fn estimate(obs: &Observations, known: &KnownParams, cfg: &EstimatorConfig) -> Result<EstimationReport> {
    let arena = ArenaParams::new(known.omega_perimeter, known.r_max);
    let thetas = known.thetas();
    let mut report = EstimationReport::default();

    // edge lengths
    let mut members = Vec::new();
    let mut precision = Vec::new();
    for e in &obs.edges {
        let Some(s) = known.sensor(e.sensor_id) else {
            report.diagnostics.push(format!("unknown sensor {}", e.sensor_id));
            continue;
        };
        let timing = length_timing_error(e, s.v, s.theta);
        let slope = length_slope_sd(e, s.v, s.theta, cfg.slope_noise);
        members.push(ClassMember {
            sensor_id: e.sensor_id,
            k: e.k,
            value: temp_length(e.l_d, e.s_d, s.v, s.theta),
            // timing errors are uniform within their half-width
            sd: (timing / 3f64.sqrt()).hypot(slope),
        });
        precision.push(timing.hypot(slope));
    }
    let values: Vec<f64> = members.iter().map(|m| m.value).collect();
    let noise: Vec<f64> = members.iter().map(|m| m.sd).collect();
    let mut clusters = cluster_1d_noisy(&values, &noise, &cfg.cluster);
    if cfg.merge_unresolved {
        let before = clusters.k();
        clusters = merge_unresolved(&values, &clusters, &precision);
        if clusters.k() < before {
            report.diagnostics.push(format!(
                "{} length classes closer than the boundary timing resolution merged into {}",
                before,
                clusters.k()
            ));
        }
    }
    for c in 0..clusters.k() {
        let ms: Vec<ClassMember> = clusters.members(c).map(|i| members[i]).collect();
        let lambda_hat = weighted_mean(&ms).unwrap();
        let expected = expected_detectors_edge(lambda_hat, &thetas, &arena);
        let count = class_edge_count(ms.len(), expected)?;
        report.length_classes.push(LengthClass {
            members: ms,
            lambda_hat,
            expected,
            count_plain: count,
            count_hat: count,
        });
    }

    // inner angles
    let mut members = Vec::new();
    for o in &obs.vertices {
        let Some(s) = known.sensor(o.sensor_id) else {
            continue;
        };
        let Ok(g) = temp_angle(o.s_k, o.s_k1, s.v, s.theta) else {
            continue;
        };
        if (g - PI).abs() < cfg.straight_tol || g < cfg.straight_tol || TAU - g < cfg.straight_tol {
            report.discarded_straight += 1;
            continue;
        }
        members.push(ClassMember {
            sensor_id: o.sensor_id,
            k: o.k,
            value: g,
            sd: direction_slope_sd(o.s_k, s.v, s.theta, cfg.slope_noise).hypot(direction_slope_sd(
                o.s_k1,
                s.v,
                s.theta,
                cfg.slope_noise,
            )),
        });
    }
    let values: Vec<f64> = members.iter().map(|m| m.value).collect();
    let noise: Vec<f64> = members.iter().map(|m| m.sd).collect();
    let clusters = cluster_circular_noisy(&values, &noise, &cfg.cluster);
    for c in 0..clusters.k() {
        let ms: Vec<ClassMember> = clusters.members(c).map(|i| members[i]).collect();
        let gamma_hat = weighted_circular_mean(&ms).unwrap();
        let expected = match expected_detectors_vertex(gamma_hat, &thetas, &arena) {
            Ok(e) => e,
            Err(_) => {
                report
                    .diagnostics
                    .push(format!("angle class at {gamma_hat:.4} is degenerate"));
                continue;
            }
        };
        let count = class_vertex_count(ms.len(), expected)?;
        report.angle_classes.push(AngleClass {
            members: ms,
            gamma_hat,
            expected,
            count_hat: count,
        });
    }

    let mut sizes: Vec<usize> = report.angle_classes.iter().map(|c| c.members.len()).collect();
    report.min_support = cfg
        .min_support
        .unwrap_or_else(|| 3usize.max((0.1 * median(&mut sizes)).round() as usize));
    if cfg.set_aside_small {
        let min = report.min_support;
        let (kept, small): (Vec<_>, Vec<_>) = std::mem::take(&mut report.length_classes)
            .into_iter()
            .partition(|c| c.members.len() >= min);
        report.length_classes = kept;
        report.set_aside.extend(small.iter().map(|c| SetAsideClass {
            kind: "length".into(),
            value: c.lambda_hat,
            members: c.members.len(),
        }));
        let (kept, small): (Vec<_>, Vec<_>) = std::mem::take(&mut report.angle_classes)
            .into_iter()
            .partition(|c| c.members.len() >= min);
        report.angle_classes = kept;
        report.set_aside.extend(small.iter().map(|c| SetAsideClass {
            kind: "angle".into(),
            value: c.gamma_hat,
            members: c.members.len(),
        }));
    }

    report.vertex_hypotheses =
        combine_vertices(known, &report.length_classes, &report.angle_classes, report.min_support);
    report.adjacency = order_adjacency(obs, known, &report.length_classes, report.min_support);

    if cfg.concave_correction {
        report.concave = concave_correction(
            &report.length_classes,
            &report.angle_classes,
            &report.vertex_hypotheses,
            &thetas,
            &arena,
        );
        for c in &report.concave {
            report.length_classes[c.length_class].count_hat = c.count_corrected;
        }
    }

    if report.is_empty() {
        report.diagnostics.push("no observations to estimate from".into());
        return Ok(report);
    }
    let n_edges: usize = report.edge_counts().iter().sum();
    let n_vertices: usize = report.angle_counts().iter().sum();
    if n_edges != n_vertices {
        report.diagnostics.push(format!(
            "edge count {n_edges} and vertex count {n_vertices} disagree; searching nearby counts"
        ));
    }
    match assemble(
        &report.length_classes,
        &report.angle_classes,
        &report.vertex_hypotheses,
        &report.adjacency,
        &cfg.assembly,
    ) {
        Ok(shapes) => report.shapes = shapes,
        Err(e) => report.diagnostics.push(format!("assembly: {e}")),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn class_means_ignore_far_members() {
        let m = |value: f64, sd: f64| ClassMember {
            sensor_id: 0,
            k: 0,
            value,
            sd,
        };
        let mut ms: Vec<ClassMember> = (0..20).map(|i| m(0.5 + 0.001 * i as f64, 0.04)).collect();
        ms.push(m(4.645, 0.04));
        let g = weighted_circular_mean(&ms).unwrap();
        assert!((g - 0.5095).abs() < 1e-9, "{g}");
        // precise members count for more
        let w = weighted_mean(&[m(10.0, 0.1), m(10.0, 0.1), m(12.0, 1.0)]).unwrap();
        assert!(w < 10.1, "{w}");
    }

    #[test]
    fn length_examples() {
        assert!((temp_length(50.0, 0.0, 1.0, FRAC_PI_2) - 50.0).abs() < 1e-12);
        assert!((temp_length(50.0, 1.0, 1.0, FRAC_PI_2) - 70.71067811865476).abs() < 1e-9);
        assert!((temp_length(50.0, -1.0, 1.0, PI / 3.0) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn direction_examples() {
        assert!((relative_direction(1.0, 1.0, FRAC_PI_2) - PI / 4.0).abs() < 1e-12);
        assert!(relative_direction(0.0, 1.0, FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn angle_examples() {
        assert!((temp_angle(0.0, 1.0, 1.0, FRAC_PI_2).unwrap() - 0.75 * PI).abs() < 1e-12);
        assert!((temp_angle(1.0, 0.0, 1.0, FRAC_PI_2).unwrap() - 1.25 * PI).abs() < 1e-12);
        let g = temp_angle(0.5, 0.5 + 1e-12, 1.0, FRAC_PI_2).unwrap();
        assert!((g - PI).abs() < 1e-9);
        assert!(matches!(
            temp_angle(0.0, 1.0, 1.0, 0.0),
            Err(Error::UndefinedOrientation)
        ));
    }

    #[test]
    fn speed_only_rescales_slope() {
        // same geometry seen at speed 2: slopes double, durations halve
        let (l, s, th) = (40.0, 0.7, 1.1);
        assert!((temp_length(l / 2.0, 2.0 * s, 2.0, th) - temp_length(l, s, 1.0, th)).abs() < 1e-9);
        assert!((relative_direction(2.0 * s, 2.0, th) - relative_direction(s, 1.0, th)).abs() < 1e-12);
    }

    #[test]
    fn counts() {
        assert_eq!(class_edge_count(136, 136.34).unwrap(), 1);
        assert_eq!(class_edge_count(272, 136.34).unwrap(), 2);
        assert_eq!(class_edge_count(0, 5.0).unwrap(), 0);
        assert_eq!(class_edge_count(2, 136.34).unwrap(), 1);
        assert!(class_edge_count(3, 0.0).is_err());
        assert_eq!(class_vertex_count(100, 100.0).unwrap(), 1);
        assert_eq!(class_vertex_count(300, 100.0).unwrap(), 3);
    }

    #[test]
    fn class_means() {
        let m = |v: f64| ClassMember {
            sensor_id: 0,
            k: 0,
            value: v,
            sd: 0.0,
        };
        let lc = LengthClass {
            members: vec![m(49.0), m(50.0), m(51.0)],
            lambda_hat: 0.0,
            expected: 1.0,
            count_plain: 1,
            count_hat: 1,
        };
        assert!((class_length_estimate(&lc).unwrap() - 50.0).abs() < 1e-12);
        let ac = AngleClass {
            members: vec![m(1.57), m(1.58), m(1.56)],
            gamma_hat: 0.0,
            expected: 1.0,
            count_hat: 1,
        };
        assert!((class_angle_estimate(&ac).unwrap() - 1.57).abs() < 1e-12);
        let empty = AngleClass { members: vec![], ..ac };
        assert!(class_angle_estimate(&empty).is_err());
    }
}
