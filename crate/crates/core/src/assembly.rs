//! Assembly of classes into closed polygons.
//!
//! Edge classes are arranged into a cycle by backtracking. Every joint must
//! be backed by a vertex hypothesis or an adjacency judgment, the exterior
//! angles must add up to one full turn and the edge vectors must (nearly)
//! close.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{AdjacencyCount, AngleClass, LengthClass, VertexHypothesis};
use crate::geometry::{Point, PolygonTarget};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssemblyConfig {
    /// Largest polygon the search will attempt.
    pub max_edges: usize,
    /// Allowed `|Σ(π − γ) − 2π|`.
    pub angle_tol: f64,
    /// Allowed closure residual as a fraction of the perimeter.
    pub closure_tol: f64,
    /// Angle counts may deviate from the class estimates by this much.
    pub count_slack: usize,
    /// Total deviation allowed across the edge counts. A class whose count
    /// is 1 only because of the floor may drop to 0.
    pub length_slack: usize,
    pub max_results: usize,
    /// When no arrangement has every joint backed, retry allowing up to
    /// this many joints without any evidence.
    pub max_unbacked_joints: usize,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            max_edges: 12,
            angle_tol: 0.05,
            closure_tol: 0.02,
            count_slack: 1,
            length_slack: 2,
            max_results: 16,
            max_unbacked_joints: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeEdge {
    pub length_class: usize,
    pub length: f64,
    /// Angle class of the vertex at the end of this edge.
    pub angle_class: usize,
    pub angle: f64,
}

/// A closed (up to the residual) polygon: edge `j` is followed by the
/// vertex with inner angle `edges[j].angle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeEstimate {
    pub edges: Vec<ShapeEdge>,
    pub closure_residual: f64,
    pub angle_residual: f64,
    pub support: usize,
    /// Joints placed without a vertex hypothesis or adjacency judgment.
    pub unbacked_joints: usize,
    /// Closure residual in units of its standard error, propagated from
    /// the class standard errors.
    #[serde(default)]
    pub closure_z: f64,
}

impl ShapeEstimate {
    pub fn from_sequence(seq: &[(f64, f64)]) -> Self {
        let (c, a) = closure_check(seq);
        ShapeEstimate {
            edges: seq
                .iter()
                .map(|&(length, angle)| ShapeEdge {
                    length_class: 0,
                    length,
                    angle_class: 0,
                    angle,
                })
                .collect(),
            closure_residual: c,
            angle_residual: a,
            support: 0,
            unbacked_joints: 0,
            closure_z: 0.0,
        }
    }

    pub fn sequence(&self) -> Vec<(f64, f64)> {
        self.edges.iter().map(|e| (e.length, e.angle)).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Vertices of the drawn polygon, starting at the origin with the first
    /// edge along +x. The last edge closes onto the first vertex.
    pub fn vertices(&self) -> Vec<Point> {
        walk(&self.sequence())
    }

    /// The estimate as a polygon, when it is simple.
    pub fn to_polygon(&self) -> Result<PolygonTarget> {
        PolygonTarget::from_vertices(&self.vertices())
    }
}

fn walk(seq: &[(f64, f64)]) -> Vec<Point> {
    let mut p = Point::new(0.0, 0.0);
    let mut xi = 0.0;
    let mut out = Vec::with_capacity(seq.len());
    for &(l, g) in seq {
        out.push(p);
        p = p + Point::unit(xi) * l;
        xi += PI - g;
    }
    out
}

/// `(closure_residual, angle_residual)` of a sequence of
/// `(edge length, inner angle at its end)`.
pub fn closure_check(seq: &[(f64, f64)]) -> (f64, f64) {
    let mut sum = Point::new(0.0, 0.0);
    let mut xi = 0.0;
    let mut turn = 0.0;
    for &(l, g) in seq {
        sum = sum + Point::unit(xi) * l;
        xi += PI - g;
        turn += PI - g;
    }
    (sum.norm(), (turn - TAU).abs())
}

/// Mahalanobis length of the closure vector of `seq` when the lengths and
/// angles carry independent errors with standard deviations `se`
/// (`(length sd, angle sd)` per edge).
pub fn closure_z(seq: &[(f64, f64)], se: &[(f64, f64)]) -> f64 {
    let pts = walk(seq);
    let mut end = Point::new(0.0, 0.0);
    let mut xi = 0.0;
    for &(l, g) in seq {
        end = end + Point::unit(xi) * l;
        xi += PI - g;
    }
    let perimeter: f64 = seq.iter().map(|e| e.0).sum();
    let floor = (1e-9 * perimeter).powi(2);
    let (mut sxx, mut sxy, mut syy) = (floor, 0.0, floor);
    let mut add = |v: Point, sd: f64| {
        sxx += sd * sd * v.x * v.x;
        sxy += sd * sd * v.x * v.y;
        syy += sd * sd * v.y * v.y;
    };
    let mut xi = 0.0;
    for (j, (&(_, g), &(sl, sg))) in seq.iter().zip(se).enumerate() {
        add(Point::unit(xi), sl);
        // turning at the end of edge j swings everything after it
        if j + 1 < seq.len() {
            let arm = end - pts[j + 1];
            add(Point::new(-arm.y, arm.x), sg);
        }
        xi += PI - g;
    }
    let det = sxx * syy - sxy * sxy;
    let d2 = (syy * end.x * end.x - 2.0 * sxy * end.x * end.y + sxx * end.y * end.y) / det;
    d2.max(0.0).sqrt()
}

/// Standard error of a class mean: robust spread of the members over √n.
fn class_se(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return 0.0;
    }
    let med = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    let c = med(&mut v);
    let mut dev: Vec<f64> = v.iter().map(|x| (x - c).abs()).collect();
    1.4826 * med(&mut dev) / (v.len() as f64).sqrt()
}

/// Closures beyond this many standard errors (99.9% of a 2-D normal) are
/// treated as inconsistent with the class precision.
const CLOSURE_Z_MAX: f64 = 3.717;

/// Angle-count vectors within `slack` of the estimates that sum to `n` and
/// turn once.
fn angle_count_vectors(angles: &[AngleClass], n: usize, cfg: &AssemblyConfig) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(angles.len());
    fn rec(angles: &[AngleClass], n: usize, cfg: &AssemblyConfig, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        let used: usize = cur.iter().sum();
        if i == angles.len() {
            if used == n {
                let turn: f64 = cur
                    .iter()
                    .zip(angles)
                    .map(|(&c, a)| c as f64 * (PI - a.gamma_hat))
                    .sum();
                if (turn - TAU).abs() <= cfg.angle_tol {
                    out.push(cur.clone());
                }
            }
            return;
        }
        let base = angles[i].count_hat;
        let lo = base.saturating_sub(cfg.count_slack);
        for c in lo..=base + cfg.count_slack {
            if used + c > n {
                break;
            }
            cur.push(c);
            rec(angles, n, cfg, cur, out);
            cur.pop();
        }
    }
    rec(angles, n, cfg, &mut cur, &mut out);
    // closest to the estimates first
    out.sort_by_key(|v| {
        v.iter()
            .zip(angles)
            .map(|(&c, a)| c.abs_diff(a.count_hat))
            .sum::<usize>()
    });
    out
}

/// Edge-count vectors with total deviation at most `cfg.length_slack`,
/// closest first.
fn length_count_vectors(lengths: &[LengthClass], cfg: &AssemblyConfig) -> Vec<(Vec<usize>, usize)> {
    let base: Vec<usize> = lengths.iter().map(|c| c.count_hat).collect();
    let floor: Vec<usize> = lengths
        .iter()
        .map(|c| {
            let weak = c.count_hat <= 1 && (c.members.len() as f64) < 0.5 * c.expected;
            if weak {
                0
            } else {
                1
            }
        })
        .collect();
    let mut out = vec![(base.clone(), 0)];
    let mut frontier = vec![base];
    for dev in 1..=cfg.length_slack {
        let mut next = Vec::new();
        for v in &frontier {
            for i in 0..v.len() {
                for up in [false, true] {
                    let mut w = v.clone();
                    if up {
                        w[i] += 1;
                    } else if w[i] > floor[i] {
                        w[i] -= 1;
                    } else {
                        continue;
                    }
                    if !out.iter().any(|(u, _)| *u == w) && !next.contains(&w) {
                        next.push(w);
                    }
                }
            }
        }
        out.extend(next.iter().cloned().map(|w| (w, dev)));
        frontier = next;
    }
    out
}

struct Search<'a> {
    lengths: &'a [LengthClass],
    angles: &'a [AngleClass],
    hyps: &'a [VertexHypothesis],
    adjacency: &'a AdjacencyCount,
    n: usize,
    edge_left: Vec<usize>,
    angle_left: Vec<usize>,
    seq_e: Vec<usize>,
    seq_a: Vec<usize>,
    found: Vec<(Vec<usize>, Vec<usize>, usize, usize)>,
    joint_fails: usize,
    unbacked: usize,
    budget: usize,
}

impl Search<'_> {
    /// Support of the joint `inc → out` with angle class `g`; `None` when
    /// nothing backs it. A one-sided hypothesis backs the joint when its
    /// known side matches.
    fn joint(&self, inc: usize, out: usize, g: usize) -> Option<usize> {
        let mut support = 0;
        let mut backed = false;
        for h in self.hyps.iter().filter(|h| h.angle_class == g) {
            let hit = match (h.incoming, h.outgoing) {
                (Some(a), Some(b)) => a == inc && b == out,
                (Some(a), None) => a == inc,
                (None, Some(b)) => b == out,
                (None, None) => false,
            };
            if hit {
                backed = true;
                support += h.support;
            }
        }
        if self.adjacency.is_judged(inc, out) {
            backed = true;
            support += self.adjacency.count(inc, out);
        }
        backed.then_some(support)
    }

    /// Try joint `inc → out` with angle `g`; calls `next` with the added
    /// support when the joint is backed or the unbacked budget allows it.
    fn place(&mut self, inc: usize, out: usize, g: usize) -> Option<usize> {
        match self.joint(inc, out, g) {
            Some(s) => Some(s),
            None if self.unbacked < self.budget => {
                self.unbacked += 1;
                Some(0)
            }
            None => {
                self.joint_fails += 1;
                None
            }
        }
    }

    fn run(&mut self, support: usize) {
        let pos = self.seq_e.len();
        if pos == self.n {
            let (first, last) = (self.seq_e[0], self.seq_e[pos - 1]);
            for g in 0..self.angles.len() {
                if self.angle_left[g] == 0 {
                    continue;
                }
                let before = self.unbacked;
                if let Some(s) = self.place(last, first, g) {
                    let mut a = self.seq_a.clone();
                    a.push(g);
                    self.found.push((self.seq_e.clone(), a, support + s, self.unbacked));
                }
                self.unbacked = before;
            }
            return;
        }
        for e in 0..self.lengths.len() {
            if self.edge_left[e] == 0 {
                continue;
            }
            // rotations: the cycle starts with the first class that is used
            if pos == 0 && self.edge_left[..e].iter().any(|&l| l > 0) {
                continue;
            }
            self.edge_left[e] -= 1;
            if pos == 0 {
                self.seq_e.push(e);
                self.run(support);
                self.seq_e.pop();
            } else {
                let prev = self.seq_e[pos - 1];
                for g in 0..self.angles.len() {
                    if self.angle_left[g] == 0 {
                        continue;
                    }
                    let before = self.unbacked;
                    let Some(s) = self.place(prev, e, g) else {
                        continue;
                    };
                    self.angle_left[g] -= 1;
                    self.seq_e.push(e);
                    self.seq_a.push(g);
                    self.run(support + s);
                    self.seq_a.pop();
                    self.seq_e.pop();
                    self.angle_left[g] += 1;
                    self.unbacked = before;
                }
            }
            self.edge_left[e] += 1;
        }
    }
}

fn canonical(e: &[usize], a: &[usize]) -> Vec<(usize, usize)> {
    let n = e.len();
    (0..n)
        .map(|r| (0..n).map(|i| (e[(i + r) % n], a[(i + r) % n])).collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// Arrange the classes into closed polygons, best first.
///
/// Count vectors are tried in order of their total deviation from the
/// estimates; within one deviation level, arrangements with every joint
/// backed are preferred over those needing unbacked joints, then closures
/// consistent with the class standard errors, then support. The first level
/// that yields any shape is returned.
pub fn assemble(
    lengths: &[LengthClass],
    angles: &[AngleClass],
    hypotheses: &[VertexHypothesis],
    adjacency: &AdjacencyCount,
    cfg: &AssemblyConfig,
) -> Result<Vec<ShapeEstimate>> {
    let n0: usize = lengths.iter().map(|c| c.count_hat).sum();
    if n0 < 3 && cfg.length_slack == 0 {
        return Err(Error::NoFeasibleArrangement(format!(
            "only {n0} edges estimated, a polygon needs at least 3"
        )));
    }
    if n0 > cfg.max_edges {
        return Err(Error::SearchSpaceTooLarge(n0, cfg.max_edges));
    }
    // (edge counts, angle counts, deviation)
    let mut plans: Vec<(Vec<usize>, Vec<usize>, usize)> = Vec::new();
    for (lv, ld) in length_count_vectors(lengths, cfg) {
        let n: usize = lv.iter().sum();
        if n < 3 || n > cfg.max_edges {
            continue;
        }
        for av in angle_count_vectors(angles, n, cfg) {
            let ad: usize = av.iter().zip(angles).map(|(&c, a)| c.abs_diff(a.count_hat)).sum();
            plans.push((lv.clone(), av, ld + ad));
        }
    }
    if plans.is_empty() {
        return Err(Error::NoFeasibleArrangement(format!(
            "no angle counts within ±{} of the estimates give {n0} vertices turning once",
            cfg.count_slack
        )));
    }
    plans.sort_by_key(|p| p.2);
    let max_dev = plans.last().map_or(0, |p| p.2);
    let length_se: Vec<f64> = lengths
        .iter()
        .map(|c| class_se(c.members.iter().map(|m| m.value)))
        .collect();
    let angle_se: Vec<f64> = angles
        .iter()
        .map(|c| {
            let wrap = |d: f64| (d + PI).rem_euclid(TAU) - PI;
            class_se(c.members.iter().map(|m| wrap(m.value - c.gamma_hat)))
        })
        .collect();

    let mut orders = 0;
    let mut fails = 0;
    for dev in 0..=max_dev {
        for budget in 0..=cfg.max_unbacked_joints {
            let mut seen = BTreeSet::new();
            let mut shapes = Vec::new();
            for (lv, av, _) in plans.iter().filter(|p| p.2 == dev) {
                let mut s = Search {
                    lengths,
                    angles,
                    hyps: hypotheses,
                    adjacency,
                    n: lv.iter().sum(),
                    edge_left: lv.clone(),
                    angle_left: av.clone(),
                    seq_e: Vec::new(),
                    seq_a: Vec::new(),
                    found: Vec::new(),
                    joint_fails: 0,
                    unbacked: 0,
                    budget,
                };
                s.run(0);
                fails += s.joint_fails;
                for (e, a, support, unbacked) in s.found {
                    orders += 1;
                    if !seen.insert(canonical(&e, &a)) {
                        continue;
                    }
                    let edges: Vec<ShapeEdge> = e
                        .iter()
                        .zip(&a)
                        .map(|(&ec, &ac)| ShapeEdge {
                            length_class: ec,
                            length: lengths[ec].lambda_hat,
                            angle_class: ac,
                            angle: angles[ac].gamma_hat,
                        })
                        .collect();
                    let seq: Vec<(f64, f64)> = edges.iter().map(|x| (x.length, x.angle)).collect();
                    let (closure, turn) = closure_check(&seq);
                    let se: Vec<(f64, f64)> = e
                        .iter()
                        .zip(&a)
                        .map(|(&ec, &ac)| (length_se[ec], angle_se[ac]))
                        .collect();
                    let shape = ShapeEstimate {
                        edges,
                        closure_residual: closure,
                        angle_residual: turn,
                        support,
                        unbacked_joints: unbacked,
                        closure_z: closure_z(&seq, &se),
                    };
                    if closure > cfg.closure_tol * shape.perimeter() || turn > cfg.angle_tol {
                        continue;
                    }
                    if shape.to_polygon().is_err() {
                        continue;
                    }
                    shapes.push(shape);
                }
            }
            if !shapes.is_empty() {
                shapes.sort_by(|a, b| {
                    a.unbacked_joints
                        .cmp(&b.unbacked_joints)
                        .then((a.closure_z > CLOSURE_Z_MAX).cmp(&(b.closure_z > CLOSURE_Z_MAX)))
                        .then(b.support.cmp(&a.support))
                        .then(a.closure_residual.total_cmp(&b.closure_residual))
                });
                shapes.truncate(cfg.max_results);
                return Ok(shapes);
            }
        }
    }
    let why = if orders == 0 {
        format!("no cyclic order has every joint backed by a vertex hypothesis or adjacency judgment ({fails} joints rejected)")
    } else {
        format!(
            "none of {orders} supported orders closes within {:.0}% of the perimeter as a simple polygon",
            cfg.closure_tol * 100.0
        )
    };
    Err(Error::NoFeasibleArrangement(why))
}
