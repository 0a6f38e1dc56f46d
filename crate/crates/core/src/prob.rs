//! Closed-form detection probabilities for random directed lines.
//!
//! All probabilities are measures of directed sensor lines relative to the
//! monitor measure `2|∂Ω| + 2π r_max |sin θ|`, the set of lines from which the
//! sensing strip can reach Ω.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::modone;

/// Constants of the monitored arena.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArenaParams {
    /// Perimeter of the monitored convex region Ω.
    pub l_omega: f64,
    pub r_max: f64,
}

impl ArenaParams {
    pub fn new(l_omega: f64, r_max: f64) -> Self {
        Self { l_omega, r_max }
    }

    /// Ω a disk of radius `radius`.
    pub fn disk(radius: f64, r_max: f64) -> Self {
        Self::new(TAU * radius, r_max)
    }

    /// Strip width `r_max |sin θ|`.
    pub fn reach(&self, theta: f64) -> f64 {
        self.r_max * theta.sin().abs()
    }

    /// Monitor measure of directed lines for direction `theta`.
    pub fn denominator(&self, theta: f64) -> f64 {
        2.0 * self.l_omega + TAU * self.reach(theta)
    }
}

/// Half-width of the heading window in which a whole edge of length `lambda`
/// fits inside the sensing strip. Saturates at `π/2` once the strip is at
/// least as wide as the edge is long.
pub fn eta(lambda: f64, theta: f64, r_max: f64) -> f64 {
    let w = r_max * theta.sin().abs();
    if w >= lambda {
        PI / 2.0
    } else {
        (w / lambda).asin()
    }
}

/// Probability that a random sensor detects a whole edge of length `lambda`.
pub fn q_d_edge(lambda: f64, theta: f64, arena: &ArenaParams) -> f64 {
    let w = arena.reach(theta);
    if w == 0.0 {
        return 0.0;
    }
    let e = eta(lambda, theta, arena.r_max);
    let num = 2.0 * e * w - 2.0 * lambda * (1.0 - e.cos());
    num.max(0.0) / arena.denominator(theta)
}

/// Expected number of sensors (one per entry of `thetas`) detecting a whole
/// edge of length `lambda`.
pub fn expected_detectors_edge(lambda: f64, thetas: &[f64], arena: &ArenaParams) -> f64 {
    thetas.iter().map(|&t| q_d_edge(lambda, t, arena)).sum()
}

/// Probability that a random sensor sees a vertex of inner angle `gamma`
/// as a continuous slope change.
pub fn q_d_vertex(gamma: f64, theta: f64, arena: &ArenaParams) -> Result<f64> {
    let g = modone(gamma);
    if g.abs() < 1e-12 || (g - PI).abs() < 1e-12 || (TAU - g).abs() < 1e-12 {
        return Err(Error::DegenerateAngle(gamma));
    }
    let wedge = if g < PI { g } else { TAU - g };
    Ok(wedge * arena.reach(theta) / arena.denominator(theta))
}

pub fn expected_detectors_vertex(gamma: f64, thetas: &[f64], arena: &ArenaParams) -> Result<f64> {
    thetas.iter().map(|&t| q_d_vertex(gamma, t, arena)).sum()
}

/// Which closed-form case evaluated [`blocking_f`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FBranch {
    /// `r_max |sin θ| < λ`; zones (1..=6) of `-θ` and `δξ - θ`.
    Zones(u8, u8),
    /// `r_max |sin θ| ≥ λ`; half-circles (0 = `[0, π)`, 1 = `[π, 2π)`) of
    /// `-θ` and `δξ - θ`.
    Saturated(u8, u8),
}

impl FBranch {
    /// Every case the closed form distinguishes.
    pub fn all() -> Vec<FBranch> {
        let mut v: Vec<FBranch> = [
            (1, 1),
            (1, 2),
            (1, 3),
            (1, 4),
            (2, 2),
            (2, 3),
            (2, 4),
            (2, 5),
            (3, 3),
            (3, 4),
            (3, 5),
            (3, 6),
            (4, 4),
            (4, 5),
            (4, 6),
            (4, 1),
            (5, 5),
            (5, 6),
            (5, 1),
            (5, 2),
            (6, 6),
            (6, 1),
            (6, 2),
            (6, 3),
        ]
        .into_iter()
        .map(|(a, b)| FBranch::Zones(a, b))
        .collect();
        for a in 0..2 {
            for b in 0..2 {
                v.push(FBranch::Saturated(a, b));
            }
        }
        v
    }
}

fn zone(t: f64, eta: f64) -> u8 {
    let t = modone(t);
    let bounds = [eta, PI - eta, PI, PI + eta, TAU - eta];
    bounds.iter().position(|&b| t < b).map_or(6, |i| i as u8 + 1)
}

/// Measure of headings for which a sensor sees the whole edge without the
/// preceding edge (meeting it at a concave vertex with `γ = π + δξ`)
/// getting in the way. Returns the value and the case that produced it.
pub fn blocking_f_branch(lambda: f64, theta: f64, delta_xi: f64, r_max: f64) -> (f64, FBranch) {
    let w = r_max * theta.sin().abs();
    let (ct, cd) = (theta.cos(), (delta_xi - theta).cos());
    let m = modone;
    if w < lambda {
        let e = (w / lambda).asin();
        let ce = e.cos();
        let (a, b) = (zone(-theta, e), zone(delta_xi - theta, e));
        let l = lambda;
        let f = match (a, b) {
            (1, 1) | (3, 3) => w * m(2.0 * e - delta_xi) - l * (2.0 - 2.0 * ce + cd - ct),
            (1, 2) => w * m(e - theta) - l * (2.0 - ce - ct),
            (1, 3) => w * m(PI - delta_xi) - l * (2.0 + cd - ct),
            (1, 4) | (3, 6) => w * m(PI - delta_xi) - l * (-cd - ct),
            (2, 2) | (5, 5) => 2.0 * e * w - 2.0 * l * (1.0 - ce),
            (2, 3) => w * m(PI + e - delta_xi + theta) - l * (2.0 + cd - ce),
            (2, 4) => w * m(PI + e - delta_xi + theta) - l * (-cd - ce),
            (2, 5) | (5, 2) => 0.0,
            (3, 4) => w * m(2.0 * e - delta_xi) - l * (-2.0 * ce - cd - ct),
            (3, 5) => w * m(e - theta - PI) - l * (-ce - ct),
            (4, 4) | (6, 6) => w * m(2.0 * e - delta_xi) - l * (2.0 - 2.0 * ce - cd + ct),
            (4, 5) => w * m(PI + e - theta) - l * (2.0 - ce + ct),
            (4, 6) => w * m(PI - delta_xi) - l * (2.0 - cd + ct),
            (4, 1) | (6, 3) => w * m(PI - delta_xi) - l * (cd + ct),
            (5, 6) => w * m(e - delta_xi + theta) - l * (2.0 - cd - ce),
            (5, 1) => w * m(e - delta_xi + theta) - l * (cd - ce),
            (6, 1) => w * m(2.0 * e - delta_xi) - l * (-2.0 * ce + cd + ct),
            (6, 2) => w * m(e - theta) - l * (-ce + ct),
            // unreachable for δξ in (0, π); evaluate the integral directly
            _ => blocking_f_numeric(lambda, theta, delta_xi, r_max),
        };
        (f.max(0.0), FBranch::Zones(a, b))
    } else {
        let a = u8::from(modone(-theta) >= PI);
        let b = u8::from(modone(delta_xi - theta) >= PI);
        let base = w * m(PI - delta_xi);
        let f = match (a, b) {
            (0, 0) => base - lambda * (2.0 + cd - ct),
            (0, _) => base - lambda * (-cd - ct),
            (1, 1) => base - lambda * (2.0 - cd + ct),
            _ => base - lambda * (cd + ct),
        };
        (f.max(0.0), FBranch::Saturated(a, b))
    }
}

pub fn blocking_f(lambda: f64, theta: f64, delta_xi: f64, r_max: f64) -> f64 {
    blocking_f_branch(lambda, theta, delta_xi, r_max).0
}

/// Direct numerical evaluation of the same measure:
/// `∫_{δξ}^{π} max(0, r_max|sin θ| − λ|sin(β − θ)|) dβ`.
///
/// The integrand is smooth between its kinks, so the interval is split there
/// and each piece is integrated by adaptive Simpson.
pub fn blocking_f_numeric(lambda: f64, theta: f64, delta_xi: f64, r_max: f64) -> f64 {
    let w = r_max * theta.sin().abs();
    let g = |b: f64| (w - lambda * (b - theta).sin().abs()).max(0.0);
    let e = eta(lambda, theta, r_max);
    let mut cuts = vec![delta_xi, PI];
    for k in -3..=3 {
        for off in [0.0, e, PI - e, PI, PI + e, TAU - e] {
            let t = theta + off + TAU * k as f64;
            if t > delta_xi && t < PI {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|c| adaptive_simpson(&g, c[0], c[1], 1e-13, 40))
        .sum()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}

/// Probability of a whole, unblocked detection of an edge that leaves a
/// concave vertex with `δξ = γ − π`.
pub fn q_d_edge_concave(lambda: f64, theta: f64, delta_xi: f64, arena: &ArenaParams) -> f64 {
    if arena.reach(theta) == 0.0 {
        return 0.0;
    }
    blocking_f(lambda, theta, delta_xi, arena.r_max) / arena.denominator(theta)
}

pub fn expected_detectors_edge_concave(lambda: f64, thetas: &[f64], delta_xi: f64, arena: &ArenaParams) -> f64 {
    thetas
        .iter()
        .map(|&t| q_d_edge_concave(lambda, t, delta_xi, arena))
        .sum()
}

/// Same as [`q_d_edge_concave`] for the edge that *enters* the concave
/// vertex. Mirroring the polygon maps it to the outgoing case with `θ → −θ`.
pub fn q_d_edge_concave_incoming(lambda: f64, theta: f64, delta_xi: f64, arena: &ArenaParams) -> f64 {
    q_d_edge_concave(lambda, -theta, delta_xi, arena)
}
