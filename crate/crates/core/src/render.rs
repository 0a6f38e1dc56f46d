//! Minimal SVG output: polygons, estimated shapes and line charts.

use std::fmt::Write as _;

use crate::assembly::ShapeEstimate;
use crate::geometry::{Point, PolygonTarget};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 30.0;

struct Frame {
    min: Point,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(points: &[Point]) -> Self {
        let (mut lo, mut hi) = (
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        Frame {
            min: lo,
            scale,
            height: hi.y - lo.y,
        }
    }

    // y grows downwards in SVG
    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            MARGIN + (self.height - (p.y - self.min.y)) * self.scale,
        )
    }
}

fn path(frame: &Frame, pts: &[Point]) -> String {
    let mut d = String::new();
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = frame.map(*p);
        let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{h}\" viewBox=\"0 0 {SIZE} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
        escape(title),
        h = SIZE + 20.0
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rotation and translation taking `a` onto `b` (same length, matched by
/// index) in the least-squares sense, and the residual sum of squares.
fn rigid_fit(a: &[Point], b: &[Point]) -> (f64, Point, Point, f64) {
    let n = a.len() as f64;
    let ca = a.iter().fold(Point::default(), |s, &p| s + p) * (1.0 / n);
    let cb = b.iter().fold(Point::default(), |s, &p| s + p) * (1.0 / n);
    let (mut sc, mut ss) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (p, q) = (*p - ca, *q - cb);
        sc += p.dot(q);
        ss += p.cross(q);
    }
    let rot = ss.atan2(sc);
    let rss = a
        .iter()
        .zip(b)
        .map(|(p, q)| {
            let d = (*p - ca).rotate(rot) - (*q - cb);
            d.dot(d)
        })
        .sum();
    (rot, ca, cb, rss)
}

/// `est` moved onto `truth` by the best rigid motion over all cyclic vertex
/// correspondences; centroids are matched when the counts differ.
pub fn align_to(est: &[Point], truth: &[Point]) -> Vec<Point> {
    let n = est.len();
    let mut best: Option<(f64, f64, Point, Point)> = None;
    if n == truth.len() && n > 0 {
        for shift in 0..n {
            let b: Vec<Point> = (0..n).map(|i| truth[(i + shift) % n]).collect();
            let (rot, ca, cb, rss) = rigid_fit(est, &b);
            if best.is_none_or(|x| rss < x.0) {
                best = Some((rss, rot, ca, cb));
            }
        }
    }
    let (rot, ca, cb) = match best {
        Some((_, r, a, b)) => (r, a, b),
        None => {
            let c = |v: &[Point]| v.iter().fold(Point::default(), |s, &p| s + p) * (1.0 / v.len().max(1) as f64);
            (0.0, c(est), c(truth))
        }
    };
    est.iter().map(|&p| (p - ca).rotate(rot) + cb).collect()
}

/// A polygon outline.
pub fn polygon_svg(poly: &PolygonTarget, title: &str) -> String {
    let frame = Frame::fit(poly.vertices());
    let mut s = header(title);
    let _ = writeln!(
        s,
        "<path d=\"{}\" fill=\"#dde6f0\" stroke=\"#1f3b5c\" stroke-width=\"2\"/>",
        path(&frame, poly.vertices())
    );
    s.push_str("</svg>\n");
    s
}

/// An estimated shape, optionally over the ground truth aligned by the best
/// rigid fit.
pub fn shape_svg(shape: &ShapeEstimate, truth: Option<&PolygonTarget>, title: &str) -> String {
    let est = shape.vertices();
    let (est, truth_pts) = match truth {
        Some(t) => (align_to(&est, t.vertices()), Some(t.vertices().to_vec())),
        None => (est, None),
    };
    let mut all = est.clone();
    if let Some(t) = &truth_pts {
        all.extend_from_slice(t);
    }
    let frame = Frame::fit(&all);
    let mut s = header(title);
    if let Some(t) = &truth_pts {
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"#999999\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>",
            path(&frame, t)
        );
    }
    let _ = writeln!(
        s,
        "<path d=\"{}\" fill=\"#f3dccb\" fill-opacity=\"0.6\" stroke=\"#b0471e\" stroke-width=\"2\"/>",
        path(&frame, &est)
    );
    for p in &est {
        let (x, y) = frame.map(*p);
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"#b0471e\"/>");
    }
    s.push_str("</svg>\n");
    s
}

/// Stand-in image when there is nothing to draw.
pub fn placeholder_svg(message: &str) -> String {
    let mut s = header("no shape");
    let _ = writeln!(
        s,
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#a00\">{}</text>",
        escape(message),
        x = SIZE / 2.0,
        y = SIZE / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Named polyline.
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers instead of a line.
    pub markers: bool,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Simple x/y chart with axes starting at the data minimum.
pub fn chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 400.0);
    let (l, r, t, b) = (60.0, 150.0, 30.0, 45.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0_f64, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| l + (x - x0) / (x1 - x0) * (w - l - r);
    let py = |y: f64| h - b - (y - y0) / (y1 - y0) * (h - t - b);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{l}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n\
         <path d=\"M{l},{t} L{l},{yb} L{xr},{yb}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{xm}\" y=\"{yl}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n\
         <text x=\"14\" y=\"{ym}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 {ym})\">{}</text>\n",
        escape(title),
        escape(x_label),
        escape(y_label),
        yb = h - b,
        xr = w - r,
        xm = (l + w - r) / 2.0,
        yl = h - 10.0,
        ym = (t + h - b) / 2.0,
    );
    for (v, anchor_y) in [(x0, true), (x1, true), (y0, false), (y1, false)] {
        if anchor_y {
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{v:.3}</text>", px(v), h - b + 14.0);
        } else {
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{v:.4}</text>", l - 4.0, py(v) + 3.0);
        }
    }
    for (i, se) in series.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        if se.markers {
            for &(x, y) in &se.points {
                let _ = writeln!(
                    s,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"none\" stroke=\"{c}\"/>",
                    px(x),
                    py(y)
                );
            }
        } else {
            let mut d = String::new();
            for (k, &(x, y)) in se.points.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, px(x), py(y));
            }
            let _ = writeln!(s, "<path d=\"{d}\" fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\"/>");
        }
        let ly = t + 16.0 * i as f64 + 10.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{c}\">{}</text>",
            w - r + 10.0,
            escape(&se.name)
        );
    }
    s.push_str("</svg>\n");
    s
}
