//! SVG output for nets.
//!
//! Everything is drawn inside one group flipped to mathematical orientation,
//! so coordinates in the file are the net's own coordinates.

use icnet::confocal::{ConfocalConic, ConicKind};
use icnet::net::{envelope_samples, Branch, CheckerboardNet};
use icnet::OrientedLine;
use std::fmt::Write as _;

const MARGIN: f64 = 0.1;
const CONIC_SAMPLES: usize = 720;
const ENVELOPE_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl ViewBox {
    /// Bounding box of all circles plus a 10% margin on every side; the unit
    /// square around the origin when there are none.
    pub fn around_circles(net: &CheckerboardNet) -> Self {
        let mut b = ViewBox {
            x_min: f64::INFINITY,
            y_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for c in &net.circles {
            let (x, y, r) = (c.circle.cx, c.circle.cy, c.circle.r.abs());
            if !(x.is_finite() && y.is_finite() && r.is_finite()) {
                continue;
            }
            b.x_min = b.x_min.min(x - r);
            b.x_max = b.x_max.max(x + r);
            b.y_min = b.y_min.min(y - r);
            b.y_max = b.y_max.max(y + r);
        }
        if !(b.x_min <= b.x_max) {
            return ViewBox {
                x_min: -1.0,
                y_min: -1.0,
                x_max: 1.0,
                y_max: 1.0,
            };
        }
        let extent = (b.x_max - b.x_min).max(b.y_max - b.y_min).max(1e-9);
        let (mx, my) = (
            MARGIN * (b.x_max - b.x_min).max(1e-3 * extent),
            MARGIN * (b.y_max - b.y_min).max(1e-3 * extent),
        );
        ViewBox {
            x_min: b.x_min - mx,
            y_min: b.y_min - my,
            x_max: b.x_max + mx,
            y_max: b.y_max + my,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    fn contains(&self, x: f64, y: f64, slack: f64) -> bool {
        let (sx, sy) = (slack * self.width(), slack * self.height());
        x >= self.x_min - sx && x <= self.x_max + sx && y >= self.y_min - sy && y <= self.y_max + sy
    }

    /// Segment of `l` inside the box (Liang-Barsky).
    pub fn clip(&self, l: &OrientedLine) -> Option<((f64, f64), (f64, f64))> {
        let (v, w, d) = (l.v(), l.w(), l.d());
        let n2 = v * v + w * w;
        let (px, py) = (d * v / n2, d * w / n2);
        let (dx, dy) = (-w, v);
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for (p, q) in [
            (-dx, px - self.x_min),
            (dx, self.x_max - px),
            (-dy, py - self.y_min),
            (dy, self.y_max - py),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else if p < 0.0 {
                t0 = t0.max(q / p);
            } else {
                t1 = t1.min(q / p);
            }
        }
        (t0 < t1).then_some(((px + t0 * dx, py + t0 * dy), (px + t1 * dx, py + t1 * dy)))
    }
}

/// Overlays beyond lines and circles.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RenderOptions {
    pub width_px: u32,
    pub conic: Option<ConfocalConic>,
    pub show_conic: bool,
    pub show_envelope: bool,
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

/// Polyline through the points, broken at `None` and at points far outside
/// the box.
fn path_data(points: impl IntoIterator<Item = Option<(f64, f64)>>, view: &ViewBox) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for p in points {
        match p {
            Some((x, y)) if view.contains(x, y, 1.0) => {
                let _ = write!(
                    d,
                    "{}{},{} ",
                    if pen_down { "L" } else { "M" },
                    num(x),
                    num(y)
                );
                pen_down = true;
            }
            _ => pen_down = false,
        }
    }
    d.trim_end().to_owned()
}

/// Points of the conic itself (not its envelope): an ellipse or both
/// branches of a hyperbola.
pub fn conic_points(conic: &ConfocalConic, view: &ViewBox) -> Vec<Option<(f64, f64)>> {
    let (alpha, beta) = (conic.alpha(), conic.beta());
    match conic.kind() {
        ConicKind::Elliptic => (0..=CONIC_SAMPLES)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / CONIC_SAMPLES as f64;
                Some((alpha * t.cos(), beta * t.sin()))
            })
            .collect(),
        ConicKind::Hyperbolic => {
            let reach = [view.x_min, view.x_max, view.y_min, view.y_max]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let t_max = (reach / beta).asinh().max((reach / alpha).max(1.0).acosh()) + 0.1;
            let half = CONIC_SAMPLES / 2;
            let mut pts = Vec::with_capacity(CONIC_SAMPLES + 3);
            for sign in [1.0, -1.0] {
                pts.extend((0..=half).map(|i| {
                    let t = -t_max + 2.0 * t_max * i as f64 / half as f64;
                    Some((sign * alpha * t.cosh(), beta * t.sinh()))
                }));
                pts.push(None);
            }
            pts
        }
    }
}

/// Envelope of the conic's tangent lines, sampled over one period.
pub fn envelope_points(conic: &ConfocalConic) -> Vec<Option<(f64, f64)>> {
    let period = 4.0 * conic.quarter_period();
    let mut pts = Vec::new();
    for branch in [Branch::Plus, Branch::Minus] {
        pts.extend(envelope_samples(
            |psi| conic.base_point(psi, branch),
            0.0,
            period,
            ENVELOPE_SAMPLES,
        ));
        pts.push(None);
    }
    pts
}

pub fn render(net: &CheckerboardNet, opts: &RenderOptions) -> String {
    let view = ViewBox::around_circles(net);
    let width_px = opts.width_px.max(1);
    let height_px = ((width_px as f64) * view.height() / view.width())
        .round()
        .max(1.0) as u32;
    let unit = view.width() / width_px as f64;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width_px}\" height=\"{height_px}\" viewBox=\"{} {} {} {}\">",
        num(view.x_min),
        num(-view.y_max),
        num(view.width()),
        num(view.height())
    );
    let _ = writeln!(
        out,
        "<g id=\"net\" transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"{}\">",
        num(unit)
    );
    if !net.vertical.is_empty() || !net.horizontal.is_empty() {
        out.push_str("<g id=\"lines\" stroke=\"#555555\">\n");
        for (family, lines) in [("l", &net.vertical), ("m", &net.horizontal)] {
            for nl in lines.iter() {
                if let Some(((x1, y1), (x2, y2))) = view.clip(&nl.line) {
                    let _ = writeln!(
                        out,
                        "<line class=\"{family}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                        num(x1),
                        num(y1),
                        num(x2),
                        num(y2)
                    );
                }
            }
        }
        out.push_str("</g>\n");
    }
    if !net.circles.is_empty() {
        out.push_str("<g id=\"circles\" stroke=\"#c0392b\">\n");
        for c in &net.circles {
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                num(c.circle.cx),
                num(c.circle.cy),
                num(c.circle.r.abs())
            );
        }
        out.push_str("</g>\n");
    }
    if let Some(conic) = &opts.conic {
        if opts.show_conic {
            let _ = writeln!(
                out,
                "<path id=\"conic\" stroke=\"#2471a3\" stroke-width=\"{}\" d=\"{}\"/>",
                num(2.0 * unit),
                path_data(conic_points(conic, &view), &view)
            );
        }
        if opts.show_envelope {
            let _ = writeln!(
                out,
                "<path id=\"envelope\" stroke=\"#27ae60\" stroke-dasharray=\"{} {}\" d=\"{}\"/>",
                num(4.0 * unit),
                num(4.0 * unit),
                path_data(envelope_points(conic), &view)
            );
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
