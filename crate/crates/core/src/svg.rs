//! Self-contained SVG 1.1 figures.

use std::fmt::Write;

use crate::flow::AscentPath;
use crate::geometry::{Rect, Vec2};
use crate::levelset::{GridSpec, Mask};

const PANEL: f64 = 360.0;
const GAP: f64 = 30.0;
const TITLE: f64 = 22.0;

/// Maps plane coordinates into one panel, `y` pointing up.
struct Frame {
    view: Rect,
    ox: f64,
    oy: f64,
    scale: f64,
}

impl Frame {
    fn new(view: Rect, ox: f64, oy: f64) -> Self {
        let scale = PANEL / view.width().max(view.height()).max(f64::MIN_POSITIVE);
        Frame { view, ox, oy, scale }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (self.ox + (p.x - self.view.min.x) * self.scale, self.oy + PANEL - (p.y - self.view.min.y) * self.scale)
    }
}

/// What the four-panel figure shows.
pub struct FigureInput<'a> {
    pub points: &'a [Vec2],
    pub paths: &'a [AscentPath],
    /// Leading vertices dropped from each path in the trimmed panel.
    pub trims: &'a [usize],
    pub grid: &'a GridSpec,
    pub mask: &'a Mask,
}

/// The data bounding box grown by 5% of its extent on every side.
pub fn view_box(points: &[Vec2]) -> Rect {
    let b = Rect::bounding(points).unwrap_or(Rect::unit());
    let mx = 0.05 * b.width().max(f64::EPSILON);
    let my = 0.05 * b.height().max(f64::EPSILON);
    Rect::new(b.min.x - mx, b.max.x + mx, b.min.y - my, b.max.y + my)
}

fn polyline(out: &mut String, frame: &Frame, vertices: &[Vec2]) {
    if vertices.len() < 2 {
        return;
    }
    out.push_str("<polyline points=\"");
    for (k, v) in vertices.iter().enumerate() {
        let (x, y) = frame.map(*v);
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.2},{y:.2}");
    }
    out.push_str("\"/>\n");
}

fn panel_open(out: &mut String, frame: &Frame, id: &str, title: &str) {
    let _ = writeln!(
        out,
        "<g id=\"{id}\">\n<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{PANEL}\" height=\"{PANEL}\" fill=\"white\" stroke=\"#444\"/>",
        frame.ox, frame.oy
    );
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>", frame.ox, frame.oy - 6.0);
    let _ = writeln!(
        out,
        "<clipPath id=\"clip-{id}\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"{PANEL}\" height=\"{PANEL}\"/></clipPath>\n<g clip-path=\"url(#clip-{id})\">",
        frame.ox, frame.oy
    );
}

/// Data, ascent paths, trimmed paths and the level-set mask, in a 2×2 layout.
pub fn four_panel_figure(input: &FigureInput) -> String {
    let view = view_box(input.points);
    let width = 2.0 * PANEL + 3.0 * GAP;
    let height = 2.0 * (PANEL + TITLE) + 2.0 * GAP;
    let origin = |col: f64, row: f64| (GAP + col * (PANEL + GAP), GAP + TITLE + row * (PANEL + TITLE + GAP / 2.0));
    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    let (ox, oy) = origin(0.0, 0.0);
    let frame = Frame::new(view, ox, oy);
    panel_open(&mut out, &frame, "data", "A. data");
    out.push_str("<g fill=\"black\">\n");
    let radius = (PANEL / 250.0).max(0.8);
    for p in input.points {
        let (x, y) = frame.map(*p);
        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{radius:.2}\"/>");
    }
    out.push_str("</g>\n</g>\n</g>\n");

    for (col, row, id, title, trimmed) in [(1.0, 0.0, "paths", "B. ascent paths", false), (0.0, 1.0, "trimmed", "C. trimmed paths", true)] {
        let (ox, oy) = origin(col, row);
        let frame = Frame::new(view, ox, oy);
        panel_open(&mut out, &frame, id, title);
        out.push_str("<g fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"0.5\" stroke-opacity=\"0.6\">\n");
        for (k, path) in input.paths.iter().enumerate() {
            let start = if trimmed { input.trims.get(k).copied().unwrap_or(0).min(path.vertices.len() - 1) } else { 0 };
            polyline(&mut out, &frame, &path.vertices[start..]);
        }
        out.push_str("</g>\n</g>\n</g>\n");
    }

    let (ox, oy) = origin(1.0, 1.0);
    let frame = Frame::new(view, ox, oy);
    panel_open(&mut out, &frame, "levelset", "D. level set");
    let g = input.grid;
    let (hw, hh) = (0.5 * g.dx() * frame.scale, 0.5 * g.dy() * frame.scale);
    out.push_str("<g fill=\"#b22222\" stroke=\"none\">\n");
    // One rectangle per horizontal run of member nodes.
    for j in 0..g.ny {
        let mut i = 0;
        while i < g.nx {
            if !input.mask.get(i, j) {
                i += 1;
                continue;
            }
            let start = i;
            while i < g.nx && input.mask.get(i, j) {
                i += 1;
            }
            let (x0, y0) = frame.map(g.node(start, j));
            let (x1, _) = frame.map(g.node(i - 1, j));
            let _ = writeln!(out, "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/>", x0 - hw, y0 - hh, x1 - x0 + 2.0 * hw, 2.0 * hh);
        }
    }
    out.push_str("</g>\n</g>\n</g>\n</svg>\n");
    out
}
