//! Deterministic SVG renderings of packings and arrays.

use std::fmt::Write as _;

use crate::geometry::{BBox, ConvexPiece, Placement};
use crate::offline::OfflineResult;
use crate::rat::Rat;
use crate::sorting::SortArray;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];
const TARGET_WIDTH: f64 = 960.0;
const MARGIN: f64 = 20.0;
const LEGEND: f64 = 24.0;

/// What to draw.
#[derive(Clone, Debug, Default)]
pub struct Scene {
    pub pieces: Vec<ConvexPiece>,
    /// Drawn as outlines.
    pub boxes: Vec<ConvexPiece>,
    /// Strip or container frames, drawn as dashed rectangles.
    pub frames: Vec<BBox>,
    pub legend: String,
}

impl Scene {
    pub fn from_placements(placements: &[Placement]) -> Scene {
        Scene {
            pieces: placements.iter().map(Placement::placed).collect(),
            ..Scene::default()
        }
    }
}

struct View {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl View {
    fn x(&self, v: &Rat) -> f64 {
        MARGIN + (v.to_f64() - self.x0) * self.scale
    }

    fn y(&self, v: &Rat) -> f64 {
        MARGIN + LEGEND + (self.y1 - v.to_f64()) * self.scale
    }
}

fn extent(scene: &Scene) -> Option<BBox> {
    scene
        .pieces
        .iter()
        .chain(&scene.boxes)
        .map(ConvexPiece::bbox)
        .chain(scene.frames.iter().cloned())
        .reduce(|a, b| a.union(&b))
}

fn points(view: &View, p: &ConvexPiece) -> String {
    let mut s = String::new();
    for (i, v) in p.vertices().iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{:.3},{:.3}", view.x(&v.x), view.y(&v.y)).expect("writing to a string");
    }
    s
}

/// Renders a scene with y pointing up.
pub fn render(scene: &Scene) -> String {
    let b = extent(scene).unwrap_or(BBox {
        x_min: Rat::zero(),
        x_max: Rat::one(),
        y_min: Rat::zero(),
        y_max: Rat::one(),
    });
    let (w, h) = (b.width().to_f64().max(1e-9), b.height().to_f64().max(1e-9));
    let scale = TARGET_WIDTH / w.max(h);
    let view = View {
        x0: b.x_min.to_f64(),
        y1: b.y_max.to_f64(),
        scale,
    };
    let width = 2.0 * MARGIN + w * scale;
    let height = 2.0 * MARGIN + LEGEND + h * scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for f in &scene.frames {
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black" stroke-dasharray="4 3"/>"#,
            view.x(&f.x_min),
            view.y(&f.y_max),
            f.width().to_f64() * scale,
            f.height().to_f64() * scale
        );
    }
    for (i, p) in scene.pieces.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{}" fill-opacity="0.8" stroke="black" stroke-width="0.5"/>"#,
            points(&view, p),
            PALETTE[i % PALETTE.len()]
        );
    }
    for bx in &scene.boxes {
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="none" stroke="#555" stroke-width="0.7"/>"##,
            points(&view, bx)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.0}" font-family="monospace" font-size="14">{}</text>"#,
        MARGIN + 12.0,
        escape(&scene.legend)
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A strip packing with the strip outline from 0 to the occupied width.
pub fn strip_scene(placements: &[Placement], height: &Rat, boxes: Vec<ConvexPiece>) -> Scene {
    let mut scene = Scene::from_placements(placements);
    let width = scene
        .pieces
        .iter()
        .map(|p| p.bbox().x_max)
        .max()
        .unwrap_or_else(Rat::zero);
    scene.legend = format!("pieces {}  width {:.4}", placements.len(), width.to_f64());
    scene.frames.push(BBox {
        x_min: Rat::zero(),
        x_max: width,
        y_min: Rat::zero(),
        y_max: height.clone(),
    });
    scene.boxes = boxes;
    scene
}

/// An offline result with its mini-containers. Bins are laid out side by
/// side with a gap of 1/10.
pub fn offline_scene(result: &OfflineResult) -> Scene {
    let gap = Rat::new(11, 10);
    let bin_shift = |bin: Option<usize>| match bin {
        Some(b) => &gap * Rat::from_usize(b),
        None => Rat::zero(),
    };
    let mut scene = Scene::default();
    for c in &result.containers {
        let dx = bin_shift(c.bin);
        let x = &c.origin.x + &dx;
        scene.frames.push(BBox {
            x_max: &x + &c.container.width,
            x_min: x,
            y_min: c.origin.y.clone(),
            y_max: &c.origin.y + &c.container.height,
        });
    }
    for (i, p) in result.placements.iter().enumerate() {
        let bin = result.bins.as_ref().map(|b| b[i]);
        let mut q = p.clone();
        q.offset.x = &q.offset.x + &bin_shift(bin);
        scene.pieces.push(q.placed());
    }
    if let Some(bins) = &result.bins {
        let count = bins.iter().map(|b| b + 1).max().unwrap_or(0);
        for b in 0..count {
            let x = bin_shift(Some(b));
            scene.frames.push(BBox {
                x_max: &x + Rat::one(),
                x_min: x,
                y_min: Rat::zero(),
                y_max: Rat::one(),
            });
        }
    }
    scene.legend = format!(
        "{}  cost {:.4}  lower bound {:.4}  ratio {:.3}",
        result.problem,
        result.cost.to_f64(),
        result.lower_bound.to_f64(),
        result.ratio.to_f64()
    );
    scene
}

/// An array as a bar chart: one bar per filled cell, height the value.
pub fn render_array(array: &SortArray) -> String {
    let cells = array.cells();
    let bar = (TARGET_WIDTH / cells.len().max(1) as f64).max(0.5);
    let width = 2.0 * MARGIN + bar * cells.len() as f64;
    let plot = 200.0;
    let height = 2.0 * MARGIN + LEGEND + plot;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let base = MARGIN + LEGEND + plot;
    for (i, c) in cells.iter().enumerate() {
        let x = MARGIN + i as f64 * bar;
        match c {
            Some(v) => {
                let h = v.to_f64() * plot;
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.3}" y="{:.3}" width="{bar:.3}" height="{h:.3}" fill="{}"/>"#,
                    base - h,
                    PALETTE[0]
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    r##"<rect x="{x:.3}" y="{:.3}" width="{bar:.3}" height="2" fill="#ccc"/>"##,
                    base - 2.0
                );
            }
        }
    }
    let cost = array.total_cost().map(|c| format!("{:.4}", c.to_f64())).unwrap_or_else(|_| "-".into());
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.0}" font-family="monospace" font-size="14">cells {}  filled {}  cost {cost}</text>"#,
        MARGIN + 12.0,
        cells.len(),
        array.filled_count()
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn empty_packing_draws_the_strip_only() {
        let svg = render(&strip_scene(&[], &Rat::one(), Vec::new()));
        assert_eq!(svg.matches("<polygon").count(), 0);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    }

    #[test]
    fn three_pieces_three_fills() {
        let placements: Vec<Placement> = (0..3)
            .map(|i| Placement::new(ConvexPiece::unit_square(), Point::int(i, 0)))
            .collect();
        let svg = render(&strip_scene(&placements, &Rat::one(), Vec::new()));
        assert_eq!(svg.matches("<polygon").count(), 3);
        for c in &PALETTE[..3] {
            assert!(svg.contains(c));
        }
        assert_eq!(svg, render(&strip_scene(&placements, &Rat::one(), Vec::new())));
    }

    #[test]
    fn array_bars() {
        let mut a = SortArray::with_capacity(3, 3);
        a.place(1, Rat::new(1, 2)).unwrap();
        let svg = render_array(&a);
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("filled 1"));
    }
}
