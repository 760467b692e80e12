//! Exact 2-D kernel for convex polygons.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(from = "(Rat, Rat)", into = "(Rat, Rat)")]
pub struct Point {
    pub x: Rat,
    pub y: Rat,
}

impl From<(Rat, Rat)> for Point {
    fn from((x, y): (Rat, Rat)) -> Self {
        Point { x, y }
    }
}

impl From<Point> for (Rat, Rat) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

impl Point {
    pub fn new(x: Rat, y: Rat) -> Point {
        Point { x, y }
    }

    pub fn origin() -> Point {
        Point::new(Rat::zero(), Rat::zero())
    }

    /// Shorthand for small integer-ratio coordinates.
    pub fn ratio(xn: i64, xd: i64, yn: i64, yd: i64) -> Point {
        Point::new(Rat::new(xn, xd), Rat::new(yn, yd))
    }

    pub fn int(x: i64, y: i64) -> Point {
        Point::new(Rat::from_int(x), Rat::from_int(y))
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn neg(&self) -> Point {
        Point::new(-&self.x, -&self.y)
    }
}

/// `(b - a) x (c - a)`; positive for a left turn.
pub fn orient(a: &Point, b: &Point, c: &Point) -> Rat {
    let abx = &b.x - &a.x;
    let aby = &b.y - &a.y;
    let acx = &c.x - &a.x;
    let acy = &c.y - &a.y;
    abx * acy - aby * acx
}

pub(crate) fn cross(u: &Point, v: &Point) -> Rat {
    &u.x * &v.y - &u.y * &v.x
}

fn dot(u: &Point, v: &Point) -> Rat {
    &u.x * &v.x + &u.y * &v.y
}

/// Axis-aligned bounding box.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BBox {
    pub x_min: Rat,
    pub x_max: Rat,
    pub y_min: Rat,
    pub y_max: Rat,
}

impl BBox {
    pub fn width(&self) -> Rat {
        &self.x_max - &self.x_min
    }

    pub fn height(&self) -> Rat {
        &self.y_max - &self.y_min
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            x_min: self.x_min.clone().min(o.x_min.clone()),
            x_max: self.x_max.clone().max(o.x_max.clone()),
            y_min: self.y_min.clone().min(o.y_min.clone()),
            y_max: self.y_max.clone().max(o.y_max.clone()),
        }
    }

    /// True when the open boxes intersect.
    pub fn open_overlap(&self, o: &BBox) -> bool {
        self.x_min < o.x_max && o.x_min < self.x_max && self.y_min < o.y_max && o.y_min < self.y_max
    }
}

/// Width, height and area of a piece.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Measure {
    pub width: Rat,
    pub height: Rat,
    pub area: Rat,
}

/// Segment from a bottommost to a topmost vertex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Spine {
    pub bottom: Point,
    pub top: Point,
}

impl Spine {
    /// Horizontal displacement per unit height (dx/dy).
    pub fn slope(&self) -> Rat {
        (&self.top.x - &self.bottom.x) / (&self.top.y - &self.bottom.y)
    }
}

/// A strictly convex polygon with positive area and exact vertices in
/// counter-clockwise order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "PieceRepr", into = "PieceRepr")]
pub struct ConvexPiece {
    vertices: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct PieceRepr {
    vertices: Vec<Point>,
}

impl TryFrom<PieceRepr> for ConvexPiece {
    type Error = Error;
    fn try_from(r: PieceRepr) -> Result<Self> {
        ConvexPiece::new(r.vertices)
    }
}

impl From<ConvexPiece> for PieceRepr {
    fn from(p: ConvexPiece) -> Self {
        PieceRepr {
            vertices: p.vertices,
        }
    }
}

/// Strict convex hull (no collinear vertices), counter-clockwise, starting at
/// the lowest-leftmost point.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.y.cmp(&b.y).then_with(|| a.x.cmp(&b.x)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    // Monotone chain over (y, x) order produces the right chain then the left chain.
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !orient(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_negative() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !orient(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_negative() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // The chains above run clockwise in (y, x) order; flip to counter-clockwise.
    lower.reverse();
    let start = lower
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.y.cmp(&b.y).then_with(|| a.x.cmp(&b.x)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    lower.rotate_left(start);
    lower
}

impl ConvexPiece {
    /// Validates the vertex list, accepting either orientation.
    pub fn new(mut vertices: Vec<Point>) -> Result<ConvexPiece> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPiece(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let twice_area = shoelace(&vertices);
        if twice_area.is_zero() {
            return Err(Error::InvalidPiece("zero area".into()));
        }
        if twice_area.is_negative() {
            vertices.reverse();
        }
        let hull = convex_hull(&vertices);
        if hull.len() != vertices.len() {
            return Err(Error::InvalidPiece(
                "vertices are not in strictly convex position".into(),
            ));
        }
        let k = vertices.len();
        let offset = vertices
            .iter()
            .position(|v| *v == hull[0])
            .ok_or_else(|| Error::InvalidPiece("hull mismatch".into()))?;
        for (i, h) in hull.iter().enumerate() {
            if vertices[(offset + i) % k] != *h {
                return Err(Error::InvalidPiece(
                    "vertex order is not convex".into(),
                ));
            }
        }
        Ok(ConvexPiece { vertices: hull })
    }

    /// Convex hull of a point set; errors if it is degenerate.
    pub fn hull_of(points: &[Point]) -> Result<ConvexPiece> {
        let hull = convex_hull(points);
        if hull.len() < 3 {
            return Err(Error::InvalidPiece("degenerate hull".into()));
        }
        Ok(ConvexPiece { vertices: hull })
    }

    /// Axis-aligned rectangle `[x, x+w] x [y, y+h]`.
    pub fn rectangle(x: Rat, y: Rat, w: Rat, h: Rat) -> Result<ConvexPiece> {
        let x1 = &x + &w;
        let y1 = &y + &h;
        ConvexPiece::new(vec![
            Point::new(x.clone(), y.clone()),
            Point::new(x1.clone(), y.clone()),
            Point::new(x1, y1.clone()),
            Point::new(x, y1),
        ])
    }

    pub fn unit_square() -> ConvexPiece {
        ConvexPiece::rectangle(Rat::zero(), Rat::zero(), Rat::one(), Rat::one())
            .expect("unit square is valid")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn translate(&self, by: &Point) -> ConvexPiece {
        ConvexPiece {
            vertices: self.vertices.iter().map(|v| v.add(by)).collect(),
        }
    }

    /// Point reflection through the origin.
    pub fn reflect(&self) -> ConvexPiece {
        let mut vertices: Vec<Point> = self.vertices.iter().map(Point::neg).collect();
        let start = lowest_leftmost(&vertices);
        vertices.rotate_left(start);
        ConvexPiece { vertices }
    }

    pub fn bbox(&self) -> BBox {
        let mut b = BBox {
            x_min: self.vertices[0].x.clone(),
            x_max: self.vertices[0].x.clone(),
            y_min: self.vertices[0].y.clone(),
            y_max: self.vertices[0].y.clone(),
        };
        for v in &self.vertices[1..] {
            if v.x < b.x_min {
                b.x_min = v.x.clone();
            }
            if v.x > b.x_max {
                b.x_max = v.x.clone();
            }
            if v.y < b.y_min {
                b.y_min = v.y.clone();
            }
            if v.y > b.y_max {
                b.y_max = v.y.clone();
            }
        }
        b
    }

    pub fn width(&self) -> Rat {
        self.bbox().width()
    }

    pub fn height(&self) -> Rat {
        self.bbox().height()
    }

    pub fn area(&self) -> Rat {
        shoelace(&self.vertices) / Rat::from_int(2)
    }

    pub fn measure(&self) -> Measure {
        let b = self.bbox();
        Measure {
            width: b.width(),
            height: b.height(),
            area: self.area(),
        }
    }

    /// Squared diameter (largest squared vertex distance).
    pub fn diameter_sq(&self) -> Rat {
        let mut best = Rat::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                let d = a.sub(b);
                let d2 = dot(&d, &d);
                if d2 > best {
                    best = d2;
                }
            }
        }
        best
    }

    /// Bottommost and topmost vertices, ties broken by smallest x.
    pub fn spine(&self) -> Spine {
        let by_y_then_x = |a: &&Point, b: &&Point| a.y.cmp(&b.y).then_with(|| a.x.cmp(&b.x));
        let bottom = self.vertices.iter().min_by(by_y_then_x).expect("non-empty");
        let top = self
            .vertices
            .iter()
            .max_by(|a, b| a.y.cmp(&b.y).then_with(|| b.x.cmp(&a.x)))
            .expect("non-empty");
        Spine {
            bottom: bottom.clone(),
            top: top.clone(),
        }
    }

    /// The horizontal parallelogram spanned by the horizontal tangents and
    /// the two tangents parallel to a segment from a bottommost to a
    /// topmost point. When the top or bottom is an edge, every pair of edge
    /// endpoints is tried and the narrowest result kept, preferring the
    /// spine on ties.
    pub fn bounding_parallelogram(&self) -> HorizontalParallelogram {
        let spine = self.spine();
        let y_min = &spine.bottom.y;
        let y_max = &spine.top.y;
        let bottoms: Vec<&Point> = self.vertices.iter().filter(|v| v.y == *y_min).collect();
        let tops: Vec<&Point> = self.vertices.iter().filter(|v| v.y == *y_max).collect();
        let mut best = self.parallelogram_along(&spine);
        for b in &bottoms {
            for t in &tops {
                let candidate = self.parallelogram_along(&Spine {
                    bottom: (*b).clone(),
                    top: (*t).clone(),
                });
                if candidate.width() < best.width() {
                    best = candidate;
                }
            }
        }
        best
    }

    fn parallelogram_along(&self, spine: &Spine) -> HorizontalParallelogram {
        let slope = spine.slope();
        let y_min = spine.bottom.y.clone();
        let height = &spine.top.y - &y_min;
        // u(p) = x - y*slope is constant along lines parallel to the spine.
        let us: Vec<Rat> = self
            .vertices
            .iter()
            .map(|v| &v.x - &v.y * &slope)
            .collect();
        let u_min = us.iter().min().expect("non-empty").clone();
        let u_max = us.iter().max().expect("non-empty").clone();
        let anchor = Point::new(&u_min + &y_min * &slope, y_min);
        HorizontalParallelogram {
            anchor,
            base: u_max - u_min,
            shear: &slope * &height,
            height,
        }
    }

    /// Left and right x of the horizontal chord at height `y`, or `None`
    /// outside the piece's vertical extent.
    pub fn chord_at(&self, y: &Rat) -> Option<(Rat, Rat)> {
        let k = self.vertices.len();
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        let mut push = |x: Rat| {
            if lo.as_ref().is_none_or(|l| x < *l) {
                lo = Some(x.clone());
            }
            if hi.as_ref().is_none_or(|h| x > *h) {
                hi = Some(x);
            }
        };
        for i in 0..k {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % k];
            if a.y == *y {
                push(a.x.clone());
            }
            let crosses = (a.y < *y && *y < b.y) || (b.y < *y && *y < a.y);
            if crosses {
                let t = (y - &a.y) / (&b.y - &a.y);
                push(&a.x + t * (&b.x - &a.x));
            }
        }
        Some((lo?, hi?))
    }

    /// Distinct vertex y-coordinates in increasing order.
    pub fn vertex_ys(&self) -> Vec<Rat> {
        let mut ys: Vec<Rat> = self.vertices.iter().map(|v| v.y.clone()).collect();
        ys.sort();
        ys.dedup();
        ys
    }

    /// Closed point containment.
    pub fn contains(&self, p: &Point) -> bool {
        let k = self.vertices.len();
        (0..k).all(|i| !orient(&self.vertices[i], &self.vertices[(i + 1) % k], p).is_negative())
    }

    /// Open point containment.
    pub fn contains_strictly(&self, p: &Point) -> bool {
        let k = self.vertices.len();
        (0..k).all(|i| orient(&self.vertices[i], &self.vertices[(i + 1) % k], p).is_positive())
    }

    /// True when every vertex of `self` lies in the closed piece `outer`.
    pub fn inside(&self, outer: &ConvexPiece) -> bool {
        self.vertices.iter().all(|v| outer.contains(v))
    }

    /// Edge vectors in counter-clockwise order.
    pub fn edges(&self) -> Vec<Point> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| self.vertices[(i + 1) % k].sub(&self.vertices[i]))
            .collect()
    }
}

fn lowest_leftmost(v: &[Point]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.y.cmp(&b.y).then_with(|| a.x.cmp(&b.x)))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Twice the signed area.
fn shoelace(v: &[Point]) -> Rat {
    let k = v.len();
    (0..k)
        .map(|i| {
            let a = &v[i];
            let b = &v[(i + 1) % k];
            &a.x * &b.y - &b.x * &a.y
        })
        .sum()
}

/// A parallelogram with two horizontal edges.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HorizontalParallelogram {
    /// Bottom-left corner.
    pub anchor: Point,
    /// Length of the horizontal edges.
    pub base: Rat,
    /// x of the top-left corner minus x of the bottom-left corner.
    pub shear: Rat,
    pub height: Rat,
}

impl HorizontalParallelogram {
    pub fn new(anchor: Point, base: Rat, shear: Rat, height: Rat) -> Result<Self> {
        if !base.is_positive() || !height.is_positive() {
            return Err(Error::InvalidPiece(
                "parallelogram base and height must be positive".into(),
            ));
        }
        Ok(HorizontalParallelogram {
            anchor,
            base,
            shear,
            height,
        })
    }

    pub fn vertices(&self) -> [Point; 4] {
        let a = &self.anchor;
        let top_y = &a.y + &self.height;
        [
            a.clone(),
            Point::new(&a.x + &self.base, a.y.clone()),
            Point::new(&a.x + &self.shear + &self.base, top_y.clone()),
            Point::new(&a.x + &self.shear, top_y),
        ]
    }

    pub fn to_piece(&self) -> ConvexPiece {
        ConvexPiece::new(self.vertices().to_vec()).expect("positive base and height")
    }

    pub fn width(&self) -> Rat {
        &self.base + self.shear.abs()
    }

    pub fn area(&self) -> Rat {
        &self.base * &self.height
    }

    /// Shear per unit height.
    pub fn slope(&self) -> Rat {
        &self.shear / &self.height
    }
}

/// A piece together with the translation applied to it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Placement {
    pub piece: ConvexPiece,
    pub offset: Point,
}

impl Placement {
    pub fn new(piece: ConvexPiece, offset: Point) -> Placement {
        Placement { piece, offset }
    }

    /// The translated piece.
    pub fn placed(&self) -> ConvexPiece {
        self.piece.translate(&self.offset)
    }
}

/// True iff the open interiors of the two placed pieces intersect.
pub fn interior_overlap(a: &Placement, b: &Placement) -> bool {
    pieces_overlap(&a.placed(), &b.placed())
}

/// Separating-axis test on pieces in absolute coordinates. Touching
/// boundaries do not count as overlap.
pub fn pieces_overlap(a: &ConvexPiece, b: &ConvexPiece) -> bool {
    !has_separating_axis(a, b) && !has_separating_axis(b, a)
}

fn has_separating_axis(a: &ConvexPiece, b: &ConvexPiece) -> bool {
    a.edges().iter().any(|e| {
        let normal = Point::new(e.y.clone(), -&e.x);
        let (a_lo, a_hi) = project(a, &normal);
        let (b_lo, b_hi) = project(b, &normal);
        a_hi <= b_lo || b_hi <= a_lo
    })
}

fn project(p: &ConvexPiece, axis: &Point) -> (Rat, Rat) {
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for v in p.vertices() {
        let d = dot(v, axis);
        if lo.as_ref().is_none_or(|l| d < *l) {
            lo = Some(d.clone());
        }
        if hi.as_ref().is_none_or(|h| d > *h) {
            hi = Some(d);
        }
    }
    (lo.expect("non-empty"), hi.expect("non-empty"))
}

fn angle_half(v: &Point) -> u8 {
    if v.y.is_positive() || (v.y.is_zero() && v.x.is_positive()) {
        0
    } else {
        1
    }
}

fn angle_cmp(u: &Point, v: &Point) -> Ordering {
    angle_half(u)
        .cmp(&angle_half(v))
        .then_with(|| cross(v, u).cmp(&Rat::zero()))
}

/// Minkowski sum of two convex pieces.
pub fn minkowski_sum(a: &ConvexPiece, b: &ConvexPiece) -> ConvexPiece {
    let ea = a.edges();
    let eb = b.edges();
    let mut out = Vec::with_capacity(ea.len() + eb.len());
    let mut cur = a.vertices[0].add(&b.vertices[0]);
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        out.push(cur.clone());
        let step = if j >= eb.len() || (i < ea.len() && angle_cmp(&ea[i], &eb[j]) != Ordering::Greater) {
            if j < eb.len() && angle_cmp(&ea[i], &eb[j]) == Ordering::Equal {
                let s = ea[i].add(&eb[j]);
                j += 1;
                i += 1;
                s
            } else {
                i += 1;
                ea[i - 1].clone()
            }
        } else {
            j += 1;
            eb[j - 1].clone()
        };
        cur = cur.add(&step);
    }
    ConvexPiece::hull_of(&out).expect("sum of two pieces has positive area")
}

/// No-fit polygon: translations `t` for which `moving + t` overlaps the
/// interior of `fixed` form the interior of the returned piece.
pub fn no_fit_polygon(fixed: &ConvexPiece, moving: &ConvexPiece) -> ConvexPiece {
    minkowski_sum(fixed, &moving.reflect())
}

/// The region a packing must stay inside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    /// `x >= 0`, `0 <= y <= height`.
    Strip { height: Rat },
    /// Closed axis-aligned rectangle.
    Rect(BBox),
    /// No containment constraint.
    Plane,
}

/// A failed validity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    OutOfRegion { index: usize },
    Overlap { first: usize, second: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::OutOfRegion { index } => write!(f, "piece {index} leaves the region"),
            Violation::Overlap { first, second } => {
                write!(f, "pieces {first} and {second} overlap")
            }
        }
    }
}

fn in_region(b: &BBox, region: &Region) -> bool {
    match region {
        Region::Strip { height } => {
            !b.x_min.is_negative() && !b.y_min.is_negative() && b.y_max <= *height
        }
        Region::Rect(r) => {
            b.x_min >= r.x_min && b.x_max <= r.x_max && b.y_min >= r.y_min && b.y_max <= r.y_max
        }
        Region::Plane => true,
    }
}

/// Float separating-axis test that only answers when the gap dwarfs the
/// rounding error, so a `true` is exact.
fn clearly_apart(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, &(x, y)| m.max(x.abs()).max(y.abs()));
    let tol = 1e-9 * scale * scale;
    let apart_on = |p: &[(f64, f64)]| {
        (0..p.len()).any(|i| {
            let (x0, y0) = p[i];
            let (x1, y1) = p[(i + 1) % p.len()];
            let (nx, ny) = (y1 - y0, x0 - x1);
            let range = |q: &[(f64, f64)]| {
                q.iter()
                    .map(|&(x, y)| x * nx + y * ny)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)))
            };
            let (alo, ahi) = range(a);
            let (blo, bhi) = range(b);
            ahi + tol < blo || bhi + tol < alo
        })
    };
    apart_on(a) || apart_on(b)
}

/// Exact validity oracle for pieces given in absolute coordinates.
pub fn check_packing(pieces: &[ConvexPiece], region: &Region) -> std::result::Result<(), Violation> {
    let boxes: Vec<BBox> = pieces.iter().map(ConvexPiece::bbox).collect();
    for (index, b) in boxes.iter().enumerate() {
        if !in_region(b, region) {
            return Err(Violation::OutOfRegion { index });
        }
    }
    let floats: Vec<Vec<(f64, f64)>> = pieces
        .iter()
        .map(|p| p.vertices.iter().map(|v| (v.x.to_f64(), v.y.to_f64())).collect())
        .collect();
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&i, &j| boxes[i].x_min.cmp(&boxes[j].x_min).then(i.cmp(&j)));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if boxes[j].x_min >= boxes[i].x_max {
                break;
            }
            if boxes[i].open_overlap(&boxes[j])
                && !clearly_apart(&floats[i], &floats[j])
                && pieces_overlap(&pieces[i], &pieces[j])
            {
                return Err(Violation::Overlap {
                    first: i.min(j),
                    second: i.max(j),
                });
            }
        }
    }
    Ok(())
}

/// Validity oracle for placements.
pub fn check_placements(placements: &[Placement], region: &Region) -> std::result::Result<(), Violation> {
    let pieces: Vec<ConvexPiece> = placements.iter().map(Placement::placed).collect();
    check_packing(&pieces, region)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: &str, y: &str) -> Point {
        Point::new(x.parse().unwrap(), y.parse().unwrap())
    }

    fn triangle() -> ConvexPiece {
        ConvexPiece::new(vec![Point::int(0, 0), Point::int(1, 0), Point::int(0, 1)]).unwrap()
    }

    #[test]
    fn measure_examples() {
        let sq = ConvexPiece::unit_square().measure();
        assert_eq!((sq.width, sq.height, sq.area), (Rat::one(), Rat::one(), Rat::one()));
        let para = ConvexPiece::new(vec![pt("0", "0"), pt("1/2", "0"), pt("3/2", "1"), pt("1", "1")]).unwrap();
        assert_eq!(para.width(), Rat::new(3, 2));
        assert_eq!(para.area(), Rat::new(1, 2));
        let t = triangle().measure();
        assert_eq!((t.width, t.height, t.area), (Rat::one(), Rat::one(), Rat::new(1, 2)));
    }

    #[test]
    fn rejects_bad_pieces() {
        assert!(ConvexPiece::new(vec![Point::int(0, 0), Point::int(1, 0)]).is_err());
        assert!(ConvexPiece::new(vec![Point::int(0, 0), Point::int(1, 1), Point::int(2, 2)]).is_err());
        // collinear middle vertex
        assert!(ConvexPiece::new(vec![
            Point::int(0, 0),
            Point::int(1, 0),
            Point::int(2, 0),
            Point::int(0, 1)
        ])
        .is_err());
        // self-intersecting bow tie
        assert!(ConvexPiece::new(vec![
            Point::int(0, 0),
            Point::int(1, 1),
            Point::int(1, 0),
            Point::int(0, 1)
        ])
        .is_err());
    }

    #[test]
    fn clockwise_input_is_normalised() {
        let cw = ConvexPiece::new(vec![Point::int(0, 1), Point::int(1, 0), Point::int(0, 0)]).unwrap();
        assert_eq!(cw, triangle());
        assert!(cw.area().is_positive());
    }

    #[test]
    fn spine_examples() {
        let sq = ConvexPiece::unit_square().spine();
        assert_eq!(sq.bottom, Point::int(0, 0));
        assert_eq!(sq.top, Point::int(0, 1));
        assert_eq!(sq.slope(), Rat::zero());
        let t = triangle().spine();
        assert_eq!((t.bottom, t.top), (Point::int(0, 0), Point::int(0, 1)));
        let p = HorizontalParallelogram::new(Point::origin(), Rat::new(1, 3), Rat::new(-2, 5), Rat::one())
            .unwrap()
            .to_piece();
        assert_eq!(p.spine().slope(), Rat::new(-2, 5));
    }

    #[test]
    fn bounding_parallelogram_examples() {
        let bp = triangle().bounding_parallelogram();
        assert_eq!(bp.to_piece(), ConvexPiece::unit_square());
        let hp = HorizontalParallelogram::new(pt("1/2", "1/3"), Rat::new(1, 4), Rat::new(3, 2), Rat::new(2, 3)).unwrap();
        assert_eq!(hp.to_piece().bounding_parallelogram(), hp);
    }

    #[test]
    fn bounding_parallelogram_can_exceed_twice_the_width() {
        // Single bottom and top vertex, and a vertex far right of the spine.
        let p = ConvexPiece::hull_of(&[pt("1", "0"), pt("1", "1/2"), pt("0", "1"), pt("0", "1/100")]).unwrap();
        let bp = p.bounding_parallelogram();
        assert!(p.inside(&bp.to_piece()));
        assert_eq!(p.width(), Rat::one());
        assert_eq!(bp.width(), Rat::new(249, 100));
        assert!(bp.area() <= Rat::from_int(2) * p.area());
    }

    #[test]
    fn overlap_examples() {
        let sq = ConvexPiece::unit_square();
        let at = |x: &str, y: &str| Placement::new(sq.clone(), pt(x, y));
        assert!(interior_overlap(&at("0", "0"), &at("0", "0")));
        assert!(!interior_overlap(&at("0", "0"), &at("1", "0")));
        assert!(interior_overlap(&at("0", "0"), &at("1/2", "1/2")));
        assert!(!interior_overlap(&at("0", "0"), &at("1", "1")));
    }

    #[test]
    fn nfp_of_unit_squares() {
        let sq = ConvexPiece::unit_square();
        let nfp = no_fit_polygon(&sq, &sq);
        assert_eq!(
            nfp,
            ConvexPiece::rectangle(Rat::from_int(-1), Rat::from_int(-1), Rat::from_int(2), Rat::from_int(2)).unwrap()
        );
    }

    #[test]
    fn chords() {
        let t = triangle();
        assert_eq!(t.chord_at(&Rat::new(1, 2)), Some((Rat::zero(), Rat::new(1, 2))));
        assert_eq!(t.chord_at(&Rat::one()), Some((Rat::zero(), Rat::zero())));
        assert_eq!(t.chord_at(&Rat::from_int(2)), None);
    }

    #[test]
    fn validity_oracle() {
        let sq = ConvexPiece::unit_square();
        let ok = vec![sq.clone(), sq.translate(&Point::int(1, 0))];
        let region = Region::Strip { height: Rat::one() };
        assert_eq!(check_packing(&ok, &region), Ok(()));
        let bad = vec![sq.clone(), sq.translate(&pt("1/2", "0"))];
        assert_eq!(check_packing(&bad, &region), Err(Violation::Overlap { first: 0, second: 1 }));
        let out = vec![sq.translate(&pt("0", "1/2"))];
        assert_eq!(check_packing(&out, &region), Err(Violation::OutOfRegion { index: 0 }));
    }

    #[test]
    fn json_roundtrip() {
        let json = r#"{"vertices":[["0","0"],["1/2","0"],["0","1"]]}"#;
        let p: ConvexPiece = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), json);
        assert!(serde_json::from_str::<ConvexPiece>(r#"{"vertices":[["0","0"],["1","1"],["2","2"]]}"#).is_err());
    }
}
