use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{cross, no_fit_polygon, pieces_overlap, BBox, ConvexPiece, Placement, Point};
use crate::rat::Rat;

use super::StripPacker;

/// A piece spanning the full strip height. Such pieces are totally ordered
/// left to right in any valid packing.
#[derive(Clone, Debug)]
struct Wall {
    index: usize,
    bottom: (f64, f64),
    top: (f64, f64),
}

/// Places every piece as far left as possible (smallest translation x,
/// ties broken by smallest y).
///
/// Feasible translations of a new piece avoid the open no-fit polygon of
/// every placed piece. For pieces of full strip height the vertical offset
/// is forced and the walls already placed split the strip into gaps that
/// are scanned left to right. Shorter pieces test a finite set of
/// candidate points: the slab ends, no-fit polygon vertices, crossings of
/// no-fit polygon edges, and crossings with the left boundary. Their
/// optimum is then moved to an adjacent grid height of the `2^-20` grid,
/// leftmost and rounded up, when it fits there. This keeps coordinates small.
#[derive(Clone, Debug)]
pub struct GreedyPacker {
    height: Rat,
    placements: Vec<Placement>,
    placed: Vec<ConvexPiece>,
    boxes: Vec<BBox>,
    walls: Vec<Wall>,
    others: Vec<usize>,
    width: Rat,
}

impl Default for GreedyPacker {
    fn default() -> Self {
        GreedyPacker::new()
    }
}

impl GreedyPacker {
    pub fn new() -> GreedyPacker {
        GreedyPacker::with_height(Rat::one())
    }

    pub fn with_height(height: Rat) -> GreedyPacker {
        GreedyPacker {
            height,
            placements: Vec::new(),
            placed: Vec::new(),
            boxes: Vec::new(),
            walls: Vec::new(),
            others: Vec::new(),
            width: Rat::zero(),
        }
    }

    /// True when `piece + offset` lies in the strip and overlaps no placed
    /// piece.
    pub fn fits(&self, piece: &ConvexPiece, offset: &Point) -> bool {
        let moved = piece.translate(offset);
        let b = moved.bbox();
        if b.x_min.is_negative() || b.y_min.is_negative() || b.y_max > self.height {
            return false;
        }
        self.placed
            .iter()
            .zip(&self.boxes)
            .all(|(q, qb)| !qb.open_overlap(&b) || !pieces_overlap(q, &moved))
    }

    /// Leftmost placement whose piece stays right of `min_left`.
    pub fn place_from(&mut self, piece: &ConvexPiece, min_left: &Rat) -> Result<Placement> {
        let pb = piece.bbox();
        let h = pb.height();
        if h > self.height {
            return Err(Error::TooTall {
                height: h.to_string(),
                limit: self.height.to_string(),
            });
        }
        let left = Rat::zero().max(min_left.clone());
        let x_lo = &left - &pb.x_min;
        let (offset, gap) = if h == self.height {
            let (offset, gap) = self.place_full(piece, &pb, &left, &x_lo)?;
            (offset, Some(gap))
        } else {
            (self.place_general(piece, &pb, &x_lo), None)
        };
        let moved = piece.translate(&offset);
        let mb = moved.bbox();
        if mb.x_max > self.width {
            self.width = mb.x_max.clone();
        }
        let index = self.placed.len();
        if let Some(gap) = gap {
            let chord = |y: &Rat| {
                let (l, r) = moved.chord_at(y).expect("full height");
                (l.to_f64(), r.to_f64())
            };
            let wall = Wall {
                index,
                bottom: chord(&Rat::zero()),
                top: chord(&self.height),
            };
            self.walls.insert(gap, wall);
        } else {
            self.others.push(index);
        }
        self.placed.push(moved);
        self.boxes.push(mb);
        let placement = Placement::new(piece.clone(), offset);
        self.placements.push(placement.clone());
        Ok(placement)
    }

    /// Returns the translation and the index of the gap it lands in.
    fn place_full(&self, piece: &ConvexPiece, pb: &BBox, left: &Rat, x_lo: &Rat) -> Result<(Point, usize)> {
        let ty = -&pb.y_min;
        let width_at = |y: &Rat| {
            let (l, r) = piece.chord_at(y).expect("inside piece");
            (r - l).to_f64()
        };
        let need_bottom = width_at(&pb.y_min);
        let need_top = width_at(&pb.y_max);
        let left_f = left.to_f64();
        for gap in 0..=self.walls.len() {
            let a = gap.checked_sub(1).map(|g| &self.walls[g]);
            let b = self.walls.get(gap);
            if let Some(b) = b {
                let lb = a.map_or(0.0, |a| a.bottom.1).max(left_f);
                let lt = a.map_or(0.0, |a| a.top.1).max(left_f);
                if !roomy(b.bottom.0 - lb, need_bottom) || !roomy(b.top.0 - lt, need_top) {
                    continue;
                }
            }
            let mut lo = x_lo.clone();
            if let Some(a) = a {
                let (_, r) = forbidden(&self.placed[a.index], piece, &ty).expect("walls share the slab");
                lo = lo.max(r);
            }
            let hi = b.map(|b| forbidden(&self.placed[b.index], piece, &ty).expect("walls share the slab").0);
            if hi.as_ref().is_some_and(|hi| lo > *hi) {
                continue;
            }
            let x_range = BBox {
                x_min: &lo + &pb.x_min,
                x_max: hi.as_ref().map_or_else(|| self.width.clone().max(&lo + &pb.x_max), |hi| hi + &pb.x_max),
                y_min: Rat::zero(),
                y_max: self.height.clone(),
            };
            let intervals: Vec<(Rat, Rat)> = self
                .others
                .iter()
                .filter(|&&q| self.boxes[q].open_overlap(&x_range))
                .filter_map(|&q| forbidden(&self.placed[q], piece, &ty))
                .collect();
            let tx = first_free(lo, intervals);
            if hi.as_ref().is_none_or(|hi| tx <= *hi) {
                return Ok((Point::new(tx, ty), gap));
            }
        }
        Err(Error::Invariant("no gap accepted a full-height piece".into()))
    }

    fn place_general(&self, piece: &ConvexPiece, pb: &BBox, x_lo: &Rat) -> Point {
        let slab = Slab::new(&self.placed, piece, pb, &self.height, x_lo);
        let (tx, ty) = slab.optimum();
        self.snap(piece, &slab, &tx, &ty).unwrap_or_else(|| Point::new(tx, ty))
    }

    /// A fitting translation on the `1/PLACEMENT_GRID` grid next to the
    /// exact optimum `(tx, ty)`. Exact optima sit on crossings of no-fit
    /// polygon edges, and their denominators compound over placements.
    fn snap(&self, piece: &ConvexPiece, slab: &Slab, tx: &Rat, ty: &Rat) -> Option<Point> {
        let down = |v: &Rat| v.floor_scaled(PLACEMENT_GRID).map(|k| Rat::new(k, PLACEMENT_GRID));
        let up = |v: &Rat| v.floor_scaled(PLACEMENT_GRID).map(|k| {
            let r = Rat::new(k, PLACEMENT_GRID);
            if r == *v { r } else { Rat::new(k + 1, PLACEMENT_GRID) }
        });
        if down(tx).as_ref() == Some(tx) && down(ty).as_ref() == Some(ty) {
            return None;
        }
        let mut best: Option<(Rat, Rat)> = None;
        for y in [down(ty)?, up(ty)?] {
            if y < slab.t0 || y > slab.t1 {
                continue;
            }
            let x = up(&slab.leftmost_at(&y))?;
            if self.fits(piece, &Point::new(x.clone(), y.clone())) {
                consider(&mut best, x, y);
            }
        }
        best.map(|(x, y)| Point::new(x, y))
    }
}

impl StripPacker for GreedyPacker {
    fn place(&mut self, piece: &ConvexPiece) -> Result<Placement> {
        self.place_from(piece, &Rat::zero())
    }

    fn placements(&self) -> &[Placement] {
        &self.placements
    }

    fn occupied_width(&self) -> Rat {
        self.width.clone()
    }

    fn strip_height(&self) -> Rat {
        self.height.clone()
    }
}

/// Greedy placement behind a random left boundary: `k/1000 * W` for `k`
/// uniform in `0..=1000` and `W` the current occupied width, rounded down to
/// a multiple of `1/1024` so coordinates keep small denominators. Produces
/// varied valid packings for randomized checks.
#[derive(Clone, Debug)]
pub struct RandomPacker {
    inner: GreedyPacker,
    rng: ChaCha8Rng,
}

impl RandomPacker {
    pub fn new(seed: u64) -> RandomPacker {
        RandomPacker {
            inner: GreedyPacker::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl StripPacker for RandomPacker {
    fn place(&mut self, piece: &ConvexPiece) -> Result<Placement> {
        let k = self.rng.gen_range(0..=1000);
        let raw = self.inner.occupied_width() * Rat::new(k, 1000);
        let grid = raw
            .floor_scaled(BOUNDARY_GRID)
            .ok_or_else(|| Error::Invariant(format!("left boundary {raw} overflows")))?;
        let min_left = Rat::new(grid, BOUNDARY_GRID);
        self.inner.place_from(piece, &min_left)
    }

    fn placements(&self) -> &[Placement] {
        self.inner.placements()
    }

    fn occupied_width(&self) -> Rat {
        self.inner.occupied_width()
    }
}

const BOUNDARY_GRID: i64 = 1024;
const PLACEMENT_GRID: i64 = 1 << 20;

fn consider(best: &mut Option<(Rat, Rat)>, tx: Rat, ty: Rat) {
    if best.as_ref().is_none_or(|(bx, by)| (&tx, &ty) < (bx, by)) {
        *best = Some((tx, ty));
    }
}

fn roomy(available: f64, needed: f64) -> bool {
    available >= needed - 1e-9 * (1.0 + available.abs() + needed.abs())
}

/// Open interval of translation x forbidden by `fixed` when `moving` is
/// lifted by `ty`, or `None` when the two cannot meet at that height.
fn forbidden(fixed: &ConvexPiece, moving: &ConvexPiece, ty: &Rat) -> Option<(Rat, Rat)> {
    let nfp = no_fit_polygon(fixed, moving);
    let b = nfp.bbox();
    if *ty <= b.y_min || *ty >= b.y_max {
        return None;
    }
    nfp.chord_at(ty)
}

/// Smallest `t >= lo` outside every open interval.
fn first_free(lo: Rat, mut intervals: Vec<(Rat, Rat)>) -> Rat {
    intervals.sort();
    let mut t = lo;
    for (l, r) in intervals {
        if l >= t {
            break;
        }
        if r > t {
            t = r;
        }
    }
    t
}

/// Translations of one piece against the placed pieces: `y` ranges over
/// `[t0, t1]`, `x` starts at `x_lo`, and only the no-fit polygons meeting
/// the slab matter.
struct Slab {
    nfps: Vec<(ConvexPiece, BBox)>,
    x_lo: Rat,
    t0: Rat,
    t1: Rat,
}

impl Slab {
    fn new(placed: &[ConvexPiece], piece: &ConvexPiece, pb: &BBox, height: &Rat, x_lo: &Rat) -> Slab {
        let t0 = -&pb.y_min;
        let t1 = height - &pb.y_max;
        let nfps = placed
            .iter()
            .map(|q| {
                let nfp = no_fit_polygon(q, piece);
                let b = nfp.bbox();
                (nfp, b)
            })
            .filter(|(_, b)| b.y_min < t1 && b.y_max > t0)
            .collect();
        Slab {
            nfps,
            x_lo: x_lo.clone(),
            t0,
            t1,
        }
    }

    fn in_slab(&self, y: &Rat) -> bool {
        self.t0 < *y && *y < self.t1
    }

    /// Smallest free x at height `ty`.
    fn leftmost_at(&self, ty: &Rat) -> Rat {
        let intervals = self
            .nfps
            .iter()
            .filter(|(_, b)| b.y_min < *ty && *ty < b.y_max)
            .filter_map(|(nfp, _)| nfp.chord_at(ty))
            .collect();
        first_free(self.x_lo.clone(), intervals)
    }

    /// The smallest free `(x, y)`.
    fn optimum(&self) -> (Rat, Rat) {
        let mut best: Option<(Rat, Rat)> = None;
        for ty in [&self.t0, &self.t1] {
            consider(&mut best, self.leftmost_at(ty), ty.clone());
        }
        // Otherwise the optimum is a point on the left boundary, a vertex of
        // some no-fit polygon or a crossing of two of their edges, and it is
        // the smallest such point that lies in no open no-fit polygon.
        let bound = best.as_ref().expect("slab ends evaluated").0.clone();
        let boxes: Vec<[f64; 4]> = self.nfps
            .iter()
            .map(|(_, b)| [b.x_min.to_f64(), b.x_max.to_f64(), b.y_min.to_f64(), b.y_max.to_f64()])
            .collect();
        let feasible = |x: &Rat, y: &Rat| {
            let (xf, yf) = (x.to_f64(), y.to_f64());
            let p = Point::new(x.clone(), y.clone());
            self.nfps.iter().zip(&boxes).all(|((nfp, _), b)| {
                xf < b[0] - SLACK || xf > b[1] + SLACK || yf < b[2] - SLACK || yf > b[3] + SLACK || !nfp.contains_strictly(&p)
            })
        };
        let mut cands: Vec<(Rat, Rat)> = Vec::new();
        let mut edges: Vec<Edge> = Vec::new();
        for (k, (nfp, b)) in self.nfps.iter().enumerate() {
            if b.x_min >= bound {
                continue;
            }
            let v = nfp.vertices();
            for (i, p) in v.iter().enumerate() {
                if self.in_slab(&p.y) && p.x >= self.x_lo && p.x <= bound {
                    cands.push((p.x.clone(), p.y.clone()));
                }
                let q = &v[(i + 1) % v.len()];
                if p.x.clone().min(q.x.clone()) > bound {
                    continue;
                }
                let (ylo, yhi) = if p.y < q.y { (&p.y, &q.y) } else { (&q.y, &p.y) };
                if *yhi <= self.t0 || *ylo >= self.t1 || (p.y == q.y && !self.in_slab(&p.y)) {
                    continue;
                }
                edges.push(Edge::new(k, p, q));
            }
        }
        for e in &edges {
            let (p, q) = (&e.a, &e.b);
            let lo_x = p.x.clone().min(q.x.clone());
            let hi_x = p.x.clone().max(q.x.clone());
            if lo_x < self.x_lo && self.x_lo < hi_x {
                let t = (&self.x_lo - &p.x) / (&q.x - &p.x);
                let y = &p.y + t * (&q.y - &p.y);
                if self.in_slab(&y) {
                    cands.push((self.x_lo.clone(), y));
                }
            }
        }
        let x_lo_f = self.x_lo.to_f64();
        let bound_f = bound.to_f64();
        edges.sort_by(|a, b| a.x.0.total_cmp(&b.x.0));
        for i in 0..edges.len() {
            let ei = &edges[i];
            for ej in &edges[i + 1..] {
                if ej.x.0 > ei.x.1 + SLACK {
                    break;
                }
                if ei.nfp == ej.nfp || ej.y.0 > ei.y.1 + SLACK || ei.y.0 > ej.y.1 + SLACK || !ei.may_cross(ej) {
                    continue;
                }
                if let Some(y) = crossing_y(&ei.a, &ei.b, &ej.a, &ej.b) {
                    if !self.in_slab(&y) {
                        continue;
                    }
                    let x = if ei.a.y == ei.b.y { ej.x_at(&y) } else { ei.x_at(&y) };
                    let xf = x.to_f64();
                    if xf >= x_lo_f - SLACK && xf <= bound_f + SLACK && x >= self.x_lo && x <= bound {
                        cands.push((x, y));
                    }
                }
            }
        }
        cands.sort();
        cands.dedup();
        for (x, y) in cands {
            if best.as_ref().is_some_and(|(bx, by)| (&x, &y) >= (bx, by)) {
                break;
            }
            if feasible(&x, &y) {
                best = Some((x, y));
                break;
            }
        }
        best.expect("slab ends evaluated")
    }
}

/// Float tolerance of the prefilters in front of exact crossing tests.
const SLACK: f64 = 1e-9;
const ORIENT_SLACK: f64 = 1e-7;

/// A no-fit polygon edge with float ranges for prefiltering.
struct Edge {
    nfp: usize,
    a: Point,
    b: Point,
    x: (f64, f64),
    y: (f64, f64),
}

impl Edge {
    fn new(nfp: usize, a: &Point, b: &Point) -> Edge {
        let (ax, bx, ay, by) = (a.x.to_f64(), b.x.to_f64(), a.y.to_f64(), b.y.to_f64());
        Edge {
            nfp,
            a: a.clone(),
            b: b.clone(),
            x: (ax.min(bx), ax.max(bx)),
            y: (ay.min(by), ay.max(by)),
        }
    }

    /// False when the float orientations show the segments apart.
    fn may_cross(&self, o: &Edge) -> bool {
        let f = |p: &Point| (p.x.to_f64(), p.y.to_f64());
        let (a, b, c, d) = (f(&self.a), f(&self.b), f(&o.a), f(&o.b));
        let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
        let apart = |u: f64, v: f64| (u > ORIENT_SLACK && v > ORIENT_SLACK) || (u < -ORIENT_SLACK && v < -ORIENT_SLACK);
        !apart(orient(a, b, c), orient(a, b, d)) && !apart(orient(c, d, a), orient(c, d, b))
    }

    /// x on the edge at height `y`; the edge is not horizontal.
    fn x_at(&self, y: &Rat) -> Rat {
        &self.a.x + (y - &self.a.y) * (&self.b.x - &self.a.x) / (&self.b.y - &self.a.y)
    }
}

/// y of the crossing point of segments `ab` and `cd`, if they cross at a
/// single point.
fn crossing_y(a: &Point, b: &Point, c: &Point, d: &Point) -> Option<Rat> {
    let x_overlap = a.x.clone().max(b.x.clone()) >= c.x.clone().min(d.x.clone())
        && c.x.clone().max(d.x.clone()) >= a.x.clone().min(b.x.clone());
    let y_overlap = a.y.clone().max(b.y.clone()) >= c.y.clone().min(d.y.clone())
        && c.y.clone().max(d.y.clone()) >= a.y.clone().min(b.y.clone());
    if !x_overlap || !y_overlap {
        return None;
    }
    let r = b.sub(a);
    let s = d.sub(c);
    let denom = cross(&r, &s);
    if denom.is_zero() {
        return None;
    }
    let ac = c.sub(a);
    let t = cross(&ac, &s) / &denom;
    let u = cross(&ac, &r) / &denom;
    let unit = |v: &Rat| !v.is_negative() && *v <= Rat::one();
    (unit(&t) && unit(&u)).then(|| &a.y + t * &r.y)
}
