use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPiece, Point};
use crate::rat::Rat;

/// A rectangle of one height class holding a slope-sorted run of pieces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiniContainer {
    /// Height class `i`; the container height is `alpha^i h_max`.
    pub class: u32,
    pub width: Rat,
    pub height: Rat,
    /// Indices into the input pieces, in slope order.
    pub pieces: Vec<usize>,
    /// Translation of each piece relative to the container's bottom-left.
    pub offsets: Vec<Point>,
    /// False only for the last container of its class.
    pub full: bool,
}

impl MiniContainer {
    pub fn area(&self) -> Rat {
        &self.width * &self.height
    }

    /// Width of the bounding box of the contents.
    pub fn content_width(&self, pieces: &[ConvexPiece]) -> Rat {
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for (&i, off) in self.pieces.iter().zip(&self.offsets) {
            let b = pieces[i].translate(off).bbox();
            if lo.as_ref().is_none_or(|l| b.x_min < *l) {
                lo = Some(b.x_min);
            }
            if hi.as_ref().is_none_or(|h| b.x_max > *h) {
                hi = Some(b.x_max);
            }
        }
        match (lo, hi) {
            (Some(l), Some(h)) => h - l,
            _ => Rat::zero(),
        }
    }
}

/// Largest piece width and height.
pub fn extents(pieces: &[ConvexPiece]) -> (Rat, Rat) {
    let w = pieces.iter().map(ConvexPiece::width).max().unwrap_or_else(Rat::zero);
    let h = pieces.iter().map(ConvexPiece::height).max().unwrap_or_else(Rat::zero);
    (w, h)
}

/// The `i` with `alpha^(i+1) h_max < height <= alpha^i h_max`.
pub fn height_class(height: &Rat, h_max: &Rat, alpha: &Rat) -> u32 {
    let mut i = 0;
    let mut next = h_max * alpha;
    while *height <= next {
        i += 1;
        next = next * alpha;
    }
    i
}

/// Right-hand side of the container area bound
/// `(1 + 1/c) (2/alpha area + (c + 2/alpha) / (1 - alpha) h_max w_max)`.
pub fn area_bound(pieces: &[ConvexPiece], alpha: &Rat, c: &Rat) -> Rat {
    let (w_max, h_max) = extents(pieces);
    let area: Rat = pieces.iter().map(ConvexPiece::area).sum();
    let two_over_alpha = Rat::from_int(2) / alpha;
    let first = &two_over_alpha * area;
    let second = (c + &two_over_alpha) / (Rat::one() - alpha) * h_max * w_max;
    (Rat::one() + c.recip()) * (first + second)
}

/// Groups pieces by height class and packs each class into mini-containers
/// of width `(c + 1) w_max`, or `width` when given (then `c` is implied by
/// `width = (c + 1) w_max`).
///
/// Within a class the bounding parallelograms are sorted by slope and laid
/// out bottom to bottom, each base starting where the previous one ends.
/// Sorted slopes make neighbours diverge upwards, so the whole run is
/// interior-disjoint. The run is then cut into windows of width
/// `(c + 1) w_max` starting every `c w_max`; a piece goes to the first
/// window containing it, which exists since no piece is wider than
/// `w_max`. The windows are the containers.
pub fn build_mini_containers(
    pieces: &[ConvexPiece],
    alpha: &Rat,
    c: &Rat,
    width: Option<&Rat>,
) -> Result<Vec<MiniContainer>> {
    if pieces.is_empty() {
        return Ok(Vec::new());
    }
    if !alpha.is_positive() || *alpha >= Rat::one() {
        return Err(Error::Contract(format!("alpha = {alpha} not in (0, 1)")));
    }
    let (w_max, h_max) = extents(pieces);
    let width = match width {
        Some(w) if *w < w_max => {
            return Err(Error::Contract(format!("container width {w} below widest piece {w_max}")));
        }
        Some(w) => w.clone(),
        None => {
            if !c.is_positive() {
                return Err(Error::Contract(format!("c = {c} must be positive")));
            }
            (c + Rat::one()) * &w_max
        }
    };
    let step = &width - &w_max;
    if !step.is_positive() {
        return Err(Error::Contract("container width must exceed the widest piece".into()));
    }

    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, p) in pieces.iter().enumerate() {
        classes.entry(height_class(&p.height(), &h_max, alpha)).or_default().push(i);
    }

    let mut out = Vec::new();
    for (class, mut members) in classes {
        let height = alpha.powi(class as i32) * &h_max;
        let paras: BTreeMap<usize, _> = members.iter().map(|&i| (i, pieces[i].bounding_parallelogram())).collect();
        members.sort_by(|a, b| paras[a].slope().cmp(&paras[b].slope()).then(a.cmp(b)));

        // Translation of each piece in the run, and its left end.
        let mut x = Rat::zero();
        let mut run: Vec<(usize, Point, Rat)> = Vec::with_capacity(members.len());
        for &i in &members {
            let para = &paras[&i];
            let shift = Point::new(&x - &para.anchor.x, -&para.anchor.y);
            let left = &pieces[i].bbox().x_min + &shift.x;
            run.push((i, shift, left));
            x += &para.base;
        }
        let start = run.iter().map(|(_, _, l)| l.clone()).min().expect("class is non-empty");

        let mut windows: BTreeMap<i64, Vec<(usize, Point)>> = BTreeMap::new();
        for (i, shift, left) in run {
            let k = ((&left - &start) / &step)
                .floor_i64()
                .ok_or_else(|| Error::Invariant("window index overflows".into()))?;
            let origin = &start + &step * Rat::from_int(k);
            windows
                .entry(k)
                .or_default()
                .push((i, Point::new(&shift.x - &origin, shift.y)));
        }
        let last = windows.len() - 1;
        for (n, (_, content)) in windows.into_iter().enumerate() {
            let (indices, offsets) = content.into_iter().unzip();
            out.push(MiniContainer {
                class,
                width: width.clone(),
                height: height.clone(),
                pieces: indices,
                offsets,
                full: n < last,
            });
        }
    }
    Ok(out)
}
