use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{HorizontalParallelogram, Point};
use crate::rat::Rat;

/// A node of the ternary box-type tree, identified by its trit path.
///
/// In class-normalised units a box of dimension `d` is a parallelogram of
/// height 1 with base `2 * 3^-d` and shear `2 * sum x_i / 3^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct BoxType {
    trits: Vec<i8>,
}

impl BoxType {
    /// The basic type `[]`.
    pub fn basic() -> BoxType {
        BoxType::default()
    }

    pub fn new(trits: Vec<i8>) -> Result<BoxType> {
        if trits.iter().any(|t| !(-1..=1).contains(t)) {
            return Err(Error::Contract(format!("trits must be in {{-1, 0, 1}}: {trits:?}")));
        }
        Ok(BoxType { trits })
    }

    pub fn trits(&self) -> &[i8] {
        &self.trits
    }

    pub fn dimension(&self) -> usize {
        self.trits.len()
    }

    pub fn child(&self, trit: i8) -> BoxType {
        let mut trits = self.trits.clone();
        trits.push(trit);
        BoxType { trits }
    }

    /// The first `depth` trits.
    pub fn prefix(&self, depth: usize) -> BoxType {
        BoxType {
            trits: self.trits[..depth].to_vec(),
        }
    }

    /// `2 * 3^-d`.
    pub fn base_length(&self) -> Rat {
        Rat::from_int(2) * Rat::pow3(-(self.dimension() as i32))
    }

    /// `2 * sum x_i / 3^i`.
    pub fn shear(&self) -> Rat {
        let mut s = Rat::zero();
        for (i, &t) in self.trits.iter().enumerate() {
            if t != 0 {
                s += Rat::from_int(2 * t as i64) * Rat::pow3(-(i as i32 + 1));
            }
        }
        s
    }

    /// Area in class-normalised units (height 1).
    pub fn area(&self) -> Rat {
        self.base_length()
    }

    /// The box of this type whose bottom edge is centred at `x = 1` in the
    /// basic box `[0, 2] x [0, 1]`.
    pub fn centred(&self) -> HorizontalParallelogram {
        let half = Rat::pow3(-(self.dimension() as i32));
        HorizontalParallelogram {
            anchor: Point::new(Rat::one() - half, Rat::zero()),
            base: self.base_length(),
            shear: self.shear(),
            height: Rat::one(),
        }
    }
}

impl fmt::Display for BoxType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.trits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match t {
                1 => f.write_str("+1")?,
                0 => f.write_str("0")?,
                _ => f.write_str("-1")?,
            }
        }
        f.write_str("]")
    }
}

/// Which side of the spine-parallel segment the piece is placed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Chooses the box type for a parallelogram of height 1 and width at most 1.
///
/// The dimension is the largest `d` with `3^-d >= base`. Starting from the
/// basic type, each trit picks the third of the current top edge containing
/// the top end of the segment from `(1, 0)` with the piece's slope.
pub fn match_type(p: &HorizontalParallelogram) -> Result<(BoxType, Side)> {
    if p.height != Rat::one() {
        return Err(Error::Contract(format!("height {} is not normalised to 1", p.height)));
    }
    if p.width() > Rat::one() {
        return Err(Error::Contract(format!("width {} exceeds 1", p.width())));
    }
    let mut dimension = 0;
    while Rat::pow3(-(dimension + 1)) >= p.base {
        dimension += 1;
    }
    let top = Rat::one() + &p.shear;
    let mut ty = BoxType::basic();
    let mut shear = Rat::zero();
    for depth in 0..dimension {
        let third = Rat::from_int(2) * Rat::pow3(-(depth + 1));
        let half_third = Rat::pow3(-(depth + 1));
        let centre = Rat::one() + &shear;
        let contains = |x: i8| {
            let c = &centre + &third * Rat::from_int(x as i64);
            (&top - &c).abs() <= half_third
        };
        let trit = [0i8, -1, 1]
            .into_iter()
            .find(|&x| contains(x))
            .ok_or_else(|| Error::Invariant(format!("segment top {top} escaped type {ty}")))?;
        shear += &third * Rat::from_int(trit as i64);
        ty = ty.child(trit);
    }
    let top_mid = Rat::one() + &shear;
    let side = if top > top_mid { Side::Left } else { Side::Right };
    Ok((ty, side))
}

/// Leftmost offset (relative to the parent's bottom-left corner) for a
/// child with trit `trit` inside a parent with base `parent_base`, avoiding
/// the given `(offset, trit)` siblings. All children share the parent's
/// height, so containment and disjointness reduce to interval tests on the
/// bottom and top edges.
pub fn leftmost_child_offset(parent_base: &Rat, siblings: &[(Rat, i8)], trit: i8) -> Option<Rat> {
    let beta = parent_base / Rat::from_int(3);
    let x = Rat::from_int(trit as i64);
    let lo = Rat::zero().max(-(&x * &beta));
    let hi = (&beta * Rat::from_int(2)).min((Rat::from_int(2) - &x) * &beta);
    if lo > hi {
        return None;
    }
    let forbidden: Vec<(Rat, Rat)> = siblings
        .iter()
        .map(|(u, xs)| {
            let shift = (Rat::from_int(*xs as i64) - &x) * &beta;
            let left = (u - &beta).min(u + &shift - &beta);
            let right = (u + &beta).max(u + &shift + &beta);
            (left, right)
        })
        .collect();
    let mut candidates: Vec<Rat> = vec![lo.clone()];
    candidates.extend(forbidden.iter().map(|(_, r)| r.clone()));
    candidates.sort();
    candidates
        .into_iter()
        .filter(|c| *c >= lo && *c <= hi)
        .find(|c| forbidden.iter().all(|(l, r)| !(l < c && c < r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn para(base: Rat, shear: Rat) -> HorizontalParallelogram {
        HorizontalParallelogram::new(Point::origin(), base, shear, Rat::one()).unwrap()
    }

    #[test]
    fn match_examples() {
        let (t, _) = match_type(&para(Rat::new(1, 2), Rat::zero())).unwrap();
        assert_eq!(t, BoxType::basic());
        assert_eq!(t.area(), Rat::from_int(2));
        let (t, side) = match_type(&para(Rat::new(1, 5), Rat::new(9, 10) - Rat::new(1, 10))).unwrap();
        assert_eq!(t.trits(), &[1]);
        assert_eq!(side, Side::Left);
        let (t, _) = match_type(&para(Rat::new(1, 100), Rat::zero())).unwrap();
        assert_eq!(t.trits(), &[0, 0, 0, 0]);
        assert!(match_type(&para(Rat::new(1, 2), Rat::new(3, 4))).is_err());
    }

    #[test]
    fn unit_width_is_basic() {
        let (t, side) = match_type(&para(Rat::one(), Rat::zero())).unwrap();
        assert_eq!(t, BoxType::basic());
        assert_eq!(side, Side::Right);
    }

    #[test]
    fn type_geometry() {
        let t = BoxType::new(vec![1, -1]).unwrap();
        assert_eq!(t.base_length(), Rat::new(2, 9));
        assert_eq!(t.shear(), Rat::new(2, 3) - Rat::new(2, 9));
        assert_eq!(t.to_string(), "[+1,-1]");
        assert!(t.shear().abs() <= Rat::one() - Rat::pow3(-2));
        assert!(BoxType::new(vec![2]).is_err());
    }

    #[test]
    fn children_fill_left_to_right() {
        let base = Rat::from_int(2);
        let first = leftmost_child_offset(&base, &[], 0).unwrap();
        assert_eq!(first, Rat::zero());
        let second = leftmost_child_offset(&base, &[(first.clone(), 0)], 0).unwrap();
        assert_eq!(second, Rat::new(2, 3));
        let third = leftmost_child_offset(&base, &[(first, 0), (second, 0)], 0).unwrap();
        assert_eq!(third, Rat::new(4, 3));
    }

    #[test]
    fn opposite_leaning_children_conflict() {
        // A [-1] child followed by a [+1] child cannot share the basic box.
        let base = Rat::from_int(2);
        let left = leftmost_child_offset(&base, &[], -1).unwrap();
        assert_eq!(left, Rat::new(2, 3));
        assert_eq!(leftmost_child_offset(&base, &[(left, -1)], 1), None);
        // Same types or a [0] partner always fit together.
        for (a, b) in [(-1, -1), (1, 1), (0, 1), (-1, 0), (1, 0), (0, -1)] {
            let u = leftmost_child_offset(&base, &[], a).unwrap();
            assert!(leftmost_child_offset(&base, &[(u, a)], b).is_some(), "{a} then {b}");
        }
    }
}
