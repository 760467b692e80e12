use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pieces_overlap, BBox, ConvexPiece, HorizontalParallelogram, Placement, Point};
use crate::rat::Rat;

use super::boxtype::{leftmost_child_offset, match_type, BoxType, Side};
use super::StripPacker;

/// Width class and height class of a piece. Pieces of different classes
/// never share a basic box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassKey {
    pub width: u32,
    pub height: u32,
}

impl ClassKey {
    /// Class-frame x unit in normalised strip units: `2^(width - 1)`.
    fn x_unit(&self) -> Rat {
        Rat::pow2(self.width as i32 - 1)
    }

    /// Basic box height `2^-height`.
    fn y_unit(&self) -> Rat {
        Rat::pow2(-(self.height as i32))
    }
}

/// A `2^i x 1` rectangle holding one stack of basic boxes of width class `i`.
#[derive(Clone, Debug)]
struct Rect {
    x: Rat,
    width_class: u32,
    used: Rat,
}

impl Rect {
    fn right(&self) -> Rat {
        &self.x + Rat::pow2(self.width_class as i32)
    }
}

#[derive(Clone, Debug)]
struct Node {
    ty: BoxType,
    class: ClassKey,
    /// Bottom-left of the enclosing basic box, normalised strip units.
    origin: Point,
    /// Class-frame x of this box's bottom-left corner within its basic box.
    offset: Rat,
    parent: Option<usize>,
    children: Vec<usize>,
    piece: Option<usize>,
}

/// One allocated box, in strip coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxSnapshot {
    pub class: ClassKey,
    pub box_type: BoxType,
    pub shape: HorizontalParallelogram,
    pub parent: Option<usize>,
    pub piece: Option<usize>,
}

/// How one piece was matched.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchRecord {
    pub class: ClassKey,
    pub box_type: BoxType,
    pub side: Side,
    /// Base length of the extended parallelogram in class-frame units.
    pub base: Rat,
    pub leaf: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OnlineStats {
    pub pieces: usize,
    pub boxes: usize,
    pub basic_boxes: usize,
    pub rectangles: usize,
    /// Largest `area(T) / area(P)` over matched pieces, class-frame units.
    pub max_match_ratio: Option<Rat>,
    /// Largest near-empty count seen for a single class and type.
    pub max_near_empty: usize,
}

/// The box-type-tree strip packer.
///
/// Each piece is wrapped in its bounding parallelogram, extended to the
/// full height `2^-h` of its height class and assigned a width class. In
/// the class frame (basic box `[0, 2] x [0, 1]`) the piece is matched to a
/// box type; it goes into the deepest allocated box on its type path that
/// has room for the next box of the path, or into a new basic box stacked
/// in the leftmost `2^i x 1` rectangle of its width class with room.
#[derive(Clone, Debug, Default)]
pub struct OnlinePacker {
    scale: Option<Rat>,
    rects: Vec<Rect>,
    /// Rectangle ids by increasing x.
    rect_order: Vec<usize>,
    nodes: Vec<Node>,
    room: HashMap<(ClassKey, BoxType, i8), BTreeSet<usize>>,
    near_empty: HashMap<(ClassKey, BoxType), usize>,
    placements: Vec<Placement>,
    matches: Vec<MatchRecord>,
    width: Rat,
    stats: OnlineStats,
}

/// Height class: the `h` with `2^(-h-1) < height <= 2^-h`.
pub fn height_class(height: &Rat) -> u32 {
    let mut h = 0;
    while *height <= Rat::pow2(-(h as i32) - 1) {
        h += 1;
    }
    h
}

/// Width class from the extended width: 1 up to width 1, otherwise the `i`
/// with `2^(i-1) < 2 w <= 2^i`.
pub fn width_class(extended_width: &Rat) -> u32 {
    if *extended_width <= Rat::one() {
        return 1;
    }
    let twice = extended_width * Rat::from_int(2);
    let mut i = 1;
    while twice > Rat::pow2(i as i32) {
        i += 1;
    }
    i
}

impl OnlinePacker {
    pub fn new() -> OnlinePacker {
        OnlinePacker::default()
    }

    pub fn stats(&self) -> &OnlineStats {
        &self.stats
    }

    pub fn matches(&self) -> &[MatchRecord] {
        &self.matches
    }

    /// Width of the first piece; x is measured in multiples of it internally.
    pub fn scale(&self) -> Option<&Rat> {
        self.scale.as_ref()
    }

    /// Rectangles of the strip, in strip coordinates.
    pub fn rectangles(&self) -> Vec<BBox> {
        let w = self.scale.clone().unwrap_or_else(Rat::one);
        self.rects
            .iter()
            .map(|r| BBox {
                x_min: &r.x * &w,
                x_max: r.right() * &w,
                y_min: Rat::zero(),
                y_max: Rat::one(),
            })
            .collect()
    }

    /// Every allocated box in allocation order.
    pub fn boxes(&self) -> Vec<BoxSnapshot> {
        (0..self.nodes.len())
            .map(|id| {
                let node = &self.nodes[id];
                BoxSnapshot {
                    class: node.class,
                    box_type: node.ty.clone(),
                    shape: self.box_shape(id),
                    parent: node.parent,
                    piece: node.piece,
                }
            })
            .collect()
    }

    fn box_shape(&self, id: usize) -> HorizontalParallelogram {
        let node = &self.nodes[id];
        let w = self.scale.clone().unwrap_or_else(Rat::one);
        let sx = node.class.x_unit() * &w;
        HorizontalParallelogram {
            anchor: Point::new(&node.origin.x * &w + &node.offset * &sx, node.origin.y.clone()),
            base: node.ty.base_length() * &sx,
            shear: node.ty.shear() * &sx,
            height: node.class.y_unit(),
        }
    }

    /// Boxes with exactly one child, counted per class and type.
    pub fn near_empty_audit(&self) -> Result<BTreeMap<(ClassKey, BoxType), usize>> {
        let mut counts: BTreeMap<(ClassKey, BoxType), usize> = BTreeMap::new();
        for node in &self.nodes {
            if node.children.len() == 1 {
                *counts.entry((node.class, node.ty.clone())).or_default() += 1;
            }
        }
        if let Some(((class, ty), c)) = counts.iter().find(|(_, c)| **c > 2) {
            return Err(Error::Invariant(format!(
                "{c} near-empty boxes of type {ty} in class {class:?}"
            )));
        }
        Ok(counts)
    }

    /// Geometric audit of the box tree: children inside their parent and
    /// pairwise interior-disjoint, rectangles disjoint, at most one stack
    /// per width class under half full.
    pub fn audit_boxes(&self) -> Result<()> {
        let shapes: Vec<ConvexPiece> = (0..self.nodes.len()).map(|id| self.box_shape(id).to_piece()).collect();
        for (id, node) in self.nodes.iter().enumerate() {
            if node.piece.is_some() && !node.children.is_empty() {
                return Err(Error::Invariant(format!("box {id} holds a piece and children")));
            }
            for &c in &node.children {
                if self.nodes[c].ty.prefix(node.ty.dimension()) != node.ty
                    || self.nodes[c].ty.dimension() != node.ty.dimension() + 1
                {
                    return Err(Error::Invariant(format!("box {c} is not a child type of box {id}")));
                }
                if !shapes[c].inside(&shapes[id]) {
                    return Err(Error::Invariant(format!("box {c} leaves its parent {id}")));
                }
            }
            for (k, &a) in node.children.iter().enumerate() {
                for &b in &node.children[k + 1..] {
                    if pieces_overlap(&shapes[a], &shapes[b]) {
                        return Err(Error::Invariant(format!("sibling boxes {a} and {b} overlap")));
                    }
                }
            }
        }
        for (k, a) in self.rects.iter().enumerate() {
            for b in &self.rects[k + 1..] {
                if a.x < b.right() && b.x < a.right() {
                    return Err(Error::Invariant("rectangles overlap".into()));
                }
            }
        }
        let mut thin: BTreeMap<u32, usize> = BTreeMap::new();
        for r in &self.rects {
            if r.used < Rat::new(1, 2) {
                *thin.entry(r.width_class).or_default() += 1;
            }
        }
        if let Some((class, c)) = thin.iter().find(|(_, c)| **c > 1) {
            return Err(Error::Invariant(format!("{c} stacks under half full in width class {class}")));
        }
        for (i, p) in self.placements.iter().enumerate() {
            let leaf = self.matches[i].leaf;
            if !p.placed().inside(&shapes[leaf]) {
                return Err(Error::Invariant(format!("piece {i} leaves its box {leaf}")));
            }
        }
        Ok(())
    }

    fn new_basic(&mut self, class: ClassKey) -> usize {
        let box_height = class.y_unit();
        let slot = self
            .rects
            .iter()
            .enumerate()
            .filter(|(_, r)| r.width_class == class.width && &r.used + &box_height <= Rat::one())
            .min_by(|(_, a), (_, b)| a.x.cmp(&b.x))
            .map(|(k, _)| k);
        let rect = match slot {
            Some(k) => k,
            None => {
                let width = Rat::pow2(class.width as i32);
                let mut x = Rat::zero();
                let mut pos = self.rect_order.len();
                for (k, &r) in self.rect_order.iter().enumerate() {
                    if &self.rects[r].x - &x >= width {
                        pos = k;
                        break;
                    }
                    x = x.max(self.rects[r].right());
                }
                self.rect_order.insert(pos, self.rects.len());
                self.rects.push(Rect {
                    x,
                    width_class: class.width,
                    used: Rat::zero(),
                });
                self.stats.rectangles += 1;
                self.rects.len() - 1
            }
        };
        let r = &mut self.rects[rect];
        let origin = Point::new(r.x.clone(), r.used.clone());
        r.used += box_height;
        self.stats.basic_boxes += 1;
        self.push_node(Node {
            ty: BoxType::basic(),
            class,
            origin,
            offset: Rat::zero(),
            parent: None,
            children: Vec::new(),
            piece: None,
        })
    }

    fn push_node(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.stats.boxes += 1;
        self.nodes.len() - 1
    }

    fn siblings(&self, id: usize) -> Vec<(Rat, i8)> {
        let parent = &self.nodes[id];
        parent
            .children
            .iter()
            .map(|&c| {
                let child = &self.nodes[c];
                let trit = *child.ty.trits().last().expect("children have a trit");
                (&child.offset - &parent.offset, trit)
            })
            .collect()
    }

    /// Recomputes the room sets of an internal box.
    fn refresh_room(&mut self, id: usize) {
        let siblings = self.siblings(id);
        let node = &self.nodes[id];
        let base = node.ty.base_length();
        let (class, ty) = (node.class, node.ty.clone());
        for trit in [-1i8, 0, 1] {
            let fits = leftmost_child_offset(&base, &siblings, trit).is_some();
            let set = self.room.entry((class, ty.clone(), trit)).or_default();
            if fits {
                set.insert(id);
            } else {
                set.remove(&id);
            }
        }
    }

    fn add_child(&mut self, parent: usize, trit: i8) -> Result<usize> {
        let siblings = self.siblings(parent);
        let p = &self.nodes[parent];
        let u = leftmost_child_offset(&p.ty.base_length(), &siblings, trit)
            .ok_or_else(|| Error::Invariant(format!("box {parent} has no room for trit {trit}")))?;
        let child = Node {
            ty: p.ty.child(trit),
            class: p.class,
            origin: p.origin.clone(),
            offset: &p.offset + u,
            parent: Some(parent),
            children: Vec::new(),
            piece: None,
        };
        let key = (p.class, p.ty.clone());
        let id = self.push_node(child);
        self.nodes[parent].children.push(id);
        match self.nodes[parent].children.len() {
            1 => {
                let c = self.near_empty.entry(key.clone()).or_default();
                *c += 1;
                let c = *c;
                self.stats.max_near_empty = self.stats.max_near_empty.max(c);
                if c > 2 {
                    return Err(Error::Invariant(format!(
                        "{c} near-empty boxes of type {} in class {:?}",
                        key.1, key.0
                    )));
                }
            }
            2 => {
                *self.near_empty.get_mut(&key).expect("was near-empty") -= 1;
            }
            _ => {}
        }
        self.refresh_room(parent);
        Ok(id)
    }

    fn place_normalised(&mut self, piece: &ConvexPiece) -> Result<(Point, MatchRecord)> {
        let para = piece.bounding_parallelogram();
        let h = height_class(&para.height);
        let class_height = Rat::pow2(-(h as i32));
        let ext_shear = para.slope() * &class_height;
        let ext_width = &para.base + ext_shear.abs();
        let class = ClassKey {
            width: width_class(&ext_width),
            height: h,
        };
        let sx = class.x_unit();
        let framed = HorizontalParallelogram::new(Point::origin(), &para.base / &sx, &ext_shear / &sx, Rat::one())?;
        let (ty, side) = match_type(&framed)?;
        let d = ty.dimension();
        if ty.area() > Rat::from_int(6) * &framed.base {
            return Err(Error::Invariant(format!(
                "type {ty} too large for base {}",
                framed.base
            )));
        }

        let found = (0..d).rev().find_map(|j| {
            let key = (class, ty.prefix(j), ty.trits()[j]);
            self.room.get(&key).and_then(|s| s.first().copied()).map(|id| (id, j))
        });
        let (mut cur, start) = match found {
            Some(hit) => hit,
            None => (self.new_basic(class), 0),
        };
        for depth in start..d {
            let child = self.add_child(cur, ty.trits()[depth])?;
            if depth + 1 < d {
                self.refresh_room(child);
            }
            cur = child;
        }
        let leaf = cur;
        let index = self.placements.len();
        self.nodes[leaf].piece = Some(index);

        let node = &self.nodes[leaf];
        let mid = &node.offset + Rat::pow3(-(d as i32));
        let x = match side {
            Side::Left => &mid - &framed.base,
            Side::Right => mid,
        };
        let (lo, hi) = (&node.offset, &node.offset + ty.base_length());
        let (top_lo, top_hi) = (lo + &ty.shear(), &hi + &ty.shear());
        let top_x = &x + &framed.shear;
        let contained = *lo <= x
            && &x + &framed.base <= hi
            && top_lo <= top_x
            && &top_x + &framed.base <= top_hi;
        if !contained {
            return Err(Error::Invariant(format!("piece escapes its box of type {ty}")));
        }
        let ratio = ty.area() / &framed.base;
        if self.stats.max_match_ratio.as_ref().is_none_or(|m| ratio > *m) {
            self.stats.max_match_ratio = Some(ratio);
        }
        let anchor = Point::new(&node.origin.x + &x * &sx, node.origin.y.clone());
        let record = MatchRecord {
            class,
            box_type: ty,
            side,
            base: framed.base,
            leaf,
        };
        Ok((anchor.sub(&para.anchor), record))
    }
}

impl StripPacker for OnlinePacker {
    fn place(&mut self, piece: &ConvexPiece) -> Result<Placement> {
        let height = piece.height();
        if height > Rat::one() {
            return Err(Error::TooTall {
                height: height.to_string(),
                limit: "1".into(),
            });
        }
        let w = self.scale.get_or_insert_with(|| piece.width()).clone();
        let scaled = ConvexPiece::new(
            piece
                .vertices()
                .iter()
                .map(|v| Point::new(&v.x / &w, v.y.clone()))
                .collect(),
        )?;
        let (offset, record) = self.place_normalised(&scaled)?;
        let offset = Point::new(offset.x * &w, offset.y);
        let placement = Placement::new(piece.clone(), offset);
        let right = placement.placed().bbox().x_max;
        if right > self.width {
            self.width = right;
        }
        self.placements.push(placement.clone());
        self.matches.push(record);
        self.stats.pieces += 1;
        Ok(placement)
    }

    fn placements(&self) -> &[Placement] {
        &self.placements
    }

    fn occupied_width(&self) -> Rat {
        self.width.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{check_placements, Region};

    fn para(base: Rat, shear: Rat, height: Rat) -> ConvexPiece {
        let x0 = if shear.is_negative() { -&shear } else { Rat::zero() };
        HorizontalParallelogram::new(Point::new(x0, Rat::zero()), base, shear, height)
            .unwrap()
            .to_piece()
    }

    fn strip() -> Region {
        Region::Strip { height: Rat::one() }
    }

    #[test]
    fn classes() {
        assert_eq!(height_class(&Rat::one()), 0);
        assert_eq!(height_class(&Rat::new(3, 10)), 1);
        assert_eq!(height_class(&Rat::new(1, 2)), 1);
        assert_eq!(height_class(&Rat::new(1, 4)), 2);
        assert_eq!(width_class(&Rat::new(1, 2)), 1);
        assert_eq!(width_class(&Rat::one()), 1);
        assert_eq!(width_class(&Rat::new(3, 2)), 2);
        assert_eq!(width_class(&Rat::from_int(2)), 2);
        assert_eq!(width_class(&Rat::new(5, 2)), 3);
    }

    #[test]
    fn first_unit_square() {
        let mut p = OnlinePacker::new();
        let placed = p.place(&ConvexPiece::unit_square()).unwrap();
        let m = &p.matches()[0];
        assert_eq!(m.class, ClassKey { width: 1, height: 0 });
        assert_eq!(m.box_type, BoxType::basic());
        assert_eq!(p.rectangles()[0].x_max, Rat::from_int(2));
        // Right of the segment from the box midpoint.
        assert_eq!(placed.offset, Point::int(1, 0));
        let b = p.boxes();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].shape.base, Rat::from_int(2));
        p.audit_boxes().unwrap();
    }

    #[test]
    fn skinny_pieces_share_basic_boxes() {
        let mut p = OnlinePacker::new();
        p.place(&para(Rat::one(), Rat::zero(), Rat::one())).unwrap();
        for _ in 0..9 {
            p.place(&para(Rat::new(1, 10), Rat::zero(), Rat::one())).unwrap();
        }
        // [0, 0] leaves: nine fit in one basic box.
        assert_eq!(p.stats().basic_boxes, 2);
        check_placements(p.placements(), &strip()).unwrap();
        p.audit_boxes().unwrap();
        let audit = p.near_empty_audit().unwrap();
        assert!(audit.values().all(|&c| c <= 2));
    }

    #[test]
    fn height_classes_stack() {
        let mut p = OnlinePacker::new();
        p.place(&para(Rat::one(), Rat::zero(), Rat::new(1, 2))).unwrap();
        p.place(&para(Rat::one(), Rat::zero(), Rat::new(1, 4))).unwrap();
        p.place(&para(Rat::one(), Rat::zero(), Rat::new(1, 4))).unwrap();
        // Half box, then two quarter boxes, all in the first rectangle.
        assert_eq!(p.stats().rectangles, 1);
        assert_eq!(p.occupied_width(), Rat::from_int(2));
        check_placements(p.placements(), &strip()).unwrap();
        p.audit_boxes().unwrap();
    }

    #[test]
    fn wide_pieces_get_wide_rectangles() {
        let mut p = OnlinePacker::new();
        p.place(&ConvexPiece::unit_square()).unwrap();
        let wide = ConvexPiece::rectangle(Rat::zero(), Rat::zero(), Rat::new(3, 2), Rat::one()).unwrap();
        p.place(&wide).unwrap();
        assert_eq!(p.matches()[1].class.width, 2);
        let rects = p.rectangles();
        assert_eq!(rects[1].x_min, Rat::from_int(2));
        assert_eq!(rects[1].x_max, Rat::from_int(6));
        check_placements(p.placements(), &strip()).unwrap();
        p.audit_boxes().unwrap();
    }

    #[test]
    fn first_piece_sets_the_scale() {
        let mut p = OnlinePacker::new();
        let big = ConvexPiece::rectangle(Rat::zero(), Rat::zero(), Rat::from_int(10), Rat::one()).unwrap();
        p.place(&big).unwrap();
        assert_eq!(p.scale(), Some(&Rat::from_int(10)));
        assert_eq!(p.occupied_width(), Rat::from_int(20));
    }

    #[test]
    fn opposite_slopes_open_two_basic_boxes_then_fill() {
        let base = Rat::new(1, 10);
        let lean = Rat::one() - &base;
        let mut p = OnlinePacker::new();
        p.place(&para(base.clone(), lean.clone(), Rat::one())).unwrap();
        p.place(&para(base.clone(), -lean.clone(), Rat::one())).unwrap();
        assert_eq!(p.stats().basic_boxes, 2);
        for k in 0..20 {
            let s = if k % 2 == 0 { lean.clone() } else { -lean.clone() };
            p.place(&para(base.clone(), s, Rat::one())).unwrap();
            p.near_empty_audit().unwrap();
        }
        check_placements(p.placements(), &strip()).unwrap();
        p.audit_boxes().unwrap();
    }

    #[test]
    fn general_convex_pieces() {
        let tri = ConvexPiece::new(vec![Point::int(0, 0), Point::int(2, 0), Point::ratio(1, 2, 1, 3)]).unwrap();
        let hexagon = ConvexPiece::new(vec![
            Point::ratio(1, 4, 0, 1),
            Point::ratio(3, 4, 0, 1),
            Point::ratio(1, 1, 1, 4),
            Point::ratio(3, 4, 1, 2),
            Point::ratio(1, 4, 1, 2),
            Point::ratio(0, 1, 1, 4),
        ])
        .unwrap();
        let mut p = OnlinePacker::new();
        for _ in 0..5 {
            p.place(&tri).unwrap();
            p.place(&hexagon).unwrap();
        }
        check_placements(p.placements(), &strip()).unwrap();
        p.audit_boxes().unwrap();
    }

    #[test]
    fn rejects_tall_pieces() {
        let tall = ConvexPiece::rectangle(Rat::zero(), Rat::zero(), Rat::one(), Rat::from_int(3)).unwrap();
        assert!(OnlinePacker::new().place(&tall).is_err());
    }
}
