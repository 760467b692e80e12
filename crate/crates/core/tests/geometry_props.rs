use proptest::prelude::*;
use shearpack::geometry::{no_fit_polygon, pieces_overlap};
use shearpack::{ConvexPiece, Point, Rat};

const GRID: i64 = 64;

fn point() -> impl Strategy<Value = Point> {
    (0..=GRID, 0..=GRID).prop_map(|(x, y)| Point::ratio(x, GRID, y, GRID))
}

/// Hulls of 3 to 8 grid points, skipping degenerate ones.
fn piece() -> impl Strategy<Value = ConvexPiece> {
    prop::collection::vec(point(), 3..8).prop_filter_map("degenerate hull", |pts| ConvexPiece::hull_of(&pts).ok())
}

fn offset() -> impl Strategy<Value = Point> {
    (-GRID..=GRID, -GRID..=GRID).prop_map(|(x, y)| Point::ratio(x, GRID, y, GRID))
}

/// Samples a fine lattice and reports a point strictly inside both pieces.
fn raster_witness(a: &ConvexPiece, b: &ConvexPiece) -> Option<Point> {
    let ba = a.bbox();
    let bb = b.bbox();
    let lo_x = ba.x_min.clone().max(bb.x_min.clone());
    let hi_x = ba.x_max.clone().min(bb.x_max.clone());
    let lo_y = ba.y_min.clone().max(bb.y_min.clone());
    let hi_y = ba.y_max.clone().min(bb.y_max.clone());
    if lo_x >= hi_x || lo_y >= hi_y {
        return None;
    }
    let steps = 24;
    for i in 1..steps {
        for j in 1..steps {
            let t = Rat::new(i, steps);
            let u = Rat::new(j, steps);
            let p = Point::new(&lo_x + &t * (&hi_x - &lo_x), &lo_y + &u * (&hi_y - &lo_y));
            if a.contains_strictly(&p) && b.contains_strictly(&p) {
                return Some(p);
            }
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bounding_parallelogram_is_bounded(p in piece()) {
        let hp = p.bounding_parallelogram();
        let q = hp.to_piece();
        prop_assert!(p.inside(&q));
        prop_assert!(q.area() <= Rat::from_int(2) * p.area());
        // The spine is at most as wide as the piece and every other vertex
        // sits at most one piece width off it, so three widths always suffice.
        prop_assert!(hp.width() <= Rat::from_int(3) * p.width());
        prop_assert_eq!(hp.height, p.height());
    }

    #[test]
    fn overlap_is_symmetric_and_translation_invariant(a in piece(), b in piece(), t in offset(), s in offset()) {
        let b = b.translate(&t);
        let ab = pieces_overlap(&a, &b);
        prop_assert_eq!(ab, pieces_overlap(&b, &a));
        prop_assert_eq!(ab, pieces_overlap(&a.translate(&s), &b.translate(&s)));
    }

    #[test]
    fn overlap_agrees_with_no_fit_polygon(a in piece(), b in piece(), t in offset()) {
        let nfp = no_fit_polygon(&a, &b);
        prop_assert_eq!(pieces_overlap(&a, &b.translate(&t)), nfp.contains_strictly(&t));
    }

    #[test]
    fn raster_witness_implies_overlap(a in piece(), b in piece(), t in offset()) {
        let b = b.translate(&t);
        let overlap = pieces_overlap(&a, &b);
        if let Some(p) = raster_witness(&a, &b) {
            prop_assert!(overlap, "common interior point {:?}", p);
        }
    }

    #[test]
    fn area_is_translation_invariant(p in piece(), t in offset()) {
        prop_assert_eq!(p.area(), p.translate(&t).area());
        prop_assert!(p.area().is_positive());
        prop_assert!(p.area() <= &p.width() * &p.height());
    }
}
