use proptest::prelude::*;
use shearpack::geometry::pieces_overlap;
use shearpack::harness::gen;
use shearpack::offline::{area_bound, build_mini_containers, extents};
use shearpack::{
    check_placements, gap_certificate, pack_as_sorter, ConvexPiece, HorizontalParallelogram, PackerKind, Point, Rat,
    Region,
};

fn parallelogram() -> impl Strategy<Value = ConvexPiece> {
    (1i64..=100, -100i64..=100, 1i64..=100).prop_map(|(b, s, h)| {
        HorizontalParallelogram::new(Point::origin(), Rat::new(b, 100), Rat::new(s, 100), Rat::new(h, 100))
            .unwrap()
            .to_piece()
    })
}

fn convex(max_diameter: f64) -> impl Strategy<Value = ConvexPiece> {
    (any::<u64>(), 0.05..max_diameter).prop_map(|(seed, d)| gen::convex_piece(&mut gen::rng(seed), d))
}

fn pieces(max: usize) -> impl Strategy<Value = Vec<ConvexPiece>> {
    prop::collection::vec(prop_oneof![parallelogram(), convex(1.0)], 1..max)
}

fn packer() -> impl Strategy<Value = PackerKind> {
    prop_oneof![
        Just(PackerKind::Greedy),
        any::<u64>().prop_map(|seed| PackerKind::Random { seed }),
        Just(PackerKind::Online),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strip_packings_are_valid(input in pieces(30), kind in packer()) {
        let mut p = kind.build();
        for q in &input {
            let placed = p.place(q).unwrap();
            prop_assert_eq!(&placed.piece, q);
        }
        prop_assert_eq!(p.placements().len(), input.len());
        let strip = Region::Strip { height: Rat::one() };
        prop_assert!(check_placements(p.placements(), &strip).is_ok());
        let area: Rat = input.iter().map(ConvexPiece::area).sum();
        let (w_max, _) = extents(&input);
        let width = p.occupied_width();
        prop_assert!(width >= area);
        prop_assert!(width >= w_max);
    }

    #[test]
    fn gap_inequality_holds(stream in prop::collection::vec(0i64..=1024, 1..120), kind in packer()) {
        let stream: Vec<Rat> = stream.into_iter().map(|k| Rat::new(k, 1024)).collect();
        let (array, sorter) = pack_as_sorter(kind.build(), &stream).unwrap();
        prop_assert_eq!(array.filled_count(), stream.len());
        let width = sorter.packer().occupied_width();
        let cert = gap_certificate(&sorter.run(), &width).unwrap();
        prop_assert!(cert.holds, "width {} cost {}", cert.width, cert.cost);
        prop_assert_eq!(cert.cost, array.total_cost().unwrap());
    }

    #[test]
    fn mini_containers_hold_every_piece_once(
        input in prop::collection::vec(prop_oneof![parallelogram(), convex(0.5)], 1..60),
        alpha in prop_oneof![Just((1, 2)), Just((109, 200)), Just((3, 4))],
        c in prop_oneof![Just((11, 5)), Just((53, 50)), Just((4, 1))],
    ) {
        let alpha = Rat::new(alpha.0, alpha.1);
        let c = Rat::new(c.0, c.1);
        let containers = build_mini_containers(&input, &alpha, &c, None).unwrap();
        let mut seen = vec![0; input.len()];
        let mut total = Rat::zero();
        for m in &containers {
            total += m.area();
            let frame = ConvexPiece::rectangle(Rat::zero(), Rat::zero(), m.width.clone(), m.height.clone()).unwrap();
            let placed: Vec<ConvexPiece> = m.pieces.iter().zip(&m.offsets).map(|(&i, off)| input[i].translate(off)).collect();
            for (k, q) in placed.iter().enumerate() {
                seen[m.pieces[k]] += 1;
                prop_assert!(q.inside(&frame), "piece {} leaves its container", m.pieces[k]);
                for r in &placed[k + 1..] {
                    prop_assert!(!pieces_overlap(q, r));
                }
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        prop_assert!(total <= area_bound(&input, &alpha, &c));
        for class in containers.iter().map(|m| m.class).collect::<std::collections::BTreeSet<_>>() {
            let last = containers.iter().filter(|m| m.class == class).filter(|m| !m.full).count();
            prop_assert_eq!(last, 1);
        }
    }
}
