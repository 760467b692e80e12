//! Seeded instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{ConvexPiece, HorizontalParallelogram, Point};
use crate::offline::{square_density, Problem};
use crate::rat::Rat;

/// Grid the random coordinates are snapped to.
pub const COORD_DENOM: i64 = 10_000;
/// Grid of random reals in `[0, 1]`.
pub const REAL_DENOM: i64 = 1 << 20;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` reals uniform on the grid `k / 2^20`.
pub fn uniform_reals(n: usize, seed: u64) -> Vec<Rat> {
    let mut r = rng(seed);
    (0..n).map(|_| Rat::new(r.gen_range(0..=REAL_DENOM), REAL_DENOM)).collect()
}

/// A random convex piece of diameter at most `diameter`, bottom-left
/// corner of its bounding box at the origin.
///
/// Samples 3 to 12 points in a disc, takes the hull and retries when the
/// hull is thin (area below `diameter^2 / 50`) or snapping pushed the
/// diameter over the limit.
pub fn convex_piece(r: &mut impl Rng, diameter: f64) -> ConvexPiece {
    let limit = Rat::from_f64(diameter).expect("finite diameter");
    let limit_sq = &limit * &limit;
    let min_area = &limit_sq / Rat::from_int(50);
    let radius = diameter / 2.0;
    loop {
        let k = r.gen_range(3..=12);
        let mut pts = Vec::with_capacity(k);
        while pts.len() < k {
            let (x, y): (f64, f64) = (r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0));
            if x * x + y * y > 1.0 {
                continue;
            }
            let snap = |v: f64| Rat::new(((v * radius + radius) * COORD_DENOM as f64).round() as i64, COORD_DENOM);
            pts.push(Point::new(snap(x), snap(y)));
        }
        let Ok(piece) = ConvexPiece::hull_of(&pts) else {
            continue;
        };
        if piece.area() < min_area || piece.diameter_sq() > limit_sq {
            continue;
        }
        let b = piece.bbox();
        return piece.translate(&Point::new(-b.x_min, -b.y_min));
    }
}

/// A parallelogram of height 1 with base `base` leaning fully right
/// (`lean = 1`) or left (`lean = -1`) across a unit-wide band.
pub fn skinny(base: &Rat, lean: i64) -> ConvexPiece {
    let shear = (Rat::one() - base) * Rat::from_int(lean);
    let x0 = if lean < 0 { -&shear } else { Rat::zero() };
    HorizontalParallelogram::new(Point::new(x0, Rat::zero()), base.clone(), shear, Rat::one())
        .expect("positive base and height")
        .to_piece()
}

/// Named piece streams for strip packers.
pub fn piece_stream(name: &str, n: usize, seed: u64) -> Result<Vec<ConvexPiece>> {
    let mut r = rng(seed);
    Ok(match name {
        // Alternating opposite slopes of base 1/n: two pieces of each
        // slope side by side pack into width about 2, but
        // alternating neighbours cannot nest.
        "alternating" => {
            let base = Rat::new(1, n.max(1) as i64);
            (0..n).map(|i| skinny(&base, if i % 2 == 0 { 1 } else { -1 })).collect()
        }
        "unit-squares" => vec![ConvexPiece::unit_square(); n],
        "parallelograms" => (0..n)
            .map(|_| {
                let base = Rat::new(r.gen_range(1..=1000), 1000);
                let shear = Rat::new(r.gen_range(-1000..=1000), 1000);
                let height = Rat::new(r.gen_range(1..=1000), 1000);
                let x0 = if shear.is_negative() { -&shear } else { Rat::zero() };
                HorizontalParallelogram::new(Point::new(x0, Rat::zero()), base, shear, height)
                    .expect("positive base and height")
                    .to_piece()
            })
            .collect(),
        "convex" => (0..n)
            .map(|_| {
                let d = r.gen_range(0.05..=1.0);
                convex_piece(&mut r, d)
            })
            .collect(),
        _ => {
            return Err(Error::UnknownId {
                kind: "piece stream",
                name: name.to_string(),
            })
        }
    })
}

/// Named real streams.
pub fn real_stream(name: &str, n: usize, seed: u64) -> Result<Vec<Rat>> {
    match name {
        "uniform" => Ok(uniform_reals(n, seed)),
        "sorted" => {
            let mut v = uniform_reals(n, seed);
            v.sort();
            Ok(v)
        }
        "reversed" => {
            let mut v = uniform_reals(n, seed);
            v.sort_by(|a, b| b.cmp(a));
            Ok(v)
        }
        _ => Err(Error::UnknownId {
            kind: "real stream",
            name: name.to_string(),
        }),
    }
}

/// A random instance for an offline problem with at most `n` pieces.
///
/// Strip pieces have diameter in `[0.05, 1]` so they fit the unit strip;
/// perimeter pieces go up to diameter 2. Bin pieces have diameter at most
/// `delta`, and square instances additionally stop before the area
/// exceeds the guaranteed density for `delta`.
pub fn offline_instance(problem: Problem, n: usize, delta: &Rat, seed: u64) -> Vec<ConvexPiece> {
    let mut r = rng(seed);
    let count = r.gen_range(1..=n.max(1));
    let d = delta.to_f64();
    match problem {
        Problem::Strip => (0..count).map(|_| random_sized(&mut r, 0.05, 1.0)).collect(),
        Problem::Perimeter => (0..count).map(|_| random_sized(&mut r, 0.05, 2.0)).collect(),
        Problem::Bins => (0..count).map(|_| random_sized(&mut r, d / 10.0, d)).collect(),
        Problem::Square => {
            let cap = square_density(delta);
            let mut area = Rat::zero();
            let mut out = Vec::new();
            while out.len() < count {
                let p = random_sized(&mut r, d / 10.0, d);
                let next = &area + p.area();
                if next > cap {
                    break;
                }
                area = next;
                out.push(p);
            }
            out
        }
    }
}

fn random_sized(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> ConvexPiece {
    let d = r.gen_range(lo..=hi);
    convex_piece(r, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_pieces_respect_diameter() {
        let mut r = rng(3);
        for _ in 0..50 {
            let p = convex_piece(&mut r, 0.1);
            assert!(p.diameter_sq() <= Rat::new(1, 100));
            let b = p.bbox();
            assert_eq!((b.x_min, b.y_min), (Rat::zero(), Rat::zero()));
        }
    }

    #[test]
    fn streams_are_seeded() {
        assert_eq!(uniform_reals(10, 1), uniform_reals(10, 1));
        assert_ne!(uniform_reals(10, 1), uniform_reals(10, 2));
        let s = real_stream("sorted", 50, 4).unwrap();
        assert!(s.windows(2).all(|w| w[0] <= w[1]));
        assert!(piece_stream("spirals", 3, 0).is_err());
    }

    #[test]
    fn alternating_stream_shape() {
        let s = piece_stream("alternating", 4, 0).unwrap();
        assert_eq!(s[0].spine().slope(), Rat::new(3, 4));
        assert_eq!(s[1].spine().slope(), Rat::new(-3, 4));
        assert!(s.iter().all(|p| p.height() == Rat::one()));
    }

    #[test]
    fn square_instances_stay_below_density() {
        let delta = Rat::new(1, 10);
        for seed in 0..5 {
            let pieces = offline_instance(Problem::Square, 400, &delta, seed);
            let area: Rat = pieces.iter().map(ConvexPiece::area).sum();
            assert!(area <= square_density(&delta));
        }
    }
}
