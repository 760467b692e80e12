//! Offline packing with a constant approximation factor: pieces are grouped
//! into mini-containers by height class, and the containers are arranged
//! for four objectives (strip width, unit-square feasibility, number of unit
//! bins, and perimeter of the bounding box).

mod containers;

pub use containers::{area_bound, build_mini_containers, extents, height_class, MiniContainer};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPiece, Placement, Point};
use crate::rat::Rat;

/// Precision of the rational square roots used in perimeter bounds.
const SQRT_BITS: u32 = 40;

/// Offline objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Strip,
    Square,
    Bins,
    Perimeter,
}

impl Problem {
    pub const ALL: [Problem; 4] = [Problem::Strip, Problem::Square, Problem::Bins, Problem::Perimeter];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Strip => "strip",
            Problem::Square => "square",
            Problem::Bins => "bins",
            Problem::Perimeter => "perimeter",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Problem> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownId {
                kind: "problem",
                name: s.to_string(),
            })
    }
}

/// Parameters of the four assemblies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfflineConfig {
    pub strip_alpha: Rat,
    pub strip_c: Rat,
    pub perimeter_alpha: Rat,
    pub perimeter_c: Rat,
    /// Height ratio for square and bin packing.
    pub square_alpha: Rat,
    /// Diameter bound for square and bin packing.
    pub delta: Rat,
}

impl Default for OfflineConfig {
    fn default() -> Self {
        OfflineConfig {
            strip_alpha: Rat::new(109, 200),
            strip_c: Rat::new(11, 5),
            perimeter_alpha: Rat::new(1, 2),
            perimeter_c: Rat::new(53, 50),
            square_alpha: Rat::new(1, 2),
            delta: Rat::new(1, 10),
        }
    }
}

impl OfflineConfig {
    /// Uses `optimal_square_alpha(delta)`, rounded to three decimals, for
    /// square and bin packing.
    pub fn with_optimal_square_alpha(mut self) -> Self {
        let a = optimal_square_alpha(self.delta.to_f64());
        self.square_alpha = Rat::new((a * 1000.0).round() as i64, 1000);
        self
    }
}

/// `(1 - 5 delta)(1 - 2 delta) / 4`, the area below which any set of pieces
/// of diameter at most `delta` fits in a unit square.
pub fn square_density(delta: &Rat) -> Rat {
    let one = Rat::one();
    (&one - Rat::from_int(5) * delta) * (&one - Rat::from_int(2) * delta) / Rat::from_int(4)
}

/// The height ratio minimising the unit-square area threshold for pieces of
/// diameter at most `delta`.
pub fn optimal_square_alpha(delta: f64) -> f64 {
    1.0 - (3.0 * delta.powi(3) - 4.0 * delta * delta + delta).sqrt() / (1.0 - delta)
}

/// A mini-container at its final position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedContainer {
    pub container: MiniContainer,
    /// Bottom-left corner, relative to its bin when there are bins.
    pub origin: Point,
    pub bin: Option<usize>,
}

/// Output of an offline packer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfflineResult {
    pub problem: Problem,
    /// One per input piece, in input order. With bins the offsets are
    /// relative to the bin.
    pub placements: Vec<Placement>,
    /// Bin of each piece, for bin packing.
    pub bins: Option<Vec<usize>>,
    pub containers: Vec<PlacedContainer>,
    /// Width, total container height, bin count or perimeter.
    pub cost: Rat,
    pub lower_bound: Rat,
    /// `cost / lower_bound`, 0 for an empty input.
    pub ratio: Rat,
    /// Whether everything fits, for the unit square.
    pub fits: Option<bool>,
    /// Total mini-container area and the bound it must respect.
    pub container_area: Rat,
    pub container_area_bound: Rat,
}

impl OfflineResult {
    pub fn bin_count(&self) -> usize {
        self.bins
            .as_ref()
            .map_or(0, |b| b.iter().map(|&i| i + 1).max().unwrap_or(0))
    }

    /// Placements of the pieces in bin `bin`.
    pub fn bin_placements(&self, bin: usize) -> Vec<Placement> {
        match &self.bins {
            Some(bins) => self
                .placements
                .iter()
                .zip(bins)
                .filter(|(_, &b)| b == bin)
                .map(|(p, _)| p.clone())
                .collect(),
            None => self.placements.clone(),
        }
    }
}

/// Certified lower bound on the optimum of `problem`.
///
/// Strip: `max(w_max, area)`. Bins: `max(1, ceil(area))`. Perimeter:
/// `max(2 w_max + 2 h_max, 4 sqrt(area))`, the root rounded down. Square:
/// the area.
pub fn opt_lower_bound(pieces: &[ConvexPiece], problem: Problem) -> Rat {
    if pieces.is_empty() {
        return Rat::zero();
    }
    let (w_max, h_max) = extents(pieces);
    let area: Rat = pieces.iter().map(ConvexPiece::area).sum();
    match problem {
        Problem::Strip => w_max.max(area),
        Problem::Square => area,
        Problem::Bins => Rat::from(area.ceil()).max(Rat::one()),
        Problem::Perimeter => {
            let sides = Rat::from_int(2) * (w_max + h_max);
            sides.max(Rat::from_int(4) * area.sqrt_lower(SQRT_BITS))
        }
    }
}

/// Assigns heights to stacks of capacity `cap`, first fit in the given
/// order. Returns the stack of each item and its height offset.
fn first_fit(heights: &[Rat], cap: &Rat) -> Vec<(usize, Rat)> {
    let mut stacks: Vec<Rat> = Vec::new();
    heights
        .iter()
        .map(|h| {
            let s = match stacks.iter().position(|used| used + h <= *cap) {
                Some(s) => s,
                None => {
                    stacks.push(Rat::zero());
                    stacks.len() - 1
                }
            };
            let y = stacks[s].clone();
            stacks[s] += h;
            (s, y)
        })
        .collect()
}

struct Layout {
    placements: Vec<Placement>,
    containers: Vec<PlacedContainer>,
    bins: Option<Vec<usize>>,
}

/// Puts container `k` into stack `slot.0` at height `slot.1`. Stacks sit
/// side by side `width` apart unless they are bins.
fn layout(pieces: &[ConvexPiece], cs: Vec<MiniContainer>, slots: &[(usize, Rat)], as_bins: bool) -> Layout {
    let mut offsets = vec![Point::origin(); pieces.len()];
    let mut bins = vec![0; pieces.len()];
    let mut placed = Vec::with_capacity(cs.len());
    for (c, (stack, y)) in cs.into_iter().zip(slots) {
        let x = if as_bins { Rat::zero() } else { &c.width * Rat::from_usize(*stack) };
        let origin = Point::new(x, y.clone());
        for (&i, off) in c.pieces.iter().zip(&c.offsets) {
            offsets[i] = origin.add(off);
            bins[i] = *stack;
        }
        placed.push(PlacedContainer {
            container: c,
            origin,
            bin: as_bins.then_some(*stack),
        });
    }
    Layout {
        placements: pieces
            .iter()
            .zip(offsets)
            .map(|(p, o)| Placement::new(p.clone(), o))
            .collect(),
        containers: placed,
        bins: as_bins.then_some(bins),
    }
}

fn finish(problem: Problem, pieces: &[ConvexPiece], layout: Layout, cost: Rat, fits: Option<bool>, bound: Rat) -> OfflineResult {
    let lower_bound = opt_lower_bound(pieces, problem);
    let ratio = if lower_bound.is_zero() { Rat::zero() } else { &cost / &lower_bound };
    OfflineResult {
        problem,
        container_area: layout.containers.iter().map(|c| c.container.area()).sum(),
        container_area_bound: bound,
        placements: layout.placements,
        bins: layout.bins,
        containers: layout.containers,
        cost,
        lower_bound,
        ratio,
        fits,
    }
}

/// Containers in the order they are stacked: tallest class first.
fn by_class(mut cs: Vec<MiniContainer>) -> Vec<MiniContainer> {
    cs.sort_by_key(|c| c.class);
    cs
}

fn heights(cs: &[MiniContainer]) -> Vec<Rat> {
    cs.iter().map(|c| c.height.clone()).collect()
}

fn occupied(placements: &[Placement]) -> Option<crate::geometry::BBox> {
    placements
        .iter()
        .map(|p| p.placed().bbox())
        .reduce(|a, b| a.union(&b))
}

/// Strip packing: containers of the strip parameters, stacked first fit
/// into columns of height 1 placed side by side.
pub fn offline_strip(pieces: &[ConvexPiece], config: &OfflineConfig) -> Result<OfflineResult> {
    for p in pieces {
        if p.height() > Rat::one() {
            return Err(Error::TooTall {
                height: p.height().to_string(),
                limit: "1".into(),
            });
        }
    }
    let (alpha, c) = (&config.strip_alpha, &config.strip_c);
    let cs = by_class(build_mini_containers(pieces, alpha, c, None)?);
    let slots = first_fit(&heights(&cs), &Rat::one());
    let layout = layout(pieces, cs, &slots, false);
    let cost = occupied(&layout.placements).map_or_else(Rat::zero, |b| b.x_max);
    let bound = bound_or_zero(pieces, alpha, c);
    Ok(finish(Problem::Strip, pieces, layout, cost, None, bound))
}

/// Perimeter packing: columns of height `sqrt(A) + h_max`, where `A` is
/// the total container area (the root rounded up).
pub fn offline_perimeter(pieces: &[ConvexPiece], config: &OfflineConfig) -> Result<OfflineResult> {
    let (alpha, c) = (&config.perimeter_alpha, &config.perimeter_c);
    let cs = by_class(build_mini_containers(pieces, alpha, c, None)?);
    let total: Rat = cs.iter().map(MiniContainer::area).sum();
    let (_, h_max) = extents(pieces);
    let cap = total.sqrt_upper(SQRT_BITS) + h_max;
    let slots = first_fit(&heights(&cs), &cap);
    let layout = layout(pieces, cs, &slots, false);
    let cost = occupied(&layout.placements).map_or_else(Rat::zero, |b| Rat::from_int(2) * (b.width() + b.height()));
    let bound = bound_or_zero(pieces, alpha, c);
    Ok(finish(Problem::Perimeter, pieces, layout, cost, None, bound))
}

fn check_diameters(pieces: &[ConvexPiece], delta: &Rat) -> Result<()> {
    let limit = delta * delta;
    match pieces.iter().position(|p| p.diameter_sq() > limit) {
        Some(index) => Err(Error::DiameterTooLarge {
            index,
            bound: delta.to_string(),
        }),
        None => Ok(()),
    }
}

/// Unit-width containers for square and bin packing, tallest class first,
/// with the implied `c = 1 / w_max - 1`.
fn unit_containers(pieces: &[ConvexPiece], config: &OfflineConfig) -> Result<(Vec<MiniContainer>, Rat)> {
    check_diameters(pieces, &config.delta)?;
    if config.delta >= Rat::one() {
        return Err(Error::Contract(format!("delta = {} must be below 1", config.delta)));
    }
    let (w_max, _) = extents(pieces);
    let c = if w_max.is_zero() { Rat::one() } else { w_max.recip() - Rat::one() };
    let cs = build_mini_containers(pieces, &config.square_alpha, &c, Some(&Rat::one()))?;
    let bound = bound_or_zero(pieces, &config.square_alpha, &c);
    Ok((by_class(cs), bound))
}

fn bound_or_zero(pieces: &[ConvexPiece], alpha: &Rat, c: &Rat) -> Rat {
    if pieces.is_empty() {
        Rat::zero()
    } else {
        area_bound(pieces, alpha, c)
    }
}

/// Unit-square packing: all containers in one column of width 1. The
/// pieces fit when the column is at most 1 tall; otherwise the placements
/// are a best effort that runs past the top.
pub fn offline_square(pieces: &[ConvexPiece], config: &OfflineConfig) -> Result<OfflineResult> {
    let (cs, bound) = unit_containers(pieces, config)?;
    let mut y = Rat::zero();
    let slots: Vec<(usize, Rat)> = cs
        .iter()
        .map(|c| {
            let at = y.clone();
            y += &c.height;
            (0, at)
        })
        .collect();
    let fits = y <= Rat::one();
    let layout = layout(pieces, cs, &slots, false);
    Ok(finish(Problem::Square, pieces, layout, y, Some(fits), bound))
}

/// Bin packing into unit squares: containers first fit into bins.
pub fn offline_bins(pieces: &[ConvexPiece], config: &OfflineConfig) -> Result<OfflineResult> {
    let (cs, bound) = unit_containers(pieces, config)?;
    let slots = first_fit(&heights(&cs), &Rat::one());
    let count = slots.iter().map(|(b, _)| b + 1).max().unwrap_or(0);
    let layout = layout(pieces, cs, &slots, true);
    Ok(finish(Problem::Bins, pieces, layout, Rat::from_usize(count), None, bound))
}

/// Runs the packer for `problem`.
pub fn solve(problem: Problem, pieces: &[ConvexPiece], config: &OfflineConfig) -> Result<OfflineResult> {
    match problem {
        Problem::Strip => offline_strip(pieces, config),
        Problem::Square => offline_square(pieces, config),
        Problem::Bins => offline_bins(pieces, config),
        Problem::Perimeter => offline_perimeter(pieces, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{check_placements, BBox, Region};

    fn squares(n: usize, side: Rat) -> Vec<ConvexPiece> {
        (0..n)
            .map(|_| ConvexPiece::rectangle(Rat::zero(), Rat::zero(), side.clone(), side.clone()).unwrap())
            .collect()
    }

    fn unit_rect() -> Region {
        Region::Rect(BBox {
            x_min: Rat::zero(),
            x_max: Rat::one(),
            y_min: Rat::zero(),
            y_max: Rat::one(),
        })
    }

    #[test]
    fn density_at_one_tenth() {
        assert_eq!(square_density(&Rat::new(1, 10)), Rat::new(1, 10));
        let a = optimal_square_alpha(0.1);
        // 1 - sqrt(0.063) / 0.9
        assert!((a - 0.72111).abs() < 1e-4, "{a}");
    }

    #[test]
    fn lower_bounds() {
        let two = squares(2, Rat::one());
        assert_eq!(opt_lower_bound(&two, Problem::Bins), Rat::from_int(2));
        assert_eq!(opt_lower_bound(&two, Problem::Strip), Rat::from_int(2));
        // 4 sqrt(2) beats 2 + 2, and the root is rounded down.
        let p = opt_lower_bound(&two, Problem::Perimeter);
        assert!(p.to_f64() <= 4.0 * 2f64.sqrt() && p.to_f64() > 5.656);
        assert_eq!(opt_lower_bound(&squares(1, Rat::one()), Problem::Perimeter), Rat::from_int(4));
        let thin = squares(1, Rat::new(1, 10));
        assert_eq!(opt_lower_bound(&thin, Problem::Bins), Rat::one());
        assert_eq!(opt_lower_bound(&[], Problem::Strip), Rat::zero());
    }

    #[test]
    fn strip_of_unit_squares() {
        let pieces = squares(7, Rat::one());
        let r = offline_strip(&pieces, &OfflineConfig::default()).unwrap();
        check_placements(&r.placements, &Region::Strip { height: Rat::one() }).unwrap();
        assert!(r.container_area <= r.container_area_bound);
        assert!(r.ratio <= Rat::new(327, 10));
        assert!(r.cost >= Rat::from_int(7));
    }

    #[test]
    fn strip_rejects_tall() {
        let tall = ConvexPiece::rectangle(Rat::zero(), Rat::zero(), Rat::one(), Rat::from_int(2)).unwrap();
        assert!(matches!(offline_strip(&[tall], &OfflineConfig::default()), Err(Error::TooTall { .. })));
    }

    #[test]
    fn square_fits_small_area() {
        // 60 squares of side 1/25: area 0.096, diameter below 1/10.
        let pieces = squares(60, Rat::new(1, 25));
        let r = offline_square(&pieces, &OfflineConfig::default()).unwrap();
        assert_eq!(r.fits, Some(true));
        check_placements(&r.placements, &unit_rect()).unwrap();
    }

    #[test]
    fn square_rejects_wide_pieces() {
        let pieces = squares(1, Rat::new(1, 5));
        assert!(matches!(
            offline_square(&pieces, &OfflineConfig::default()),
            Err(Error::DiameterTooLarge { index: 0, .. })
        ));
    }

    #[test]
    fn bins_hold_each_piece_once() {
        let pieces = squares(400, Rat::new(1, 15));
        let r = offline_bins(&pieces, &OfflineConfig::default()).unwrap();
        let area: Rat = pieces.iter().map(ConvexPiece::area).sum();
        assert!(Rat::from_usize(r.bin_count()) <= area * Rat::from_int(10) + Rat::one());
        for b in 0..r.bin_count() {
            check_placements(&r.bin_placements(b), &unit_rect()).unwrap();
        }
    }

    #[test]
    fn perimeter_is_a_box() {
        let pieces = squares(9, Rat::one());
        let r = offline_perimeter(&pieces, &OfflineConfig::default()).unwrap();
        check_placements(&r.placements, &Region::Plane).unwrap();
        assert!(r.ratio <= Rat::new(89, 10));
    }

    #[test]
    fn problem_names() {
        for p in Problem::ALL {
            assert_eq!(p.name().parse::<Problem>().unwrap(), p);
        }
        assert!("knapsack".parse::<Problem>().is_err());
    }
}
