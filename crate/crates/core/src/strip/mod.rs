//! Online translational strip packing of convex pieces.
//!
//! The strip is `x >= 0`, `0 <= y <= height`; packers try to keep the
//! occupied width (largest x covered by a piece) small.

mod boxtype;
mod greedy;
mod online;

pub use boxtype::{leftmost_child_offset, match_type, BoxType, Side};
pub use greedy::{GreedyPacker, RandomPacker};
pub use online::{height_class, width_class, BoxSnapshot, ClassKey, MatchRecord, OnlinePacker, OnlineStats};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{ConvexPiece, Placement, Region};
use crate::rat::Rat;

/// An online strip packer: each piece is placed once, before the next one
/// is seen.
pub trait StripPacker {
    /// Places `piece` and returns the chosen translation.
    fn place(&mut self, piece: &ConvexPiece) -> Result<Placement>;

    fn placements(&self) -> &[Placement];

    /// Largest x covered by a placed piece, 0 when empty.
    fn occupied_width(&self) -> Rat;

    fn strip_height(&self) -> Rat {
        Rat::one()
    }

    fn region(&self) -> Region {
        Region::Strip {
            height: self.strip_height(),
        }
    }
}

impl<P: StripPacker + ?Sized> StripPacker for Box<P> {
    fn place(&mut self, piece: &ConvexPiece) -> Result<Placement> {
        (**self).place(piece)
    }

    fn placements(&self) -> &[Placement] {
        (**self).placements()
    }

    fn occupied_width(&self) -> Rat {
        (**self).occupied_width()
    }

    fn strip_height(&self) -> Rat {
        (**self).strip_height()
    }
}

/// The shipped packers, by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum PackerKind {
    Greedy,
    Random { seed: u64 },
    #[serde(rename = "onlinepacker")]
    Online,
}

impl PackerKind {
    pub fn build(self) -> Box<dyn StripPacker + Send> {
        match self {
            PackerKind::Greedy => Box::new(GreedyPacker::new()),
            PackerKind::Random { seed } => Box::new(RandomPacker::new(seed)),
            PackerKind::Online => Box::new(OnlinePacker::new()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PackerKind::Greedy => "greedy",
            PackerKind::Random { .. } => "random",
            PackerKind::Online => "onlinepacker",
        }
    }
}

impl std::str::FromStr for PackerKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<PackerKind> {
        match s {
            "greedy" => Ok(PackerKind::Greedy),
            "onlinepacker" | "online" => Ok(PackerKind::Online),
            _ => match s.strip_prefix("random") {
                Some(rest) => {
                    let seed = rest.trim_start_matches([':', '-']);
                    let seed = if seed.is_empty() { 0 } else { seed.parse().map_err(|_| unknown(s))? };
                    Ok(PackerKind::Random { seed })
                }
                None => Err(unknown(s)),
            },
        }
    }
}

fn unknown(s: &str) -> crate::Error {
    crate::Error::UnknownId {
        kind: "packer",
        name: s.to_string(),
    }
}

/// Places every piece in order and returns the placements.
pub fn pack_all<P: StripPacker + ?Sized>(packer: &mut P, pieces: &[ConvexPiece]) -> Result<Vec<Placement>> {
    pieces.iter().map(|p| packer.place(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_kinds() {
        assert_eq!("greedy".parse::<PackerKind>().unwrap(), PackerKind::Greedy);
        assert_eq!("onlinepacker".parse::<PackerKind>().unwrap(), PackerKind::Online);
        assert_eq!("random:7".parse::<PackerKind>().unwrap(), PackerKind::Random { seed: 7 });
        assert!("firstfit".parse::<PackerKind>().is_err());
    }
}
