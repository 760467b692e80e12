//! Online sorting into arrays and online translational packing of convex
//! polygons into a strip, with exact rational arithmetic throughout.
//!
//! The crate contains the sorters and adaptive adversaries for the online
//! sorting game, the strip packers (a leftmost greedy baseline and the
//! box-type-tree packer), the reduction that turns a strip packer into a
//! sorter, offline constant-factor packers, and an experiment harness.

pub mod adversary;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod offline;
pub mod rat;
pub mod reduce;
pub mod sorting;
pub mod strip;

pub use error::{Error, Result};
pub use geometry::{
    check_packing, check_placements, interior_overlap, BBox, ConvexPiece, HorizontalParallelogram,
    Measure, Placement, Point, Region, Spine, Violation,
};
pub use harness::{run_trial, sweep, ExperimentSpec, TrialKind, TrialRecord};
pub use offline::{opt_lower_bound, MiniContainer, OfflineConfig, OfflineResult, Problem};
pub use rat::Rat;
pub use reduce::{gap_certificate, lift_real, pack_as_sorter, GapCertificate, PackingSorter, ReductionRun};
pub use sorting::{total_cost, BalancedSorter, BoxSorter, OnlineSorter, SortArray, SorterParams};
pub use strip::{BoxType, GreedyPacker, OnlinePacker, PackerKind, RandomPacker, StripPacker};
