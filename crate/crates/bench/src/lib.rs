//! Shared fixtures for the criterion benches.

use shearpack::harness::gen;
use shearpack::{ConvexPiece, OfflineConfig, Problem, Rat};

pub const SEED: u64 = 7;

pub fn reals(n: usize) -> Vec<Rat> {
    gen::uniform_reals(n, SEED)
}

pub fn pieces(source: &str, n: usize) -> Vec<ConvexPiece> {
    gen::piece_stream(source, n, SEED).expect("known piece stream")
}

pub fn offline_pieces(problem: Problem, n: usize) -> Vec<ConvexPiece> {
    gen::offline_instance(problem, n, &OfflineConfig::default().delta, SEED)
}
