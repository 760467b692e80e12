//! Adaptive adversaries for the online sorting game.

mod coarsen;
mod unit;

pub use coarsen::{compute_home, CoarsenParams, CoarseningAdversary, HomeReport, TieBreak, TranscriptRow};
pub use unit::UnitAdversary;

use crate::error::Result;
use crate::rat::Rat;
use crate::sorting::{OnlineSorter, SortArray};

/// A stream generator that may react to the array state.
pub trait Adversary {
    /// The next real to present.
    fn next_real(&mut self, array: &SortArray) -> Result<Rat>;

    /// Called after the last issued real was written to `cell`.
    fn observe(&mut self, array: &SortArray, cell: usize) -> Result<()>;
}

/// A fixed stream presented as a non-adaptive adversary.
#[derive(Clone, Debug)]
pub struct FixedStream {
    values: Vec<Rat>,
    next: usize,
}

impl FixedStream {
    pub fn new(values: Vec<Rat>) -> FixedStream {
        FixedStream { values, next: 0 }
    }
}

impl Adversary for FixedStream {
    fn next_real(&mut self, _array: &SortArray) -> Result<Rat> {
        let v = self
            .values
            .get(self.next)
            .cloned()
            .ok_or(crate::Error::Exhausted(self.next))?;
        self.next += 1;
        Ok(v)
    }

    fn observe(&mut self, _array: &SortArray, _cell: usize) -> Result<()> {
        Ok(())
    }
}

/// Issued values and chosen cells of a finished game.
#[derive(Clone, Debug, Default)]
pub struct Duel {
    pub values: Vec<Rat>,
    pub cells: Vec<usize>,
}

/// Plays `rounds` rounds of adversary against sorter.
pub fn play<A, S>(adversary: &mut A, sorter: &mut S, array: &mut SortArray, rounds: usize) -> Result<Duel>
where
    A: Adversary + ?Sized,
    S: OnlineSorter + ?Sized,
{
    let mut duel = Duel::default();
    for _ in 0..rounds {
        let x = adversary.next_real(array)?;
        let cell = sorter.place(array, &x)?;
        array.place(cell, x.clone())?;
        adversary.observe(array, cell)?;
        duel.values.push(x);
        duel.cells.push(cell);
    }
    Ok(duel)
}

/// Fenwick tree over 0/1 flags that can grow.
#[derive(Clone, Debug, Default)]
pub(crate) struct Fenwick {
    tree: Vec<i64>,
    flags: Vec<bool>,
}

impl Fenwick {
    pub(crate) fn new(len: usize) -> Fenwick {
        Fenwick {
            tree: vec![0; len + 1],
            flags: vec![false; len],
        }
    }

    pub(crate) fn grow(&mut self, len: usize) {
        if len <= self.flags.len() {
            return;
        }
        let flags = std::mem::take(&mut self.flags);
        *self = Fenwick::new(len.max(2 * flags.len()));
        for (i, f) in flags.into_iter().enumerate() {
            if f {
                self.set(i);
            }
        }
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.flags.get(i).copied().unwrap_or(false)
    }

    pub(crate) fn set(&mut self, i: usize) {
        if self.flags[i] {
            return;
        }
        self.flags[i] = true;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += 1;
            j += j & j.wrapping_neg();
        }
    }

    fn prefix(&self, end: usize) -> i64 {
        let mut j = end.min(self.flags.len());
        let mut s = 0;
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }

    /// Set flags in `lo..=hi`.
    pub(crate) fn count(&self, lo: usize, hi: usize) -> usize {
        (self.prefix(hi + 1) - self.prefix(lo)) as usize
    }
}
