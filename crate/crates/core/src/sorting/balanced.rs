use crate::error::{Error, Result};
use crate::rat::{integer_root, Rat};

use super::{OnlineSorter, SortArray};

/// The square-root sorter: `N1 = floor(sqrt(n))` value intervals and
/// `N2 = 2 N1` subarrays, each subarray dedicated to a single interval.
///
/// When neither a matching non-full subarray nor an empty subarray is left,
/// the remaining empty cells are treated as a fresh array and the procedure
/// restarts on them.
#[derive(Clone, Debug)]
pub struct BalancedSorter {
    offset: usize,
    alpha: Rat,
    beta: Rat,
    level: Level,
    depth: usize,
}

#[derive(Clone, Debug)]
struct Level {
    // Logical cell -> cell relative to the sorter's offset; `None` is the identity.
    map: Option<Vec<usize>>,
    intervals: usize,
    starts: Vec<usize>,
    fill: Vec<usize>,
    open: Vec<Option<usize>>,
    next_empty: usize,
}

impl Level {
    fn new(len: usize, map: Option<Vec<usize>>) -> Level {
        let intervals = integer_root(len as u64, 2).max(1) as usize;
        let subarrays = (2 * intervals).min(len).max(1);
        let starts = (0..=subarrays).map(|j| j * len / subarrays).collect();
        Level {
            map,
            intervals,
            starts,
            fill: vec![0; subarrays],
            open: vec![None; intervals],
            next_empty: 0,
        }
    }

    fn subarrays(&self) -> usize {
        self.fill.len()
    }

    fn size(&self, j: usize) -> usize {
        self.starts[j + 1] - self.starts[j]
    }

    fn physical(&self, logical: usize) -> usize {
        match &self.map {
            Some(m) => m[logical],
            None => logical,
        }
    }

    fn take(&mut self, j: usize) -> usize {
        let logical = self.starts[j] + self.fill[j];
        self.fill[j] += 1;
        self.physical(logical)
    }

    /// Places a real of interval `i`; `None` when the level is exhausted.
    fn place(&mut self, i: usize) -> Option<usize> {
        if let Some(j) = self.open[i] {
            let cell = self.take(j);
            if self.fill[j] == self.size(j) {
                self.open[i] = None;
            }
            return Some(cell);
        }
        while self.next_empty < self.subarrays() {
            let j = self.next_empty;
            self.next_empty += 1;
            if self.size(j) == 0 {
                continue;
            }
            let cell = self.take(j);
            if self.fill[j] < self.size(j) {
                self.open[i] = Some(j);
            }
            return Some(cell);
        }
        None
    }

    fn empty_cells(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..self.subarrays() {
            for logical in self.starts[j] + self.fill[j]..self.starts[j + 1] {
                out.push(self.physical(logical));
            }
        }
        out
    }
}

impl BalancedSorter {
    /// A sorter for `n` reals from `[0, 1]` written to cells `0..n`.
    pub fn new(n: usize) -> BalancedSorter {
        BalancedSorter::within(n, 0, Rat::zero(), Rat::one())
    }

    /// A sorter for `n` reals from `[alpha, alpha + beta)` written to cells
    /// `offset..offset + n`.
    pub fn within(n: usize, offset: usize, alpha: Rat, beta: Rat) -> BalancedSorter {
        BalancedSorter {
            offset,
            alpha,
            beta,
            level: Level::new(n.max(1), None),
            depth: 0,
        }
    }

    /// Number of restarts on leftover empty cells so far.
    pub fn depth(&self) -> usize {
        self.depth
    }

    fn interval(&self, x: &Rat) -> usize {
        let k = self.level.intervals;
        let scaled = if self.alpha.is_zero() && self.beta == Rat::one() {
            x.floor_scaled(k as i64)
        } else {
            ((x - &self.alpha) / &self.beta).floor_scaled(k as i64)
        };
        scaled.unwrap_or(0).clamp(0, k as i64 - 1) as usize
    }

    /// Chooses a cell (absolute index) for `x` without touching any array.
    pub fn next_cell(&mut self, x: &Rat) -> Result<usize> {
        loop {
            let i = self.interval(x);
            if let Some(cell) = self.level.place(i) {
                return Ok(self.offset + cell);
            }
            let empties = self.level.empty_cells();
            if empties.is_empty() {
                return Err(Error::ArrayFull);
            }
            self.level = Level::new(empties.len(), Some(empties));
            self.depth += 1;
        }
    }
}

impl OnlineSorter for BalancedSorter {
    fn place(&mut self, array: &SortArray, x: &Rat) -> Result<usize> {
        if array.is_full() {
            return Err(Error::ArrayFull);
        }
        self.next_cell(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_trace_n4() {
        let mut s = BalancedSorter::new(4);
        assert_eq!(s.next_cell(&Rat::new(3, 10)).unwrap(), 0);
        assert_eq!(s.next_cell(&Rat::new(4, 10)).unwrap(), 1);
        assert_eq!(s.next_cell(&Rat::new(8, 10)).unwrap(), 2);
        assert_eq!(s.next_cell(&Rat::new(1, 10)).unwrap(), 3);
        assert!(matches!(s.next_cell(&Rat::zero()), Err(Error::ArrayFull)));
    }

    #[test]
    fn restarts_on_leftover_cells() {
        // n = 9: three intervals, six subarrays of sizes 1,2,1,2,1,2.
        let mut s = BalancedSorter::new(9);
        let mut seen = Vec::new();
        for k in 0..9 {
            // one real per interval, cycling, to strand partially filled subarrays
            let x = Rat::new((k % 3) * 3 + 1, 9);
            seen.push(s.next_cell(&x).unwrap());
        }
        seen.sort();
        assert_eq!(seen, (0..9).collect::<Vec<_>>());
    }
}
