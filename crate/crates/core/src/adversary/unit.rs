use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::rat::{integer_root, Rat};
use crate::sorting::SortArray;

use super::Adversary;

/// Presents reals from the grid `{k/N}` with `N = floor(sqrt(2n))`.
///
/// A grid value is expensive when none of its occurrences sits next to an
/// empty cell. The smallest expensive value is presented while one exists,
/// otherwise zeros.
#[derive(Clone, Debug)]
pub struct UnitAdversary {
    n: usize,
    grid: usize,
    issued: usize,
    known_len: usize,
    exposed_flag: Vec<bool>,
    exposed_count: Vec<usize>,
    expensive: BTreeSet<usize>,
}

impl UnitAdversary {
    pub fn new(n: usize) -> UnitAdversary {
        let grid = integer_root(2 * n as u64, 2).max(1) as usize;
        UnitAdversary {
            n,
            grid,
            issued: 0,
            known_len: 0,
            exposed_flag: Vec::new(),
            exposed_count: vec![0; grid + 1],
            expensive: (0..=grid).collect(),
        }
    }

    /// `N`, the grid resolution.
    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn issued(&self) -> usize {
        self.issued
    }

    /// True while some grid value is expensive.
    pub fn is_probing(&self) -> bool {
        !self.expensive.is_empty()
    }

    pub fn expensive_values(&self) -> impl Iterator<Item = Rat> + '_ {
        self.expensive.iter().map(|&k| Rat::new(k as i64, self.grid as i64))
    }

    fn grid_index(&self, v: &Rat) -> Option<usize> {
        let k = v.floor_scaled(self.grid as i64)?;
        (Rat::new(k, self.grid as i64) == *v).then_some(k as usize)
    }

    fn refresh(&mut self, array: &SortArray, p: usize) {
        let Some(v) = array.get(p) else { return };
        let Some(k) = self.grid_index(v) else { return };
        let now = (p > 0 && array.is_empty_cell(p - 1)) || array.is_empty_cell(p + 1);
        if now == self.exposed_flag[p] {
            return;
        }
        self.exposed_flag[p] = now;
        if now {
            self.exposed_count[k] += 1;
            if self.exposed_count[k] == 1 {
                self.expensive.remove(&k);
            }
        } else {
            self.exposed_count[k] -= 1;
            if self.exposed_count[k] == 0 {
                self.expensive.insert(k);
            }
        }
    }
}

impl Adversary for UnitAdversary {
    fn next_real(&mut self, _array: &SortArray) -> Result<Rat> {
        if self.issued >= self.n {
            return Err(Error::Exhausted(self.issued));
        }
        self.issued += 1;
        let k = self.expensive.first().copied().unwrap_or(0);
        Ok(Rat::new(k as i64, self.grid as i64))
    }

    fn observe(&mut self, array: &SortArray, cell: usize) -> Result<()> {
        let len = array.len();
        if len > self.known_len {
            self.exposed_flag.resize(len, false);
            if self.known_len > 0 {
                // The old last cell may have gained an empty right neighbour.
                let last = self.known_len - 1;
                self.known_len = len;
                self.refresh(array, last);
            }
            self.known_len = len;
        }
        for p in cell.saturating_sub(1)..=(cell + 1).min(len - 1) {
            self.refresh(array, p);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sorting::BalancedSorter;

    #[test]
    fn empty_array_presents_zero() {
        let mut adv = UnitAdversary::new(8);
        assert_eq!(adv.grid(), 4);
        let array = SortArray::with_capacity(8, 8);
        assert_eq!(adv.next_real(&array).unwrap(), Rat::zero());
    }

    #[test]
    fn exposed_values_are_cheap() {
        let mut adv = UnitAdversary::new(8);
        let mut array = SortArray::with_capacity(8, 8);
        array.place(0, Rat::zero()).unwrap();
        adv.observe(&array, 0).unwrap();
        array.place(2, Rat::new(1, 4)).unwrap();
        adv.observe(&array, 2).unwrap();
        // 0 and 1/4 both touch empty cells; 1/2 is the smallest expensive value.
        assert_eq!(adv.next_real(&array).unwrap(), Rat::new(1, 2));
        // Filling cell 1 buries 0 (no empty neighbour) but 1/4 still touches cell 3.
        array.place(1, Rat::new(1, 2)).unwrap();
        adv.observe(&array, 1).unwrap();
        assert_eq!(adv.next_real(&array).unwrap(), Rat::zero());
    }

    #[test]
    fn exhausts_after_n() {
        let n = 10;
        let mut adv = UnitAdversary::new(n);
        let mut sorter = BalancedSorter::new(n);
        let mut array = SortArray::with_capacity(n, n);
        super::super::play(&mut adv, &mut sorter, &mut array, n).unwrap();
        assert!(matches!(adv.next_real(&array), Err(Error::Exhausted(10))));
    }
}
