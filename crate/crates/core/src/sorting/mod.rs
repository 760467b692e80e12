//! The online sorting game: an array of cells, the cost of the filled
//! sequence, and two online sorters.

mod balanced;
mod boxes;

pub use balanced::BalancedSorter;
pub use boxes::{choose_params, level_shape, worst_case_cells, BoxSorter, LevelShape, SorterParams};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Array of cells for the online sorting game.
#[derive(Clone, Debug)]
pub struct SortArray {
    cells: Vec<Option<Rat>>,
    declared_n: usize,
    filled: usize,
    growable: bool,
}

impl SortArray {
    /// `floor(gamma * n)` cells for an instance of `n` reals.
    pub fn new(declared_n: usize, gamma: &Rat) -> Result<SortArray> {
        let m = gamma
            .floor_scaled(declared_n as i64)
            .filter(|m| *m >= 0)
            .ok_or_else(|| Error::Contract(format!("bad capacity factor {gamma}")))? as usize;
        Ok(SortArray::with_capacity(declared_n, m))
    }

    pub fn with_capacity(declared_n: usize, capacity: usize) -> SortArray {
        SortArray {
            cells: vec![None; capacity],
            declared_n,
            filled: 0,
            growable: false,
        }
    }

    /// An array that starts with `n` cells and extends on demand.
    pub fn growable(declared_n: usize) -> SortArray {
        SortArray {
            growable: true,
            ..SortArray::with_capacity(declared_n, declared_n)
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filled == 0
    }

    pub fn declared_n(&self) -> usize {
        self.declared_n
    }

    pub fn filled_count(&self) -> usize {
        self.filled
    }

    pub fn is_growable(&self) -> bool {
        self.growable
    }

    /// Realised capacity factor `len / n`.
    pub fn gamma(&self) -> Rat {
        Rat::new(self.len() as i64, self.declared_n.max(1) as i64)
    }

    /// True once all `n` reals are placed or no empty cell remains.
    pub fn is_full(&self) -> bool {
        self.filled >= self.declared_n || (!self.growable && self.filled >= self.cells.len())
    }

    pub fn get(&self, cell: usize) -> Option<&Rat> {
        self.cells.get(cell).and_then(Option::as_ref)
    }

    pub fn is_empty_cell(&self, cell: usize) -> bool {
        cell < self.cells.len() && self.cells[cell].is_none()
    }

    pub fn cells(&self) -> &[Option<Rat>] {
        &self.cells
    }

    /// Writes `value` into an empty cell.
    pub fn place(&mut self, cell: usize, value: Rat) -> Result<()> {
        if value.is_negative() || value > Rat::one() {
            return Err(Error::ValueOutOfRange(value.to_string()));
        }
        if self.filled >= self.declared_n {
            return Err(Error::ArrayFull);
        }
        if cell >= self.cells.len() {
            if !self.growable {
                return Err(Error::CapacityExceeded {
                    cell,
                    capacity: self.cells.len(),
                });
            }
            self.cells.resize(cell + 1, None);
        }
        if self.cells[cell].is_some() {
            return Err(Error::CellOccupied(cell));
        }
        self.cells[cell] = Some(value);
        self.filled += 1;
        Ok(())
    }

    /// Filled values from left to right.
    pub fn values(&self) -> impl Iterator<Item = &Rat> {
        self.cells.iter().flatten()
    }

    pub fn total_cost(&self) -> Result<Rat> {
        total_cost(self.values())
    }
}

/// `|r_1 - 0| + sum |r_{i+1} - r_i| + |1 - r_n|` over the given sequence.
pub fn total_cost<'a>(values: impl IntoIterator<Item = &'a Rat>) -> Result<Rat> {
    let mut prev = Rat::zero();
    let mut cost = Rat::zero();
    let mut any = false;
    for v in values {
        cost += (v - &prev).abs();
        prev = v.clone();
        any = true;
    }
    if !any {
        return Err(Error::EmptyArray);
    }
    cost += (Rat::one() - prev).abs();
    Ok(cost)
}

/// An online algorithm choosing a cell for each arriving real.
pub trait OnlineSorter {
    /// Returns the cell for `x`; the caller writes it into `array`.
    fn place(&mut self, array: &SortArray, x: &Rat) -> Result<usize>;
}

/// Feeds `stream` to `sorter`, writing every placement into `array`.
pub fn run_stream<S: OnlineSorter + ?Sized>(
    sorter: &mut S,
    array: &mut SortArray,
    stream: &[Rat],
) -> Result<Vec<usize>> {
    let mut cells = Vec::with_capacity(stream.len());
    for x in stream {
        let cell = sorter.place(array, x)?;
        array.place(cell, x.clone())?;
        cells.push(cell);
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rats(v: &[(i64, i64)]) -> Vec<Rat> {
        v.iter().map(|&(n, d)| Rat::new(n, d)).collect()
    }

    #[test]
    fn cost_examples() {
        assert_eq!(total_cost(&rats(&[(2, 10), (5, 10), (9, 10)])).unwrap(), Rat::one());
        assert_eq!(total_cost(&rats(&[(9, 10), (5, 10), (2, 10)])).unwrap(), Rat::new(24, 10));
        assert_eq!(total_cost(&rats(&[(1, 2)])).unwrap(), Rat::one());
        assert!(matches!(total_cost(&[]), Err(Error::EmptyArray)));
    }

    #[test]
    fn array_rules() {
        let mut a = SortArray::new(2, &Rat::new(3, 2)).unwrap();
        assert_eq!(a.len(), 3);
        assert!(matches!(a.place(3, Rat::zero()), Err(Error::CapacityExceeded { .. })));
        assert!(matches!(a.place(0, Rat::new(3, 2)), Err(Error::ValueOutOfRange(_))));
        a.place(2, Rat::one()).unwrap();
        assert!(matches!(a.place(2, Rat::zero()), Err(Error::CellOccupied(2))));
        a.place(0, Rat::zero()).unwrap();
        assert!(a.is_full());
        assert!(matches!(a.place(1, Rat::zero()), Err(Error::ArrayFull)));
        assert_eq!(a.total_cost().unwrap(), Rat::one());
    }

    #[test]
    fn growable_array_extends() {
        let mut a = SortArray::growable(2);
        a.place(5, Rat::new(1, 2)).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(a.gamma(), Rat::from_int(3));
    }
}
