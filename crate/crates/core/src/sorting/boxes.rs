use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{integer_root, Rat};

use super::{BalancedSorter, OnlineSorter, SortArray};

/// Recursion depth `k` and slack parameter `delta` of the box sorter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SorterParams {
    pub k: u32,
    pub delta: Rat,
}

impl SorterParams {
    pub fn new(k: u32, delta: Rat) -> Result<SorterParams> {
        let p = SorterParams { k, delta };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Contract("k must be at least 1".into()));
        }
        if !self.delta.is_positive() || self.delta >= Rat::new(1, 2) {
            return Err(Error::Contract(format!("delta {} not in (0, 1/2)", self.delta)));
        }
        // k <= 1/(2 delta) + 1  <=>  2 delta (k - 1) <= 1
        if Rat::from_int(2) * &self.delta * Rat::from_int(self.k as i64 - 1) > Rat::one() {
            return Err(Error::Contract(format!(
                "k = {} too large for delta = {}",
                self.k, self.delta
            )));
        }
        Ok(())
    }

    /// `1 + 2 k delta`.
    pub fn capacity_factor(&self) -> Rat {
        Rat::one() + Rat::from_int(2 * self.k as i64) * &self.delta
    }

    /// `floor((1 + 2 k delta) n)` cells.
    pub fn capacity(&self, n: usize) -> usize {
        self.capacity_factor()
            .floor_scaled(n as i64)
            .expect("capacity fits in i64") as usize
    }
}

/// Picks `k ~ sqrt(log n / log log n)` and `delta = epsilon / (2k)` so that
/// the box sorter uses at most `(1 + epsilon) n` cells.
///
/// `delta` is lowered when needed to stay below 1/2 and to satisfy
/// `k <= 1/(2 delta) + 1`; lowering it only shrinks the capacity. For small
/// `n` the integer box sizes can overshoot the capacity, so `k` is then
/// lowered until [`worst_case_cells`] fits.
pub fn choose_params(n: usize, epsilon: &Rat) -> Result<SorterParams> {
    if n < 4 {
        return Err(Error::Contract(format!("n = {n} must be at least 4")));
    }
    if !epsilon.is_positive() {
        return Err(Error::Contract("epsilon must be positive".into()));
    }
    let log_n = (n as f64).log2();
    let mut k = (log_n / log_n.log2()).sqrt().round().max(1.0) as u32;
    loop {
        let mut delta = epsilon / Rat::from_int(2 * k as i64);
        if k > 1 {
            delta = delta.min(Rat::new(1, 2 * (k as i64 - 1)));
        }
        delta = delta.min(Rat::new(1, 3));
        let params = SorterParams::new(k, delta)?;
        if k == 1 || worst_case_cells(n, k, &params.delta) <= params.capacity(n) {
            return Ok(params);
        }
        k -= 1;
    }
}

/// Cells a depth-`k` box sorter may touch on `n` reals, or `usize::MAX` when
/// some box is too narrow for its own child.
///
/// A level allocates at most one box per quantile plus one per filled box.
pub fn worst_case_cells(n: usize, k: u32, delta: &Rat) -> usize {
    if k <= 1 {
        return n;
    }
    let shape = level_shape(n, k, delta);
    if worst_case_cells(shape.box_items, k - 1, delta) > shape.box_cells {
        return usize::MAX;
    }
    (shape.quantiles + n / shape.box_items).saturating_mul(shape.box_cells)
}

/// Box layout of one recursion level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelShape {
    /// Number of value quantiles `b = floor(n^(1/(k+1)))`.
    pub quantiles: usize,
    /// Reals per box `n' = max(1, floor(delta n^(k/(k+1))))`.
    pub box_items: usize,
    /// Cells per box `w = ceil((1 + 2(k-1) delta) n')`.
    pub box_cells: usize,
}

/// Box layout for a level of depth `k` serving `n` reals.
pub fn level_shape(n: usize, k: u32, delta: &Rat) -> LevelShape {
    let quantiles = integer_root(n as u64, k + 1).max(1) as usize;
    // Largest q with q^(k+1) <= delta^(k+1) n^k.
    let bound = delta.powi(k as i32 + 1) * Rat::from_usize(n).powi(k as i32);
    let estimate = (delta.to_f64() * (n as f64).powf(k as f64 / (k as f64 + 1.0))).floor();
    let mut q = estimate.max(0.0) as i64;
    let fits = |q: i64| Rat::from_int(q).powi(k as i32 + 1) <= bound;
    while q > 0 && !fits(q) {
        q -= 1;
    }
    while fits(q + 1) {
        q += 1;
    }
    let box_items = q.max(1) as usize;
    let factor = Rat::one() + Rat::from_int(2 * (k as i64 - 1)) * delta;
    let box_cells = (factor * Rat::from_usize(box_items))
        .ceil_i64()
        .expect("box width fits") as usize;
    LevelShape {
        quantiles,
        box_items,
        box_cells,
    }
}

#[derive(Clone, Debug)]
enum Node {
    Base(BalancedSorter),
    Split(Box<Split>),
}

#[derive(Clone, Debug)]
struct Split {
    shape: LevelShape,
    k: u32,
    delta: Rat,
    alpha: Rat,
    beta: Rat,
    offset: usize,
    region: usize,
    pointer: Vec<usize>,
    max_pointer: usize,
    boxes: Vec<Option<(usize, Node)>>,
}

impl Node {
    fn new(n: usize, k: u32, delta: &Rat, offset: usize, region: usize, alpha: Rat, beta: Rat) -> Node {
        if k == 1 {
            return Node::Base(BalancedSorter::within(n, offset, alpha, beta));
        }
        let shape = level_shape(n, k, delta);
        let pointer: Vec<usize> = (0..shape.quantiles).collect();
        Node::Split(Box::new(Split {
            max_pointer: shape.quantiles - 1,
            shape,
            k,
            delta: delta.clone(),
            alpha,
            beta,
            offset,
            region,
            pointer,
            boxes: Vec::new(),
        }))
    }

    fn place(&mut self, x: &Rat) -> Result<usize> {
        match self {
            Node::Base(b) => b.next_cell(x),
            Node::Split(s) => s.place(x),
        }
    }
}

impl Split {
    fn quantile(&self, x: &Rat) -> usize {
        let b = self.shape.quantiles as i64;
        ((x - &self.alpha) / &self.beta)
            .floor_scaled(b)
            .unwrap_or(0)
            .clamp(0, b - 1) as usize
    }

    fn place(&mut self, x: &Rat) -> Result<usize> {
        let i = self.quantile(x);
        let mut p = self.pointer[i];
        let full = matches!(self.boxes.get(p), Some(Some((count, _))) if *count >= self.shape.box_items);
        if full {
            self.max_pointer += 1;
            p = self.max_pointer;
            self.pointer[i] = p;
        }
        let end = (p + 1) * self.shape.box_cells;
        if end > self.region {
            return Err(Error::CapacityExceeded {
                cell: self.offset + end - 1,
                capacity: self.offset + self.region,
            });
        }
        if self.boxes.len() <= p {
            self.boxes.resize_with(p + 1, || None);
        }
        let slot = &mut self.boxes[p];
        if slot.is_none() {
            let b = self.shape.quantiles as i64;
            let width = &self.beta / Rat::from_int(b);
            let alpha = &self.alpha + &width * Rat::from_usize(i);
            let child = Node::new(
                self.shape.box_items,
                self.k - 1,
                &self.delta,
                self.offset + p * self.shape.box_cells,
                self.shape.box_cells,
                alpha,
                width,
            );
            *slot = Some((0, child));
        }
        let (count, child) = slot.as_mut().expect("just created");
        let cell = child.place(x)?;
        *count += 1;
        Ok(cell)
    }
}

/// The recursive box sorter: reals are routed by value quantile into boxes
/// of `w` cells, each box running the depth `k - 1` sorter, bottoming out in
/// [`BalancedSorter`].
#[derive(Clone, Debug)]
pub struct BoxSorter {
    params: SorterParams,
    capacity: usize,
    root: Node,
}

impl BoxSorter {
    /// A sorter for `n` reals in an array of `floor((1 + 2 k delta) n)` cells.
    ///
    /// Fails when the integer box layout cannot be guaranteed to fit.
    pub fn new(n: usize, params: SorterParams) -> Result<BoxSorter> {
        params.validate()?;
        let capacity = params.capacity(n);
        if worst_case_cells(n, params.k, &params.delta) > capacity {
            return Err(Error::Contract(format!(
                "k = {}, delta = {} needs more than {capacity} cells for n = {n}",
                params.k, params.delta
            )));
        }
        let root = Node::new(n, params.k, &params.delta, 0, capacity, Rat::zero(), Rat::one());
        Ok(BoxSorter {
            params,
            capacity,
            root,
        })
    }

    /// Depth 1 on exactly `n` cells.
    pub fn unit_capacity(n: usize) -> BoxSorter {
        BoxSorter {
            params: SorterParams {
                k: 1,
                delta: Rat::new(1, 4),
            },
            capacity: n,
            root: Node::Base(BalancedSorter::new(n)),
        }
    }

    pub fn params(&self) -> &SorterParams {
        &self.params
    }

    /// Number of cells the sorter may write to.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn next_cell(&mut self, x: &Rat) -> Result<usize> {
        let cell = self.root.place(x)?;
        if cell >= self.capacity {
            return Err(Error::CapacityExceeded {
                cell,
                capacity: self.capacity,
            });
        }
        Ok(cell)
    }
}

impl OnlineSorter for BoxSorter {
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
    use crate::sorting::{run_stream, SortArray};

    #[test]
    fn params_examples() {
        let p = choose_params(1 << 16, &Rat::one()).unwrap();
        assert_eq!((p.k, p.delta.clone()), (2, Rat::new(1, 4)));
        assert_eq!(p.capacity_factor(), Rat::from_int(2));
        assert_eq!(choose_params(16, &Rat::one()).unwrap().k, 1);
        // Boxes of one real would need two cells each, so depth 1 is used.
        let tiny = choose_params(1 << 16, &Rat::new(1, 1000)).unwrap();
        assert_eq!((tiny.k, tiny.delta.clone()), (1, Rat::new(1, 2000)));
        assert!(tiny.capacity_factor() <= Rat::new(1001, 1000));
        assert!(choose_params(3, &Rat::one()).is_err());
    }

    #[test]
    fn shape_example() {
        let s = level_shape(16, 1, &Rat::new(1, 4));
        assert_eq!((s.quantiles, s.box_items, s.box_cells), (4, 1, 1));
        let s = level_shape(1 << 16, 2, &Rat::new(1, 4));
        // 2^16^(1/3) = 40.3; (1/4) 2^(32/3) = 406.4; ceil(1.5 * 406) = 609
        assert_eq!((s.quantiles, s.box_items, s.box_cells), (40, 406, 609));
    }

    #[test]
    fn equal_zeros_cost_one() {
        let n = 1 << 10;
        let params = SorterParams::new(2, Rat::new(1, 4)).unwrap();
        let mut sorter = BoxSorter::new(n, params.clone()).unwrap();
        let mut array = SortArray::with_capacity(n, params.capacity(n));
        let stream = vec![Rat::zero(); n];
        run_stream(&mut sorter, &mut array, &stream).unwrap();
        assert_eq!(array.total_cost().unwrap(), Rat::one());
    }

    #[test]
    fn small_instances_drop_a_level() {
        // n = 48, epsilon = 1/2: depth 2 gives boxes of 1 real in 2 cells.
        let p = choose_params(48, &Rat::new(1, 2)).unwrap();
        assert_eq!(p.k, 1);
        let deep = SorterParams::new(2, Rat::new(1, 8)).unwrap();
        assert_eq!(worst_case_cells(48, 2, &deep.delta), (3 + 48) * 2);
        assert!(BoxSorter::new(48, deep).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SorterParams::new(0, Rat::new(1, 4)).is_err());
        assert!(SorterParams::new(2, Rat::new(1, 2)).is_err());
        assert!(SorterParams::new(4, Rat::new(1, 4)).is_err());
        assert!(SorterParams::new(3, Rat::new(1, 4)).is_ok());
    }
}
