use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::sorting::SortArray;

use super::{Adversary, Fenwick};

/// Parameters of the coarsening adversary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarsenParams {
    /// Grid coarsening factor `s = log^C n`.
    pub s: u64,
    /// The exponent `C` in `[3, 4]`.
    pub exponent: f64,
    /// Homes smaller than `s^i / delta` are small.
    pub delta: f64,
    /// `i*`, the last phase the analysis needs.
    pub last_phase: u32,
    /// Capacity factor of the opponent's array.
    pub gamma: Rat,
}

impl CoarsenParams {
    /// Defaults for an instance of `n` reals against an array of `gamma n` cells.
    ///
    /// Logarithms are base 2; `s = ceil(log^3 n)` and `C = log s / log log n`.
    pub fn for_instance(n: usize, gamma: &Rat) -> Result<CoarsenParams> {
        if n < 4 {
            return Err(Error::Contract(format!("n = {n} must be at least 4")));
        }
        let log_n = (n as f64).log2();
        let log_log_n = log_n.log2();
        let s = log_n.powi(3).ceil() as u64;
        let exponent = if log_log_n > 0.0 {
            ((s as f64).log2() / log_log_n).clamp(3.0, 4.0)
        } else {
            3.0
        };
        let delta = log_n / (16.0 * exponent * gamma.to_f64() * log_log_n);
        let last_phase = (log_n / (exponent * log_log_n)).floor() as u32;
        Ok(CoarsenParams {
            s,
            exponent,
            delta,
            last_phase,
            gamma: gamma.clone(),
        })
    }

    /// `s^i / n`, the spacing of the phase-`i` grid.
    pub fn spacing(&self, phase: u32, n: usize) -> Rat {
        Rat::from_int(self.s as i64).powi(phase as i32) / Rat::from_usize(n)
    }

    /// `s^i / delta`.
    pub fn small_home_below(&self, phase: u32) -> f64 {
        (self.s as f64).powi(phase as i32) / self.delta
    }

    /// `4 gamma s^i`.
    pub fn large_home_above(&self, phase: u32) -> f64 {
        4.0 * self.gamma.to_f64() * (self.s as f64).powi(phase as i32)
    }

    /// Warning text when `gamma > log n / log log n`, outside the analysed range.
    pub fn gamma_warning(&self, n: usize) -> Option<String> {
        let log_n = (n as f64).log2();
        let limit = log_n / log_n.log2();
        (self.gamma.to_f64() > limit)
            .then(|| format!("gamma {} exceeds log n / log log n = {limit:.3}", self.gamma))
    }
}

/// How an expensive real is chosen among several.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    Smallest,
    Random { seed: u64 },
}

/// The home of a grid value at one moment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomeReport {
    pub value: Rat,
    pub home: Vec<usize>,
    pub is_expensive: bool,
}

/// Reference home computation by a full scan.
///
/// A cell is in the home of `x` when it is empty, unmarked, and one of its
/// first filled neighbours holds a value strictly within `radius` of `x`.
pub fn compute_home(x: &Rat, array: &SortArray, marked: &[bool], radius: &Rat, small_below: f64) -> HomeReport {
    let cells = array.cells();
    let len = cells.len();
    let mut left: Vec<Option<&Rat>> = vec![None; len];
    let mut last = None;
    for (p, c) in cells.iter().enumerate() {
        left[p] = last;
        if let Some(v) = c {
            last = Some(v);
        }
    }
    let mut right: Vec<Option<&Rat>> = vec![None; len];
    last = None;
    for p in (0..len).rev() {
        right[p] = last;
        if let Some(v) = &cells[p] {
            last = Some(v);
        }
    }
    let near = |v: Option<&Rat>| v.is_some_and(|v| (v - x).abs() < *radius);
    let home: Vec<usize> = (0..len)
        .filter(|&p| cells[p].is_none() && !marked.get(p).copied().unwrap_or(false))
        .filter(|&p| near(left[p]) || near(right[p]))
        .collect();
    HomeReport {
        value: x.clone(),
        is_expensive: (home.len() as f64) < small_below,
        home,
    }
}

/// One presented real.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptRow {
    pub step: usize,
    pub issued_value: Rat,
    pub placed_cell: usize,
    pub phase: u32,
    pub marked_cells_total: usize,
}

/// Set of grid indices with O(1) random choice and ordered minimum.
#[derive(Clone, Debug, Default)]
struct GridSet {
    ordered: BTreeSet<usize>,
    items: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl GridSet {
    fn with_universe(len: usize) -> GridSet {
        GridSet {
            ordered: BTreeSet::new(),
            items: Vec::new(),
            pos: vec![None; len],
        }
    }

    fn insert(&mut self, k: usize) {
        if self.pos[k].is_none() {
            self.pos[k] = Some(self.items.len());
            self.items.push(k);
            self.ordered.insert(k);
        }
    }

    fn remove(&mut self, k: usize) {
        if let Some(i) = self.pos[k].take() {
            self.items.swap_remove(i);
            if i < self.items.len() {
                self.pos[self.items[i]] = Some(i);
            }
            self.ordered.remove(&k);
        }
    }

    fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The coarsening adversary: phases over ever coarser grids `S_i`, with the
/// deserted space of each phase marked at the phase's end.
#[derive(Clone, Debug)]
pub struct CoarseningAdversary {
    n: usize,
    params: CoarsenParams,
    tie: TieBreak,
    rng: ChaCha8Rng,
    phase: u32,
    issued: usize,
    current: Option<usize>,
    len: usize,
    spacing: Rat,
    grid_max: usize,
    home: Vec<usize>,
    expensive: GridSet,
    // Maximal runs of empty cells, start -> end (inclusive).
    runs: BTreeMap<usize, usize>,
    marked: Fenwick,
    marked_total: usize,
    deserted: Vec<Vec<usize>>,
    transcript: Vec<TranscriptRow>,
    last_value: Option<Rat>,
}

const MAX_PHASES: u32 = 64;

impl CoarseningAdversary {
    pub fn new(n: usize, params: CoarsenParams, tie: TieBreak) -> CoarseningAdversary {
        let seed = match tie {
            TieBreak::Random { seed } => seed,
            TieBreak::Smallest => 0,
        };
        let mut adv = CoarseningAdversary {
            n,
            params,
            tie,
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: 0,
            issued: 0,
            current: None,
            len: 0,
            spacing: Rat::one(),
            grid_max: 0,
            home: Vec::new(),
            expensive: GridSet::default(),
            runs: BTreeMap::new(),
            marked: Fenwick::new(0),
            marked_total: 0,
            deserted: Vec::new(),
            transcript: Vec::new(),
            last_value: None,
        };
        adv.set_grid(1);
        adv
    }

    pub fn params(&self) -> &CoarsenParams {
        &self.params
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn issued(&self) -> usize {
        self.issued
    }

    pub fn marked_total(&self) -> usize {
        self.marked_total
    }

    pub fn transcript(&self) -> &[TranscriptRow] {
        &self.transcript
    }

    /// Cells marked at the end of each completed phase, in phase order.
    pub fn deserted_spaces(&self) -> &[Vec<usize>] {
        &self.deserted
    }

    /// Checks that no cell was marked in two phases.
    pub fn deserted_spaces_disjoint(&self) -> bool {
        let mut all: Vec<usize> = self.deserted.iter().flatten().copied().collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        all.len() == total
    }

    /// Grid points of the current phase, `k * s^i / n` for `k = 0..=n/s^i`.
    pub fn grid_value(&self, k: usize) -> Rat {
        &self.spacing * Rat::from_usize(k)
    }

    /// True when `v` is a point of `S_1`.
    pub fn on_first_grid(&self, v: &Rat) -> bool {
        let g = self.params.spacing(1, self.n);
        let q = v / &g;
        q.is_integer() && !q.is_negative() && q <= Rat::from_usize(self.n) / Rat::from_int(self.params.s as i64)
    }

    /// Sizes of all current homes, indexed by grid point.
    pub fn home_sizes(&self) -> &[usize] {
        &self.home
    }

    /// Marked flags for the first `len` cells.
    pub fn marked_flags(&self) -> Vec<bool> {
        (0..self.len).map(|p| self.marked.get(p)).collect()
    }

    /// Home of a current grid value from the incremental bookkeeping.
    pub fn home_report(&self, array: &SortArray, k: usize) -> HomeReport {
        let mut home = Vec::new();
        for (&a, &b) in &self.runs {
            let (l, r) = self.neighbours(array, a, b);
            if l == Some(k) || r == Some(k) {
                home.extend((a..=b).filter(|&p| !self.marked.get(p)));
            }
        }
        HomeReport {
            value: self.grid_value(k),
            is_expensive: (self.home[k] as f64) < self.params.small_home_below(self.phase.max(1)),
            home,
        }
    }

    fn set_grid(&mut self, phase: u32) {
        self.spacing = self.params.spacing(phase, self.n);
        self.grid_max = (Rat::one() / &self.spacing).floor_i64().unwrap_or(0).max(0) as usize;
        self.home = vec![0; self.grid_max + 1];
        self.expensive = GridSet::with_universe(self.grid_max + 1);
    }

    /// Nearest grid index strictly within half a spacing of `v`.
    fn associate(&self, v: &Rat) -> Option<usize> {
        let q = v / &self.spacing;
        let twice = &q * Rat::from_int(2);
        if twice.is_integer() && !q.is_integer() {
            return None;
        }
        let k = (q + Rat::new(1, 2)).floor_i64()?;
        (0..=self.grid_max as i64).contains(&k).then_some(k as usize)
    }

    fn neighbours(&self, array: &SortArray, a: usize, b: usize) -> (Option<usize>, Option<usize>) {
        let l = if a > 0 { array.get(a - 1).and_then(|v| self.associate(v)) } else { None };
        let r = array.get(b + 1).and_then(|v| self.associate(v));
        (l, r)
    }

    fn unmarked(&self, a: usize, b: usize) -> usize {
        (b - a + 1) - self.marked.count(a, b)
    }

    fn apply_run(&mut self, array: &SortArray, a: usize, b: usize, sign: i64) {
        let (l, r) = self.neighbours(array, a, b);
        let u = self.unmarked(a, b);
        if u == 0 {
            return;
        }
        let mut ks = [l, r];
        if l == r {
            ks[1] = None;
        }
        for k in ks.into_iter().flatten() {
            if sign > 0 {
                self.home[k] += u;
            } else {
                self.home[k] -= u;
            }
            self.update_expensive(k);
        }
    }

    fn update_expensive(&mut self, k: usize) {
        let small = (self.home[k] as f64) < self.params.small_home_below(self.phase.max(1));
        if small {
            self.expensive.insert(k);
        } else {
            self.expensive.remove(k);
        }
    }

    fn rebuild_homes(&mut self, array: &SortArray) {
        self.home.iter_mut().for_each(|h| *h = 0);
        let runs: Vec<(usize, usize)> = self.runs.iter().map(|(&a, &b)| (a, b)).collect();
        for (a, b) in runs {
            let (l, r) = self.neighbours(array, a, b);
            let u = self.unmarked(a, b);
            if let Some(k) = l {
                self.home[k] += u;
            }
            if let Some(k) = r.filter(|&k| Some(k) != l) {
                self.home[k] += u;
            }
        }
        for k in 0..=self.grid_max {
            self.update_expensive(k);
        }
    }

    fn sync_len(&mut self, array: &SortArray) {
        let len = array.len();
        if len <= self.len {
            return;
        }
        self.marked.grow(len);
        let old = self.len;
        self.len = len;
        let last_run = self.runs.range(..old).next_back().map(|(&a, &b)| (a, b));
        match last_run {
            Some((a, b)) if old > 0 && b == old - 1 => {
                self.apply_run(array, a, b, -1);
                self.runs.insert(a, len - 1);
                self.apply_run(array, a, len - 1, 1);
            }
            _ => {
                self.runs.insert(old, len - 1);
                self.apply_run(array, old, len - 1, 1);
            }
        }
    }

    fn choose(&mut self) -> usize {
        match self.tie {
            TieBreak::Smallest => *self.expensive.ordered.first().expect("non-empty"),
            TieBreak::Random { .. } => {
                let i = self.rng.gen_range(0..self.expensive.items.len());
                self.expensive.items[i]
            }
        }
    }

    fn end_phase(&mut self, array: &SortArray) -> Result<()> {
        let i = self.phase;
        let low = self.params.small_home_below(i);
        let high = self.params.large_home_above(i);
        let coarse = self.params.spacing(i + 1, self.n);
        let coarse_max = (Rat::one() / &coarse).floor_i64().unwrap_or(0).max(0);
        let min_gap = &coarse / Rat::from_int(12);
        let mut deserted_reals = vec![false; self.grid_max + 1];
        for (k, flag) in deserted_reals.iter_mut().enumerate() {
            let h = self.home[k] as f64;
            if !(low <= h && h <= high) {
                continue;
            }
            let x = self.grid_value(k);
            let j = (&x / &coarse).floor_i64().unwrap_or(0);
            let far = [j, j + 1]
                .into_iter()
                .filter(|j| (0..=coarse_max).contains(j))
                .all(|j| (&coarse * Rat::from_int(j) - &x).abs() >= min_gap);
            *flag = far;
        }
        let mut space = Vec::new();
        let runs: Vec<(usize, usize)> = self.runs.iter().map(|(&a, &b)| (a, b)).collect();
        for (a, b) in runs {
            let (l, r) = self.neighbours(array, a, b);
            let hit = l.is_some_and(|k| deserted_reals[k]) || r.is_some_and(|k| deserted_reals[k]);
            if hit {
                for p in a..=b {
                    if !self.marked.get(p) {
                        space.push(p);
                    }
                }
            }
        }
        for &p in &space {
            if self.marked.get(p) {
                return Err(Error::Invariant(format!("cell {p} marked twice")));
            }
            self.marked.set(p);
        }
        self.marked_total += space.len();
        self.deserted.push(space);
        self.phase += 1;
        self.set_grid(self.phase);
        self.rebuild_homes(array);
        Ok(())
    }
}

impl Adversary for CoarseningAdversary {
    fn next_real(&mut self, array: &SortArray) -> Result<Rat> {
        if self.issued >= self.n {
            return Err(Error::Exhausted(self.issued));
        }
        self.sync_len(array);
        let value = if self.phase == 0 {
            let k = match self.tie {
                TieBreak::Smallest => 0,
                TieBreak::Random { .. } => self.rng.gen_range(0..=self.grid_max),
            };
            let v = self.grid_value(k);
            self.phase = 1;
            self.rebuild_homes(array);
            v
        } else {
            if self.current.is_none() {
                let mut guard = 0;
                while self.expensive.is_empty() {
                    self.end_phase(array)?;
                    guard += 1;
                    if guard > MAX_PHASES {
                        return Err(Error::Invariant("no expensive real after many phases".into()));
                    }
                }
                self.current = Some(self.choose());
            }
            self.grid_value(self.current.expect("chosen above"))
        };
        self.issued += 1;
        self.last_value = Some(value.clone());
        Ok(value)
    }

    fn observe(&mut self, array: &SortArray, cell: usize) -> Result<()> {
        self.sync_len(array);
        let (a, b) = self
            .runs
            .range(..=cell)
            .next_back()
            .map(|(&a, &b)| (a, b))
            .filter(|&(_, b)| b >= cell)
            .ok_or_else(|| Error::Invariant(format!("cell {cell} was not empty")))?;
        let (l, r) = self.neighbours(array, a, b);
        if let Some(k) = self.current {
            let outside_home = !self.marked.get(cell) && l != Some(k) && r != Some(k);
            if outside_home {
                self.current = None;
            }
        }
        self.apply_run(array, a, b, -1);
        self.runs.remove(&a);
        if a < cell {
            self.runs.insert(a, cell - 1);
            self.apply_run(array, a, cell - 1, 1);
        }
        if cell < b {
            self.runs.insert(cell + 1, b);
            self.apply_run(array, cell + 1, b, 1);
        }
        self.transcript.push(TranscriptRow {
            step: self.issued,
            issued_value: self.last_value.clone().unwrap_or_default(),
            placed_cell: cell,
            phase: self.phase,
            marked_cells_total: self.marked_total,
        });
        Ok(())
    }
}
