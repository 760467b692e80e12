//! Any strip packer is an online sorter: the real `s` becomes a parallelogram
//! of height 1, base `1/n` and shear `s`, and its bottom-left corner `x`
//! names the cell `floor(n x)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{HorizontalParallelogram, Point};
use crate::rat::Rat;
use crate::sorting::{OnlineSorter, SortArray};
use crate::strip::StripPacker;

/// The parallelogram of height 1, base `1/n` and shear `s`, anchored at the
/// origin.
pub fn lift_real(s: &Rat, n: usize) -> Result<HorizontalParallelogram> {
    if s.is_negative() || *s > Rat::one() {
        return Err(Error::ValueOutOfRange(s.to_string()));
    }
    if n == 0 {
        return Err(Error::Contract("n must be positive".into()));
    }
    HorizontalParallelogram::new(Point::origin(), Rat::new(1, n as i64), s.clone(), Rat::one())
}

/// One step of a reduction run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub shear: Rat,
    /// x of the bottom-left corner of the placed parallelogram.
    pub x: Rat,
    pub cell: usize,
}

/// An [`OnlineSorter`] backed by a strip packer.
pub struct PackingSorter<P> {
    packer: P,
    n: usize,
    steps: Vec<ReductionStep>,
}

impl<P: StripPacker> PackingSorter<P> {
    pub fn new(packer: P, n: usize) -> PackingSorter<P> {
        PackingSorter {
            packer,
            n,
            steps: Vec::new(),
        }
    }

    pub fn packer(&self) -> &P {
        &self.packer
    }

    pub fn steps(&self) -> &[ReductionStep] {
        &self.steps
    }

    /// The run so far.
    pub fn run(&self) -> ReductionRun {
        ReductionRun {
            n: self.n,
            steps: self.steps.clone(),
        }
    }
}

impl<P: StripPacker> OnlineSorter for PackingSorter<P> {
    fn place(&mut self, array: &SortArray, s: &Rat) -> Result<usize> {
        let piece = lift_real(s, self.n)?.to_piece();
        let placement = self.packer.place(&piece)?;
        // The lifted piece is anchored at the origin.
        let x = placement.offset.x;
        if x.is_negative() {
            return Err(Error::Invariant(format!("piece placed left of the strip at {x}")));
        }
        let cell = x
            .floor_scaled(self.n as i64)
            .ok_or_else(|| Error::Invariant(format!("cell index of {x} overflows")))? as usize;
        if array.get(cell).is_some() {
            return Err(Error::Invariant(format!(
                "cell {cell} already holds a value: the packing is invalid"
            )));
        }
        self.steps.push(ReductionStep {
            shear: s.clone(),
            x,
            cell,
        });
        Ok(cell)
    }
}

/// A finished run: the lifted stream and the cells it landed in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionRun {
    pub n: usize,
    pub steps: Vec<ReductionStep>,
}

impl ReductionRun {
    /// `(max cell + 1) / n`, the array factor the packer needed.
    pub fn gamma(&self) -> Rat {
        let cells = self.steps.iter().map(|s| s.cell + 1).max().unwrap_or(0);
        Rat::new(cells as i64, self.n as i64)
    }

    /// Shears in left-to-right order of their parallelograms.
    pub fn left_to_right(&self) -> Vec<Rat> {
        let mut order: Vec<&ReductionStep> = self.steps.iter().collect();
        order.sort_by(|a, b| a.x.cmp(&b.x));
        order.into_iter().map(|s| s.shear.clone()).collect()
    }

    /// `i,s,x,cell` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,s,x,cell\n");
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(out, "{i},{},{},{}", s.shear, s.x, s.cell).expect("writing to a string");
        }
        out
    }
}

/// Feeds `stream` through `packer` and returns the induced array.
pub fn pack_as_sorter<P: StripPacker>(packer: P, stream: &[Rat]) -> Result<(SortArray, PackingSorter<P>)> {
    let n = stream.len().max(1);
    let mut sorter = PackingSorter::new(packer, n);
    let mut array = SortArray::growable(n);
    for s in stream {
        let cell = sorter.place(&array, s)?;
        array.place(cell, s.clone())?;
    }
    Ok((array, sorter))
}

/// The width-versus-cost inequality for a finished run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCertificate {
    /// Cost of the shears in left-to-right order.
    pub cost: Rat,
    /// Occupied width of the packing.
    pub width: Rat,
    pub gamma: Rat,
    /// `width >= cost / 2`.
    pub holds: bool,
}

/// Certifies `width >= cost / 2` for a run and the width its packer used.
///
/// Left to right, the strip holds the gap before the first piece, the gaps
/// between consecutive top edges and between consecutive bottom edges, and
/// the bases themselves; between neighbours with shears `a` and `b` the top
/// and bottom gaps add up to at least `|a - b|`.
pub fn gap_certificate(run: &ReductionRun, width: &Rat) -> Result<GapCertificate> {
    let order = run.left_to_right();
    let cost = crate::sorting::total_cost(order.iter())?;
    let holds = Rat::from_int(2) * width >= cost;
    Ok(GapCertificate {
        cost,
        width: width.clone(),
        gamma: run.gamma(),
        holds,
    })
}
