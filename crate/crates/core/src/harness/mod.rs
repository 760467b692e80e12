//! Experiment runner: sorter duels, packer benchmarks, reduction runs and
//! offline runs, each re-validated with the exact oracles, plus CSV and SVG
//! reporting.

pub mod gen;
pub mod svg;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{play, Adversary, CoarsenParams, CoarseningAdversary, FixedStream, TieBreak, UnitAdversary};
use crate::error::{Error, Result};
use crate::geometry::{check_placements, ConvexPiece, Placement, Region};
use crate::offline::{self, square_density, OfflineConfig, OfflineResult, Problem};
use crate::rat::Rat;
use crate::reduce::{gap_certificate, pack_as_sorter, PackingSorter};
use crate::sorting::{choose_params, BalancedSorter, BoxSorter, OnlineSorter, SortArray};
use crate::strip::{BoxSnapshot, OnlinePacker, PackerKind, StripPacker};

/// CSV header of a sweep.
pub const CSV_HEADER: &str = "kind,algo,adversary,n,cost,bound,ratio,valid";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialKind {
    SortDuel,
    PackRun,
    ReductionRun,
    OfflineRun,
}

impl TrialKind {
    pub fn name(self) -> &'static str {
        match self {
            TrialKind::SortDuel => "sort-duel",
            TrialKind::PackRun => "pack-run",
            TrialKind::ReductionRun => "reduction-run",
            TrialKind::OfflineRun => "offline-run",
        }
    }
}

/// One trial.
///
/// `algorithm` names a sorter (`balanced`, `boxsorter`, `reduce-greedy`,
/// `reduce-onlinepacker`, `reduce-random`), a packer (`greedy`,
/// `onlinepacker`, `random`) or an offline problem. `source` names an
/// adversary (`unit`, `coarsen`), a real stream (`uniform`, `sorted`,
/// `reversed`), a piece stream (`alternating`, `unit-squares`,
/// `parallelograms`, `convex`) or, for offline runs, `random`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: TrialKind,
    pub algorithm: String,
    pub source: String,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Array capacity factor; 1 clamps the box sorter to `n` cells.
    #[serde(default)]
    pub gamma: Option<Rat>,
    /// Slack of the box sorter's parameters, 1 by default.
    #[serde(default)]
    pub epsilon: Option<Rat>,
}

impl ExperimentSpec {
    pub fn new(kind: TrialKind, algorithm: &str, source: &str, n: usize, seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            algorithm: algorithm.to_string(),
            source: source.to_string(),
            n,
            seed,
            gamma: None,
            epsilon: None,
        }
    }

    pub fn with_gamma(mut self, gamma: Rat) -> ExperimentSpec {
        self.gamma = Some(gamma);
        self
    }
}

/// Outcome of a trial. Errors are recorded, never propagated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub spec: ExperimentSpec,
    pub cost: Option<Rat>,
    /// Certified lower bound on the optimum.
    pub bound: Option<Rat>,
    pub ratio: Option<f64>,
    /// Every audit passed.
    pub valid: bool,
    pub error: Option<String>,
    /// Packed area over occupied area, for packing runs.
    pub density: Option<f64>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl TrialRecord {
    fn failed(spec: &ExperimentSpec, e: Error, elapsed: Duration) -> TrialRecord {
        TrialRecord {
            spec: spec.clone(),
            cost: None,
            bound: None,
            ratio: None,
            valid: false,
            error: Some(e.to_string()),
            density: None,
            elapsed,
        }
    }

    pub fn csv_row(&self) -> String {
        let num = |v: &Option<Rat>| v.as_ref().map(|r| format!("{:.6}", r.to_f64())).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.spec.kind.name(),
            self.spec.algorithm,
            self.spec.source,
            self.spec.n,
            num(&self.cost),
            num(&self.bound),
            self.ratio.map(|r| format!("{r:.6}")).unwrap_or_default(),
            self.valid
        )
    }
}

struct Outcome {
    cost: Rat,
    bound: Rat,
    valid: bool,
    density: Option<f64>,
    error: Option<String>,
}

/// Runs one trial.
pub fn run_trial(spec: &ExperimentSpec) -> TrialRecord {
    let start = Instant::now();
    let outcome = if spec.n == 0 {
        Err(Error::Contract("n must be positive".into()))
    } else {
        match spec.kind {
            TrialKind::SortDuel => sort_duel(spec),
            TrialKind::PackRun => pack_run(spec),
            TrialKind::ReductionRun => reduction_run(spec),
            TrialKind::OfflineRun => offline_run(spec),
        }
    };
    let elapsed = start.elapsed();
    match outcome {
        Ok(o) => {
            let ratio = if o.bound.is_positive() {
                Some((&o.cost / &o.bound).to_f64())
            } else {
                None
            };
            TrialRecord {
                spec: spec.clone(),
                cost: Some(o.cost),
                bound: Some(o.bound),
                ratio,
                valid: o.valid,
                error: o.error,
                density: o.density,
                elapsed,
            }
        }
        Err(e) => TrialRecord::failed(spec, e, elapsed),
    }
}

/// A sorter and the array it writes into.
pub fn build_sorter(id: &str, n: usize, gamma: Option<&Rat>, epsilon: Option<&Rat>) -> Result<(Box<dyn OnlineSorter + Send>, SortArray)> {
    let unknown = || Error::UnknownId {
        kind: "sorter",
        name: id.to_string(),
    };
    Ok(match id {
        "balanced" => (Box::new(BalancedSorter::new(n)), SortArray::with_capacity(n, n)),
        "boxsorter" => {
            if gamma.is_some_and(|g| *g == Rat::one()) {
                (Box::new(BoxSorter::unit_capacity(n)), SortArray::with_capacity(n, n))
            } else {
                let eps = epsilon.cloned().unwrap_or_else(Rat::one);
                let sorter = BoxSorter::new(n, choose_params(n, &eps)?)?;
                let cap = sorter.capacity();
                (Box::new(sorter), SortArray::with_capacity(n, cap))
            }
        }
        _ => {
            let packer = id.strip_prefix("reduce-").ok_or_else(unknown)?;
            let kind: PackerKind = packer.parse()?;
            (Box::new(PackingSorter::new(kind.build(), n)), SortArray::growable(n))
        }
    })
}

/// An adversary or a fixed real stream.
pub fn build_adversary(id: &str, n: usize, seed: u64, array: &SortArray) -> Result<Box<dyn Adversary + Send>> {
    Ok(match id {
        "unit" => Box::new(UnitAdversary::new(n)),
        "coarsen" => {
            let gamma = Rat::new(array.len() as i64, n as i64);
            let params = CoarsenParams::for_instance(n, &gamma)?;
            Box::new(CoarseningAdversary::new(n, params, TieBreak::Random { seed }))
        }
        _ => Box::new(FixedStream::new(gen::real_stream(id, n, seed)?)),
    })
}

/// `max - min` of the values: the cost of the sorted arrangement.
/// Sorted order costs exactly 1 for any stream, counting the sentinels.
fn sorting_optimum() -> Rat {
    Rat::one()
}

fn sort_duel(spec: &ExperimentSpec) -> Result<Outcome> {
    let n = spec.n;
    let (mut sorter, mut array) = build_sorter(&spec.algorithm, n, spec.gamma.as_ref(), spec.epsilon.as_ref())?;
    let mut adversary = build_adversary(&spec.source, n, spec.seed, &array)?;
    play(adversary.as_mut(), sorter.as_mut(), &mut array, n)?;
    let cost = array.total_cost()?;
    let mut valid = true;
    let mut error = None;
    // With exactly n cells the unit adversary forces cost >= sqrt(n / 2).
    if spec.source == "unit" && array.len() == n && !array.is_growable() {
        let forced = Rat::from_int(2) * &cost * &cost >= Rat::from_usize(n);
        if !forced {
            valid = false;
            error = Some(format!("cost {cost} below sqrt(n/2)"));
        }
    }
    Ok(Outcome {
        bound: sorting_optimum(),
        cost,
        valid,
        density: None,
        error,
    })
}

/// Checks an online packing, with the box-tree audits for the box packer.
fn audit_online(p: &OnlinePacker) -> Result<()> {
    p.audit_boxes()?;
    p.near_empty_audit()?;
    if let Some(r) = &p.stats().max_match_ratio {
        if *r > Rat::from_int(6) {
            return Err(Error::Invariant(format!("box area {r} times the piece area")));
        }
    }
    Ok(())
}

fn strip_bound(pieces: &[ConvexPiece]) -> Rat {
    offline::opt_lower_bound(pieces, Problem::Strip)
}

/// A finished strip packing: pieces with their translations and, for the
/// box packer, the box tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingSnapshot {
    pub algorithm: String,
    pub height: Rat,
    pub width: Rat,
    pub placements: Vec<Placement>,
    #[serde(default)]
    pub boxes: Vec<BoxSnapshot>,
}

/// Runs the packer of a pack-run spec. The second value is the result of
/// the box-tree audits, always `Ok` for the other packers.
pub fn pack_snapshot(spec: &ExperimentSpec) -> Result<(PackingSnapshot, Result<()>)> {
    let pieces = gen::piece_stream(&spec.source, spec.n, spec.seed)?;
    let kind: PackerKind = match spec.algorithm.as_str() {
        "random" => PackerKind::Random { seed: spec.seed },
        other => other.parse()?,
    };
    let (placements, width, boxes, audit) = if kind == PackerKind::Online {
        let mut p = OnlinePacker::new();
        for q in &pieces {
            p.place(q)?;
        }
        let audit = audit_online(&p);
        (p.placements().to_vec(), p.occupied_width(), p.boxes(), audit)
    } else {
        let mut p = kind.build();
        for q in &pieces {
            p.place(q)?;
        }
        (p.placements().to_vec(), p.occupied_width(), Vec::new(), Ok(()))
    };
    let snapshot = PackingSnapshot {
        algorithm: kind.name().to_string(),
        height: Rat::one(),
        width,
        placements,
        boxes,
    };
    Ok((snapshot, audit))
}

fn pack_run(spec: &ExperimentSpec) -> Result<Outcome> {
    let (snap, audit) = pack_snapshot(spec)?;
    let checked = check_placements(&snap.placements, &Region::Strip { height: snap.height.clone() });
    let pieces: Vec<ConvexPiece> = snap.placements.iter().map(|p| p.piece.clone()).collect();
    let area: Rat = pieces.iter().map(ConvexPiece::area).sum();
    let error = match (&checked, &audit) {
        (Err(v), _) => Some(v.to_string()),
        (_, Err(e)) => Some(e.to_string()),
        _ => None,
    };
    let width = snap.width;
    Ok(Outcome {
        density: width.is_positive().then(|| (&area / &width).to_f64()),
        bound: strip_bound(&pieces),
        cost: width,
        valid: error.is_none(),
        error,
    })
}

fn reduction_run(spec: &ExperimentSpec) -> Result<Outcome> {
    let kind: PackerKind = spec.algorithm.trim_start_matches("reduce-").parse()?;
    let stream = gen::real_stream(&spec.source, spec.n, spec.seed)?;
    let (array, sorter) = pack_as_sorter(kind.build(), &stream)?;
    let width = sorter.packer().occupied_width();
    let cert = gap_certificate(&sorter.run(), &width)?;
    let checked = check_placements(sorter.packer().placements(), &Region::Strip { height: Rat::one() });
    let error = match (&checked, cert.holds) {
        (Err(v), _) => Some(v.to_string()),
        (_, false) => Some(format!("width {width} below half the cost {}", cert.cost)),
        _ => None,
    };
    Ok(Outcome {
        cost: array.total_cost()?,
        bound: sorting_optimum(),
        valid: error.is_none(),
        density: None,
        error,
    })
}

/// Audits an offline result: validity, the container area bound, and the
/// problem's guarantee.
pub fn audit_offline(result: &OfflineResult, pieces: &[ConvexPiece], config: &OfflineConfig) -> Result<()> {
    let unit = Region::Rect(crate::geometry::BBox {
        x_min: Rat::zero(),
        x_max: Rat::one(),
        y_min: Rat::zero(),
        y_max: Rat::one(),
    });
    let area: Rat = pieces.iter().map(ConvexPiece::area).sum();
    let invalid = |v: crate::geometry::Violation| Error::Invariant(v.to_string());
    match result.problem {
        Problem::Strip => check_placements(&result.placements, &Region::Strip { height: Rat::one() }).map_err(invalid)?,
        Problem::Perimeter => check_placements(&result.placements, &Region::Plane).map_err(invalid)?,
        Problem::Square => {
            if result.fits == Some(true) {
                check_placements(&result.placements, &unit).map_err(invalid)?;
            } else if area <= square_density(&config.delta) {
                return Err(Error::Invariant(format!("area {area} does not fit the unit square")));
            }
        }
        Problem::Bins => {
            for b in 0..result.bin_count() {
                check_placements(&result.bin_placements(b), &unit).map_err(invalid)?;
            }
            let allowed = area / square_density(&config.delta) + Rat::one();
            if Rat::from_usize(result.bin_count()) > allowed {
                return Err(Error::Invariant(format!("{} bins exceed {allowed}", result.bin_count())));
            }
        }
    }
    if result.container_area > result.container_area_bound {
        return Err(Error::Invariant(format!(
            "container area {} above its bound {}",
            result.container_area, result.container_area_bound
        )));
    }
    Ok(())
}

fn offline_run(spec: &ExperimentSpec) -> Result<Outcome> {
    let problem: Problem = spec.algorithm.parse()?;
    if spec.source != "random" {
        return Err(Error::UnknownId {
            kind: "offline source",
            name: spec.source.clone(),
        });
    }
    let config = OfflineConfig::default();
    let pieces = gen::offline_instance(problem, spec.n, &config.delta, spec.seed);
    let result = offline::solve(problem, &pieces, &config)?;
    let error = audit_offline(&result, &pieces, &config).err().map(|e| e.to_string());
    Ok(Outcome {
        cost: result.cost,
        bound: result.lower_bound,
        valid: error.is_none(),
        density: None,
        error,
    })
}

/// Runs trials concurrently; records come back in spec order.
pub fn sweep(specs: &[ExperimentSpec]) -> Vec<TrialRecord> {
    specs.par_iter().map(run_trial).collect()
}

/// Records as CSV with [`CSV_HEADER`].
pub fn to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Least-squares slope of `ln cost` against `ln n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FittedSlope {
    pub kind: TrialKind,
    pub algorithm: String,
    pub source: String,
    pub points: usize,
    pub slope: f64,
}

type SlopeKey<'a> = (TrialKind, &'a str, &'a str);

/// Fits a slope per (kind, algorithm, source) over valid rows with
/// positive cost, when at least two distinct n occur.
pub fn fitted_slopes(records: &[TrialRecord]) -> Vec<FittedSlope> {
    let mut groups: BTreeMap<SlopeKey, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        if let (true, Some(c)) = (r.valid, &r.cost) {
            if c.is_positive() {
                groups
                    .entry((r.spec.kind, &r.spec.algorithm, &r.spec.source))
                    .or_default()
                    .push(((r.spec.n as f64).ln(), c.to_f64().ln()));
            }
        }
    }
    groups
        .into_iter()
        .filter_map(|((kind, algo, source), pts)| {
            let m = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            (sxx > 0.0).then(|| FittedSlope {
                kind,
                algorithm: algo.to_string(),
                source: source.to_string(),
                points: pts.len(),
                slope: sxy / sxx,
            })
        })
        .collect()
}

pub fn slopes_csv(slopes: &[FittedSlope]) -> String {
    let mut out = String::from("kind,algo,adversary,points,slope\n");
    for s in slopes {
        let _ = writeln!(out, "{},{},{},{},{:.6}", s.kind.name(), s.algorithm, s.source, s.points, s.slope);
    }
    out
}

/// A grid of trials: every algorithm against every source at every n and
/// seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub kind: TrialKind,
    pub algorithms: Vec<String>,
    pub sources: Vec<String>,
    pub ns: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub gamma: Option<Rat>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Sweep configuration, read from JSON.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default)]
    pub trials: Vec<ExperimentSpec>,
    #[serde(default)]
    pub grids: Vec<Grid>,
}

impl SweepConfig {
    /// Explicit trials first, then each grid in algorithm, source, n, seed
    /// order.
    pub fn expand(&self) -> Vec<ExperimentSpec> {
        let mut specs = self.trials.clone();
        for g in &self.grids {
            for a in &g.algorithms {
                for s in &g.sources {
                    for &n in &g.ns {
                        for &seed in &g.seeds {
                            let mut spec = ExperimentSpec::new(g.kind, a, s, n, seed);
                            spec.gamma = g.gamma.clone();
                            specs.push(spec);
                        }
                    }
                }
            }
        }
        specs
    }
}
