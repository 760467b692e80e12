use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use shearpack::adversary::play;
use shearpack::harness::{
    build_adversary, build_sorter, fitted_slopes, gen, pack_snapshot, slopes_csv, svg, to_csv, PackingSnapshot,
    SweepConfig,
};
use shearpack::offline::{self, OfflineConfig, OfflineResult};
use shearpack::{
    check_placements, gap_certificate, pack_as_sorter, run_trial, sweep, ConvexPiece, ExperimentSpec, PackerKind,
    Problem, Rat, Region, TrialKind,
};

#[derive(Parser)]
#[command(name = "shearpack", version, about = "Online sorting and translational packing experiments")]
struct Cli {
    /// Directory for relative output paths.
    #[arg(long, global = true, env = "SHEARPACK_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a sorter against an adversary or a fixed stream.
    SortDuel(SortDuel),
    /// Run a strip packer on a generated piece stream.
    PackBench(PackBench),
    /// Use a strip packer as an online sorter and certify the gap inequality.
    ReduceRun(ReduceRun),
    /// Solve an offline packing problem.
    Offline(Offline),
    /// Run a JSON-configured sweep and write CSV tables.
    Sweep(Sweep),
    /// Render a packing snapshot or offline result as SVG.
    Render(Render),
}

#[derive(Args)]
struct SortDuel {
    /// balanced, boxsorter, reduce-greedy, reduce-onlinepacker or reduce-random.
    #[arg(long, default_value = "balanced")]
    sorter: String,
    /// unit, coarsen, uniform, sorted or reversed.
    #[arg(long, default_value = "unit")]
    adversary: String,
    #[arg(short, long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Array capacity factor, e.g. 1 to clamp the box sorter to n cells.
    #[arg(long)]
    gamma: Option<Rat>,
    /// Box sorter slack.
    #[arg(long)]
    epsilon: Option<Rat>,
    /// Write the final array as an SVG bar chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PackBench {
    /// greedy, onlinepacker or random.
    #[arg(long, default_value = "onlinepacker")]
    algorithm: String,
    /// alternating, unit-squares, parallelograms or convex.
    #[arg(long, default_value = "convex")]
    source: String,
    #[arg(short, long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the packing snapshot as JSON.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceRun {
    /// greedy, onlinepacker or random.
    #[arg(long, default_value = "onlinepacker")]
    packer: String,
    /// uniform, sorted or reversed.
    #[arg(long, default_value = "uniform")]
    stream: String,
    #[arg(short, long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-step table `i,s,x,cell`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct Offline {
    #[arg(long)]
    problem: Problem,
    /// JSON array of pieces, each `{"vertices": [{"x": "0", "y": "0"}, ...]}`.
    /// Without it a random instance is generated from `--n` and `--seed`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Upper bound on the generated piece count; the count itself is drawn
    /// from `1..=n`.
    #[arg(short, long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the closed-form square-packing alpha instead of 1/2.
    #[arg(long)]
    optimal_square_alpha: bool,
    /// Write the full result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct Sweep {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "sweep.csv")]
    csv: PathBuf,
    /// Fitted log-log slopes per kind, algorithm and source.
    #[arg(long, default_value = "slopes.csv")]
    slopes: PathBuf,
}

#[derive(Args)]
struct Render {
    /// A pack-bench snapshot or an offline result.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn resolve(dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        dir.join(path)
    }
}

fn write(dir: &Path, path: &Path, contents: &str) -> Result<PathBuf> {
    let full = resolve(dir, path);
    if let Some(parent) = full.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(&full, contents).with_context(|| format!("writing {}", full.display()))?;
    Ok(full)
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Runs a command; `Ok(false)` means an audit failed.
fn run(cli: &Cli) -> Result<bool> {
    let dir = &cli.out_dir;
    match &cli.command {
        Command::SortDuel(a) => {
            let spec = ExperimentSpec {
                gamma: a.gamma.clone(),
                epsilon: a.epsilon.clone(),
                ..ExperimentSpec::new(TrialKind::SortDuel, &a.sorter, &a.adversary, a.n, a.seed)
            };
            let record = run_trial(&spec);
            print_json(&record)?;
            if let Some(path) = &a.svg {
                let (mut sorter, mut array) = build_sorter(&a.sorter, a.n, a.gamma.as_ref(), a.epsilon.as_ref())?;
                let mut adversary = build_adversary(&a.adversary, a.n, a.seed, &array)?;
                play(adversary.as_mut(), sorter.as_mut(), &mut array, a.n)?;
                write(dir, path, &svg::render_array(&array))?;
            }
            Ok(record.valid)
        }
        Command::PackBench(a) => {
            let spec = ExperimentSpec::new(TrialKind::PackRun, &a.algorithm, &a.source, a.n, a.seed);
            let record = run_trial(&spec);
            print_json(&record)?;
            if a.snapshot.is_some() || a.svg.is_some() {
                let (snap, _) = pack_snapshot(&spec)?;
                if let Some(path) = &a.snapshot {
                    write(dir, path, &serde_json::to_string_pretty(&snap)?)?;
                }
                if let Some(path) = &a.svg {
                    write(dir, path, &svg::render(&snapshot_scene(&snap)))?;
                }
            }
            Ok(record.valid)
        }
        Command::ReduceRun(a) => {
            let kind: PackerKind = match a.packer.as_str() {
                "random" => PackerKind::Random { seed: a.seed },
                other => other.parse()?,
            };
            let stream = gen::real_stream(&a.stream, a.n, a.seed)?;
            let (array, sorter) = pack_as_sorter(kind.build(), &stream)?;
            let run = sorter.run();
            let width = sorter.packer().occupied_width();
            let cert = gap_certificate(&run, &width)?;
            let valid = check_placements(sorter.packer().placements(), &Region::Strip { height: Rat::one() });
            print_json(&json!({
                "packer": kind.name(),
                "n": a.n,
                "cost": array.total_cost()?,
                "width": width,
                "gamma": cert.gamma,
                "gap_inequality_holds": cert.holds,
                "valid": valid.is_ok(),
            }))?;
            if let Some(path) = &a.csv {
                write(dir, path, &run.to_csv())?;
            }
            Ok(cert.holds && valid.is_ok())
        }
        Command::Offline(a) => {
            let mut config = OfflineConfig::default();
            if a.optimal_square_alpha {
                config = config.with_optimal_square_alpha();
            }
            let pieces: Vec<ConvexPiece> = match &a.input {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("parsing pieces from {}", path.display()))?
                }
                None => gen::offline_instance(a.problem, a.n, &config.delta, a.seed),
            };
            let result = offline::solve(a.problem, &pieces, &config)?;
            let audit = shearpack::harness::audit_offline(&result, &pieces, &config);
            print_json(&json!({
                "problem": result.problem,
                "pieces": pieces.len(),
                "cost": result.cost,
                "lower_bound": result.lower_bound,
                "ratio": result.ratio.to_f64(),
                "fits": result.fits,
                "bins": result.bins.as_ref().map(|_| result.bin_count()),
                "containers": result.containers.len(),
                "audit": audit.as_ref().err().map(ToString::to_string),
            }))?;
            if let Some(path) = &a.out {
                write(dir, path, &serde_json::to_string_pretty(&result)?)?;
            }
            if let Some(path) = &a.svg {
                write(dir, path, &svg::render(&svg::offline_scene(&result)))?;
            }
            Ok(audit.is_ok())
        }
        Command::Sweep(a) => {
            let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
            let config: SweepConfig = serde_json::from_str(&text).context("parsing the sweep config")?;
            let records = sweep(&config.expand());
            let csv = write(dir, &a.csv, &to_csv(&records))?;
            let slopes = write(dir, &a.slopes, &slopes_csv(&fitted_slopes(&records)))?;
            let failed: Vec<_> = records.iter().filter(|r| !r.valid).collect();
            for r in &failed {
                eprintln!(
                    "audit failed: {} {} {} n={} seed={}: {}",
                    r.spec.kind.name(),
                    r.spec.algorithm,
                    r.spec.source,
                    r.spec.n,
                    r.spec.seed,
                    r.error.as_deref().unwrap_or("invalid")
                );
            }
            println!("{} trials, {} failed; wrote {} and {}", records.len(), failed.len(), csv.display(), slopes.display());
            Ok(failed.is_empty())
        }
        Command::Render(a) => {
            let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let scene = if let Ok(snap) = serde_json::from_str::<PackingSnapshot>(&text) {
                snapshot_scene(&snap)
            } else if let Ok(result) = serde_json::from_str::<OfflineResult>(&text) {
                svg::offline_scene(&result)
            } else {
                bail!("{} is neither a packing snapshot nor an offline result", a.input.display());
            };
            let path = write(dir, &a.out, &svg::render(&scene))?;
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}

fn snapshot_scene(snap: &PackingSnapshot) -> svg::Scene {
    let boxes = snap.boxes.iter().map(|b| b.shape.to_piece()).collect();
    let mut scene = svg::strip_scene(&snap.placements, &snap.height, boxes);
    scene.legend = format!("{}  {}", snap.algorithm, scene.legend);
    scene
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("an invariant audit failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
