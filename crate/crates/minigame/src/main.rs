use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minigame::batch::{format_table, run_batch, write_batch, BatchSpec, Cell};
use minigame::map_file::load_map;
use minigame::minigame_core::engine::{run_episode, BaselineMode};
use minigame::minigame_core::global_planner::{build_nav_graph, DEFAULT_RESOLUTION};
use minigame::plot::render_svg;
use minigame::scenario_file::load_scenario;
use minigame::telemetry::{parse_jsonl, to_jsonl};
use minigame::{format_graph, Error, Overrides, Result};

/// Auction-scheduled multi-robot navigation through doorways and intersections.
#[derive(Parser)]
#[command(name = "minigame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode. Exits 0 on success, 1 on collision, deadlock or
    /// timeout, 2 on bad input.
    Run(RunArgs),
    /// Run a scenario over many seeds and modes and tabulate the metrics.
    Batch(BatchArgs),
    /// Draw a telemetry file as SVG.
    Plot {
        telemetry: PathBuf,
        /// Output file; defaults to the telemetry path with an .svg extension.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Dump the navigation graph of a map file.
    Graph {
        map: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: f64,
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Bilevel,
    SocialForces,
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Disable the auction; every robot plans at full speed.
    #[arg(long)]
    no_schedule: bool,
    /// Use the (1 - turn / (5 v_max))^-1 speed scaling.
    #[arg(long, conflicts_with = "no_schedule")]
    alt_scaling: bool,
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Directory for telemetry.jsonl, metrics.json and the plot.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write trajectories.svg.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct BatchArgs {
    scenario: PathBuf,
    /// `start..end` (end excluded) or a comma-separated list.
    #[arg(long, default_value = "0..25")]
    seeds: String,
    /// Comma-separated: scenario, auction, no-schedule, alt-scaling, social-forces.
    #[arg(long, default_value = "scenario")]
    cells: String,
    #[arg(long, default_value = "out/batch")]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::config("--seeds", format!("cannot read `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}

fn parse_cells(text: &str) -> Result<Vec<Cell>> {
    text.split(',')
        .map(|s| Cell::parse(s.trim()).ok_or_else(|| Error::config("--cells", format!("unknown cell `{}`", s.trim()))))
        .collect()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn run(args: RunArgs) -> Result<bool> {
    let mut scenario = load_scenario(&args.scenario)?;
    let overrides = Overrides {
        seed: args.seed,
        no_schedule: args.no_schedule,
        alt_scaling: args.alt_scaling,
        baseline: args.baseline.map(|b| match b {
            Baseline::Bilevel => BaselineMode::Bilevel,
            Baseline::SocialForces => BaselineMode::SocialForces,
        }),
    };
    overrides.apply(&mut scenario)?;
    let (metrics, log) = run_episode(&scenario)?;
    create_dir(&args.out)?;
    write(&args.out.join("telemetry.jsonl"), &to_jsonl(&log))?;
    write(&args.out.join("metrics.json"), &serde_json::to_string_pretty(&metrics).expect("metrics serialize"))?;
    if args.plot {
        write(&args.out.join("trajectories.svg"), &render_svg(&log))?;
    }
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    println!(
        "{} seed {}: {:?}, {} collisions, makespan {} s, flow rate {} /(m s)",
        scenario.name,
        scenario.seed,
        metrics.outcome,
        metrics.collisions,
        fmt(metrics.makespan),
        fmt(metrics.flow_rate)
    );
    Ok(metrics.success())
}

fn batch(args: BatchArgs) -> Result<()> {
    let spec = BatchSpec {
        scenario: load_scenario(&args.scenario)?,
        seeds: parse_seeds(&args.seeds)?,
        cells: parse_cells(&args.cells)?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Error::config("--threads", e.to_string()))?;
    let result = pool.install(|| run_batch(&spec))?;
    create_dir(&args.out)?;
    write_batch(&result, &args.out)?;
    print!("{}", format_table(&result.summaries));
    Ok(())
}

fn plot(telemetry: &Path, out: Option<PathBuf>) -> Result<()> {
    let text = std::fs::read_to_string(telemetry).map_err(|e| Error::io(telemetry, e))?;
    let records = parse_jsonl(&text, &telemetry.display().to_string())?;
    write(&out.unwrap_or_else(|| telemetry.with_extension("svg")), &render_svg(&records))
}

fn graph(map: &Path, resolution: f64, radius: f64, out: Option<PathBuf>) -> Result<()> {
    let m = load_map(map)?;
    let text = format_graph(&build_nav_graph(&m.map, resolution, radius)?);
    match out {
        Some(p) => write(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(1) }),
        Command::Batch(args) => batch(args).map(|_| ExitCode::SUCCESS),
        Command::Plot { telemetry, out } => plot(&telemetry, out).map(|_| ExitCode::SUCCESS),
        Command::Graph { map, resolution, radius, out } => graph(&map, resolution, radius, out).map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
