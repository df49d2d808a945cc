use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stpm::datagen::{generate, GenSpec, PlantSpec};
use stpm::ingest::{read_raw_csv, read_sequence_db, symbolize, write_sequence_db, SeriesOrder, SymbolizationSpec};
use stpm::oracle::{brute_force_mine, diff_results};
use stpm::relations::pattern_occurs;
use stpm::report::{median, render_report, write_bench_csv, BenchRow, ReportOptions};
use stpm::seasonality::{evaluate, max_season};
use stpm::{
    mine_with, resolve_thresholds, Executor, MineOptions, MiningConfig, RawConfig, SequenceDatabase, SupportSet,
    TemporalPattern, Threshold,
};

/// Seasonal temporal pattern mining over symbolized time series.
#[derive(Parser)]
#[command(name = "stpm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine frequent seasonal patterns and write a JSON report.
    Mine(MineArgs),
    /// Generate a synthetic database with planted seasonal patterns.
    Gen(GenArgs),
    /// Time the miner over worker and partition counts.
    Bench(BenchArgs),
    /// Compare the miner against the brute-force oracle.
    OracleCheck(OracleArgs),
    /// Show supports and seasons of one event or pattern.
    Inspect(InspectArgs),
    /// Turn raw `tick,series,value` CSV into a JSONL database.
    Symbolize(SymbolizeArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum SeriesOrderArg {
    Declaration,
    Lexicographic,
}

#[derive(Args)]
struct DbArgs {
    /// JSONL sequence database.
    input: PathBuf,
    /// Series order used for the equal-interval tie-break.
    #[arg(long, value_enum, default_value = "declaration")]
    series_order: SeriesOrderArg,
}

#[derive(Args, Clone)]
struct Thresholds {
    /// Largest gap between granules of one season (count or "N%").
    #[arg(long, default_value = "2")]
    max_period: Threshold,
    /// Fewest granules in a season.
    #[arg(long, default_value = "3")]
    min_density: Threshold,
    /// Fewest seasons of a frequent pattern.
    #[arg(long, default_value = "2")]
    min_season: Threshold,
    /// Smallest allowed distance between consecutive seasons.
    #[arg(long, default_value = "4")]
    dist_min: Threshold,
    /// Largest allowed distance between consecutive seasons.
    #[arg(long, default_value = "10")]
    dist_max: Threshold,
    /// Longest pattern, in events.
    #[arg(long, default_value_t = stpm::model::DEFAULT_MAX_K)]
    max_k: usize,
    /// Disable the maxSeason candidate gate (same results, more work).
    #[arg(long)]
    no_gate: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Detail {
    /// Frequent patterns only.
    Summary,
    /// Every candidate pattern, with witness intervals.
    Full,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    db: DbArgs,
    #[command(flatten)]
    thresholds: Thresholds,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[arg(long, default_value_t = 16)]
    partitions: usize,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "summary")]
    detail: Detail,
}

#[derive(Args)]
struct GenArgs {
    /// JSON generator spec; overrides the shape flags below.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    granules: u32,
    #[arg(long, default_value_t = 5)]
    series: u32,
    #[arg(long, default_value_t = 2)]
    alphabet: u32,
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long, default_value_t = 60)]
    granule_span: i64,
    /// Planted pattern as "PATTERN|START,START,...|LENGTH[|PERIOD]", repeatable.
    #[arg(long = "plant")]
    plants: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSONL path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    db: DbArgs,
    #[command(flatten)]
    thresholds: Thresholds,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    workers: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    partitions: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// Add one row per dataflow stage.
    #[arg(long)]
    stages: bool,
    /// CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    db: DbArgs,
    #[command(flatten)]
    thresholds: Thresholds,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    db: DbArgs,
    #[command(flatten)]
    thresholds: Thresholds,
    /// Event such as "M:1".
    #[arg(long, conflicts_with = "pattern", required_unless_present = "pattern")]
    event: Option<String>,
    /// Pattern such as "C:1 > F:1" or "C:1 contains D:1, C:1 > F:1, D:1 > F:1".
    #[arg(long)]
    pattern: Option<String>,
}

#[derive(Args)]
struct SymbolizeArgs {
    /// CSV with columns tick,series,value.
    input: PathBuf,
    /// JSON symbolization spec (bins per series).
    #[arg(long)]
    bins: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: error.into() }
}

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 3, error: error.into() }
}

type Outcome = Result<(), Failure>;

fn load(args: &DbArgs) -> Result<SequenceDatabase, Failure> {
    let order = match args.series_order {
        SeriesOrderArg::Declaration => SeriesOrder::Declaration,
        SeriesOrderArg::Lexicographic => SeriesOrder::Lexicographic,
    };
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display())).map_err(input)?;
    read_sequence_db(file, order).with_context(|| format!("loading {}", args.input.display())).map_err(input)
}

fn resolve(t: &Thresholds, db: &SequenceDatabase) -> Result<MiningConfig, Failure> {
    let raw = RawConfig {
        max_period: t.max_period,
        min_density: t.min_density,
        min_season: t.min_season,
        dist_min: t.dist_min,
        dist_max: t.dist_max,
        max_k: t.max_k,
        candidate_gate: !t.no_gate,
    };
    resolve_thresholds(&raw, db.len()).context("invalid thresholds").map_err(usage)
}

fn executor(workers: usize, partitions: usize) -> Result<Executor, Failure> {
    if workers == 0 || partitions == 0 {
        return Err(usage(anyhow!("workers and partitions must be positive")));
    }
    Ok(Executor::new(workers, partitions))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display())).map_err(input)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_all(path: &Option<PathBuf>, bytes: &[u8]) -> Outcome {
    let mut out = output(path)?;
    out.write_all(bytes).and_then(|_| out.flush()).context("writing output").map_err(input)
}

fn cmd_mine(args: MineArgs) -> Outcome {
    let db = load(&args.db)?;
    let cfg = resolve(&args.thresholds, &db)?;
    let exec = executor(args.workers, args.partitions)?;
    let full = args.detail == Detail::Full;
    let started = Instant::now();
    let result = mine_with(&db, &cfg, &exec, MineOptions { witnesses: full }).map_err(|e| input(anyhow!(e)))?;
    eprintln!(
        "{} candidate patterns, {} frequent, {:.1} ms",
        result.patterns.len(),
        result.frequent().count(),
        started.elapsed().as_secs_f64() * 1e3
    );
    let opts = ReportOptions { witnesses: full, exec_stats: true, candidates: full };
    write_all(&args.out, render_report(&db, &result, &opts).as_bytes())
}

fn parse_plant(s: &str) -> anyhow::Result<PlantSpec> {
    let parts: Vec<&str> = s.split('|').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(anyhow!("expected PATTERN|STARTS|LENGTH[|PERIOD], got {s:?}"));
    }
    let season_starts = parts[1].split(',').map(|x| x.trim().parse::<u32>()).collect::<Result<_, _>>().context("season starts")?;
    Ok(PlantSpec {
        pattern: parts[0].to_string(),
        season_starts,
        season_length: parts[2].parse().context("season length")?,
        period_within: parts.get(3).map_or(Ok(1), |p| p.parse()).context("period")?,
    })
}

fn cmd_gen(args: GenArgs) -> Outcome {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
            serde_json::from_str::<GenSpec>(&text).context("parsing generator spec").map_err(input)?
        }
        None => GenSpec {
            granules: args.granules,
            series_count: args.series,
            alphabet_size: args.alphabet,
            noise_density: args.noise,
            granule_span: args.granule_span,
            planted: args.plants.iter().map(|p| parse_plant(p)).collect::<anyhow::Result<_>>().map_err(usage)?,
        },
    };
    let db = generate(&spec, args.seed).map_err(usage)?;
    let mut buf = Vec::new();
    write_sequence_db(&db, &mut buf).expect("in-memory write");
    write_all(&args.out, &buf)
}

fn cmd_bench(args: BenchArgs) -> Outcome {
    if args.repetitions == 0 {
        return Err(usage(anyhow!("repetitions must be positive")));
    }
    let db = load(&args.db)?;
    let cfg = resolve(&args.thresholds, &db)?;
    let mut rows = Vec::new();
    let mut found: Option<usize> = None;
    for &workers in &args.workers {
        for &partitions in &args.partitions {
            let mut totals = Vec::new();
            let mut per_stage: Vec<(String, Vec<f64>, usize)> = Vec::new();
            let mut shuffle = 0;
            let mut patterns = 0;
            for _ in 0..args.repetitions {
                let exec = executor(workers, partitions)?;
                let started = Instant::now();
                let result = mine_with(&db, &cfg, &exec, MineOptions::default()).map_err(|e| input(anyhow!(e)))?;
                totals.push(started.elapsed().as_secs_f64() * 1e3);
                shuffle = result.exec.shuffle_bytes();
                patterns = result.frequent().count();
                for (i, s) in result.exec.stages.iter().enumerate() {
                    if per_stage.len() <= i {
                        per_stage.push((s.stage.clone(), Vec::new(), s.shuffle_bytes));
                    }
                    per_stage[i].1.push(s.wall.as_secs_f64() * 1e3);
                }
            }
            if *found.get_or_insert(patterns) != patterns {
                return Err(Failure {
                    code: 1,
                    error: anyhow!("patterns_found differs at {workers} workers / {partitions} partitions"),
                });
            }
            let row = |stage: String, walls: &mut Vec<f64>, shuffle_bytes| BenchRow {
                workers,
                partitions,
                stage,
                wall_ms: median(walls),
                shuffle_bytes,
                patterns_found: patterns,
            };
            rows.push(row("total".into(), &mut totals, shuffle));
            if args.stages {
                for (stage, mut walls, bytes) in per_stage {
                    rows.push(row(stage, &mut walls, bytes));
                }
            }
        }
    }
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf).context("writing CSV").map_err(input)?;
    write_all(&args.out, &buf)
}

fn cmd_oracle_check(args: OracleArgs) -> Outcome {
    let db = load(&args.db)?;
    let cfg = resolve(&args.thresholds, &db)?;
    let result = mine_with(&db, &cfg, &Executor::sequential(), MineOptions::default()).map_err(|e| input(anyhow!(e)))?;
    let oracle = brute_force_mine(&db, &cfg, cfg.max_k).map_err(input)?;
    let diff = diff_results(&db, &result.patterns, &oracle);
    if diff.is_empty() {
        println!("ok: {} candidate patterns agree ({} frequent)", oracle.len(), result.frequent().count());
        Ok(())
    } else {
        for line in &diff {
            println!("{line}");
        }
        Err(Failure { code: 1, error: anyhow!("{} differences between miner and oracle", diff.len()) })
    }
}

fn support_of(db: &SequenceDatabase, p: &TemporalPattern) -> SupportSet {
    db.sequences.iter().filter(|s| pattern_occurs(s, p).is_some()).map(|s| s.granule).collect()
}

fn describe(cfg: &MiningConfig, label: &str, support: &SupportSet) {
    let list = |s: &SupportSet| s.positions().iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
    let (seasons, frequent) = evaluate(support, cfg);
    println!("{label}");
    println!("  support ({} granules): {}", support.len(), list(support));
    println!("  maxSeason: {}", max_season(support, cfg.min_density));
    println!("  candidate: {}", if cfg.is_candidate(support.len()) { "yes" } else { "no" });
    for (i, near) in seasons.near_sets.iter().enumerate() {
        let tag = if seasons.accepted.contains(&i) { "season" } else { "near set" };
        println!("  {tag}: {}", list(near));
    }
    println!("  seasons: {}", seasons.season_count());
    println!("  frequent: {}", if frequent { "yes" } else { "no" });
}

fn cmd_inspect(args: InspectArgs) -> Outcome {
    let db = load(&args.db)?;
    let cfg = resolve(&args.thresholds, &db)?;
    let pattern = match (&args.event, &args.pattern) {
        (Some(e), _) => TemporalPattern::single(db.symbols.parse_event(e).map_err(usage)?),
        (None, Some(p)) => TemporalPattern::parse(p, &db.symbols).map_err(usage)?,
        (None, None) => unreachable!("clap requires one of --event / --pattern"),
    };
    if pattern.k() > 1 {
        for e in pattern.events() {
            describe(&cfg, &db.symbols.label(*e), &support_of(&db, &TemporalPattern::single(*e)));
        }
    }
    describe(&cfg, &pattern.display(&db.symbols), &support_of(&db, &pattern));
    Ok(())
}

fn read_bins(path: &Path) -> Result<SymbolizationSpec, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(input)
}

fn cmd_symbolize(args: SymbolizeArgs) -> Outcome {
    let spec = read_bins(&args.bins)?;
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display())).map_err(input)?;
    let raw = read_raw_csv(file).map_err(input)?;
    let db = symbolize(&raw, &spec).map_err(input)?;
    let mut buf = Vec::new();
    write_sequence_db(&db, &mut buf).expect("in-memory write");
    write_all(&args.out, &buf)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mine(a) => cmd_mine(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Symbolize(a) => cmd_symbolize(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
