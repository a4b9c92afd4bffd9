//! Command-line driver: run one process, sweep seeds, validate coloring
//! files, and print trajectory tables.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ramsey_forge::config::{special_fraction, NoPairPolicy, ProcessConfig, StopRule};
use ramsey_forge::phase2::Phase2Error;
use ramsey_forge::pipeline::{run_pipeline, PipelineError, PipelineOptions, RunOutcome};
use ramsey_forge::report::{summarize_deviations, RunStatus, SweepAggregate, SweepSeedSummary};
use ramsey_forge::rng::{substream, Substream};
use ramsey_forge::telemetry::{TelemetryRecord, CSV_HEADER};
use ramsey_forge::trajectories::{time_grid, traj_table_csv, TrajectoryParams};
use ramsey_forge::validator::{validate, VerifyMode};
use ramsey_forge::Coloring;

const EXIT_OK: u8 = 0;
/// Generic failure (I/O and other unexpected errors).
const EXIT_FAILURE: u8 = 1;
/// The finished coloring has a 4-clique spanning fewer than 5 colors, or is
/// otherwise unusable.
const EXIT_INVALID: u8 = 2;
/// Phase-2 resampling exhausted its budget with enlargement disabled.
const EXIT_BUDGET: u8 = 3;
/// Bad flags or unusable input files.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "ramsey-forge", version, about = "Two-phase (4,5)-coloring engine for K_n")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full process once and write coloring, telemetry, and report.
    Run(RunCmd),
    /// Run several seeds (in parallel) and write an aggregate summary.
    Sweep(SweepCmd),
    /// Check a coloring file and print a JSON report.
    Validate(ValidateCmd),
    /// Print the predicted-trajectory table as CSV on stdout.
    Traj(TrajCmd),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum NoPairArg {
    Skip,
    Terminate,
}

impl From<NoPairArg> for NoPairPolicy {
    fn from(a: NoPairArg) -> Self {
        match a {
            NoPairArg::Skip => NoPairPolicy::Skip,
            NoPairArg::Terminate => NoPairPolicy::Terminate,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Pairwise,
    Sampled,
}

impl From<ModeArg> for VerifyMode {
    fn from(a: ModeArg) -> Self {
        match a {
            ModeArg::Exhaustive => VerifyMode::Exhaustive,
            ModeArg::Pairwise => VerifyMode::Pairwise,
            ModeArg::Sampled => VerifyMode::Sampled,
        }
    }
}

fn parse_stop(s: &str) -> Result<StopRule, String> {
    if s.eq_ignore_ascii_case("natural") {
        return Ok(StopRule::Natural);
    }
    s.parse::<u64>()
        .map(StopRule::MaxSteps)
        .map_err(|_| format!("expected `natural` or a step count, got {s:?}"))
}

/// Flags shared by `run` and `sweep`.
#[derive(Args, Clone, Debug)]
struct ProcessArgs {
    /// Number of vertices (≥ 4).
    #[arg(long)]
    n: u32,
    /// Palette slack ε in (0, 1); the total palette is ⌈(5/6+ε)n⌉ colors.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Behavior at a starved triangle.
    #[arg(long, value_enum, default_value_t = NoPairArg::Skip)]
    on_no_pair: NoPairArg,
    /// `natural` or a maximum number of colored steps.
    #[arg(long, value_parser = parse_stop, default_value = "natural")]
    stop: StopRule,
    /// Colored steps between telemetry snapshots (default: n²/50).
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Phase-2 resampling budget per palette size.
    #[arg(long, default_value_t = 1_000_000)]
    phase2_budget: u64,
    /// Verification strategy (default: exhaustive for n ≤ 120, else pairwise).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ProcessArgs {
    fn config(&self, seed: u64) -> ProcessConfig {
        let mut c = ProcessConfig::new(self.n, self.epsilon, seed);
        c.on_no_pair = self.on_no_pair.into();
        c.stop = self.stop;
        if let Some(every) = self.checkpoint_every {
            c.checkpoint_every = every;
        }
        c.phase2_budget = self.phase2_budget;
        c
    }

    fn options(&self) -> PipelineOptions {
        PipelineOptions { verify_mode: self.mode.map(Into::into), ..Default::default() }
    }
}

#[derive(Args, Debug)]
struct RunCmd {
    #[command(flatten)]
    process: ProcessArgs,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SweepCmd {
    #[command(flatten)]
    process: ProcessArgs,
    /// Comma-separated list of seeds (conflicts with --count).
    #[arg(long, value_delimiter = ',', conflicts_with = "count")]
    seeds: Option<Vec<u64>>,
    /// Run seeds 1..=COUNT.
    #[arg(long)]
    count: Option<u64>,
}

#[derive(Args, Debug)]
struct ValidateCmd {
    /// Coloring file to check.
    path: PathBuf,
    /// Verification strategy (default: exhaustive for n ≤ 120, else pairwise).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Seed for the sampled strategy.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct TrajCmd {
    /// Palette slack ε (sets the special fraction s).
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Number of grid points over t ∈ [0.01, 0.15].
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// If set, also print log error windows at this (symbolic) n.
    #[arg(long)]
    n: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::from(EXIT_OK);
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match cli.cmd {
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Traj(args) => cmd_traj(&args),
    };
    ExitCode::from(code)
}

fn exit_for(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Config(_) => EXIT_USAGE,
        PipelineError::Phase2(Phase2Error::EmptyReservedPalette) => EXIT_USAGE,
        PipelineError::Phase2(Phase2Error::BudgetExceeded { .. }) => EXIT_BUDGET,
        PipelineError::Validator(_) => EXIT_INVALID,
    }
}

fn status_str(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Valid => "valid",
        RunStatus::InvalidColoring => "invalid_coloring",
    }
}

fn telemetry_csv(records: &[TelemetryRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Write coloring, telemetry, and report files; returns the report path's
/// contents on success.
fn write_run_outputs(dir: &Path, outcome: &RunOutcome) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let coloring_path = dir.join("coloring.txt");
    let telemetry_path = dir.join("telemetry.csv");
    let report_path = dir.join("run.json");

    std::fs::write(&coloring_path, outcome.coloring.to_text())?;
    std::fs::write(&telemetry_path, telemetry_csv(&outcome.telemetry))?;

    let mut report = outcome.report();
    for (key, path) in [
        ("coloring", &coloring_path),
        ("telemetry", &telemetry_path),
        ("report", &report_path),
    ] {
        report.manifest.outputs.insert(key.into(), path.display().to_string());
    }
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    std::fs::write(&report_path, json)?;
    Ok(())
}

fn cmd_run(args: &RunCmd) -> u8 {
    let config = args.process.config(args.seed);
    let outcome = match run_pipeline(&config, &args.process.options()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    if let Err(e) = write_run_outputs(&args.process.out, &outcome) {
        eprintln!("error writing outputs to {}: {e}", args.process.out.display());
        return EXIT_FAILURE;
    }
    println!(
        "n={} seed={} colors_used={} ratio={:.4} violations={} status={} out={}",
        config.n,
        config.seed,
        outcome.coloring.colors_used(),
        outcome.coloring.colors_used() as f64 / config.n as f64,
        outcome.validation.violations,
        status_str(outcome.status),
        args.process.out.display(),
    );
    match outcome.status {
        RunStatus::Valid => EXIT_OK,
        RunStatus::InvalidColoring => EXIT_INVALID,
    }
}

/// Worker-thread cap: `RAMSEY_FORGE_THREADS` if set (≥ 1), else the
/// available parallelism.
fn thread_cap() -> usize {
    std::env::var("RAMSEY_FORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |v| v.get()))
}

struct SeedRun {
    seed: u64,
    exit: u8,
    summary: Option<SweepSeedSummary>,
    records: Vec<TelemetryRecord>,
    coloring_text: Option<String>,
    error: Option<String>,
}

fn run_seed(process: &ProcessArgs, seed: u64) -> SeedRun {
    let config = process.config(seed);
    match run_pipeline(&config, &process.options()) {
        Ok(o) => {
            let exit = match o.status {
                RunStatus::Valid => EXIT_OK,
                RunStatus::InvalidColoring => EXIT_INVALID,
            };
            let total_edges = ramsey_forge::coloring::edge_count(config.n) as f64;
            let summary = SweepSeedSummary {
                seed,
                status: o.status,
                colors_used: o.coloring.colors_used(),
                color_ratio: o.coloring.colors_used() as f64 / config.n as f64,
                phase1_coverage: o.phase1.edges_colored as f64 / total_edges,
                steps: o.phase1.steps,
                skips: o.phase1.skips,
                enlargements: o.phase2.enlargements,
                violations: o.validation.violations,
            };
            SeedRun {
                seed,
                exit,
                summary: Some(summary),
                records: o.telemetry,
                coloring_text: Some(o.coloring.to_text()),
                error: None,
            }
        }
        Err(e) => SeedRun {
            seed,
            exit: exit_for(&e),
            summary: None,
            records: Vec::new(),
            coloring_text: None,
            error: Some(e.to_string()),
        },
    }
}

fn cmd_sweep(args: &SweepCmd) -> u8 {
    let seeds: Vec<u64> = match (&args.seeds, args.count) {
        (Some(list), _) => list.clone(),
        (None, Some(count)) => (1..=count).collect(),
        (None, None) => (1..=5).collect(),
    };
    if seeds.is_empty() {
        eprintln!("error: no seeds to run");
        return EXIT_USAGE;
    }
    {
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            eprintln!("error: duplicate seeds in --seeds");
            return EXIT_USAGE;
        }
    }

    let threads = thread_cap().min(seeds.len());
    let queue: Mutex<VecDeque<(usize, u64)>> =
        Mutex::new(seeds.iter().copied().enumerate().collect());
    let slots: Vec<Mutex<Option<SeedRun>>> = seeds.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop_front();
                let Some((i, seed)) = job else { break };
                *slots[i].lock().unwrap() = Some(run_seed(&args.process, seed));
            });
        }
    });

    let runs: Vec<SeedRun> =
        slots.into_iter().map(|s| s.into_inner().unwrap().expect("worker filled slot")).collect();

    if let Err(e) = std::fs::create_dir_all(&args.process.out) {
        eprintln!("error creating {}: {e}", args.process.out.display());
        return EXIT_FAILURE;
    }

    let mut worst = EXIT_OK;
    let mut per_seed = Vec::new();
    let mut pooled: Vec<TelemetryRecord> = Vec::new();
    for run in &runs {
        worst = worst.max(run.exit);
        if let Some(err) = &run.error {
            eprintln!("seed {}: error: {err}", run.seed);
        }
        if let Some(summary) = &run.summary {
            println!(
                "seed {} colors_used={} ratio={:.4} coverage={:.4} status={}",
                run.seed,
                summary.colors_used,
                summary.color_ratio,
                summary.phase1_coverage,
                status_str(summary.status),
            );
            per_seed.push(summary.clone());
        }
        if let Some(text) = &run.coloring_text {
            let path = args.process.out.join(format!("coloring_seed{}.txt", run.seed));
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error writing {}: {e}", path.display());
                worst = worst.max(EXIT_FAILURE);
            }
        }
        pooled.extend(run.records.iter().cloned());
    }

    let aggregate = SweepAggregate {
        n: args.process.n,
        epsilon: args.process.epsilon,
        seeds,
        per_seed,
        deviations: summarize_deviations(&pooled),
    };
    let path = args.process.out.join("aggregate.json");
    let mut json = serde_json::to_string_pretty(&aggregate).expect("aggregate serializes");
    json.push('\n');
    if let Err(e) = std::fs::write(&path, json) {
        eprintln!("error writing {}: {e}", path.display());
        worst = worst.max(EXIT_FAILURE);
    }
    worst
}

fn cmd_validate(args: &ValidateCmd) -> u8 {
    let coloring = match Coloring::read_file(&args.path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error reading {}: {e}", args.path.display());
            return EXIT_USAGE;
        }
    };
    let mode = args
        .mode
        .map(Into::into)
        .unwrap_or_else(|| ramsey_forge::validator::auto_mode(coloring.n()));
    let mut rng = substream(args.seed, Substream::Telemetry);
    let report = match validate(&coloring, mode, &mut rng) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    print!("{json}");
    if report.violations == 0 {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

fn cmd_traj(args: &TrajCmd) -> u8 {
    if !(args.epsilon > 0.0 && args.epsilon < 1.0) {
        eprintln!("error: --epsilon must lie strictly between 0 and 1");
        return EXIT_USAGE;
    }
    if args.points == 0 {
        eprintln!("error: --points must be at least 1");
        return EXIT_USAGE;
    }
    let s = special_fraction(args.epsilon);
    let grid = time_grid(0.01, 0.15, args.points);
    let params = args.n.map(|n| TrajectoryParams::new(n, args.epsilon));
    print!("{}", traj_table_csv(s, &grid, params.as_ref()));
    EXIT_OK
}
