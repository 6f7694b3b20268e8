use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use treewalk::engine::Stop;
use treewalk::harness::config::{
    default_workers, Algo, ExperimentConfig, InitSource, LabelingSource, StartSource, TreeSource, WORKERS_ENV,
};
use treewalk::harness::simulate::{EXIT_ERROR, EXIT_OK, EXIT_VIOLATION};
use treewalk::harness::{enumerate, simulate, sweep};

/// Exploration of port-labelled trees by a single agent.
#[derive(Parser)]
#[command(name = "treewalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm once and report the outcome.
    Simulate(SimulateArgs),
    /// Run one algorithm over many instances and aggregate.
    Sweep(SweepArgs),
    /// Classify every 1-bit path table.
    #[command(name = "enumerate-1bit")]
    Enumerate1Bit(Common),
    /// Check every gadget template against every 1-bit path table.
    Gadgets(Common),
}

#[derive(Args)]
struct Common {
    /// Output file; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Instance {
    /// cleanmem, token, rotor, x, y, z, r, q or table:<0..4095>.
    #[arg(long)]
    algo: Algo,
    /// file:PATH, path:N, random:N:SEED, all:A..B, paths:A..B or samples:N:COUNT:SEED.
    #[arg(long)]
    tree: TreeSource,
    /// given, enumerate or seed:N.
    #[arg(long, default_value = "given")]
    labeling: LabelingSource,
    /// clean, dirty:SEED, file:PATH or enumerate.
    #[arg(long, default_value = "clean")]
    init: InitSource,
    /// Node index, middle, all or random.
    #[arg(long)]
    start: Option<StartSource>,
    /// Move budget; a per-algorithm default otherwise.
    #[arg(long)]
    budget: Option<u64>,
    /// Initial agent bit of a 1-bit table.
    #[arg(long)]
    agent_bit: bool,
    /// Skip the invariant monitors.
    #[arg(long)]
    no_monitors: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: Instance,
    /// self-termination, all-visited or first-endpoint-visited.
    #[arg(long, value_parser = parse_stop)]
    stop: Option<Stop>,
    /// Write one JSON record per step here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: Instance,
    /// Write one CSV row per instance, not only the summary.
    #[arg(long)]
    rows: bool,
    #[command(flatten)]
    common: Common,
}

fn parse_stop(s: &str) -> Result<Stop, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown stop condition {s:?}"))
}

fn config(command: &str, instance: Option<&Instance>, common: &Common, default_start: StartSource) -> ExperimentConfig {
    let mut c = match instance {
        Some(i) => {
            let mut c = ExperimentConfig::new(command, i.algo, i.tree.clone());
            c.labeling = i.labeling;
            c.init = i.init.clone();
            c.start = i.start.unwrap_or(default_start);
            c.budget = i.budget;
            c.agent_bit = i.agent_bit;
            c.monitors = !i.no_monitors;
            c
        }
        None => ExperimentConfig::new(command, Algo::Table(0), TreeSource::Paths { min: 2, max: 65 }),
    };
    c.output = common.output.clone();
    c.workers = common.workers.unwrap_or_else(default_workers);
    c.seed = common.seed;
    c
}

fn default_stop(algo: Algo) -> Stop {
    match algo {
        Algo::CleanMem | Algo::Token => Stop::SelfTermination,
        Algo::Rotor | Algo::Table(_) => Stop::AllVisited,
    }
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Simulate(a) => {
            let mut c = config("simulate", Some(&a.instance), &a.common, StartSource::Index(0));
            c.stop = a.stop.unwrap_or_else(|| default_stop(c.algo));
            c.trace = a.trace;
            let r = simulate::simulate_to_files(&c).context("simulate")?;
            if c.output.is_some() {
                eprintln!("{} after {} steps", r.status, r.steps);
            }
            Ok(r.exit_code())
        }
        Command::Sweep(a) => {
            let mut c = config("sweep", Some(&a.instance), &a.common, StartSource::All);
            c.rows = a.rows;
            let r = sweep::sweep_to_file(&c).context("sweep")?;
            eprintln!("{}", serde_json::to_string(&r.summary)?);
            Ok(verdict(r.summary.clean()))
        }
        Command::Enumerate1Bit(common) => {
            let c = config("enumerate-1bit", None, &common, StartSource::Middle);
            let r = enumerate::enumerate_1bit_to_file(&c).context("enumerate-1bit")?;
            eprintln!("{}", serde_json::to_string(&r.summary)?);
            Ok(verdict(r.pass()))
        }
        Command::Gadgets(common) => {
            let c = config("gadgets", None, &common, StartSource::Middle);
            let r = enumerate::gadgets_to_file(&c).context("gadgets")?;
            let failed: Vec<&str> = r.templates.iter().filter(|t| !t.pass).map(|t| t.name).collect();
            eprintln!("{} templates, {} failed {:?}", r.templates.len(), failed.len(), failed);
            Ok(verdict(r.pass))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
