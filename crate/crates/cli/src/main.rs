//! Command line front end: batch runs, config validation, profile listing
//! and the bundled ASHRAE 140 cases.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use zonesim::{bestest, config::ConfigDocument, converter, orchestrator, profiles};

#[derive(Parser)]
#[command(name = "zonesim", version, about = "Single-zone thermal building dataset generator")]
struct Cli {
    /// Suppress all non-error output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a config into runs and simulate them on a worker pool.
    Run(RunArgs),
    /// Parse a config, resolve the building model and print the parameters.
    ValidateConfig(ValidateArgs),
    /// List wall construction profiles, occupant archetypes and RC
    /// distribution names.
    ListProfiles,
    /// Run a bundled ASHRAE 140 case against a supplied weather file.
    Bestest(BestestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration document (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; one subdirectory per run.
    #[arg(long)]
    out: PathBuf,
    /// Optional second file with operational schedules.
    #[arg(long)]
    schedules: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated output column selection.
    #[arg(long)]
    columns: Option<String>,
    /// Batch seed override for stochastic profiles.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    schedules: Option<PathBuf>,
}

#[derive(Args)]
struct BestestArgs {
    /// Case name: TC600, TC900, TC600FF or TC900FF.
    case: String,
    /// EPW weather file (the Denver-area ASHRAE 140 file).
    #[arg(long)]
    weather: PathBuf,
    /// Keep the run output here instead of a temporary directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, quiet),
        Command::ValidateConfig(args) => cmd_validate(args, quiet),
        Command::ListProfiles => cmd_list_profiles(quiet),
        Command::Bestest(args) => cmd_bestest(args, quiet),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_document(config: &PathBuf, schedules: Option<&PathBuf>) -> anyhow::Result<ConfigDocument> {
    let mut doc = ConfigDocument::from_file(config)
        .with_context(|| format!("reading {}", config.display()))?;
    if let Some(path) = schedules {
        doc.merge_schedule_file(path)
            .with_context(|| format!("merging schedules from {}", path.display()))?;
    }
    Ok(doc)
}

fn cmd_run(args: RunArgs, quiet: bool) -> anyhow::Result<u8> {
    let mut doc = load_document(&args.config, args.schedules.as_ref())?;
    if let Some(cols) = &args.columns {
        doc.simulation.columns = parse_columns(cols)?;
    }
    if let Some(seed) = args.seed {
        doc.simulation.seed = seed;
    }
    let workers = args.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });

    let (report, _) = orchestrator::run_batch(&doc, &args.out, workers)?;

    for failure in &report.failures {
        eprintln!("run {} failed: {}", failure.run_id, failure.error);
    }
    if !quiet {
        println!(
            "runs: {}   succeeded: {}   failed: {}",
            report.total,
            report.succeeded,
            report.failures.len()
        );
        println!(
            "mean run time: {:.2} s   batch wall time: {:.2} s",
            report.mean_run_seconds(),
            report.total_wall_seconds
        );
        println!("output: {}", args.out.display());
    }
    Ok(if report.failures.is_empty() { 0 } else { 1 })
}

fn parse_columns(spec: &str) -> anyhow::Result<Vec<String>> {
    let mut columns = vec!["time".to_string()];
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !orchestrator::output::COLUMNS.contains(&name) {
            bail!(
                "unknown column `{name}`; available: {}",
                orchestrator::output::COLUMNS.join(", ")
            );
        }
        if name != "time" {
            columns.push(name.to_string());
        }
    }
    Ok(columns)
}

fn cmd_validate(args: ValidateArgs, quiet: bool) -> anyhow::Result<u8> {
    let doc = load_document(&args.config, args.schedules.as_ref())?;
    let model = converter::resolve(&doc.building).context("resolving building parameters")?;
    let plans = orchestrator::expand(&doc).context("expanding variations")?;
    if !quiet {
        for (name, value) in &model.resolved_params {
            println!("{name} = {value}");
        }
        println!();
        println!("runs: {}   schedule entries: {}", plans.len(), doc.schedules.len());
        match &doc.weather_file {
            Some(w) => println!("weather: {}", w.display()),
            None => println!("weather: none configured (required for `run`)"),
        }
    }
    Ok(0)
}

fn cmd_list_profiles(quiet: bool) -> anyhow::Result<u8> {
    if quiet {
        return Ok(0);
    }
    println!("wall construction profiles (#extWall_construction, ...):");
    for p in converter::WALL_PROFILES {
        println!(
            "  {:<28} U = {:>5.2} W/(m2K)   capacity = {:>5.1} kJ/(m2K)   {}",
            p.name,
            p.u_value_w_m2k,
            p.heat_capacity_j_m2k / 1000.0,
            p.description
        );
    }
    println!();
    println!("occupant archetypes (gain_profile / window_profile):");
    for a in profiles::ARCHETYPES {
        println!("  {a}");
    }
    println!();
    println!("RC distribution profiles (*_R_distribution, *_C_distribution):");
    for d in converter::DISTRIBUTION_PROFILES {
        println!("  {d}");
    }
    Ok(0)
}

fn cmd_bestest(args: BestestArgs, quiet: bool) -> anyhow::Result<u8> {
    let tmp;
    let out_dir = match &args.out {
        Some(dir) => dir.clone(),
        None => {
            tmp = tempdir()?;
            tmp.clone()
        }
    };
    let case = bestest::run_case(&args.case, &args.weather, &out_dir)?;
    if !quiet {
        for m in &case.metrics {
            println!(
                "{} {}: {:.3} {}   range [{}, {}]   {}",
                case.case_name,
                m.name,
                m.value,
                m.unit,
                m.low,
                m.high,
                if m.pass() { "PASS" } else { "FAIL" }
            );
        }
        println!("simulated in {:.1} s", case.outcome.wall_seconds);
    }
    Ok(if case.pass() { 0 } else { 1 })
}

/// Unique scratch directory under the system temp dir; contents are left for
/// the OS to clean up.
fn tempdir() -> anyhow::Result<PathBuf> {
    let dir = std::env::temp_dir().join(format!("zonesim-bestest-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
