mod commands;
mod context;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{CommandFactory, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use commands::{FitAttachArgs, FitDistArgs, IngestArgs, MeasureArgs, ReportArgs, ScoreArgs, SimulateArgs};
use context::{Context, RunManifest, SeedSource};

/// Preferential attachment toolkit: simulate growing networks, measure
/// attachment rates and fit degree distributions.
///
/// Every run writes a manifest (`manifest.json` in the output directory by
/// default). Passing a manifest with no command repeats that run and checks
/// that the outputs are byte-identical.
#[derive(Debug, Parser)]
#[command(name = "pagrowth", version)]
struct Cli {
    /// Seed for every random draw. Drawn from OS entropy and logged when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel steps; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for output files [default: .]
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// With a command: where to write the manifest. Without one: a manifest to replay.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Clean a citation corpus and report its counts.
    Ingest(IngestArgs),
    /// Generate a growth sequence from a growing-network model.
    Simulate(SimulateArgs),
    /// Measure the attachment rate of a growth sequence.
    Measure(MeasureArgs),
    /// Fit discretised forms to the in-degree distribution.
    Fitdist(FitDistArgs),
    /// Fit attachment functions to a binned rate.
    Fitattach(FitAttachArgs),
    /// Segmented-regression log-linearity score of a binned rate.
    Score(ScoreArgs),
    /// Attachment-function model comparison across time resolutions.
    Report(ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Simulate(_) => "simulate",
            Command::Measure(_) => "measure",
            Command::Fitdist(_) => "fitdist",
            Command::Fitattach(_) => "fitattach",
            Command::Score(_) => "score",
            Command::Report(_) => "report",
        }
    }

    /// Whether the command draws random numbers.
    fn randomized(&self) -> bool {
        match self {
            Command::Simulate(_) => true,
            Command::Fitdist(a) => a.bootstrap > 0,
            _ => false,
        }
    }

    fn run(&self, ctx: &mut Context) -> Result<()> {
        match self {
            Command::Ingest(a) => commands::ingest(a, ctx),
            Command::Simulate(a) => commands::simulate(a, ctx),
            Command::Measure(a) => commands::measure(a, ctx),
            Command::Fitdist(a) => commands::fitdist(a, ctx),
            Command::Fitattach(a) => commands::fitattach(a, ctx),
            Command::Score(a) => commands::score(a, ctx),
            Command::Report(a) => commands::report(a, ctx),
        }
    }
}

/// Bad input or configuration; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Usage>() || cause.is::<std::io::Error>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<pagrowth::Error>() {
            return if err.is_usage() { 2 } else { 1 };
        }
    }
    1
}

fn fresh(cli: &Cli, command: &Command) -> Result<()> {
    let (seed, seed_source) = match cli.seed {
        Some(s) => (s, SeedSource::Flag),
        None if !command.randomized() => (0, SeedSource::Unused),
        None => {
            let s = rand::random::<u64>();
            log::warn!("no --seed given; using entropy seed {s}");
            (s, SeedSource::Entropy)
        }
    };
    let output_dir = cli.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut ctx = Context::new(seed, output_dir.clone());
    command.run(&mut ctx)?;
    let manifest = RunManifest {
        tool: "pagrowth".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        argv: std::env::args().skip(1).collect(),
        config: command.clone(),
        seed,
        seed_source,
        threads: cli.threads,
        output_dir: output_dir.clone(),
        inputs: ctx.input_digests()?,
        outputs: ctx.output_digests()?,
    };
    let path = cli.manifest.clone().unwrap_or_else(|| output_dir.join("manifest.json"));
    manifest.write(&path)?;
    log::info!("wrote {} outputs; manifest {}", manifest.outputs.len(), path.display());
    Ok(())
}

fn replay(cli: &Cli, path: &std::path::Path) -> Result<()> {
    let manifest = RunManifest::read(path)?;
    if manifest.version != env!("CARGO_PKG_VERSION") {
        log::warn!("manifest was written by version {}, this is {}", manifest.version, env!("CARGO_PKG_VERSION"));
    }
    for input in &manifest.inputs {
        let now = context::sha256_file(std::path::Path::new(&input.path))?;
        if now != input.sha256 {
            return Err(usage(format!("input {} has changed since the manifest was written", input.path)));
        }
    }
    if cli.seed.is_some_and(|s| s != manifest.seed) {
        return Err(usage("--seed conflicts with the manifest seed"));
    }
    let output_dir = cli.output_dir.clone().unwrap_or_else(|| manifest.output_dir.clone());
    let mut ctx = Context::new(manifest.seed, output_dir);
    manifest.config.run(&mut ctx)?;
    let outputs = ctx.output_digests()?;
    let differing: Vec<&str> = manifest
        .outputs
        .iter()
        .filter(|o| !outputs.contains(o))
        .map(|o| o.path.as_str())
        .collect();
    if !differing.is_empty() || outputs.len() != manifest.outputs.len() {
        bail!("replayed outputs differ from the manifest: {}", differing.join(", "));
    }
    log::info!("replayed {}; {} outputs identical", manifest.command, outputs.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::error!("{e}");
            return ExitCode::from(2);
        }
    }
    let result = match (&cli.command, &cli.manifest) {
        (Some(command), _) => fresh(&cli, command),
        (None, Some(path)) => replay(&cli, path),
        (None, None) => {
            let _ = Cli::command().print_help();
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
