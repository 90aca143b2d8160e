mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Overrides, RunConfig};
use output::{OutDir, SCHEMA_VERSION};

/// Invalid configuration or flags (exit 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Parser)]
#[command(
    name = "edge-divide",
    version,
    about = "Digital-divide analysis of cloud edge datacenter placement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Run configuration (JSON); flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Access radius in km.
    #[arg(long, global = true, value_name = "KM", allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Only datacenters launched on or before this date.
    #[arg(long = "as-of", global = true, value_name = "DATE")]
    as_of: Option<NaiveDate>,
    /// Comma-separated datacenter classes: region,local_zone,edge_pop.
    #[arg(long, global = true)]
    classes: Option<String>,
    /// Satellite hop distance for the LEO scenario.
    #[arg(long = "hop-km", global = true, value_name = "KM", allow_negative_numbers = true)]
    hop_km: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Load and summarize the configured datasets.
    Ingest,
    /// Distance percentile ratios and their launch timeline.
    Inequality,
    /// Concentration curve, index and launch timeline.
    Fairness,
    /// Coverage vs CI trade-off over candidate cities.
    Pareto,
    /// Satellite-hop distance transform and sigma sweep.
    Leo,
    /// Traceroute min-RTT statistics, WAN residence and satellite hops.
    Trace,
    /// Every analysis the configuration supports, plus an index.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Inequality => "inequality",
            Command::Fairness => "fairness",
            Command::Pareto => "pareto",
            Command::Leo => "leo",
            Command::Trace => "trace",
            Command::Report => "report",
        }
    }
}

fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    if err.downcast_ref::<ConfigError>().is_some() {
        return (2, "config");
    }
    match err.downcast_ref::<edge_divide::Error>() {
        Some(edge_divide::Error::Argument(_)) => (2, "config"),
        Some(edge_divide::Error::Invariant(_)) => (4, "invariant"),
        Some(_) => (3, "data"),
        None => (3, "data"),
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let f = &cli.flags;
    let mut cfg = match &f.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        sigma: f.sigma,
        as_of: f.as_of,
        classes: f.classes.clone(),
        hop_km: f.hop_km,
        out: f.out.clone(),
        svg: f.svg,
    });
    cfg.validate()?;
    let mut out = OutDir::create(&cfg.out)?;
    let command = cli.command;
    match command {
        Command::Ingest => commands::ingest(&cfg, &mut out),
        Command::Inequality => commands::inequality(&cfg, &mut out),
        Command::Fairness => commands::fairness(&cfg, &mut out),
        Command::Pareto => commands::pareto(&cfg, &mut out),
        Command::Leo => commands::leo(&cfg, &mut out),
        Command::Trace => commands::trace(&cfg, &mut out),
        Command::Report => commands::report(&cfg, &mut out),
    }?;
    out.write_manifest(command.name(), &serde_json::to_value(&cfg)?)?;
    eprintln!(
        "{}: wrote {} artifacts to {}",
        command.name(),
        out.artifacts().len(),
        out.root().display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = classify(&err);
            let record = json!({
                "schema_version": SCHEMA_VERSION,
                "status": "error",
                "command": cli.command.name(),
                "kind": kind,
                "exit_code": code,
                "message": format!("{err:#}"),
            });
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
