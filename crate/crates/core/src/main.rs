use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use trustrec::cli::{self, RunConfig};
use trustrec::synth::SynthConfig;

#[derive(Parser)]
#[command(name = "trustrec", version, about = "Trust-aware recommendation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and filter a dataset and print its statistics.
    Ingest(Overrides),
    /// Write PageRank and trust dumps.
    Trust(Overrides),
    /// Train one configuration on the training split and dump the model.
    Train(Overrides),
    /// Grid search with cross-validation on the training split.
    Grid(Overrides),
    /// Full experiment: split, trust, grid search, final evaluation.
    Eval(Overrides),
    /// Generate a synthetic dataset as JSON lines.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Overrides {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// full, noF, noE or noS.
    #[arg(long)]
    ablation: Option<String>,
    /// MF, LOCABAL, LOCABAL+, U2UCF or U2USocial.
    #[arg(long)]
    variant: Option<String>,
    /// Fixes alpha to a single value.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixes beta to a single value.
    #[arg(long)]
    beta: Option<f64>,
    /// Top-k list length.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::parse("", Path::new("."))?,
        };
        let cwd = Path::new(".");
        let mut set = |key: &str, value: Option<String>| -> Result<()> {
            if let Some(v) = value {
                cfg.set(key, &v, cwd).with_context(|| format!("--{key}"))?;
            }
            Ok(())
        };
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("ablation", self.ablation.clone())?;
        set("variant", self.variant.clone())?;
        set("alpha", self.alpha.map(|v| v.to_string()))?;
        set("beta", self.beta.map(|v| v.to_string()))?;
        set("k", self.k.map(|v| v.to_string()))?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    users: usize,
    #[arg(long, default_value_t = 200)]
    items: usize,
    #[arg(long, default_value_t = 0.3)]
    noisy_fraction: f64,
    #[arg(long, default_value_t = 30)]
    ratings_per_user: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the JSON-lines files.
    #[arg(long, default_value = "data")]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest(o) => {
            let stats = cli::cmd_ingest(&o.resolve()?).context("ingest failed")?;
            println!("{stats}");
        }
        Command::Trust(o) => {
            let cfg = o.resolve()?;
            let trust = cli::cmd_trust(&cfg).context("trust failed")?;
            println!(
                "{} trust values written to {}",
                trust.pairs.len(),
                cfg.out.display()
            );
        }
        Command::Train(o) => {
            let cfg = o.resolve()?;
            let model = cli::cmd_train(&cfg).context("train failed")?;
            let last = model.trace.last().copied().unwrap_or(f64::NAN);
            println!("final objective {last:.6} after {} epochs", model.trace.len() - 1);
        }
        Command::Grid(o) => {
            let cfg = o.resolve()?;
            let grid = cli::cmd_grid(&cfg).context("grid search failed")?;
            println!(
                "best alpha {} beta {} mean MAP {:.6}",
                grid.best.alpha, grid.best.beta, grid.best_map
            );
        }
        Command::Eval(o) => {
            let cfg = o.resolve()?;
            let run = cli::cmd_run(&cfg).context("evaluation failed")?;
            println!("{}", trustrec::evaluation::REPORT_HEADER);
            println!("{}", run.report.csv_row());
        }
        Command::Synth(a) => {
            let sc = SynthConfig {
                users: a.users,
                items: a.items,
                noisy_fraction: a.noisy_fraction,
                ratings_per_user: a.ratings_per_user,
                seed: a.seed,
                ..SynthConfig::default()
            };
            let d = cli::cmd_synth(&sc, &a.out).context("synth failed")?;
            println!("{}", d.stats());
        }
    }
    Ok(())
}
