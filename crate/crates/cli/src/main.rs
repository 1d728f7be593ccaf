use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

mod commands;
mod config;
mod selftest;

use commands::Outcome;
use config::ExperimentConfig;

/// Spectra of convolution operators on wreath products and of the associated
/// random Schrödinger operators.
#[derive(Parser, Debug)]
#[command(name = "wreath", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true)]
    order: Option<usize>,

    #[arg(long, global = true)]
    radius: Option<usize>,

    #[arg(long, global = true)]
    realizations: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Exact moments of the wreath measure, by three independent routes.
    Moments,
    /// Monte-Carlo averaged spectral measure of `A + V` on a ball.
    Dos,
    /// Unitary equivalence check for finite base and lamp groups.
    VerifyFinite,
    /// Rank-one resolvent formula on random Hermitian matrices.
    Green,
    /// Smoothed density of states against the single-site density bound.
    Wegner,
    /// Parseval identity for the Green function.
    Parseval,
    /// Heat kernel inequalities and band-edge diagnostics.
    Lifshitz,
    /// Moments of the single-site potential sampler.
    Sampler,
    /// Fast run of the invariant suite.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Dos => "dos",
            Command::VerifyFinite => "verify_finite",
            Command::Green => "green",
            Command::Wegner => "wegner",
            Command::Parseval => "parseval",
            Command::Lifshitz => "lifshitz",
            Command::Sampler => "sampler",
            Command::Selftest => "selftest",
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_deref().context("--config is required for this command")?;
    let mut cfg = ExperimentConfig::load(path)?;
    let p = &mut cfg.params;
    if let Some(s) = cli.seed {
        p.seed = s;
    }
    if let Some(n) = cli.order {
        p.order = n;
    }
    if let Some(r) = cli.radius {
        p.radius = r;
    }
    if let Some(k) = cli.realizations {
        p.realizations = k;
    }
    Ok(cfg)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli) -> Result<bool> {
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;

    let start = Instant::now();
    let (cfg, outcome) = if cli.command == Command::Selftest {
        let r = selftest::run(cli.seed.unwrap_or(0))?;
        for c in &r.checks {
            println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let pass = r.pass;
        (None, Outcome { report: serde_json::to_value(r)?, csv: None, pass })
    } else {
        let cfg = load_config(cli)?;
        let outcome = match cli.command {
            Command::Moments => commands::moments(&cfg)?,
            Command::Dos => commands::dos(&cfg)?,
            Command::VerifyFinite => commands::verify_finite(&cfg)?,
            Command::Green => commands::green(&cfg)?,
            Command::Wegner => commands::wegner(&cfg)?,
            Command::Parseval => commands::parseval(&cfg)?,
            Command::Lifshitz => commands::lifshitz(&cfg)?,
            Command::Sampler => commands::sampler(&cfg)?,
            Command::Selftest => unreachable!(),
        };
        (Some(cfg), outcome)
    };
    let elapsed = start.elapsed().as_secs_f64();

    let name = cli.command.name();
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let report_path = cli.out.join(format!("{name}.json"));
    write_json(
        &report_path,
        &json!({ "command": name, "config": cfg, "pass": outcome.pass, "report": outcome.report }),
    )?;
    if let Some(cfg) = &cfg {
        let path = cli.out.join(format!("{name}.config.toml"));
        std::fs::write(&path, cfg.to_toml()?).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(csv) = &outcome.csv {
        let path = cli.out.join(format!("{name}.csv"));
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    write_json(
        &cli.out.join(format!("{name}.meta.json")),
        &json!({
            "command": name,
            "version": env!("CARGO_PKG_VERSION"),
            "threads": threads,
            "elapsed_seconds": elapsed,
            "config_path": cli.config,
        }),
    )?;
    println!("{name}: {} ({})", if outcome.pass { "PASS" } else { "FAIL" }, report_path.display());
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
