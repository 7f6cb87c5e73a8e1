use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chanborrow_core::scenario::{
    emit_csv, emit_summary, load_config, run_scenario, MetricsReport, ScenarioConfig,
};
use chanborrow_core::Strategy;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

/// Overrides the directory used when `--out` is not given.
const OUT_DIR_ENV: &str = "CHANBORROW_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "chanborrow",
    version,
    about = "Channel borrowing with co-channel interference declination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the distance sweep, write CSV and print a summary.
    Run {
        #[command(flatten)]
        common: Common,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiment for several consecutive seeds in parallel.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Number of seeds, starting at the configured seed.
        #[arg(long, default_value_t = 8)]
        seeds: u64,
        /// Output directory for one CSV per seed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file and print its hash.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the default configuration as TOML.
    Defaults,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo samples per outage estimate.
    #[arg(long)]
    samples: Option<u64>,
}

fn base_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ScenarioConfig::default()),
    }
}

impl Common {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = base_config(self.config.as_deref())?;
        if let Some(s) = self.strategy {
            cfg.strategy = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.monte_carlo_samples = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn sweep_line(report: &MetricsReport) -> String {
    let pairs = report.pairs();
    let n = pairs.len().max(1) as f64;
    let d_sinr: Vec<f64> = pairs.iter().map(|(c, p)| p.sinr_db - c.sinr_db).collect();
    let d_out: f64 = pairs
        .iter()
        .map(|(c, p)| p.outage_prob - c.outage_prob)
        .sum::<f64>()
        / n;
    let m = &report.metadata;
    format!(
        "seed {:>6}  dSINR mean {:>8.3} dB  min {:>8.3} dB  dP_out mean {:>10.3e}  ref blocking conv {:.4} prop {:.4}",
        m.seed,
        d_sinr.iter().sum::<f64>() / n,
        d_sinr.iter().copied().fold(f64::INFINITY, f64::min),
        d_out,
        m.conventional_calls.blocking_ratio(),
        m.proposed_calls.blocking_ratio(),
    )
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    match cli.command {
        Command::Run { common, out } => {
            let cfg = common.resolve()?;
            let report = run_scenario(&cfg)?;
            let out = out.unwrap_or_else(|| default_out_dir().join("results.csv"));
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            emit_csv(&report, &out).with_context(|| format!("writing {}", out.display()))?;
            print!("{}", emit_summary(&report));
            log::info!("wrote {}", out.display());
        }
        Command::Sweep { common, seeds, out } => {
            let cfg = common.resolve()?;
            let dir = out.unwrap_or_else(default_out_dir);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let results: Vec<Result<String>> = (0..seeds)
                .into_par_iter()
                .map(|k| {
                    let cfg = ScenarioConfig {
                        seed: cfg.seed.wrapping_add(k),
                        ..cfg.clone()
                    };
                    let report =
                        run_scenario(&cfg).with_context(|| format!("seed {}", cfg.seed))?;
                    let path = dir.join(format!("results_seed{}.csv", cfg.seed));
                    emit_csv(&report, &path)
                        .with_context(|| format!("writing {}", path.display()))?;
                    Ok(sweep_line(&report))
                })
                .collect();
            for line in results {
                println!("{}", line?);
            }
        }
        Command::Validate { config } => {
            let cfg = base_config(config.as_deref())?;
            cfg.validate()?;
            println!("ok {}", cfg.hash());
        }
        Command::Defaults => print!("{}", ScenarioConfig::default().to_toml()),
    }
    Ok(())
}
