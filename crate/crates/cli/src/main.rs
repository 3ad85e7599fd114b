use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use banksim::config::ConfigBuilder;
use banksim::engine::run_scenario_checked;
use banksim::io::{comparison_table, emit_artifacts, write_comparison, write_ensemble};
use banksim::{compare_phis, run_ensemble, CheckMode, Preset, ScenarioConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "banksim",
    version,
    about = "Agent-based banking simulator with interbank credit pooling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV artifacts.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Restrict columns to those backing one figure (1-8).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        figure: Option<u8>,
        /// How often accounting identities are checked.
        #[arg(long, value_enum, default_value_t = Check::PerPeriod)]
        check: Check,
        /// Print wall time to stderr (never written to the artifacts).
        #[arg(long)]
        record_timing: bool,
    },
    /// Run seeds master, master+1, ... and write quantile bands and metrics.
    Ensemble {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 30)]
        seeds: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        record_timing: bool,
    },
    /// Sweep phi over shared-shock seeds and print the ordering table.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated pooling thresholds.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.4, 0.8])]
        phis: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        seeds: usize,
        /// Also write the per-run and summary CSVs here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        record_timing: bool,
    },
    /// Run a scenario with identity checks after every phase and report residuals.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// List the named presets.
    Presets,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Named preset to start from.
    #[arg(long)]
    preset: Option<Preset>,
    /// TOML config file; its keys override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required unless the config file sets one).
    #[arg(long)]
    seed: Option<u64>,
    /// Override one key, e.g. `--set phi=0.4`. Repeatable; applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    PerPeriod,
    PerPhase,
}

impl ScenarioArgs {
    fn build(&self) -> Result<ScenarioConfig> {
        let mut builder = ConfigBuilder::new();
        if let Some(preset) = self.preset {
            builder = builder.preset(preset);
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            builder = builder
                .merge_toml(&text)
                .with_context(|| format!("in {}", path.display()))?;
        }
        if let Some(seed) = self.seed {
            builder = builder.seed(seed);
        }
        for assignment in &self.overrides {
            builder = builder.set(assignment)?;
        }
        Ok(builder.build()?)
    }
}

fn report_time(enabled: bool, what: &str, start: Instant) {
    if enabled {
        eprintln!("{what}: {:.3}s", start.elapsed().as_secs_f64());
    }
}

fn list_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn validate(config: &ScenarioConfig) -> Result<()> {
    let trace = run_scenario_checked(config, CheckMode::PerPhase)?;
    let mut gap: f64 = 0.0;
    for record in &trace.periods {
        let a3: f64 = record.banks.iter().map(|b| b.a3).sum();
        let l3: f64 = record.banks.iter().map(|b| b.l3).sum();
        gap = gap.max((a3 - l3).abs() / a3.abs().max(l3.abs()).max(1.0));
    }
    println!("periods: {}", trace.periods.len());
    println!("max identity residual: {:.3e}", trace.max_residual());
    println!("max interbank gap: {gap:.3e}");
    if gap > banksim::engine::TOLERANCE {
        bail!("aggregate A3 and L3 diverge by {gap:.3e}");
    }
    println!("ok");
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            figure,
            check,
            record_timing,
        } => {
            let config = scenario.build()?;
            let mode = match check {
                Check::PerPeriod => CheckMode::PerPeriod,
                Check::PerPhase => CheckMode::PerPhase,
            };
            let start = Instant::now();
            let trace = run_scenario_checked(&config, mode)?;
            report_time(record_timing, "run", start);
            list_written(&emit_artifacts(&trace, &out, figure)?);
        }
        Command::Ensemble {
            scenario,
            seeds,
            out,
            record_timing,
        } => {
            let config = scenario.build()?;
            let start = Instant::now();
            let summary = run_ensemble(&config, seeds)?;
            report_time(record_timing, "ensemble", start);
            list_written(&write_ensemble(&summary, &out)?);
        }
        Command::Compare {
            scenario,
            phis,
            seeds,
            out,
            record_timing,
        } => {
            let config = scenario.build()?;
            let start = Instant::now();
            let cmp = compare_phis(&config, &phis, seeds)?;
            report_time(record_timing, "compare", start);
            print!("{}", comparison_table(&cmp));
            if let Some(dir) = out {
                list_written(&write_comparison(&cmp, &dir)?);
            }
        }
        Command::Validate { scenario } => validate(&scenario.build()?)?,
        Command::Presets => {
            for preset in Preset::ALL {
                println!("{:<20} {}", preset.name(), preset.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
