use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bdris_core::harness::{self, ExperimentResult, ExperimentSpec, RateSweepSide};
use bdris_core::Error;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bdris", version, about = "BD-RIS sum-rate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    #[value(name = "rate-reflective")]
    RateReflective,
    #[value(name = "rate-fullspace")]
    RateFullspace,
    #[value(name = "power-gain")]
    PowerGain,
    #[value(name = "complexity-table")]
    ComplexityTable,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a built-in experiment.
    Preset {
        name: Preset,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

enum Failure {
    Config(Error),
    Solver(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn override_spec(spec: &mut ExperimentSpec, trials: Option<usize>, seed: Option<u64>) {
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(s) = seed {
        spec.master_seed = s;
    }
}

fn finish(result: &ExperimentResult, out: &Path) -> Result<(), Failure> {
    harness::write_outputs(result, out)?;
    for p in &result.points {
        match (&p.summary, &p.error) {
            (Some(s), _) => println!(
                "{:<40} mean {:.4} bps/Hz  std {:.4}  ci95 {:.4}",
                p.config.to_string(),
                s.mean,
                s.std,
                s.ci95
            ),
            (None, Some(e)) => eprintln!("{}: failed: {e}", p.config),
            _ => {}
        }
    }
    match result.failed_points() {
        0 => Ok(()),
        n => Err(Failure::Solver(n)),
    }
}

fn run_spec(spec: &ExperimentSpec, out: &Path, threads: Option<usize>) -> Result<ExperimentResult, Failure> {
    let result = harness::run(spec, threads)?;
    finish(&result, out)?;
    Ok(result)
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            out,
            trials,
            seed,
            threads,
        } => {
            let mut spec = harness::load_spec(&config)?;
            override_spec(&mut spec, trials, seed);
            let out = out
                .or_else(|| spec.output.clone())
                .ok_or_else(|| Error::InvalidConfig("no output directory: pass --out or set \"output\"".into()))?;
            run_spec(&spec, &out, threads)?;
        }
        Command::Preset {
            name,
            out,
            trials,
            seed,
            threads,
        } => match name {
            Preset::ComplexityTable => {
                let rows = harness::complexity_table(&[16, 32, 64])?;
                std::fs::create_dir_all(&out).map_err(Error::from)?;
                let mut w = csv::Writer::from_path(out.join("complexity.csv")).map_err(Error::from)?;
                w.write_record(["M", "mode", "architecture", "group_size", "components"])
                    .map_err(Error::from)?;
                for r in &rows {
                    w.write_record([
                        r.elements.to_string(),
                        r.mode.clone(),
                        r.architecture.clone(),
                        r.group_size.to_string(),
                        r.components.to_string(),
                    ])
                    .map_err(Error::from)?;
                    println!("{:>3} {:<16} {:<8} gs={:<3} {}", r.elements, r.mode, r.architecture, r.group_size, r.components);
                }
                w.flush().map_err(Error::from)?;
            }
            Preset::PowerGain => {
                let mut spec = harness::preset_power_gain();
                override_spec(&mut spec, trials, seed);
                let result = run_spec(&spec, &out, threads)?;
                let ratio = harness::power_gain_ratio(&result)?;
                println!("received power gain, fully over single: {ratio:.4}");
            }
            Preset::RateReflective | Preset::RateFullspace => {
                let side = if matches!(name, Preset::RateReflective) {
                    RateSweepSide::Reflective
                } else {
                    RateSweepSide::FullSpace
                };
                let mut spec = harness::preset_rate_sweep(side);
                override_spec(&mut spec, trials, seed);
                run_spec(&spec, &out, threads)?;
            }
        },
        Command::Validate { config } => {
            let spec = harness::load_spec(&config)?;
            spec.validate()?;
            let points = spec.points()?;
            println!("ok: {} sweep points, {} trials each", points.len(), spec.trials);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Solver(n)) => {
            eprintln!("error: {n} sweep point(s) failed");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
