use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reinfect::TimeUnit;
use reinfect_cli::commands::{write_reconstruction, RECONSTRUCTED};
use reinfect_cli::{
    equilibrium_report, fate_report, identify, load, preset, run_scenario, stats_report, CliError, IdentifyRequest,
    Report, Result, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "reinfect", version, about = "SEIRS model with reinfection counts: simulation, equilibria, identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Scenario {
    /// Scenario file (TOML)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped scenario
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

impl Scenario {
    fn load(&self) -> Result<ScenarioConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => load(path),
            (None, Some(name)) => preset(name),
            (None, None) => Err(CliError::Usage("give --config <path> or --preset bjornstad-svi".into())),
        }
    }

    fn given(&self) -> bool {
        self.config.is_some() || self.preset.is_some()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Units {
    Day,
    Year,
}

impl From<Units> for TimeUnit {
    fn from(u: Units) -> Self {
        match u {
            Units::Day => TimeUnit::PerDay,
            Units::Year => TimeUnit::PerYear,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario and write CSV trajectories
    Simulate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Endemic equilibrium, mean reinfection numbers, spectra and fate
    Equilibrium {
        #[command(flatten)]
        scenario: Scenario,
        /// Also write equilibrium.csv here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "year")]
        units: Units,
    },
    /// Mean reinfection numbers at the endemic equilibrium
    Stats {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Long-run fate of the total population
    Fate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "year")]
        units: Units,
    },
    /// Recover SIS rates from observed y = alpha I (and y1 = alpha I1)
    Identify {
        /// CSV with columns t (days), y and optionally y1
        input: PathBuf,
        /// Separate CSV with columns t and y1
        #[arg(long)]
        y1: Option<PathBuf>,
        /// Natural mortality rate, per --units (default: the scenario's mu)
        #[arg(long)]
        mu: Option<f64>,
        /// Evaluation window in days
        #[arg(long, value_name = "T0:T1")]
        window: Option<String>,
        #[arg(long, value_enum, default_value = "day")]
        units: Units,
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let bad = || CliError::Usage(format!("--window expects t0:t1 in days, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let t0: f64 = a.trim().parse().map_err(|_| bad())?;
    let t1: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(bad());
    }
    Ok((t0, t1))
}

fn emit(report: &Report, out: Option<&Path>, file: &str) -> Result<()> {
    print!("{report}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(file);
        report.write_csv(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { scenario, out } => {
            let cfg = scenario.load()?;
            print!("{}", run_scenario(&cfg, &out)?);
        }
        Command::Equilibrium { scenario, out, units } => {
            let cfg = scenario.load()?;
            emit(&equilibrium_report(&cfg.params, units.into())?, out.as_deref(), "equilibrium.csv")?;
        }
        Command::Stats { scenario, out } => {
            let cfg = scenario.load()?;
            emit(&stats_report(&cfg.params)?, out.as_deref(), "stats.csv")?;
        }
        Command::Fate { scenario, out, units } => {
            let cfg = scenario.load()?;
            emit(&fate_report(&cfg.params, units.into())?, out.as_deref(), "fate.csv")?;
        }
        Command::Identify { input, y1, mu, window, units, scenario, out } => {
            let unit: TimeUnit = units.into();
            let mu_per_day = match mu {
                Some(m) => m * unit.rate_factor(TimeUnit::PerDay),
                None if scenario.given() => scenario.load()?.params_per_day().mu,
                None => return Err(CliError::Usage("identify needs --mu or a scenario (--config/--preset)".into())),
            };
            let window = window.as_deref().map(parse_window).transpose()?;
            let outcome = identify(&IdentifyRequest { input, y1, mu_per_day, window, unit })?;
            if let Some(n) = outcome.notice {
                println!("{n}");
            }
            print!("{}", outcome.report);
            std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            let path = out.join(RECONSTRUCTED);
            if write_reconstruction(&outcome, &path)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
