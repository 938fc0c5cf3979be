use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jdfpt_cli::commands::{self, calibration_tables};
use jdfpt_cli::output::{ensure_dir, Format, Table};
use jdfpt_cli::{CliError, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "jdfpt",
    version,
    about = "Default times and default correlations of jump-diffusion firms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Monte Carlo runs; overrides the scenario.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    runs: Option<u64>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory; defaults to `run.out` or `out`.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form default probabilities and correlations of the diffusions.
    Analytic,
    /// Simulate the scenario: densities, default rates, correlations.
    Simulate,
    /// Fit each firm to cumulative default curves.
    Calibrate {
        /// CSV with columns rating,t_years,cum_default_rate.
        #[arg(long)]
        data: PathBuf,
    },
    /// Simulated against analytic correlations for every pair of firm types.
    Tables,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("--config <FILE> is required".into()))?;
    let mut scn = Scenario::load(path)?;
    if let Some(s) = cli.seed {
        scn.run.seed = s;
    }
    if let Some(w) = cli.workers {
        scn.run.workers = w;
    }
    if let Some(r) = cli.runs {
        scn.run.runs = r;
        scn.calibration.runs_per_eval = r;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| scn.run.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let tables: Vec<(String, Table)> = match &cli.command {
        Command::Analytic => commands::analytic_tables(scn.analytic_inputs()?)?.tables(),
        Command::Simulate => commands::run_simulation(&scn)?.tables()?,
        Command::Calibrate { data } => {
            let curves = commands::read_curve_file(data)?;
            calibration_tables(&commands::calibrate_curves(&scn, &curves)?)
        }
        Command::Tables => commands::pair_tables(&scn)?.tables(),
    };
    ensure_dir(&out)?;
    for (stem, t) in &tables {
        let p = t.write(&out, stem, cli.format)?;
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jdfpt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
