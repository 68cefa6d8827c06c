use clap::{error::ErrorKind, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ris_ssk::experiments::{
    parse_config, preset, read_sidecar, run_selfcheck, write_outputs, Experiment, Overrides, SelfcheckHooks,
};
use ris_ssk::montecarlo::{Escalation, RunOptions};
use ris_ssk::Error;

/// Simulation and analysis of RIS-assisted space shift keying under
/// imperfect CSI.
///
/// Every flag can also be set through an environment variable with the
/// RIS_SSK_ prefix, e.g. RIS_SSK_WORKERS=4.
#[derive(Debug, Parser)]
#[command(name = "ris-ssk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base seed for every Monte Carlo stream.
    #[arg(long, global = true, env = "RIS_SSK_SEED")]
    seed: Option<u64>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true, env = "RIS_SSK_WORKERS")]
    workers: Option<usize>,

    /// Directory for the CSV and sidecar files.
    #[arg(long, global = true, env = "RIS_SSK_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Base Monte Carlo trials per SNR point (escalation may add more).
    #[arg(long, global = true, env = "RIS_SSK_TRIALS")]
    trials: Option<u64>,

    /// Gauss-Chebyshev node count for the gcqK curves.
    #[arg(long = "gcq-k", global = true, env = "RIS_SSK_GCQ_K")]
    gcq_k: Option<usize>,

    /// Keep every point at its base trial count.
    #[arg(long, global = true, env = "RIS_SSK_NO_ESCALATION")]
    no_escalation: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a TOML config, or rerun an experiment from a .meta.json sidecar.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named figure preset (fig2 .. fig15).
    Preset { name: String },
    /// Run the oracle suite and print tolerances against achieved errors.
    Selfcheck,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("E_USAGE: {first}");
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}: {}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode, Error> {
    let mut experiment = match &cli.command {
        Command::Selfcheck => {
            let report = run_selfcheck(&SelfcheckHooks::default())?;
            print!("{report}");
            if report.passed() {
                return Ok(ExitCode::SUCCESS);
            }
            let n = report.failures().count();
            eprintln!("E_SELFCHECK: {n} check(s) failed");
            return Ok(ExitCode::from(1));
        }
        Command::Preset { name } => preset(name)?,
        Command::Run { config } => load(config)?,
    };
    experiment.apply(&Overrides {
        seed: cli.seed,
        trials: cli.trials,
        gcq_nodes: cli.gcq_k,
        escalation: cli.no_escalation.then(Escalation::disabled),
    })?;
    let opts = match cli.workers {
        Some(0) => return Err(Error::Domain("--workers must be positive".into())),
        Some(w) => RunOptions::with_workers(w),
        None => RunOptions::default(),
    };
    let output = experiment.run(opts)?;
    let (csv, meta) = write_outputs(&cli.out_dir, &experiment, &output)?;
    println!("{}", csv.display());
    println!("{}", meta.display());
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<Experiment, Error> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        return read_sidecar(&text);
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .unwrap_or("experiment")
        .to_string();
    Ok(Experiment::from_config(name, parse_config(&text)?))
}
