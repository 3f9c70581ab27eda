//! `hrqol` — run the HRQoL population simulation from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hrqol_core::io::{self, RunManifest, CURVES_FILE, INDIVIDUALS_FILE, PATHS_FILE, SUMMARY_FILE};
use hrqol_core::{simulate_population, Error, PopulationResult, SimConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "hrqol", version, about = "Stochastic HRQoL population simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a population and write summary, quartile curves and per-person results.
    Simulate(SimulateArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// JSON configuration document; missing keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Population size (overrides the config file).
    #[arg(long, value_name = "COUNT")]
    n: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Also write every stopped path to paths.csv (large).
    #[arg(long)]
    dump_paths: bool,
    /// Do not print the summary.
    #[arg(long)]
    quiet: bool,
}

fn load_config(args: &SimulateArgs) -> Result<SimConfig, Error> {
    let mut config = match &args.config {
        Some(path) => io::read_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    config.validate().map_err(Error::from)?;
    Ok(config)
}

fn write_outputs(result: &PopulationResult, manifest: &RunManifest, out: &Path, dump_paths: bool) -> Result<(), Error> {
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    io::write_summary(result, manifest, &out.join(SUMMARY_FILE))?;
    io::write_curves(result, &out.join(CURVES_FILE))?;
    io::write_individuals(result, &out.join(INDIVIDUALS_FILE))?;
    if dump_paths {
        io::write_paths(result, &out.join(PATHS_FILE))?;
    }
    Ok(())
}

fn print_summary(result: &PopulationResult, runtime: f64, out: &Path) {
    let s = &result.summary;
    println!("individuals      {}", result.config.n);
    println!("seed             {}", result.config.seed);
    for (label, t) in [
        ("age at death", &s.life_expectancy),
        ("HRQoL at death", &s.hrqol_at_death),
        ("HALY", &s.haly),
    ] {
        println!("{label:<16} median {:.4}  IQR [{:.4}, {:.4}]", t.median, t.q25, t.q75);
    }
    println!("runtime          {runtime:.2} s");
    println!("output           {}", out.display());
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let config = load_config(&args)?;
    let start = Instant::now();
    let result = simulate_population(&config).map_err(Error::from)?;
    let runtime = start.elapsed().as_secs_f64();
    let manifest = RunManifest::new(config, runtime);
    write_outputs(&result, &manifest, &args.out, args.dump_paths)?;
    if !args.quiet {
        print_summary(&result, runtime, &args.out);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ Error::Config(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(err @ Error::Io { .. }) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_IO)
        }
    }
}
