use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cnoma_cli::config::{Config, ConfigError, RawConfig};
use cnoma_cli::{bench_cmd, solve_network_cmd, solve_pair, sweep, verify_cmd, CliError};

#[derive(Parser)]
#[command(name = "cnoma", version, about = "Cooperative NOMA pairing and power control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key=value` override, applied after the file; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; all cores if absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Optimal power split of the pair given by the gain_* keys.
    SolvePair,
    /// Pairing and power control of one sampled network.
    SolveNetwork,
    /// Monte-Carlo sweep over the swept key.
    Sweep,
    /// Closed form against the brute-force grid on random instances.
    Verify,
    /// Phase timings of network solves.
    Bench,
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                ConfigError::Missing(format!("cannot read config {}: {e}", path.display()))
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    for s in &cli.set {
        raw.set(s)?;
    }
    if let Some(seed) = cli.seed {
        raw.set(&format!("seed = {seed}"))?;
    }
    Ok(Config::from_raw(&raw)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    match cli.command {
        Command::SolvePair => solve_pair(&cfg, &mut out)?,
        Command::SolveNetwork => {
            let total = solve_network_cmd(&cfg, &mut out)?;
            eprintln!("total sum rate: {total}");
        }
        Command::Sweep => sweep(&cfg, &mut out)?,
        Command::Verify => verify_cmd(&cfg, &mut out)?,
        Command::Bench => {
            let slope = bench_cmd(&cfg, &mut out)?;
            eprintln!("matching time exponent: {slope:.3}");
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
