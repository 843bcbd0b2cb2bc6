use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use acx::accuracy::TiePolicy;
use acx::cli::{self, Command, RunManifest};
use acx::estimators::{Estimator, KappaGrid};

/// Predict K-class accuracy from k-class results.
#[derive(Parser)]
#[command(name = "acx", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run estimators on a score matrix or win-count CSV.
    Extrapolate(Common),
    /// Run a seeded simulation study.
    Simulate(Common),
    /// Plot and summarise replication CSVs.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Input CSV (repeat for `report`).
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Base replication config (JSON), `simulate` only.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Class count(s) seen in training; comma-separated for `simulate`.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long = "target-K")]
    target_k: Option<usize>,
    /// Comma-separated subset of un,exp,cons,hd.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    grid_size: Option<usize>,
    /// Decay-rate grid as lo:hi:n.
    #[arg(long)]
    kappa_grid: Option<String>,
    /// strict, half or random[:seed].
    #[arg(long)]
    tie_policy: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Also write per-replicate win counts (`simulate`).
    #[arg(long)]
    dump_wins: bool,
    #[arg(long, default_value = "acx-out")]
    out: PathBuf,
}

fn manifest(command: Command, a: Common) -> acx::Result<RunManifest> {
    let tie_policy = match a.tie_policy.as_deref() {
        None => None,
        Some("random") => Some(TiePolicy::Random(a.seed.unwrap_or(0))),
        Some(s) => Some(s.parse()?),
    };
    Ok(RunManifest {
        command,
        inputs: a.input,
        config: a.config,
        estimators: a.estimators.as_deref().map(Estimator::parse_list).transpose()?,
        k: a.k,
        target_k: a.target_k,
        grid_size: a.grid_size,
        kappa: a.kappa_grid.as_deref().map(str::parse::<KappaGrid>).transpose()?,
        tie_policy,
        seed: a.seed,
        replicates: a.replicates,
        dump_wins: a.dump_wins,
        out: a.out,
    })
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_INPUT as u8 } else { 0 });
        }
    };
    let (command, args) = match parsed.command {
        Cmd::Extrapolate(a) => (Command::Extrapolate, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    let result = manifest(command, args).and_then(|m| cli::run(&m));
    match &result {
        Ok(o) => {
            for line in &o.messages {
                println!("{line}");
            }
            for f in &o.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(cli::exit_code(&result) as u8)
}
