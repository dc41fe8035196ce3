use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tsize::cli::{parse_margins, run, Command, Format, Overrides, RunConfig};
use tsize::config::SampleSize;
use tsize::kernel::Rounding;

#[derive(Parser)]
#[command(name = "tsize", version, about = "Power and sample size for t-based tests")]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Target power for `size`.
    #[arg(long, global = true)]
    power: Option<f64>,
    /// Total size, or `N0,N1`.
    #[arg(long, global = true)]
    n: Option<String>,
    /// `LO,HI`; an infinite end gives a noninferiority margin.
    #[arg(long, global = true, allow_hyphen_values = true)]
    margins: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    reps: Option<u64>,
    #[arg(long, global = true, default_value = "text")]
    format: String,
    #[arg(long, global = true, default_value = "up")]
    round: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Every applicable power at the configured size.
    Power { design: PathBuf },
    /// The full size chain.
    Size { design: PathBuf },
    /// Monte Carlo rejection rate.
    Simulate { design: PathBuf },
    /// Deterministic columns of a built-in table as CSV.
    ReproduceTable { table: u8 },
}

fn config(a: Args) -> tsize::Result<RunConfig> {
    let command = match a.command {
        Cmd::Power { design } => Command::Power { design },
        Cmd::Size { design } => Command::Size { design },
        Cmd::Simulate { design } => Command::Simulate { design },
        Cmd::ReproduceTable { table } => Command::ReproduceTable { table },
    };
    let overrides = Overrides {
        alpha: a.alpha,
        power: a.power,
        margins: a.margins.as_deref().map(parse_margins).transpose()?,
        n: a.n.as_deref().map(str::parse::<SampleSize>).transpose()?,
        seed: a.seed,
        replicates: a.reps,
    };
    Ok(RunConfig { command, overrides, format: a.format.parse::<Format>()?, rounding: a.round.parse::<Rounding>()? })
}

fn main() -> ExitCode {
    match config(Args::parse()).and_then(|c| run(&c)) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tsize: {e}");
            ExitCode::FAILURE
        }
    }
}
