mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use commands::{Command, Failure};
use config::ProblemConfig;

/// Continuation of w' = F(w, z) along arcs, endpoint-limit verdicts on the
/// Riemann sphere, fibers of the singular set and monodromy of radicals.
#[derive(Parser, Debug)]
#[command(name = "painleve", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Problem configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Also write fiber loci of the singular set along the arc.
    #[arg(long)]
    emit_plot_data: bool,
    /// Series order (overrides the config).
    #[arg(long, value_name = "N")]
    order: Option<usize>,
    /// Root-finder seed (overrides the config).
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Print the normalized configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Continue along the arc and write the trace.
    Solve(Common),
    /// Continue toward the arc endpoint and decide the limit.
    Limit(Common),
    /// Roots of P(., nu) for `fiber.poly` (or each singular component).
    Fiber(Common),
    /// Check whether lines z = nu lie in the singular set.
    CheckLine(Common),
    /// Sheet multipliers of each radical around `monodromy.loop`.
    Monodromy(Common),
    /// Bounds and radii at the initial point.
    Bounds(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Limit(c) => (Command::Limit, c),
        Cmd::Fiber(c) => (Command::Fiber, c),
        Cmd::CheckLine(c) => (Command::CheckLine, c),
        Cmd::Monodromy(c) => (Command::Monodromy, c),
        Cmd::Bounds(c) => (Command::Bounds, c),
    };
    match execute(cmd, &common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn execute(cmd: Command, common: &Common) -> Result<(), Failure> {
    let mut cfg = ProblemConfig::load(&common.config)?;
    if let Some(order) = common.order {
        cfg.set_order(order)?;
    }
    if let Some(seed) = common.seed {
        cfg.set_seed(seed);
    }
    if common.dump_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let start = Instant::now();
    let out = commands::run(cmd, &cfg, &common.out, common.emit_plot_data)?;
    for line in &out.lines {
        println!("{line}");
    }
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match out.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
