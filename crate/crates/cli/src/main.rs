use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seqalloc_cli::commands;
use seqalloc_cli::config::Overrides;
use seqalloc_cli::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "seqalloc",
    version,
    about = "Budget allocation under correlated demand"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the static allocation problem for one instance.
    Solve(Common),
    /// Compare all policies over sampled demand paths.
    Simulate(Common),
    /// Generate an instance file.
    GenScenario(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Worker threads for simulate.
    #[arg(long, env = "SEQALLOC_THREADS")]
    threads: Option<usize>,
    /// Dual bisection tolerance.
    #[arg(long)]
    eps: Option<f64>,
    /// Round allocations to whole units.
    #[arg(long)]
    integer: bool,
    /// Use a fixed instance file instead of generating one.
    #[arg(long)]
    instance: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            trials: self.trials,
            horizon: self.horizon,
            eps: self.eps,
            integer: self.integer,
            instance: self.instance.clone(),
        }
    }
}

fn run(cli: Cli) -> CliResult<PathBuf> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = commands::resolve_config(c.config.as_deref(), &c.overrides())?;
            commands::cmd_solve(&cfg)
        }
        Command::Simulate(c) => {
            let cfg = commands::resolve_config(c.config.as_deref(), &c.overrides())?;
            commands::cmd_simulate(&cfg, c.threads)
        }
        Command::GenScenario(c) => {
            let cfg = commands::resolve_config(c.config.as_deref(), &c.overrides())?;
            commands::cmd_gen_scenario(&cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
