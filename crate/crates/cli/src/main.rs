use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pelab_cli::{run_and_write, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "pelab",
    about = "Numerical checks for hydrostatic Euler energy conservation"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Scenario name; see `pelab list`.
    scenario: Option<String>,
    /// key = value file applied over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single override, `key=value`; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory; overrides `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the report on stdout.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scenario names.
    List,
    /// Print the default configuration of a scenario.
    Defaults { scenario: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Some(Command::List) => {
            for s in pelab_cli::config::ALL {
                println!("{}", s.name());
            }
            return ExitCode::SUCCESS;
        }
        Some(Command::Defaults { scenario }) => {
            return match ScenarioConfig::load(Some(&scenario), None, &[]) {
                Ok(cfg) => {
                    print!("{}", cfg.to_text());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
        None => {}
    }
    let mut overrides = cli.set.clone();
    if let Some(out) = &cli.out {
        overrides.push(format!("out={}", out.display()));
    }
    let cfg = match ScenarioConfig::load(cli.scenario.as_deref(), cli.config.as_deref(), &overrides)
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("usage: pelab <scenario> [--config FILE] [--set key=value]... [--out DIR]");
            return ExitCode::from(2);
        }
    };
    match run_and_write(&cfg) {
        Ok((out, code)) => {
            if !cli.quiet {
                print!("{}", out.report_text(&cfg));
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
