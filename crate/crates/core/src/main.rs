use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use relerg::runner;

#[derive(Parser)]
#[command(name = "relerg", version, about = "Run weighted-ergodic and mixing experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write `<name>.csv` and `<name>.summary.json`.
    Run {
        config: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// List experiment kinds and their fields.
    List {
        #[arg(long)]
        json: bool,
    },
}

const FAILED_CHECK: u8 = 2;
const USAGE: u8 = 1;

fn run(config: PathBuf, out: Option<PathBuf>, quiet: bool) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&config).with_context(|| format!("cannot read {}", config.display()))?;
    let cfg = runner::parse_config(&text)?;
    let outcome = runner::run(&cfg)?;
    let written = runner::write_outputs(&cfg, &outcome, &out.unwrap_or_else(|| PathBuf::from(".")))?;
    if !quiet {
        println!(
            "{} {}: {} ({}, {})",
            cfg.kind,
            cfg.name,
            if outcome.pass { "pass" } else { "FAIL" },
            written.csv.display(),
            written.summary.display()
        );
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("usage error"));
            return ExitCode::from(USAGE);
        }
    };
    match cli.command {
        Command::List { json } => {
            if json {
                println!("{}", serde_json::to_string_pretty(&runner::list_json()).expect("static listing"));
            } else {
                print!("{}", runner::list_text());
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, quiet } => match run(config, out, quiet) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(FAILED_CHECK),
            Err(e) => {
                eprintln!("error: {:#}", e);
                ExitCode::from(USAGE)
            }
        },
    }
}
