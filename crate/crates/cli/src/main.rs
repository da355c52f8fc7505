use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use madelung_cli::bundled::SCENARIOS;
use madelung_cli::runner::{load, run, run_suite, RunOptions};
use madelung_cli::scenario::parse_scenario;
use madelung_core::Scheme;

#[derive(Parser)]
#[command(name = "madelung", version, about = "Run wave and hydrodynamic verification scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Split,
    Cn,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Split => Scheme::Split,
            SchemeArg::Cn => Scheme::CrankNicolson,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Directory for reports and series.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Propagator override.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Reject unknown keys instead of warning.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    strict: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions { scheme: self.scheme.map(Scheme::from), out_dir: self.out.clone() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every `*.scn` file in a directory.
    Suite {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// List the bundled scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let passed = match cli.command {
        Command::Run { file, common } => {
            let outcome = load(&file, common.strict).and_then(|(scenario, warnings)| {
                for w in warnings {
                    eprintln!("warning: {}: {w}", file.display());
                }
                run(&scenario, &common.options())
            });
            match outcome {
                Ok(o) => {
                    print!("{}", o.report.render());
                    o.report.passed()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
        }
        Command::Suite { dir, common } => match run_suite(&dir, common.strict, &common.options()) {
            Ok(o) => {
                print!("{}", o.render());
                o.passed()
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        Command::ListScenarios => {
            for (name, text) in SCENARIOS {
                let description = parse_scenario(text, true).map(|(s, _)| s.description).unwrap_or_default();
                println!("{name}\t{description}");
            }
            true
        }
    };
    eprintln!("wall clock {:.3} s", started.elapsed().as_secs_f64());
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
