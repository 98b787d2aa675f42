use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use toda_cli::{configure_threads, run, Invocation, RunConfig, RunMode};

/// Singular Toda and Liouville solver.
#[derive(Parser)]
#[command(name = "toda", version)]
struct Args {
    mode: RunMode,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra grid refinement levels.
    #[arg(long, default_value_t = 0)]
    refine: u32,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads()
        .and_then(|_| RunConfig::load(&args.config))
        .and_then(|config| {
            run(&Invocation {
                mode: args.mode,
                config,
                out: args.out,
                refine: args.refine,
            })
        });
    match result {
        Ok(outcome) => {
            // A closed pipe downstream is not a failure of the run.
            let _ = writeln!(std::io::stdout(), "{}", outcome.message);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
