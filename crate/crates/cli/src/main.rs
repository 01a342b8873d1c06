mod args;
mod commands;
mod output;

use clap::Parser;

use args::{Cli, Command};
use output::Failure;

const THREADS_VAR: &str = "CRAN_RATES_THREADS";

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("{THREADS_VAR}={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Region(a) => commands::region(a),
        Command::Wyner(a) => commands::wyner(a),
        Command::Example1(a) => commands::example1(a),
        Command::Verify(a) => commands::verify(a),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { output::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(f) = run(&cli) {
        eprintln!("error: {f}");
        std::process::exit(f.code);
    }
}
