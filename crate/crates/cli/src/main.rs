use std::io::Write;

use clap::Parser;
use hyperball_cli::{configure_threads, run, Cli, RunConfig};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
    let outcome = run(&RunConfig::from_cli(cli));
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(outcome.code);
}
