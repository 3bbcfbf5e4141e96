use clap::Parser;

use nhsense::cli::{run, RunConfig};

fn main() {
    let config = RunConfig::parse();
    if let Err(err) = run(&config) {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}
