use clap::Parser;

use herdsim::cli_io::Cli;

fn main() {
    if let Err(e) = Cli::parse().run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
