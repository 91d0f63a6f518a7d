use clap::Parser;

use qnr_enclose::cli;

fn main() {
    let parsed = cli::Cli::parse();
    std::process::exit(cli::run_cli(parsed));
}
