use clap::Parser;
use multimode_hom::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
