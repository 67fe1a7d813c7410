use clap::Parser;
use subsetprob::cli::{run, Cli};

fn main() {
    let outcome = run(Cli::parse());
    if outcome.exit_code == 2 {
        eprint!("{}", outcome.report);
    } else {
        print!("{}", outcome.report);
    }
    std::process::exit(outcome.exit_code);
}
