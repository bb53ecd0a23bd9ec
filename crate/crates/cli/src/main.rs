use clap::Parser;

use bergspec_cli::{configure_threads, run, Cli};

fn main() {
    if let Err(f) = configure_threads(std::env::var_os("BERGSPEC_THREADS")) {
        eprintln!("bergspec: {f}");
        std::process::exit(f.exit_code());
    }
    let cli = Cli::parse();
    std::process::exit(run(cli));
}
