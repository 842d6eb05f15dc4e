use clap::Parser;
use env_logger::Env;
use levycouple_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("LEVYCOUPLE_LOG", "warn")).init();
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
