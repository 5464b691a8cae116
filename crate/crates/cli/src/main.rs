mod args;
mod commands;
mod error;
mod svg;

use clap::Parser;

use args::{Cli, RunConfig};

fn main() {
    let cli = Cli::parse();
    let result = RunConfig::resolve(&cli).and_then(|cfg| {
        if let Some(jobs) = cfg.jobs {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .map_err(|e| error::CliError::Config(format!("--jobs: {e}")))?;
        }
        commands::run(&cfg)
    });
    if let Err(e) = result {
        eprintln!("animfa: {e}");
        std::process::exit(e.exit_code());
    }
}
