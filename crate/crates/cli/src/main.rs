use std::process::ExitCode;

use arbc_cli::{execute, RunConfig};
use clap::Parser;

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    env_logger::Builder::new()
        .filter_level(cfg.log_level())
        .parse_env("ARBC_LOG")
        .init();
    match execute(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
