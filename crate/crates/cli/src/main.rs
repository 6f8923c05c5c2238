use std::process::ExitCode;

use clap::Parser;
use fcf_cli::cli::{run, Cli};

fn exit_code(code: &str) -> u8 {
    match code {
        "io" => 3,
        "parse" => 4,
        "validation" => 5,
        "budget" => 6,
        "compute" => 7,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(exit_code(e.code()))
        }
    }
}
