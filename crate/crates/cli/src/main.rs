mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Command, RunConfig};

fn init_logging(verbose: u8) {
    let env = env_logger::Env::new().filter_or("POSEWIRE_LOG", "error");
    let mut builder = env_logger::Builder::from_env(env);
    match verbose {
        0 => {}
        1 => {
            builder.filter_level(log::LevelFilter::Info);
        }
        _ => {
            builder.filter_level(log::LevelFilter::Debug);
        }
    }
    builder.format_timestamp_millis().init();
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) if e.kind() == ErrorKind::InvalidSubcommand => {
            let names: Vec<_> = RunConfig::command()
                .get_subcommands()
                .map(|c| c.get_name().to_owned())
                .filter(|n| n != "help")
                .collect();
            let _ = e.print();
            eprintln!("valid subcommands: {}", names.join(", "));
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    init_logging(cfg.verbose);
    let result = match &cfg.command {
        Command::Decode(a) => commands::run_decode(a),
        Command::Stream(a) => commands::run_stream(a),
        Command::Tail(a) => commands::run_tail(a),
        Command::Bench(a) => commands::run_bench_cmd(a),
        Command::Synth(a) => commands::run_synth(a),
        Command::Blur(a) => commands::run_blur(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("posewire: {e:#}");
            ExitCode::FAILURE
        }
    }
}
