#![forbid(unsafe_code)]

mod args;
mod commands;
mod exit;
mod render;
mod selftest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use exit::Failure;
use render::Sink;

fn main() -> ExitCode {
    ExitCode::from(run())
}

fn run() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => exit::USAGE,
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("steercert: cannot start worker pool: {e}");
            return exit::USAGE;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("steercert: {e}");
            e.code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    if cli.command.is_none() && !cli.self_test {
        return Err(Failure::Usage("a subcommand or --self-test is required (see --help)".into()));
    }
    if cli.command.is_some() && cli.self_test {
        return Err(Failure::Usage("--self-test does not take a subcommand".into()));
    }
    let mut sink = Sink::open(cli.format, cli.out.as_deref())?;
    let result = match &cli.command {
        None => selftest::run(cli.seed, &mut sink),
        Some(Command::Certify(a)) => commands::certify(a, &mut sink),
        Some(Command::Canonicalize(a)) => commands::canonicalize_cmd(a, &mut sink),
        Some(Command::LhsVerify(a)) => commands::lhs_verify(a, cli.seed, &mut sink),
        Some(Command::Threshold(a)) => commands::threshold(a, &mut sink),
        Some(Command::Search(a)) => commands::search(a, cli.seed, &mut sink),
        Some(Command::Bootstrap(a)) => commands::bootstrap(a, cli.seed, &mut sink),
    };
    sink.flush()?;
    result
}
