//! `ambigrasp` command-line tool. Every command writes its artifacts into
//! `--out`; `run_config.json` is written first and the whole set appears
//! atomically or not at all.

mod args;
mod commands;
mod output;
mod schema;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Error classes mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Invalid input or configuration: exit 2.
    Usage(anyhow::Error),
    /// Anything that went wrong while running: exit 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SamplePj(a) => commands::sample_pj(a),
        Command::SampleVacuum(a) => commands::sample_vacuum(a),
        Command::LabelScene(a) => commands::label_scene(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Render(a) => commands::render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {}", report(&e));
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}", report(&e));
            ExitCode::from(1)
        }
    }
}

/// The error with its causes, skipping causes already spelled out by an
/// outer message.
fn report(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let s = cause.to_string();
        if !msg.contains(&s) {
            msg.push_str(": ");
            msg.push_str(&s);
        }
    }
    msg
}
