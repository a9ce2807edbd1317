use std::process::ExitCode;

use clap::Parser;

use normsol_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli, std::env::vars()) {
        Ok(out) => {
            for line in &out.lines {
                println!("{line}");
            }
            match out.failure {
                Some(msg) => {
                    eprintln!("error: numerical failure: {msg}");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
