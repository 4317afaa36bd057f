use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use unitheta_cli::cli::Cli;
use unitheta_cli::{commands, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_PASS};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.output.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_ERROR as u8);
            }
            ExitCode::from(if out.passed { EXIT_PASS } else { EXIT_CHECK_FAILED } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
