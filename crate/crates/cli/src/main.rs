use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ssrbell_cli::args::configure_threads;
use ssrbell_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli));
    match result {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not a computation failure
            let _ = out.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
