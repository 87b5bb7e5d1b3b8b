use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use momentchain_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            // a closed pipe downstream is not an error for us
            let mut stdout = std::io::stdout().lock();
            if let Some(report) = outcome.report {
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            }
            for path in outcome.written {
                let _ = writeln!(stdout, "{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
