use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use heston_cli::config::{resolve, Cli};
use heston_cli::{execute, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = resolve(&cli).and_then(|manifest| {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        execute(&manifest, &mut out, &mut std::io::stderr())?;
        out.flush().map_err(CliError::from)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
