use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nclass_cli::error::CliError;
use nclass_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nclass: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (out, format) = run(cli)?;
    let text = out.render(format, cli.run.verify)?;
    match &cli.run.out {
        Some(path) => fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    if cli.run.verify {
        let failed = out.failed_checks();
        if !failed.is_empty() {
            let names: Vec<String> = failed
                .iter()
                .map(|c| format!("{} ({:.3e} > {:.3e})", c.name, c.value, c.bound))
                .collect();
            return Err(CliError::Verify(names.join(", ")));
        }
    }
    Ok(())
}
