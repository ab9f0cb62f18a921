use std::process::ExitCode;

use clap::Parser;
use clap::error::ErrorKind;
use trp_cli::{run_experiment, write_records, Args, CliError};

fn run() -> Result<(), CliError> {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.render().to_string())),
    };
    let cfg = args.into_config()?;
    let records = run_experiment(&cfg)?;
    if cfg.output.is_none() {
        write_records(&records, std::io::stdout().lock())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
