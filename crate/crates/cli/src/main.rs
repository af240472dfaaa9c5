use std::io;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use rrms_cli::args::{Cli, Command};
use rrms_cli::{cmd_exact, cmd_gap, cmd_run, cmd_theory, exit_code, EXIT_OK, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            return ExitCode::from(code as u8);
        }
    };
    let mut stdout = io::stdout().lock();
    let result = cli
        .command
        .args()
        .resolve()
        .and_then(|cfg| match &cli.command {
            Command::Run(_) => cmd_run(&cfg, &mut stdout),
            Command::Exact(_) => cmd_exact(&cfg, &mut stdout),
            Command::Gap(_) => cmd_gap(&cfg, &mut stdout),
            Command::Theory(_) => cmd_theory(&cfg, &mut stdout),
        });
    ExitCode::from(exit_code(result, &mut io::stderr()) as u8)
}
