mod args;
mod commands;
mod inputs;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Ctx;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let ctx = Ctx { out: &cli.out, format: cli.format, command: &cli.command };
    let result = match &cli.command {
        Command::Density(a) => commands::density(&ctx, a),
        Command::Select(a) => commands::select(&ctx, a),
        Command::Verify(a) => commands::verify(&ctx, a),
        Command::Random(a) => commands::random(&ctx, &a.action),
        Command::CheckCex(a) => commands::check_cex(&ctx, a),
        Command::TwoValuedSearch(a) => commands::two_valued(&ctx, a),
        Command::Reproduce(a) => commands::reproduce(&ctx, a),
        Command::ClaimAudit => commands::claim_audit(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
