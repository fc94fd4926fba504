use std::process::ExitCode;

use clap::Parser;
use radcone_cli::{render_text, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("radcone: {e}");
            return ExitCode::from(e.exit().code() as u8);
        }
    };
    let text = render_text(&report);
    match &cli.command.flags().out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("radcone: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit().code() as u8)
}
