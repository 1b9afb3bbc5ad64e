use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use simplex_bernstein_cli::{execute, Cli, Outcome};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            match &outcome {
                Outcome::Report(r) => {
                    for c in &r.checks {
                        let status = if c.pass { "pass" } else { "FAIL" };
                        println!("{status} {} = {:.3e} (tolerance {:.3e})", c.name, c.measured, c.tolerance);
                    }
                }
                Outcome::Rendered(files) => files.iter().for_each(|f| println!("wrote {f}")),
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                eprintln!("{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
