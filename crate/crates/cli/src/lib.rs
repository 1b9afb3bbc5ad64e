//! Driver for the verification suites: flag parsing, suite execution and
//! report files.

pub mod config;
pub mod error;
pub mod render;
pub mod report;
pub mod suites;

pub use config::{Cli, RunConfig, SuiteId};
pub use error::{CliError, CliResult};
pub use report::SuiteReport;

/// Outcome of one invocation.
#[derive(Debug)]
pub enum Outcome {
    Report(SuiteReport),
    Rendered(Vec<String>),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        match self {
            Outcome::Report(r) => r.passed(),
            Outcome::Rendered(_) => true,
        }
    }
}

/// Validates the flags, runs the suite and writes its report.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let config = RunConfig::from_cli(cli)?;
    if config.suite == SuiteId::Render {
        return Ok(Outcome::Rendered(render::render(&config.out)?));
    }
    let report = suites::run(&config)?;
    report.write(&config.out)?;
    Ok(Outcome::Report(report))
}
