//! Plot-ready tables from an existing report directory. Values are copied
//! as written, so rendering twice gives identical bytes.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, CliResult};

/// `(source table, output table, [(output column, source column)])` per suite.
fn layout(suite: &str) -> Option<Vec<(&'static str, &'static str, Vec<(&'static str, &'static str)>)>> {
    Some(match suite {
        "spectral" => vec![
            ("eigen", "tidy_eigen", vec![("kappa", "kappa"), ("n", "n"), ("residual", "residual")]),
            ("operator", "tidy_operator", vec![("kappa", "kappa"), ("decomposition", "decomposition"), ("n", "n"), ("residual", "residual")]),
            ("integral", "tidy_integral", vec![("kappa", "kappa"), ("decomposition", "decomposition"), ("n", "n"), ("residual", "residual")]),
        ],
        "sharp" => vec![(
            "constants",
            "tidy_sharp",
            vec![("kappa", "kappa"), ("forms", "forms"), ("n", "n"), ("lambda_max", "lambda_max"), ("lambda_n", "lambda_n")],
        )],
        "kernels" => vec![(
            "profiles",
            "tidy_kernels",
            vec![
                ("kappa", "kappa"),
                ("estimate", "estimate"),
                ("n", "n"),
                ("d_triangle", "d_triangle"),
                ("abs_L", "lhs"),
                ("envelope", "envelope"),
                ("ratio", "ratio"),
            ],
        )],
        "lp" => vec![
            (
                "ratios",
                "tidy_lp",
                vec![("n", "n"), ("r", "r"), ("p", "p"), ("factor", "factor"), ("weight", "weight"), ("ratio", "ratio")],
            ),
            ("mz", "tidy_mz", vec![("n", "n"), ("p", "p"), ("weight", "weight"), ("constant", "constant")]),
            ("shrink", "tidy_shrink", vec![("n", "n"), ("p", "p"), ("weight", "weight"), ("ratio", "ratio")]),
            ("maximal", "tidy_maximal", vec![("n", "n"), ("p", "p"), ("weight", "weight"), ("ratio", "ratio")]),
        ],
        _ => return None,
    })
}

/// Writes `tidy_*.csv` next to the detail tables of the report in `dir`;
/// returns the written file names.
pub fn render(dir: &Path) -> CliResult<Vec<String>> {
    let summary_path = dir.join("summary.json");
    let text = fs::read_to_string(&summary_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", summary_path.display())))?;
    let summary: Value = serde_json::from_str(&text)?;
    let suite = summary["suite"].as_str().ok_or_else(|| CliError::Config("summary.json lacks `suite`".into()))?;
    let layout = layout(suite).ok_or_else(|| CliError::Config(format!("nothing to render for suite `{suite}`")))?;
    let mut written = Vec::new();
    for (source, target, columns) in layout {
        let path = dir.join(format!("detail_{source}.csv"));
        if !path.exists() {
            continue;
        }
        let mut reader = csv::Reader::from_path(&path)?;
        let header = reader.headers()?.clone();
        let index: Vec<usize> = columns
            .iter()
            .map(|(_, src)| {
                header
                    .iter()
                    .position(|h| h == *src)
                    .ok_or_else(|| CliError::Config(format!("{} lacks column `{src}`", path.display())))
            })
            .collect::<CliResult<_>>()?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(columns.iter().map(|(name, _)| *name))?;
        for record in reader.records() {
            let record = record?;
            w.write_record(index.iter().map(|i| &record[*i]))?;
        }
        let name = format!("{target}.csv");
        fs::write(dir.join(&name), w.into_inner().map_err(|e| e.into_error())?)?;
        written.push(name);
    }
    Ok(written)
}
