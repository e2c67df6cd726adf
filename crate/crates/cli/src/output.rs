use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sparsemorse_core::{LandscapeReport, SweepReport};

use crate::OutputArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sparsemorse_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn write_text(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

#[derive(Serialize)]
struct Stamped<'a, T> {
    generated_at: u64,
    #[serde(flatten)]
    report: &'a T,
}

/// Pretty JSON, newline-terminated.
pub fn emit_json<T: Serialize>(report: &T, args: &OutputArgs) -> CliResult {
    let text = if args.timestamp {
        let generated_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        serde_json::to_string_pretty(&Stamped {
            generated_at,
            report,
        })
    } else {
        serde_json::to_string_pretty(report)
    };
    let mut text = text.map_err(|e| CliError::Serialize(e.to_string()))?;
    text.push('\n');
    write_text(&text, args.out.as_deref())
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(header).map_err(ser)?;
    for row in rows {
        w.write_record(&row).map_err(ser)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

fn join(x: &[f64]) -> String {
    x.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// One row per stationary point; `x` entries are `;`-separated.
pub fn emit_points_csv(report: &LandscapeReport, args: &OutputArgs) -> CliResult {
    let rows = report
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                i.to_string(),
                p.kind.as_str().to_string(),
                p.value.to_string(),
                p.support().to_string(),
                join(p.x()),
                p.cert.nd1_holds.to_string(),
                p.cert.nd2_holds.to_string(),
                p.stationarity_residual.to_string(),
            ]
        })
        .collect();
    let text = csv_text(
        &[
            "index",
            "kind",
            "value",
            "support",
            "x",
            "nd1",
            "nd2",
            "stationarity_residual",
        ],
        rows,
    )?;
    write_text(&text, args.out.as_deref())
}

/// One row per level interval.
pub fn emit_intervals_csv(report: &SweepReport, args: &OutputArgs) -> CliResult {
    let rows = report
        .intervals
        .iter()
        .map(|iv| {
            vec![
                iv.interval[0].to_string(),
                iv.interval[1].to_string(),
                iv.q.to_string(),
            ]
        })
        .collect();
    let text = csv_text(&["lower", "upper", "q"], rows)?;
    write_text(&text, args.out.as_deref())
}
