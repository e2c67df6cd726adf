//! Instance files.
//!
//! JSON:
//!
//! ```json
//! {"m": 2, "n": 2, "s": 1, "A": [[1, 0], [0, 1]], "b": [1, 1],
//!  "tolerances": {"zero_tol": 1e-9}}
//! ```
//!
//! CSV: a first line holding the values `m,n,s`, then `m` rows of `A`, then
//! one row `b`.
//! Lines starting with `#` are ignored.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};
use crate::linalg::DenseMatrix;
use crate::model::{Instance, ToleranceConfig};

#[derive(Debug, Default, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stat_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dedupe_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: ToleranceConfig) -> ToleranceConfig {
        ToleranceConfig {
            zero_tol: self.zero_tol.unwrap_or(base.zero_tol),
            stat_tol: self.stat_tol.unwrap_or(base.stat_tol),
            rank_tol: self.rank_tol.or(base.rank_tol),
            dedupe_tol: self.dedupe_tol.unwrap_or(base.dedupe_tol),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    n: usize,
    s: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerances: Option<ToleranceOverrides>,
}

fn check_declared(what: &'static str, declared: usize, actual: usize) -> Result<()> {
    if declared != actual {
        return Err(ValidationError::DeclaredShape {
            what,
            declared,
            actual,
        }
        .into());
    }
    Ok(())
}

fn build(
    m: usize,
    n: usize,
    s: usize,
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
    tol: Option<ToleranceOverrides>,
) -> Result<Instance> {
    check_declared("m", m, rows.len())?;
    for row in &rows {
        check_declared("n", n, row.len())?;
    }
    check_declared("m", m, b.len())?;
    let a = if m == 0 {
        DenseMatrix::zeros(0, n)
    } else {
        DenseMatrix::from_rows(&rows)?
    };
    let tol = tol.unwrap_or_default().apply(ToleranceConfig::default());
    Instance::with_tolerances(a, b, s, tol)
}

/// Parses and validates a JSON instance.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    build(file.m, file.n, file.s, file.a, file.b, file.tolerances)
}

/// Parses and validates a CSV instance.
pub fn instance_from_csv(text: &str) -> Result<Instance> {
    // one record per physical line, so reported line numbers count comments and blanks
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(trimmed.as_bytes());
        let rec = reader
            .records()
            .next()
            .transpose()
            .map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?
            .unwrap_or_default();
        records.push((line, rec));
    }
    let mut it = records.into_iter();
    let (hline, header) = it.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file, expected header m,n,s".into(),
    })?;
    if header.len() != 3 {
        return Err(Error::Parse {
            line: hline,
            message: format!("header must be m,n,s but has {} fields", header.len()),
        });
    }
    let mut dims = [0usize; 3];
    for (d, field) in dims.iter_mut().zip(header.iter()) {
        *d = field.parse().map_err(|_| Error::Parse {
            line: hline,
            message: format!("expected a non-negative integer, found {field:?}"),
        })?;
    }
    let [m, n, s] = dims;

    let parse_row = |line: usize, rec: &csv::StringRecord, expected: usize| -> Result<Vec<f64>> {
        if rec.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} values, found {}", rec.len()),
            });
        }
        rec.iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("not a number: {f:?}"),
                })
            })
            .collect()
    };

    let mut rows = Vec::with_capacity(m);
    for k in 0..m {
        let (line, rec) = it.next().ok_or(Error::Parse {
            line: hline + k + 1,
            message: format!("missing row {} of A", k + 1),
        })?;
        rows.push(parse_row(line, &rec, n)?);
    }
    let (bline, brec) = it.next().ok_or(Error::Parse {
        line: hline + m + 1,
        message: "missing row b".into(),
    })?;
    let b = parse_row(bline, &brec, m)?;
    if let Some((line, _)) = it.next() {
        return Err(Error::Parse {
            line,
            message: "unexpected trailing row".into(),
        });
    }
    build(m, n, s, rows, b, None)
}

/// Reads an instance file; `.csv` files are parsed as CSV, everything else as JSON.
pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        instance_from_csv(&text)
    } else {
        instance_from_json(&text)
    }
}

/// JSON form of an instance, tolerances included only where they differ from the defaults.
pub fn instance_to_json(inst: &Instance) -> serde_json::Value {
    let d = ToleranceConfig::default();
    let t = inst.tol();
    let over = ToleranceOverrides {
        zero_tol: (t.zero_tol != d.zero_tol).then_some(t.zero_tol),
        stat_tol: (t.stat_tol != d.stat_tol).then_some(t.stat_tol),
        rank_tol: t.rank_tol,
        dedupe_tol: (t.dedupe_tol != d.dedupe_tol).then_some(t.dedupe_tol),
    };
    let any = over.zero_tol.is_some()
        || over.stat_tol.is_some()
        || over.rank_tol.is_some()
        || over.dedupe_tol.is_some();
    let file = InstanceFile {
        m: inst.m(),
        n: inst.n(),
        s: inst.s(),
        a: (0..inst.m()).map(|i| inst.a().row(i).to_vec()).collect(),
        b: inst.b().to_vec(),
        tolerances: any.then_some(over),
    };
    serde_json::to_value(file).expect("instance is serializable")
}
