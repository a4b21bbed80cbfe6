use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

use stable_extrap::experiments::Table;
use stable_extrap::SampleSet;

use crate::error::CliError;

/// A float written with 17 significant digits; non-finite values become
/// `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().map(|&x| Num(x)).collect()
}

/// Reads `x,y` rows; a first row that does not parse as numbers is taken
/// as a header.
pub fn read_samples(path: &Path) -> Result<SampleSet, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if rec.len() != 2 {
            return Err(CliError::Input(format!(
                "{}: line {}: expected 2 columns (x,y), found {}",
                path.display(),
                i + 1,
                rec.len()
            )));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::Input(format!(
                    "{}: line {}: cannot parse '{}','{}' as numbers",
                    path.display(),
                    i + 1,
                    &rec[0],
                    &rec[1]
                )))
            }
        }
    }
    SampleSet::from_xy(&xs, ys).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    match path {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            writeln!(f, "{text}").map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

pub fn write_table(dir: &Path, file: &str, table: &Table) -> Result<PathBuf, CliError> {
    let path = dir.join(file);
    let err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(err)?;
    w.write_record(&table.columns).map_err(err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| fmt17(v))).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
