//! Reader for the SIDC monthly smoothed sunspot number file
//! (`SN_ms_tot_V2.0.csv` layout).
//!
//! Each line is `year;month;decimal-year;smoothed;stddev;observations;marker`.
//! Months whose 13-month window is incomplete carry the sentinel `-1` and
//! occur only at the head and tail of the file.

use std::fs;
use std::path::Path;

use super::DatasetError;

const SENTINEL: f64 = -1.0;

pub fn load_mstsn(path: &Path) -> Result<Vec<f64>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    parse_mstsn(&text)
}

pub fn parse_mstsn(text: &str) -> Result<Vec<f64>, DatasetError> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.split(';').nth(3).ok_or_else(|| DatasetError::Parse {
            line: idx + 1,
            message: "expected at least 4 ';'-separated fields".into(),
        })?;
        let v: f64 = field.trim().parse().map_err(|_| DatasetError::Parse {
            line: idx + 1,
            message: format!("smoothed value {:?} is not a number", field.trim()),
        })?;
        values.push((idx + 1, v));
    }
    let first = values.iter().position(|&(_, v)| v != SENTINEL);
    let last = values.iter().rposition(|&(_, v)| v != SENTINEL);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(DatasetError::TooShort { needed: 1, got: 0 });
    };
    let body = &values[first..=last];
    if let Some(&(line, _)) = body.iter().find(|&&(_, v)| v == SENTINEL) {
        return Err(DatasetError::Parse { line, message: "undefined value inside the series".into() });
    }
    Ok(body.iter().map(|&(_, v)| v).collect())
}
