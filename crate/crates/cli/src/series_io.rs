//! Series files are plain CSV with the header `t,z` and one integer
//! observation per row.

use std::io::Write;
use std::path::Path;

use mesinar_core::model::IntSeries;

use crate::CliError;

pub fn read_series(path: &Path) -> Result<IntSeries, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("cannot open `{}`: {e}", path.display())))?;
    {
        let headers = rdr
            .headers()
            .map_err(|e| CliError::input(format!("`{}`: {e}", path.display())))?;
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "z" {
            return Err(CliError::input(format!(
                "`{}`: expected header `t,z`, found `{}`",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("`{}`: {e}", path.display())))?;
        let row = i + 2; // 1-based, after the header
        if record.len() != 2 {
            return Err(CliError::input(format!(
                "`{}` row {row}: expected 2 fields, found {}",
                path.display(),
                record.len()
            )));
        }
        let t: i64 = record[0].parse().map_err(|_| {
            CliError::input(format!(
                "`{}` row {row}: `t` is not an integer: `{}`",
                path.display(),
                &record[0]
            ))
        })?;
        let z: i64 = record[1].parse().map_err(|_| {
            CliError::input(format!(
                "`{}` row {row}: `z` is not an integer: `{}`",
                path.display(),
                &record[1]
            ))
        })?;
        // Bound the state range: estimation workspaces are sized by it.
        if z.unsigned_abs() > 1_000_000 {
            return Err(CliError::input(format!(
                "`{}` row {row}: `z` = {z} is outside the supported range (|z| <= 1e6)",
                path.display()
            )));
        }
        labels.push(t);
        values.push(z);
    }
    if values.is_empty() {
        return Err(CliError::input(format!(
            "`{}`: no observations",
            path.display()
        )));
    }
    Ok(IntSeries::with_labels(values, labels).expect("lengths match"))
}

pub fn write_series(series: &IntSeries, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "t,z")?;
    match series.labels() {
        Some(labels) => {
            for (t, z) in labels.iter().zip(series.values()) {
                writeln!(out, "{t},{z}")?;
            }
        }
        None => {
            for (t, z) in series.values().iter().enumerate() {
                writeln!(out, "{t},{z}")?;
            }
        }
    }
    Ok(())
}
