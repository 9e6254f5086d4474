//! CSV ingestion for curves, surfaces and torus maps, and trace output.

use std::path::Path;

use tml_core::geometry::{vec4, LoopR4, SampledLoop};
use tml_core::isotopy_lab::TorusMapSamples;
use tml_core::linking::{SampledSurface, TorusSurface};

use crate::error::CliError;

pub const CURVE_HEADER: [&str; 5] = ["t", "x1", "y1", "x2", "y2"];
pub const SURFACE_HEADER: [&str; 6] = ["t1", "t2", "x1", "y1", "x2", "y2"];
pub const MAP_HEADER: [&str; 4] = ["theta", "t", "f", "g"];

/// Rows of floats from a CSV file whose header must equal `header`.
pub fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(CliError::Input(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            header.join(","),
            found.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    CliError::Input(format!(
                        "{}: row {}: `{field}` is not a number",
                        path.display(),
                        line + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

pub fn read_curve(path: &Path) -> Result<LoopR4, CliError> {
    let rows = read_table(path, &CURVE_HEADER)?;
    let timed: Vec<_> = rows.iter().map(|r| (r[0], vec4(r[1], r[2], r[3], r[4]))).collect();
    Ok(LoopR4::Sampled(SampledLoop::from_timed(&timed)?))
}

pub fn read_surface(path: &Path) -> Result<TorusSurface, CliError> {
    let rows = read_table(path, &SURFACE_HEADER)?;
    let timed: Vec<_> = rows
        .iter()
        .map(|r| (r[0], r[1], vec4(r[2], r[3], r[4], r[5])))
        .collect();
    Ok(TorusSurface::Sampled(SampledSurface::from_timed(&timed)?))
}

pub fn read_map(path: &Path) -> Result<TorusMapSamples, CliError> {
    let rows = read_table(path, &MAP_HEADER)?;
    let tuples: Vec<_> = rows.iter().map(|r| (r[0], r[1], r[2], r[3])).collect();
    Ok(TorusMapSamples::from_rows(&tuples)?)
}

/// Write a two-column trace.
pub fn write_trace(path: &Path, header: [&str; 2], xs: &[f64], ys: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    w.write_record(header)?;
    for (x, y) in xs.iter().zip(ys) {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
