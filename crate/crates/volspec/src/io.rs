//! CSV formats for sampled fields and profiles, and byte-stable JSON.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use volspec_core::quadrature::make_grid;
use volspec_core::{Complex64, Grid, Profile, TriangularField};

use crate::error::{CliError, CliResult};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Config(format!("{}: {other:?}", path.display())),
    }
}

fn writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

/// Writes `x,t,re,im`, row-major over `j ≤ i`.
pub fn write_field(path: &Path, field: &TriangularField) -> CliResult<()> {
    let grid = field.grid();
    let mut w = writer(path)?;
    w.write_record(["x", "t", "re", "im"]).map_err(|e| csv_err(path, e))?;
    for i in 0..grid.len() {
        for (j, v) in field.row(i).iter().enumerate() {
            w.write_record([fmt_f64(grid.node(i)), fmt_f64(grid.node(j)), fmt_f64(v.re), fmt_f64(v.im)])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes `x,re,im`.
pub fn write_profile(path: &Path, profile: &Profile) -> CliResult<()> {
    let grid = profile.grid();
    let mut w = writer(path)?;
    w.write_record(["x", "re", "im"]).map_err(|e| csv_err(path, e))?;
    for (i, v) in profile.values().iter().enumerate() {
        w.write_record([fmt_f64(grid.node(i)), fmt_f64(v.re), fmt_f64(v.im)])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes a table with the given header; every cell is a float.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn read_rows(path: &Path, header: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let found: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(|s| s.trim().to_owned())
        .collect();
    if found != header {
        return Err(CliError::Config(format!(
            "{}: expected header {}, found {}",
            path.display(),
            header.join(","),
            found.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("{}: row {}: {e}", path.display(), line + 2)))?;
        if row.len() != header.len() {
            return Err(CliError::Config(format!("{}: row {} has {} cells", path.display(), line + 2, row.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn check_node(path: &Path, what: &str, got: f64, want: f64) -> CliResult<()> {
    if (got - want).abs() > 1e-9 * (1.0 + want.abs()) {
        return Err(CliError::Config(format!(
            "{}: {what} = {got} does not match grid node {want}",
            path.display()
        )));
    }
    Ok(())
}

/// Reads a field written by [`write_field`]; the grid is inferred from the
/// row count.
pub fn read_field(path: &Path) -> CliResult<TriangularField> {
    let rows = read_rows(path, &["x", "t", "re", "im"])?;
    // (N+1)(N+2)/2 rows
    let n = ((((8 * rows.len() + 1) as f64).sqrt() - 3.0) / 2.0).round() as usize;
    if (n + 1) * (n + 2) / 2 != rows.len() {
        return Err(CliError::Config(format!(
            "{}: {} rows do not fill a triangular grid",
            path.display(),
            rows.len()
        )));
    }
    let grid = make_grid(n)?;
    let mut values = Vec::with_capacity(rows.len());
    let mut k = 0;
    for i in 0..grid.len() {
        for j in 0..=i {
            let row = &rows[k];
            check_node(path, "x", row[0], grid.node(i))?;
            check_node(path, "t", row[1], grid.node(j))?;
            values.push(Complex64::new(row[2], row[3]));
            k += 1;
        }
    }
    Ok(TriangularField::from_packed(grid, values)?)
}

pub fn read_profile(path: &Path) -> CliResult<Profile> {
    let rows = read_rows(path, &["x", "re", "im"])?;
    if rows.len() < 3 {
        return Err(CliError::Config(format!("{}: a profile needs at least 3 rows", path.display())));
    }
    let grid: Grid = make_grid(rows.len() - 1)?;
    for (i, row) in rows.iter().enumerate() {
        check_node(path, "x", row[0], grid.node(i))?;
    }
    Ok(Profile::from_values(grid, rows.iter().map(|r| Complex64::new(r[1], r[2])).collect())?)
}

/// Pretty printing with every float written by [`fmt_f64`].
struct StableFormatter(PrettyFormatter<'static>);

impl Formatter for StableFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_stable_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, StableFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing into memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    fs::write(path, to_stable_json(value)).map_err(|e| CliError::io(path, e))
}
