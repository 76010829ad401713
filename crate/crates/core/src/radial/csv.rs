use std::io::{Read, Write};

use super::{RadialGrid, RadialProfile};
use crate::error::{Error, Result};

/// Format a float with 17 significant digits.
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a header and rows of floats as CSV.
pub(crate) fn write_table<W: Write>(out: W, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_io)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| fmt17(c[i]))).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV table and return the requested columns in order.
///
/// Extra columns are ignored; a missing column is a schema error.
pub(crate) fn read_table<R: Read>(input: R, required: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(&e, 1))?
        .clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::Schema("missing header row".into()));
    }
    let idx: Vec<usize> = required
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); required.len()];
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_error(&e, line))?;
        for (col, &j) in cols.iter_mut().zip(&idx) {
            let field = rec.get(j).unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{field}` is not a number"),
            })?;
            col.push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok(cols)
}

fn parse_error(e: &::csv::Error, fallback: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn csv_io(e: ::csv::Error) -> Error {
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Write a profile as `r,value` rows.
pub fn write_profile_csv<W: Write>(p: &RadialProfile, out: W) -> Result<()> {
    write_table(out, &["r", "value"], &[p.nodes(), p.values()])
}

/// Read an `r,value` CSV into a profile on the grid given by its radii.
pub fn read_profile_csv<R: Read>(input: R) -> Result<RadialProfile> {
    let mut cols = read_table(input, &["r", "value"])?;
    let values = cols.pop().expect("two columns");
    let nodes = cols.pop().expect("two columns");
    let grid = RadialGrid::from_nodes(nodes)?;
    RadialProfile::new(grid, values)
}
