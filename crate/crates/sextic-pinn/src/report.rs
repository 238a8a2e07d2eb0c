//! CSV exports. Tables print 8 decimals; histories print 17 significant
//! digits. UTF-8, LF line endings, `.` as decimal separator.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use sextic_pinn_core::report::{ErrorTable, TableRow};
use sextic_pinn_core::TrainRecord;

use crate::error::{Error, Result};

pub const TABLE_HEADER: [&str; 4] = ["x", "analytical", "numerical", "abs_error"];
pub const HISTORY_HEADER: [&str; 4] = ["epoch", "interior_loss", "boundary_loss", "total_loss"];

fn writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(inner)
}

/// Fixed 8 decimals; values that round to zero print without a sign.
fn fixed8(v: f64) -> String {
    let s = format!("{v:.8}");
    if s == "-0.00000000" {
        s[1..].to_owned()
    } else {
        s
    }
}

pub fn write_table<W: Write>(table: &ErrorTable, out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(TABLE_HEADER)?;
    for r in &table.rows {
        w.write_record([fixed8(r.x), fixed8(r.analytical), fixed8(r.numerical), fixed8(r.abs_error)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history<W: Write>(history: &[TrainRecord], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(HISTORY_HEADER)?;
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            format!("{:.16e}", r.interior),
            format!("{:.16e}", r.boundary),
            format!("{:.16e}", r.total),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

pub fn export_table(table: &ErrorTable, path: &Path) -> Result<()> {
    write_table(table, create(path)?).map_err(|source| Error::Csv { path: path.into(), source })
}

pub fn export_history(history: &[TrainRecord], path: &Path) -> Result<()> {
    write_history(history, create(path)?).map_err(|source| Error::Csv { path: path.into(), source })
}

fn parse_field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, i: usize) -> Result<T> {
    record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Csv {
        path: path.into(),
        source: csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("bad field {i} in record {:?}", record),
        )),
    })
}

fn read_records(path: &Path, header: [&str; 4]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|source| Error::Csv { path: path.into(), source })?;
    let found = rdr.headers().map_err(|source| Error::Csv { path: path.into(), source })?;
    if found.iter().ne(header) {
        return Err(Error::Csv {
            path: path.into(),
            source: csv::Error::from(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("unexpected header {found:?}"),
            )),
        });
    }
    rdr.records().collect::<csv::Result<Vec<_>>>().map_err(|source| Error::Csv { path: path.into(), source })
}

pub fn import_table(path: &Path) -> Result<ErrorTable> {
    let rows = read_records(path, TABLE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(TableRow {
                x: parse_field(path, rec, 0)?,
                analytical: parse_field(path, rec, 1)?,
                numerical: parse_field(path, rec, 2)?,
                abs_error: parse_field(path, rec, 3)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorTable::from_rows(rows))
}

pub fn import_history(path: &Path) -> Result<Vec<TrainRecord>> {
    read_records(path, HISTORY_HEADER)?
        .iter()
        .map(|rec| {
            Ok(TrainRecord {
                epoch: parse_field(path, rec, 0)?,
                interior: parse_field(path, rec, 1)?,
                boundary: parse_field(path, rec, 2)?,
                total: parse_field(path, rec, 3)?,
            })
        })
        .collect()
}
