//! CSV conventions shared by every emitted table.
//!
//! Each file starts with a `#` version line followed by a header row.
//! Floating-point values are written with 17 significant digits so that
//! re-reading them reproduces the exact `f64`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::Result;

pub const CSV_VERSION: &str = "# junction-csv v1";

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new<S: AsRef<str>>(mut writer: W, header: &[S]) -> Result<Self> {
        writeln!(writer, "{CSV_VERSION}")?;
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(header.iter().map(|s| s.as_ref()))?;
        Ok(CsvSink { inner })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        self.inner.write_record(fields.iter().map(|s| s.as_ref()))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn create_csv<S: AsRef<str>>(path: &Path, header: &[S]) -> Result<CsvSink<BufWriter<File>>> {
    let file = File::create(path)?;
    CsvSink::new(BufWriter::new(file), header)
}

/// Reader that skips the version line.
pub fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(reader)
}
