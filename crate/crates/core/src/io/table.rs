use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// In-memory CSV builder; all floats use shortest round-trip formatting.
pub(crate) struct CsvOut {
    w: csv::Writer<Vec<u8>>,
}

impl CsvOut {
    pub fn new(header: &[&str]) -> Self {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        w.write_record(header).expect("in-memory write");
        CsvOut { w }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> Vec<u8> {
        self.w.into_inner().expect("in-memory flush")
    }

    pub fn write_to(self, path: &Path) -> Result<()> {
        write_atomic(path, &self.finish())
    }
}

/// A parsed data row with its 1-based file line.
pub(crate) struct Row {
    pub line: u64,
    pub record: csv::StringRecord,
}

pub(crate) struct CsvIn<'a> {
    pub path: &'a Path,
    pub header: Vec<String>,
    pub rows: Vec<Row>,
}

impl<'a> CsvIn<'a> {
    /// Reads a whole table; an absent header or zero data rows is an
    /// empty-input error.
    pub fn read(path: &'a Path) -> Result<Self> {
        let text = read_text(path)?;
        if text.trim().is_empty() {
            return Err(Error::EmptyInput(path.to_path_buf()));
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| parse_err(path, 1, e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = vec![];
        for rec in rdr.records() {
            let record = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(path, line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push(Row { line, record });
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput(path.to_path_buf()));
        }
        Ok(CsvIn { path, header, rows })
    }

    pub fn expect_header(&self, expected: &[&str]) -> Result<()> {
        if self.header.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(parse_err(
                self.path,
                1,
                format!("header `{}`, expected `{}`", self.header.join(","), expected.join(",")),
            ));
        }
        Ok(())
    }

    pub fn field<T: FromStr>(&self, row: &Row, index: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let name = self.header.get(index).map_or("?", String::as_str);
        let raw = row.record.get(index).ok_or_else(|| parse_err(self.path, row.line, format!("missing `{name}`")))?;
        raw.parse()
            .map_err(|e| parse_err(self.path, row.line, format!("`{name}` = `{raw}`: {e}")))
    }

    pub fn error(&self, row: &Row, msg: impl Into<String>) -> Error {
        parse_err(self.path, row.line, msg)
    }
}

pub(crate) fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub(crate) fn fmt_f64(x: f64) -> String {
    x.to_string()
}
