//! CSV emission and atomic file output.

use std::io::Write;
use std::path::Path;

use crate::error::AppError;

/// Accumulates CSV rows in memory.
pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_string(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("CSV fields are UTF-8")
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Writes `content` to `path` through a temp file in the same directory,
/// or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), AppError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| AppError::io("<stdout>", e))
        }
        Some(path) => write_atomic(path, content.as_bytes()),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::io(path, e))?;
    tmp.write_all(bytes).and_then(|_| tmp.flush()).map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}
