//! Result files: `#`-prefixed `key=value` lines recording the resolved
//! configuration, then a CSV table.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Directory used for results when `--output` is absent.
pub const OUT_DIR_ENV: &str = "LDP_RANGE_OUT_DIR";

pub(crate) struct Table {
    command: &'static str,
    header: Vec<(String, String)>,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub(crate) fn new(command: &'static str, columns: &'static [&'static str]) -> Self {
        Self { command, header: Vec::new(), columns, rows: Vec::new() }
    }

    pub(crate) fn meta(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub(crate) fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields);
    }

    fn render(&self) -> CliResult<Vec<u8>> {
        let mut buf = format!("# ldp-range {} {}\n", self.command, env!("CARGO_PKG_VERSION")).into_bytes();
        for (k, v) in &self.header {
            buf.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(buf);
        let fail = |e: csv::Error| CliError::Io { path: "<csv>".into(), source: e.into() };
        w.write_record(self.columns).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), source: e.into_error() })
    }

    /// Write to `explicit`, else `$LDP_RANGE_OUT_DIR/<command>.csv`, else
    /// standard output. Returns the file written, if any.
    pub(crate) fn emit(&self, explicit: Option<&Path>) -> CliResult<Option<PathBuf>> {
        let bytes = self.render()?;
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(OUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{}.csv", self.command))),
        };
        let io_err = |p: &Path| {
            let path = p.display().to_string();
            move |source| CliError::Io { path, source }
        };
        match &path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
                }
                std::fs::write(p, &bytes).map_err(io_err(p))?;
            }
            None => std::io::stdout().lock().write_all(&bytes).map_err(io_err(Path::new("<stdout>")))?,
        }
        Ok(path)
    }
}

/// Shortest round-trip decimal, independent of locale.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}

/// Shortest round-trip scientific notation.
pub(crate) fn sci(x: f64) -> String {
    format!("{x:e}")
}

pub(crate) fn list<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}
