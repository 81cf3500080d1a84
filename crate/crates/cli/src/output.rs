//! CSV output: run manifests, lossless float formatting and atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::{CliError, CliResult};

/// Provenance recorded as `#` comment lines at the top of every output file.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub config: Option<String>,
    pub seed: Option<u64>,
    pub output: PathBuf,
    pub version: &'static str,
    started_unix: u64,
    started: Instant,
    /// Extra `key: value` lines describing the run.
    pub notes: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, output: impl Into<PathBuf>) -> Self {
        RunManifest {
            subcommand,
            config: None,
            seed: None,
            output: output.into(),
            version: env!("CARGO_PKG_VERSION"),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            started: Instant::now(),
            notes: Vec::new(),
        }
    }

    pub fn config(mut self, config: impl Into<String>) -> Self {
        self.config = Some(config.into());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    /// Header lines. Only `started_unix` and `elapsed_s` vary between
    /// otherwise identical runs.
    fn header(&self) -> String {
        let mut lines = vec![
            format!("# tool: alpha-lab {}", self.version),
            format!("# subcommand: {}", self.subcommand),
            format!("# config: {}", self.config.as_deref().unwrap_or("-")),
            format!("# seed: {}", self.seed.map_or("-".to_string(), |s| s.to_string())),
            format!("# output: {}", self.output.display()),
        ];
        lines.extend(self.notes.iter().map(|(k, v)| format!("# {k}: {v}")));
        lines.push(format!("# started_unix: {}", self.started_unix));
        lines.push(format!("# elapsed_s: {:.3}", self.started.elapsed().as_secs_f64()));
        lines.join("\n") + "\n"
    }
}

/// Formats a double with 17 significant digits (`inf`, `-inf`, `NaN` for
/// non-finite values).
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats an optional double; `None` becomes an empty field.
pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV table assembled in memory.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Number of rows whose `column` equals `value`.
    pub fn count_where(&self, column: &str, value: &str) -> usize {
        match self.header.iter().position(|h| h == column) {
            Some(k) => self.rows.iter().filter(|r| r[k] == value).count(),
            None => 0,
        }
    }

    fn body(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let failure = |e: csv::Error| CliError::Numeric(format!("CSV encoding failed: {e}"));
        w.write_record(&self.header).map_err(failure)?;
        for row in &self.rows {
            w.write_record(row).map_err(failure)?;
        }
        w.into_inner().map_err(|e| CliError::Numeric(format!("CSV encoding failed: {e}")))
    }

    /// Writes manifest and table to `path` atomically.
    pub fn write(&self, path: &Path, manifest: &RunManifest) -> CliResult<()> {
        let mut bytes = manifest.header().into_bytes();
        bytes.extend(self.body()?);
        write_atomic(path, &bytes)
    }
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// `dir/name.csv` → `dir/name.<suffix>.csv`.
pub fn companion_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned());
    let name = match ext {
        Some(ext) => format!("{stem}.{suffix}.{ext}"),
        None => format!("{stem}.{suffix}"),
    };
    path.with_file_name(name)
}
