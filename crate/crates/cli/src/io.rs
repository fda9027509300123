//! Streaming line I/O, diagnostics, and run manifests.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use layoutir::api::ApiError;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Records processed per parallel chunk. Output order is input order.
pub const CHUNK: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

pub fn is_std(path: &Path) -> bool {
    path.as_os_str() == "-"
}

pub fn open_in(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if is_std(path) {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(io_err(path))?;
    Ok(Box::new(BufReader::new(f)))
}

pub fn open_out(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if is_std(path) {
        return Ok(Box::new(BufWriter::new(io::stdout())));
    }
    let f = File::create(path).map_err(io_err(path))?;
    Ok(Box::new(BufWriter::new(f)))
}

/// A per-record failure.
#[derive(Debug, Clone)]
pub struct Diag {
    pub id: Option<String>,
    pub code: &'static str,
    pub message: String,
}

impl Diag {
    pub fn new(id: Option<String>, e: ApiError) -> Self {
        Diag { id, code: e.code, message: e.message }
    }
}

impl fmt::Display for Diag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(id) = &self.id {
            write!(f, "[{id}] ")?;
        }
        write!(f, "{}: {}", self.code, self.message.replace('\n', " "))
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Tally {
    pub ok: u64,
    pub failed: u64,
}

impl Tally {
    /// Data error when any record failed.
    pub fn check(self) -> Result<(), CliError> {
        if self.failed > 0 {
            return Err(CliError::Data(format!("{} of {} records failed", self.failed, self.ok + self.failed)));
        }
        Ok(())
    }
}

/// A JSON object line, or `None` for raw text.
pub fn json_line(line: &str) -> Result<Option<Value>, ApiError> {
    let t = line.trim_start();
    if !t.starts_with('{') {
        return Ok(None);
    }
    serde_json::from_str(t).map(Some).map_err(|e| ApiError { code: "InvalidJson", message: e.to_string() })
}

pub fn str_field<'a>(v: &'a Value, key: &str) -> Option<&'a str> {
    v.get(key).and_then(Value::as_str)
}

/// Reads non-blank lines in chunks, maps each through `f` in parallel, and
/// hands successes to `sink` in input order. Failures are logged with their
/// line number and record id.
pub fn scan_lines<T, F, S>(input: &Path, f: F, mut sink: S) -> Result<Tally, CliError>
where
    T: Send,
    F: Fn(usize, &str) -> Result<T, Diag> + Sync,
    S: FnMut(T) -> Result<(), CliError>,
{
    let mut lines = open_in(input)?.lines().enumerate();
    let mut tally = Tally::default();
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        for (i, line) in lines.by_ref() {
            let line = line.map_err(io_err(input))?;
            if line.trim().is_empty() {
                continue;
            }
            chunk.push((i + 1, line));
            if chunk.len() == CHUNK {
                break;
            }
        }
        if chunk.is_empty() {
            break;
        }
        let results: Vec<_> = chunk.par_iter().map(|(n, l)| f(*n, l)).collect();
        for ((n, _), r) in chunk.iter().zip(results) {
            match r {
                Ok(v) => {
                    sink(v)?;
                    tally.ok += 1;
                }
                Err(d) => {
                    log::error!("{}:{n}: {d}", input.display());
                    tally.failed += 1;
                }
            }
        }
    }
    Ok(tally)
}

/// [`scan_lines`] writing each record's output lines to `out`.
pub fn map_lines<F>(input: &Path, out: &mut dyn Write, f: F) -> Result<Tally, CliError>
where
    F: Fn(usize, &str) -> Result<Vec<String>, Diag> + Sync,
{
    let out_err = |source| CliError::Io { path: "output".into(), source };
    let tally = scan_lines(input, f, |lines| {
        for l in lines {
            out.write_all(l.as_bytes()).map_err(out_err)?;
            out.write_all(b"\n").map_err(out_err)?;
        }
        Ok(())
    })?;
    out.flush().map_err(out_err)?;
    Ok(tally)
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    /// Absent for standard input.
    pub sha256: Option<String>,
}

pub fn digest(path: &Path) -> Result<InputDigest, CliError> {
    let sha256 = if is_std(path) {
        None
    } else {
        let mut f = File::open(path).map_err(io_err(path))?;
        let mut h = Sha256::new();
        let mut buf = vec![0u8; 1 << 16];
        loop {
            let n = f.read(&mut buf).map_err(io_err(path))?;
            if n == 0 {
                break;
            }
            h.update(&buf[..n]);
        }
        Some(hex::encode(h.finalize()))
    };
    Ok(InputDigest { path: path.display().to_string(), sha256 })
}

/// Provenance written beside every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub params: Value,
    pub inputs: Vec<InputDigest>,
    pub version: &'static str,
    pub seed: u64,
    pub summary: Value,
}

/// `<out>.manifest.json`, or nothing when writing to standard output.
pub fn manifest_path(out: &Path) -> Option<PathBuf> {
    if is_std(out) {
        return None;
    }
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    Some(PathBuf::from(s))
}

pub fn write_manifest(path: Option<PathBuf>, m: &RunManifest) -> Result<(), CliError> {
    let Some(path) = path else { return Ok(()) };
    let text = serde_json::to_string_pretty(m).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))
}
