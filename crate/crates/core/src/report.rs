//! Writing results to disk: nested JSON, flat CSV tables and the run
//! manifest, all under one directory per configuration digest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{ResultBundle, RunManifest, SweepReport, SWEEP_COLUMNS};

/// Overrides the default output root when `--out` is not given.
pub const OUT_DIR_ENV: &str = "BCS_TC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "bcs-tc-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}"))),
        }
    }
}

/// `root/<first 16 hex digits of the digest>`. `root` falls back to
/// `$BCS_TC_OUT_DIR`, then to `bcs-tc-out`.
pub fn output_dir(root: Option<&Path>, digest: &str) -> PathBuf {
    let root = match root {
        Some(r) => r.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    };
    root.join(&digest[..digest.len().min(16)])
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// `manifest.json`: the deterministic manifest plus wall-clock times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    #[serde(flatten)]
    pub manifest: RunManifest,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub exit_code: i32,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        ErrorRecord {
            kind: e.kind().to_string(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(path, s.as_bytes())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

pub fn result_json(bundle: &ResultBundle) -> Result<String> {
    let mut s = serde_json::to_string_pretty(bundle)?;
    s.push('\n');
    Ok(s)
}

pub fn tc_shift_csv(bundle: &ResultBundle) -> Result<Vec<u8>> {
    let rows = bundle
        .shift
        .iter()
        .flat_map(|s| &s.rows)
        .map(|r| vec![fmt_real(r.h), fmt_real(r.t_c_shifted)]);
    csv_bytes(&["h", "T_c_shifted"], rows)
}

pub fn checks_csv(bundle: &ResultBundle) -> Result<Vec<u8>> {
    let rows = bundle.checks.iter().map(|c| {
        vec![
            c.id.clone(),
            fmt_real(c.measured),
            fmt_real(c.expected),
            fmt_real(c.tolerance),
            c.passed.to_string(),
        ]
    });
    csv_bytes(&["id", "measured", "expected", "tolerance", "passed"], rows)
}

pub fn gl_csv(bundle: &ResultBundle) -> Result<Vec<u8>> {
    let d_c = bundle.effective.as_ref().map(|e| e.d_c);
    let rows = bundle.gl.iter().map(|g| {
        vec![
            fmt_real(g.beta_c),
            fmt_real(g.t_c),
            fmt_real(g.lambda0),
            fmt_real(g.lambda1),
            fmt_real(g.lambda2),
            fmt_opt(d_c),
        ]
    });
    csv_bytes(
        &["beta_c", "T_c", "lambda0", "lambda1", "lambda2", "D_c"],
        rows,
    )
}

pub fn sweep_csv(report: &SweepReport) -> Result<Vec<u8>> {
    let rows = report.rows.iter().map(|r| {
        vec![
            fmt_real(r.value),
            fmt_opt(r.beta_c),
            fmt_opt(r.t_c),
            fmt_opt(r.lambda0),
            fmt_opt(r.lambda1),
            fmt_opt(r.lambda2),
            fmt_opt(r.e0),
            fmt_opt(r.d_c),
            fmt_opt(r.h),
            fmt_opt(r.t_c_shifted),
            fmt_opt(r.shift),
            r.error.clone().unwrap_or_default(),
        ]
    });
    csv_bytes(&SWEEP_COLUMNS, rows)
}

/// UTC wall-clock time, RFC 3339 with milliseconds.
pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Write the bundle into `dir`. `manifest.json` is always written; JSON
/// adds `result.json`, CSV adds the tables that the stage produced.
/// Returns the written paths in order.
pub fn emit(
    bundle: &ResultBundle,
    dir: &Path,
    format: Format,
    started_at: &str,
) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let path = dir.join("result.json");
            write_file(&path, result_json(bundle)?.as_bytes())?;
            written.push(path);
        }
        Format::Csv => {
            if bundle.gl.is_some() {
                let path = dir.join("gl.csv");
                write_file(&path, &gl_csv(bundle)?)?;
                written.push(path);
            }
            if bundle.shift.is_some() {
                let path = dir.join("tc_shift.csv");
                write_file(&path, &tc_shift_csv(bundle)?)?;
                written.push(path);
            }
            if !bundle.checks.is_empty() {
                let path = dir.join("checks.csv");
                write_file(&path, &checks_csv(bundle)?)?;
                written.push(path);
            }
        }
    }
    let path = dir.join("manifest.json");
    let record = ManifestRecord {
        manifest: bundle.manifest.clone(),
        started_at: started_at.to_string(),
        finished_at: timestamp(),
    };
    write_json(&path, &record)?;
    written.push(path);
    Ok(written)
}

/// `sweep.csv` and `sweep.json` in `dir`.
pub fn emit_sweep(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let csv_path = dir.join("sweep.csv");
    write_file(&csv_path, &sweep_csv(report)?)?;
    let json_path = dir.join("sweep.json");
    write_json(&json_path, report)?;
    Ok(vec![csv_path, json_path])
}

/// `error.json` in `dir`, best effort: a failure to write is only logged.
pub fn emit_error(err: &Error, dir: &Path) -> Option<PathBuf> {
    let path = dir.join("error.json");
    let res = create_dir(dir).and_then(|_| write_json(&path, &ErrorRecord::from(err)));
    match res {
        Ok(()) => Some(path),
        Err(e) => {
            log::warn!("could not write error record: {e}");
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_round_trips() {
        for x in [
            0.1,
            1.0 / 3.0,
            1e-300,
            5e-324,
            f64::MAX,
            -2.5e17,
            3.2583937e0,
        ] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn output_dir_uses_digest_prefix() {
        let d = output_dir(Some(Path::new("/tmp/x")), "0123456789abcdef0123");
        assert_eq!(d, Path::new("/tmp/x/0123456789abcdef"));
    }

    #[test]
    fn format_parses() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
