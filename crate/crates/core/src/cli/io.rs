use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const MAX_DIM_VAR: &str = "SPECTRA_CDMA_MAX_DIM";
pub const DEFAULT_MAX_DIM: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Matrix dimension cap from `SPECTRA_CDMA_MAX_DIM`.
pub fn dimension_cap() -> Result<usize> {
    match std::env::var(MAX_DIM_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("{MAX_DIM_VAR}={v} is not a positive integer"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_DIM),
        Err(e) => Err(Error::invalid(format!("{MAX_DIM_VAR}: {e}"))),
    }
}

/// Reads a JSON config file into an object.
pub fn read_config(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))? {
        Value::Object(map) => Ok(map),
        _ => Err(Error::Parse(format!("{}: config must be a JSON object", path.display()))),
    }
}

/// Overlays the flags that were given (non-null, non-false) on the config
/// file entries and deserializes the result; flags win.
pub fn merge<F: Serialize, T: DeserializeOwned>(flags: &F, config: Option<&Path>) -> Result<T> {
    let base = match config {
        Some(path) => read_config(path)?,
        None => Map::new(),
    };
    overlay(flags, base)
}

/// [`merge`] onto an already loaded config object.
pub fn overlay<F: Serialize, T: DeserializeOwned>(flags: &F, mut merged: Map<String, Value>) -> Result<T> {
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (key, value) in given {
            if !matches!(value, Value::Null | Value::Bool(false)) {
                merged.insert(key, value);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::Parse(format!("config: {e}")))
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
        Some(path) => write_atomic(path, bytes),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// `<out>.json` next to a CSV output file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Emits a result: CSV data (plus a JSON metadata sidecar when writing to a
/// file) or one JSON document holding metadata and data.
pub fn emit_result<M: Serialize>(
    out: Option<&Path>,
    format: Format,
    metadata: &M,
    csv_body: impl FnOnce() -> Result<Vec<u8>>,
    json_body: impl FnOnce() -> Result<Value>,
) -> Result<()> {
    match format {
        Format::Csv => {
            let body = csv_body()?;
            emit(out, &body)?;
            if let Some(path) = out {
                write_atomic(&sidecar_path(path), &to_json_bytes(metadata)?)?;
            }
            Ok(())
        }
        Format::Json => {
            let mut doc = match serde_json::to_value(metadata)? {
                Value::Object(m) => m,
                other => {
                    let mut m = Map::new();
                    m.insert("metadata".into(), other);
                    m
                }
            };
            doc.insert("data".into(), json_body()?);
            emit(out, &to_json_bytes(&doc)?)
        }
    }
}

pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Parses `a,b,c`.
pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| Error::invalid(format!("bad {what} entry '{s}'")))
        })
        .collect()
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts = parse_list(&text.replace(':', ","), "grid")?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::invalid(format!("grid '{text}' must be start:stop:step")));
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::invalid(format!("grid '{text}' needs step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::invalid(format!("grid '{text}' has too many points")));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, Debug, PartialEq, Default)]
    #[serde(default)]
    struct Args {
        beta: Option<f64>,
        n_max: Option<usize>,
        flag: bool,
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"beta": 2.0, "n_max": 7, "flag": true}"#).unwrap();
        let flags = Args { beta: Some(0.5), n_max: None, flag: false };
        let merged: Args = merge(&flags, Some(&path)).unwrap();
        assert_eq!(merged, Args { beta: Some(0.5), n_max: Some(7), flag: true });
        std::fs::write(&path, "[1]").unwrap();
        assert!(matches!(merge::<_, Args>(&flags, Some(&path)), Err(Error::Parse(_))));
    }

    #[test]
    fn grids_and_lists() {
        assert_eq!(parse_grid("0.1:0.5:0.1").unwrap().len(), 5);
        assert_eq!(parse_grid("1:1:1").unwrap(), vec![1.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert_eq!(parse_list("0, 0.5,1", "alpha").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_list("a", "alpha").is_err());
    }

    #[test]
    fn atomic_write_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_result(
            Some(&path),
            Format::Csv,
            &serde_json::json!({"command": "x"}),
            || Ok(b"n,moment\n".to_vec()),
            || Ok(Value::Null),
        )
        .unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "n,moment\n");
        let meta: Value = serde_json::from_slice(&std::fs::read(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta["command"], "x");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
