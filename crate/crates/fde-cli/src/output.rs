//! Atomic file output, CSV rendering and report envelopes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::Error;

/// JSON report schema version.
pub const SCHEMA: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Accumulates CSV text with fixed columns.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self { text: format!("{}\n", columns.join(",")), width: columns.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.width);
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Output directory handle; every file goes through a temporary file and a rename.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, Error> {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Error> {
        let target = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).map_err(|e| format!("cannot write {}: {}", target.display(), e.error))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, Error> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

/// Report envelope: `{schema, command, verdict, ...body}`.
pub fn envelope<T: Serialize>(command: &str, verdict: Option<&str>, body: &T) -> Result<Value, Error> {
    let mut doc = serde_json::json!({ "schema": SCHEMA, "command": command, "verdict": verdict });
    let body = serde_json::to_value(body)?;
    let Value::Object(fields) = body else { return Err("report body must be an object".into()) };
    let obj = doc.as_object_mut().expect("object");
    for (k, v) in fields {
        obj.insert(k, v);
    }
    Ok(doc)
}
