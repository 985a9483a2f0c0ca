//! CSV and JSON emitters and the place their text ends up.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

pub const SCHEMA: &str = "confocal/1";

/// A CSV document with a `#` metadata block above the header row.
pub struct Csv {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.header.len());
        self.rows.push(fields);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let line = |fields: &[String]| fields.iter().map(|f| quote(f)).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{}", line(&self.header));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
        out
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Shortest decimal that reads back to the same double.
/// Shortest round-trip text, in exponent form away from unit scale.
pub fn num(x: f64) -> String {
    let m = x.abs();
    if m != 0.0 && m.is_finite() && !(1e-4..1e15).contains(&m) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn nums(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

/// A JSON object carrying the schema tag and the command name.
pub fn document(command: &str, body: Value) -> String {
    let mut map = Map::new();
    map.insert("schema".into(), Value::from(SCHEMA));
    map.insert("command".into(), Value::from(command));
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Where a command's artifacts go: all to files sharing a prefix, or the
/// primary one to standard output.
pub struct Sink {
    prefix: Option<PathBuf>,
}

impl Sink {
    pub fn new(prefix: Option<PathBuf>) -> Sink {
        Sink { prefix }
    }

    /// Writes `text` to `<prefix>.<ext>`, or prints it when it is the
    /// primary artifact and no prefix was given.
    pub fn emit(&self, ext: &str, text: &str, primary: bool) -> io::Result<()> {
        match &self.prefix {
            Some(prefix) => {
                let mut path = prefix.clone().into_os_string();
                path.push(".");
                path.push(ext);
                write_atomic(Path::new(&path), text)
            }
            None if primary => io::stdout().lock().write_all(text.as_bytes()),
            None => Ok(()),
        }
    }
}

/// Writes next to the target and renames, so readers never see a partial
/// file.
fn write_atomic(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["sigma", "kappa"]);
        c.meta("n", 3);
        c.row(vec!["(0,1,0)".into(), "5".into()]);
        assert_eq!(c.render(), "# n=3\nsigma,kappa\n\"(0,1,0)\",5\n");
    }

    #[test]
    fn documents_lead_with_the_schema() {
        let text = document("freq", serde_json::json!({"omega": [0.25]}));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["command"], "freq");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(5e-7), "5e-7");
        assert_eq!(num(-2.5e20), "-2.5e20");
        assert_eq!(num(1.0), "1");
    }
}
