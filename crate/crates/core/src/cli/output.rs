//! Canonical JSON/CSV emission and atomic file writes.
//!
//! Floats are written as `{:.16e}` (17 significant digits). JSON objects go
//! through `serde_json::Value`, whose maps are key-sorted, so re-parsing an
//! output and emitting it again reproduces the same bytes.

use std::io::{self, Write};
use std::path::Path;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Canonical<'a>(PrettyFormatter<'a>);

impl Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON with canonical float formatting and a trailing newline.
pub fn to_canonical_json(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical(PrettyFormatter::new()));
    serde::Serialize::serialize(v, &mut ser).expect("serializing a Value into memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => format_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        scalar => out.push((prefix.to_string(), csv_cell(scalar))),
    }
}

/// Two-column `field,value` rendering of a JSON document.
pub fn to_flat_csv(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut s = String::from("field,value\n");
    for (k, x) in rows {
        s.push_str(&k);
        s.push(',');
        s.push_str(&x);
        s.push('\n');
    }
    s
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
