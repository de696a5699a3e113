//! CSV/JSON writers with a leading metadata block.
//!
//! CSV files start with `# key: value` lines, then a header row. Floats are
//! written with 17 significant digits so they round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// 17 significant digits, `.` decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Ordered key/value metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0
            .push((key.to_string(), value.to_string().replace('\n', " ")));
    }

    fn as_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

pub fn csv_string(meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    for (k, v) in &meta.0 {
        let _ = writeln!(s, "# {k}: {v}");
    }
    s.push_str(&header.join(","));
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn json_string<T: Serialize>(meta: &Metadata, data: &T) -> Result<String> {
    let v = serde_json::json!({ "metadata": meta.as_json(), "data": data });
    serde_json::to_string_pretty(&v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| crate::error::TurError::Io(e.to_string()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -7.25e12, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let m = Metadata::new().with("seed", 7);
        let s = csv_string(&m, &["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(s, "# seed: 7\na,b\n1,2\n");
    }
}
