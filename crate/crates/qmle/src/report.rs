//! Report serialization: CSV emission, config hashing, output layout.
//!
//! All floats are written with Rust's shortest round-trip formatting, so a
//! rerun that computes identical values produces byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// First 16 hex characters of the SHA-256 of a value's canonical JSON.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("config serialization cannot fail");
    let digest = Sha256::digest(json.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// Render rows as CSV under a fixed header.
pub fn csv_table(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Format an optional float as a CSV cell (empty when absent).
pub fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Directory `<out>/<command>/<hash>/`, created on demand.
pub fn run_dir(out: &Path, command: &str, hash: &str) -> Result<PathBuf> {
    let dir = out.join(command).join(hash);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Write a string to `<dir>/<name>`, returning the full path.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Pretty-printed JSON plus a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        #[derive(Serialize)]
        struct C {
            a: u64,
            b: f64,
        }
        let h1 = config_hash(&C { a: 1, b: 2.0 });
        let h2 = config_hash(&C { a: 1, b: 2.0 });
        let h3 = config_hash(&C { a: 2, b: 2.0 });
        assert_eq!(h1, h2);
        assert_ne!(h1, h3);
        assert_eq!(h1.len(), 16);
    }

    #[test]
    fn csv_rendering() {
        let rows = vec![
            vec!["1".to_string(), "2.5".to_string()],
            vec!["2".to_string(), String::new()],
        ];
        assert_eq!(csv_table("a,b", &rows), "a,b\n1,2.5\n2,\n");
        assert_eq!(opt_cell(None), "");
        assert_eq!(opt_cell(Some(1.5)), "1.5");
    }
}
