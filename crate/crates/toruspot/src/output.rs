//! Atomic file emission: JSON, CSV and SVG scatter plots.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{AppError, AppResult};

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp: PathBuf = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| AppError::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| AppError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| AppError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> AppResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// CSV with a header row; numbers are written in shortest round-trip form.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Scatter plot of points in `[-1/2, 1/2)^2` as a square SVG.
pub fn scatter_svg(title: &str, points: &[[f64; 2]], size: u32) -> String {
    let s = size as f64;
    let margin = 24.0;
    let inner = s - 2.0 * margin;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{margin}" y="{margin}" width="{inner}" height="{inner}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let _ = writeln!(out, r#"<text x="{margin}" y="16" font-family="sans-serif" font-size="12">{}</text>"#, escape(title));
    for p in points {
        let x = margin + (p[0] + 0.5) * inner;
        // SVG y grows downward
        let y = margin + (0.5 - p[1]) * inner;
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2" fill="black"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.json");
        write_json(&p, &serde_json::json!({"a": 1})).unwrap();
        write_json(&p, &serde_json::json!({"a": 2})).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&fs::read(&p).unwrap()).unwrap();
        assert_eq!(v["a"], 2);
        assert_eq!(fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["x".into(), "y".into()], &[vec![0.1, 1e-300], vec![-2.0, 3.5]]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "x,y\n0.1,1e-300\n-2.0,3.5\n");
    }

    #[test]
    fn svg_places_points() {
        let svg = scatter_svg("a<b", &[[-0.5, 0.5], [0.0, 0.0]], 200);
        assert!(svg.contains(r#"cx="24.000" cy="24.000""#));
        assert!(svg.contains(r#"cx="100.000" cy="100.000""#));
        assert!(svg.contains("a&lt;b"));
    }
}
