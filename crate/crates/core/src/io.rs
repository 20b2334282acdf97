//! CSV, JSON and SVG emitters; every file opens with the config hash.

use crate::dft::SpectralProfile;
use crate::error::Result;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(d) = path.parent() {
        if !d.as_os_str().is_empty() {
            std::fs::create_dir_all(d)?;
        }
    }
    Ok(())
}

/// Formats a float so that it round-trips.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// CSV text with a `# config_hash=` first line.
pub fn csv_string(hash: &str, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# config_hash={hash}\n{}\n", header.join(","));
    for r in rows {
        let line: Vec<String> = r.iter().map(|&v| num(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, hash: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, csv_string(hash, header, rows))?;
    Ok(())
}

/// Spectrum as kappa, re, im.
pub fn write_spectrum(path: &Path, hash: &str, g: &SpectralProfile) -> Result<()> {
    let rows: Vec<Vec<f64>> = g.values.iter().enumerate().map(|(j, v)| vec![g.kgrid.kappa(j), v.re, v.im]).collect();
    write_csv(path, hash, &["kappa", "re", "im"], &rows)
}

/// JSON document `{"config_hash": ..., "report": ...}` with the hash on the first line.
pub fn json_string<T: Serialize>(hash: &str, report: &T) -> Result<String> {
    let body = serde_json::to_string_pretty(report)?;
    Ok(format!("{{\"config_hash\": \"{hash}\",\n\"report\": {body}\n}}\n"))
}

pub fn write_json<T: Serialize>(path: &Path, hash: &str, report: &T) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, json_string(hash, report)?)?;
    Ok(())
}

/// One named polyline.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// 800x600 log-log plot, one polyline per series; nonpositive points are dropped.
pub fn loglog_svg(hash: &str, title: &str, series: &[Series]) -> String {
    let (w, h, m) = (800.0, 600.0, 60.0);
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.log10(), p.1.log10())).collect())
        .collect();
    let all: Vec<&(f64, f64)> = logs.iter().flatten().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &all {
        x0 = x0.min(p.0);
        x1 = x1.max(p.0);
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, "<!-- config_hash={hash} -->");
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">");
    let _ = writeln!(s, "<rect width=\"800\" height=\"600\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">{title}</text>");
    let _ = writeln!(s, "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", w - 2.0 * m, h - 2.0 * m);
    let _ = writeln!(s, "<text x=\"{m}\" y=\"{}\" font-size=\"12\">log10 t: {x0:.2} .. {x1:.2}</text>", h - 20.0);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">log10 norm: {y0:.2} .. {y1:.2}</text>", w - m, h - 20.0);
    for (i, (ser, pts)) in series.iter().zip(&logs).enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{c}\">{}</text>", m + 10.0, m + 18.0 * (i as f64 + 1.0), ser.name);
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, body: &str) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_starts_with_hash() {
        let s = csv_string("abc", &["a", "b"], &[vec![1.0, 0.1]]);
        assert_eq!(s, "# config_hash=abc\na,b\n1.0,0.1\n");
    }

    #[test]
    fn json_wraps_report() {
        let s = json_string("abc", &vec![1, 2]).unwrap();
        assert!(s.starts_with("{\"config_hash\": \"abc\","));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["report"][1], 2);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let a = Series { name: "a", points: vec![(1.0, 1.0), (10.0, 0.1)] };
        let b = Series { name: "b", points: vec![(1.0, 2.0), (10.0, 0.3)] };
        let s = loglog_svg("h", "t", &[a, b]);
        assert!(s.starts_with("<!-- config_hash=h -->"));
        assert_eq!(s.matches("<polyline").count(), 2);
    }
}
