//! Artifact emission: CSV tables, rate JSON and a minimal hand-rolled SVG
//! log-log plot per experiment.
//!
//! Floats in CSV files are printed with 17 significant digits, which is
//! enough for a decimal round trip to reproduce the f64 bit pattern, so
//! determinism can be checked byte-for-byte.

use crate::error::{Error, Result};
use crate::fit::RateReport;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Format a float with 17 significant digits (lossless decimal round trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render the (t, norm, reference_curve) table as CSV text.
pub fn norms_csv(report: &RateReport) -> Result<String> {
    if report.times.is_empty() {
        return Err(Error::InvalidInput("refusing to write an empty series".into()));
    }
    let mut out = String::from("t,norm,reference_curve\n");
    for (&t, &x) in report.times.iter().zip(&report.norms) {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(t),
            fmt_f64(x),
            fmt_f64(report.reference_curve(t))
        );
    }
    Ok(out)
}

/// Render a minimal log-log SVG plot: exactly one data polyline and one
/// fitted line.
pub fn rate_svg(report: &RateReport, title: &str) -> Result<String> {
    if report.times.len() < 2 {
        return Err(Error::InvalidInput("refusing to plot fewer than 2 points".into()));
    }
    let (w, h, margin) = (640.0, 440.0, 50.0);
    let xs: Vec<f64> = report.times.iter().map(|&t| t.ln()).collect();
    let ys: Vec<f64> = report
        .norms
        .iter()
        .map(|&x| if x > 0.0 { x.ln() } else { f64::NAN })
        .collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidInput("nonpositive norm cannot be plotted".into()));
    }
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let sx = |x: f64| margin + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * margin);
    let points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    // fitted line across the fit window, in the same transformed coordinates
    let (fa, fb) = report.fit_window;
    let ya = report.fitted_curve(fa).ln();
    let yb = report.fitted_curve(fb).ln();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.0}" y="24" font-family="monospace" font-size="14">{}</text>"#,
        margin, title
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.0}" y="{:.0}" font-family="monospace" font-size="12">slope {:.4} (reference {:.4})</text>"#,
        margin,
        h - 12.0,
        report.fit_slope,
        report.reference_slope
    );
    let _ = writeln!(
        svg,
        r##"<polyline class="data" fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    let _ = writeln!(
        svg,
        r##"<line class="fit" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6,3" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"##,
        sx(fa.ln()),
        sy(ya),
        sx(fb.ln()),
        sy(yb)
    );
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

/// Files written for one experiment.
#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: PathBuf,
}

/// Write `<name>_norms.csv`, `<name>_rate.json` and `<name>.svg` into `dir`.
pub fn emit_outputs(report: &RateReport, dir: &Path, name: &str) -> Result<EmittedFiles> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}_norms.csv"));
    fs::write(&csv, norms_csv(report)?)?;
    let json = dir.join(format!("{name}_rate.json"));
    let mut body = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidInput(format!("rate serialization failed: {e}")))?;
    body.push('\n');
    fs::write(&json, body)?;
    let svg = dir.join(format!("{name}.svg"));
    fs::write(&svg, rate_svg(report, name)?)?;
    Ok(EmittedFiles { csv, json, svg })
}

/// Parse a norms CSV back into (t, norm, reference_curve) rows.
pub fn parse_norms_csv(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "t,norm,reference_curve" {
                return Err(Error::InvalidInput(format!("unexpected CSV header: {line}")));
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::InvalidInput(format!("malformed CSV row: {line}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("bad float {s}: {e}")))
        };
        rows.push((parse(cols[0])?, parse(cols[1])?, parse(cols[2])?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit_rate, FitModel};

    fn sample_report() -> RateReport {
        let times: Vec<f64> = (1..=12).map(|i| i as f64 * 1.37).collect();
        let norms: Vec<f64> = times.iter().map(|&t| 0.731 * t.powf(-0.493)).collect();
        fit_rate(&times, &norms, FitModel::PowerLaw, (2.0, 20.0), -0.5).unwrap()
    }

    #[test]
    fn csv_round_trips_bit_for_bit() {
        let rep = sample_report();
        let text = norms_csv(&rep).unwrap();
        let rows = parse_norms_csv(&text).unwrap();
        assert_eq!(rows.len(), rep.times.len());
        for ((t, x, c), (&t0, &x0)) in rows.iter().zip(rep.times.iter().zip(&rep.norms)) {
            assert_eq!(t.to_bits(), t0.to_bits());
            assert_eq!(x.to_bits(), x0.to_bits());
            assert_eq!(c.to_bits(), rep.reference_curve(t0).to_bits());
        }
    }

    #[test]
    fn svg_has_one_data_polyline_and_one_fit_line() {
        let rep = sample_report();
        let svg = rate_svg(&rep, "sample").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains(r#"class="data""#));
        assert!(svg.contains(r#"class="fit""#));
    }

    #[test]
    fn empty_report_is_refused() {
        let mut rep = sample_report();
        rep.times.clear();
        rep.norms.clear();
        assert!(norms_csv(&rep).is_err());
        assert!(rate_svg(&rep, "x").is_err());
    }

    #[test]
    fn emit_writes_all_three_files() {
        let rep = sample_report();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(&rep, dir.path(), "demo").unwrap();
        assert!(files.csv.exists() && files.json.exists() && files.svg.exists());
        // JSON is loadable and preserves the slope
        let text = std::fs::read_to_string(&files.json).unwrap();
        let back: RateReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.fit_slope.to_bits(), rep.fit_slope.to_bits());
        // determinism: emitting again is byte-identical
        let text1 = std::fs::read_to_string(&files.csv).unwrap();
        emit_outputs(&rep, dir.path(), "demo").unwrap();
        let text2 = std::fs::read_to_string(&files.csv).unwrap();
        assert_eq!(text1, text2);
    }
}
