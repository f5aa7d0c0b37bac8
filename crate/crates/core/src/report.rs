//! Report serialization: JSON for structured output, CSV for per-size tables.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::FamilyReport;

const SIGNIFICANT_DIGITS: usize = 12;

/// `%g`-style formatting with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIGNIFICANT_DIGITS as i32 {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn csv_header(eps_grid: &[f64]) -> String {
    let mut cols: Vec<String> = ["n", "gap", "s", "product"].map(String::from).to_vec();
    for &eps in eps_grid {
        let e = format_number(eps);
        cols.push(format!("T_c_eps{e}"));
        cols.push(format!("T_lazy_eps{e}"));
    }
    cols.extend(["ratio", "window", "sqrt_t"].map(String::from));
    cols.join(",")
}

/// Header, one row per size, and a `verdict,<verdict>` footer when there
/// are records.
pub fn to_csv(report: &FamilyReport) -> String {
    let mut out = csv_header(&report.eps_grid);
    out.push('\n');
    for r in &report.records {
        let mut row = vec![
            r.n.to_string(),
            format_number(r.gap),
            format_number(r.spectral_sum),
            format_number(r.product),
        ];
        for i in 0..report.eps_grid.len() {
            row.push(cell(r.continuous_times.get(i).copied()));
            row.push(cell(r.lazy_times.get(i).copied()));
        }
        row.extend([cell(r.ratio), cell(r.window), cell(r.sqrt_t)]);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    if !report.records.is_empty() {
        out.push_str(&format!("verdict,{}\n", report.verdict.as_str()));
    }
    out
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn export_csv(report: &FamilyReport, path: &Path) -> Result<()> {
    write_atomic(path, to_csv(report).as_bytes())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_atomic(path, to_json(value).as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{criterion_scan, Family, FamilySpec};

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2005.123456789012), "2005.12345679");
        assert_eq!(format_number(1024.0), "1024");
        assert_eq!(format_number(1e-7), "1e-07");
        assert_eq!(format_number(-2.5e15), "-2.5e+15");
        assert_eq!(format_number(9.9999999999996), "10");
        assert_eq!(format_number(0.00012345), "0.00012345");
    }

    #[test]
    fn header_schema() {
        assert_eq!(
            csv_header(&[0.1, 0.25]),
            "n,gap,s,product,T_c_eps0.1,T_lazy_eps0.1,T_c_eps0.25,T_lazy_eps0.25,ratio,window,sqrt_t"
        );
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = FamilyReport::empty("ehrenfest", vec![0.25]);
        assert_eq!(to_csv(&report), format!("{}\n", csv_header(&[0.25])));
    }

    #[test]
    fn spectral_rows_leave_time_cells_empty() {
        let spec = FamilySpec::new(Family::Ehrenfest, vec![4, 8]).unwrap();
        let mut report = criterion_scan(&spec).unwrap();
        report.eps_grid = vec![0.25];
        let csv = to_csv(&report);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("4,0.5,"));
        assert!(lines[1].ends_with(",,,,,"));
        assert_eq!(lines[3], "verdict,inconclusive");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_json(&vec![1.5, 2.5], &path).unwrap();
        write_json(&vec![0.1], &path).unwrap();
        let back: Vec<f64> = read_json(&path).unwrap();
        assert_eq!(back, vec![0.1]);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
