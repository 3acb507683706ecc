//! Deterministic text outputs: CSV time series, coefficient files and JSON summaries.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips every `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::{DiagnosticsRecord, ProbeReport};
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::spectral::{PeriodicGrid, SpectralField, SYMMETRY_TOL};

pub const DIAGNOSTICS_HEADER: &str = "t,mass,norm0,norm_half,norm1,norm_s,triple_norm1,sup_norm";
pub const COEFF_HEADER: &str = "k,re,im";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn diagnostics_csv<'a>(records: impl IntoIterator<Item = &'a DiagnosticsRecord>) -> String {
    let mut out = format!("{DIAGNOSTICS_HEADER}\n");
    for r in records {
        let row = [
            r.t,
            r.mass,
            r.norm0,
            r.norm_half,
            r.norm1,
            r.norm_s,
            r.triple_norm1,
            r.sup_norm,
        ]
        .map(real);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_diagnostics<'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a DiagnosticsRecord>,
) -> Result<()> {
    write_text(path, &diagnostics_csv(records))
}

pub fn coefficients_csv(f: &SpectralField) -> String {
    let mut out = format!("{COEFF_HEADER}\n");
    for (k, c) in f.modes() {
        let _ = writeln!(out, "{k},{},{}", real(c.re), real(c.im));
    }
    out
}

pub fn write_coefficients(path: &Path, f: &SpectralField) -> Result<()> {
    write_text(path, &coefficients_csv(f))
}

/// Reads a `k,re,im` file onto `grid`. Absent modes are zero; the result must be
/// conjugate-symmetric.
pub fn read_coefficients(path: &Path, grid: PeriodicGrid) -> Result<SpectralField> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_coefficients(&text, grid, &path.display().to_string())
}

pub fn parse_coefficients(text: &str, grid: PeriodicGrid, origin: &str) -> Result<SpectralField> {
    let mut field = SpectralField::zeros(grid);
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: origin.into(),
        line: line + 1,
        reason,
    };
    match lines.next() {
        Some((_, h)) if h.trim() == COEFF_HEADER => {}
        Some((i, h)) => return Err(parse_err(i, format!("expected header `{COEFF_HEADER}`, got `{h}`"))),
        None => return Err(parse_err(0, "empty coefficient file".into())),
    }
    let mut seen = std::collections::BTreeSet::new();
    for (i, line) in lines {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let [k, re, im] = cols[..] else {
            return Err(parse_err(i, format!("expected 3 columns, got {}", cols.len())));
        };
        let k: i64 = k.parse().map_err(|_| parse_err(i, format!("bad wavenumber `{k}`")))?;
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(i, format!("bad coefficient `{s}`")))
        };
        let c = Complex64::new(num(re)?, num(im)?);
        if !grid.is_retained(k) {
            return Err(parse_err(i, format!("k = {k} beyond the mode cutoff {}", grid.mode_cutoff())));
        }
        if !seen.insert(k) {
            return Err(parse_err(i, format!("duplicate wavenumber {k}")));
        }
        field.set(k, c)?;
    }
    let (k, defect) = field.symmetry_defect();
    if defect > SYMMETRY_TOL * field.max_abs() {
        return Err(Error::AsymmetricCoefficients { k, defect });
    }
    Ok(field)
}

pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_{t:.6}.csv")
}

/// Writes `diagnostics.csv` and one snapshot file per recorded time; returns the snapshot paths.
pub fn write_trajectory(dir: &Path, traj: &Trajectory, prefix: &str) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    write_diagnostics(&dir.join(format!("{prefix}diagnostics.csv")), traj.diagnostics())?;
    traj.snapshots
        .iter()
        .map(|snap| {
            let path = dir.join(format!("{prefix}{}", snapshot_name(snap.t)));
            write_coefficients(&path, &snap.field)?;
            Ok(path)
        })
        .collect()
}

/// Probe rows as CSV under the report's column names.
pub fn report_csv(report: &ProbeReport) -> String {
    let mut out = report.columns.join(",");
    out.push('\n');
    for row in &report.rows {
        out.push_str(&row.iter().map(|&x| real(x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn write_report_csv(path: &Path, report: &ProbeReport) -> Result<()> {
    write_text(path, &report_csv(report))
}

/// Pretty JSON with sorted object keys, terminated by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    // round-trip through Value so that maps come out key-sorted
    let value = serde_json::to_value(value).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        reason: e.to_string(),
    })?;
    let mut text = serde_json::to_string_pretty(&value).expect("Value always serializes");
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::diagnostics;
    use crate::spectral::random_band_limited;
    use crate::symbols::{ModelParams, Operator, SymbolTable};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(32).unwrap()
    }

    #[test]
    fn empty_trajectory_gives_header_only() {
        assert_eq!(diagnostics_csv([]), format!("{DIAGNOSTICS_HEADER}\n"));
    }

    #[test]
    fn diagnostics_rows_round_trip() {
        let g = grid();
        let p = ModelParams::new(1.0, 1.0, 1.0, Operator::Hilbert).unwrap();
        let table = SymbolTable::new(g, p);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_band_limited(g, 15, 0.5, true, &mut rng);
        let rec = diagnostics(&f, &table, 1.0, 0.1);
        let csv = diagnostics_csv([&rec]);
        let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row, vec![
            rec.t, rec.mass, rec.norm0, rec.norm_half, rec.norm1, rec.norm_s, rec.triple_norm1, rec.sup_norm
        ]);
    }

    #[test]
    fn coefficient_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(snapshot_name(0.25));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_band_limited(grid(), 15, 0.3, true, &mut rng).scaled(std::f64::consts::PI);
        write_coefficients(&path, &f).unwrap();
        assert_eq!(read_coefficients(&path, grid()).unwrap(), f);
        assert!(path.ends_with("snapshot_0.250000.csv"));
    }

    #[test]
    fn coefficient_file_errors() {
        let g = grid();
        assert!(matches!(
            parse_coefficients("k,re,im\n1,1,0\n-1,0.5,0\n", g, "x"),
            Err(Error::AsymmetricCoefficients { k: 1, .. })
        ));
        assert!(matches!(
            parse_coefficients("k,re,im\n0,1,0.5\n", g, "x"),
            Err(Error::AsymmetricCoefficients { k: 0, .. })
        ));
        assert!(parse_coefficients("k,re\n", g, "x").is_err());
        assert!(parse_coefficients("k,re,im\n99,1,0\n", g, "x").is_err());
        assert!(parse_coefficients("k,re,im\n1,1,0\n1,1,0\n", g, "x").is_err());
        let ok = parse_coefficients("k,re,im\n-2,0.25,-0.5\n2,0.25,0.5\n", g, "x").unwrap();
        assert_eq!(ok.get(2), Complex64::new(0.25, 0.5));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_coefficients(Path::new("/nonexistent/eta.csv"), grid()).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/eta.csv"));
        assert_eq!(err.exit_code(), 1);
    }
}
