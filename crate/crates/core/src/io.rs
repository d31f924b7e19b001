//! Artifact persistence: fields as CSV with a self-describing header,
//! energy traces, plot data, and flat key=value summaries. Every file
//! carries the configuration hash, and numbers are written with 17
//! significant digits so a save/load round trip reproduces the f64 bits.

use crate::grid::{Field, TorusGrid};
use crate::model::Problem;
use crate::solve::SolveReport;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: file is empty")]
    Empty { path: String },
    #[error("{path}: header grid ({dim}d, L={side_length}, M={points_per_cell}) does not match the expected grid")]
    GridMismatch {
        path: String,
        dim: usize,
        side_length: usize,
        points_per_cell: usize,
    },
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// FNV-1a over the canonical config text; stamped into every artifact.
pub fn config_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn fmt_f64(v: f64) -> String {
    // 17 significant digits: lossless decimal round trip for f64
    format!("{v:.16e}")
}

/// Write lattice values as CSV: coordinate columns then the value, after a
/// header recording the grid and α.
pub fn save_field(field: &Field, alpha: f64, hash: u64, path: &Path) -> Result<(), IoError> {
    let grid = field.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# nehari-fs field v1");
    let _ = writeln!(out, "# config_hash = {hash:016x}");
    let _ = writeln!(out, "# dim = {}", grid.dim());
    let _ = writeln!(out, "# side_length = {}", grid.side_length());
    let _ = writeln!(out, "# points_per_cell = {}", grid.points_per_cell());
    let _ = writeln!(out, "# alpha = {}", fmt_f64(alpha));
    match grid.dim() {
        1 => {
            let _ = writeln!(out, "x,u");
            for (i, v) in field.values().iter().enumerate() {
                let _ = writeln!(out, "{},{}", fmt_f64(grid.point(i)[0]), fmt_f64(*v));
            }
        }
        _ => {
            let _ = writeln!(out, "x0,x1,u");
            for (i, v) in field.values().iter().enumerate() {
                let p = grid.point(i);
                let _ = writeln!(out, "{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*v));
            }
        }
    }
    write_atomic(path, &out)
}

/// Load a field saved by [`save_field`]; returns the field and its α.
pub fn load_field(path: &Path) -> Result<(Field, f64), IoError> {
    let text = std::fs::read_to_string(path)?;
    let pstr = path.display().to_string();
    if text.trim().is_empty() {
        return Err(IoError::Empty { path: pstr });
    }
    let mut dim = None;
    let mut side_length = None;
    let mut points_per_cell = None;
    let mut alpha = None;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                let (k, v) = (k.trim(), v.trim());
                let parse_usize = |v: &str| {
                    v.parse::<usize>().map_err(|_| IoError::Format {
                        path: pstr.clone(),
                        line: lineno,
                        message: format!("cannot parse '{v}' as an integer"),
                    })
                };
                match k {
                    "dim" => dim = Some(parse_usize(v)?),
                    "side_length" => side_length = Some(parse_usize(v)?),
                    "points_per_cell" => points_per_cell = Some(parse_usize(v)?),
                    "alpha" => {
                        alpha = Some(v.parse::<f64>().map_err(|_| IoError::Format {
                            path: pstr.clone(),
                            line: lineno,
                            message: format!("cannot parse '{v}' as a number"),
                        })?)
                    }
                    _ => {}
                }
            }
            continue;
        }
        if line.starts_with('x') {
            continue; // column header
        }
        let value_col = line.rsplit(',').next().ok_or_else(|| IoError::Format {
            path: pstr.clone(),
            line: lineno,
            message: "expected comma-separated columns".into(),
        })?;
        values.push(value_col.parse::<f64>().map_err(|_| IoError::Format {
            path: pstr.clone(),
            line: lineno,
            message: format!("cannot parse '{value_col}' as a number"),
        })?);
    }
    let (dim, side_length, points_per_cell) = match (dim, side_length, points_per_cell) {
        (Some(d), Some(l), Some(m)) => (d, l, m),
        _ => {
            return Err(IoError::Format {
                path: pstr,
                line: 0,
                message: "missing grid header (dim/side_length/points_per_cell)".into(),
            })
        }
    };
    let grid = TorusGrid::new(dim, side_length, points_per_cell)?;
    if values.len() != grid.len() {
        return Err(IoError::GridMismatch {
            path: pstr,
            dim,
            side_length,
            points_per_cell,
        });
    }
    Ok((Field::new(grid, values)?, alpha.unwrap_or(f64::NAN)))
}

/// iter,J,residual,l2 per accepted iterate.
pub fn save_trace(report: &SolveReport, hash: u64, path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    let _ = writeln!(out, "# nehari-fs trace v1");
    let _ = writeln!(out, "# config_hash = {hash:016x}");
    let _ = writeln!(out, "iter,J,residual,l2");
    for (i, ((j, r), l2)) in report
        .energy_trace
        .iter()
        .zip(&report.residual_trace)
        .zip(&report.l2_trace)
        .enumerate()
    {
        let _ = writeln!(out, "{i},{},{},{}", fmt_f64(*j), fmt_f64(*r), fmt_f64(*l2));
    }
    write_atomic(path, &out)
}

/// Plot data: profile (x, u, V overlay).
pub fn save_profile(field: &Field, prob: &Problem, hash: u64, path: &Path) -> Result<(), IoError> {
    let grid = field.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# nehari-fs profile v1");
    let _ = writeln!(out, "# config_hash = {hash:016x}");
    match grid.dim() {
        1 => {
            let _ = writeln!(out, "x,u,V");
            for (i, v) in field.values().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    fmt_f64(grid.point(i)[0]),
                    fmt_f64(*v),
                    fmt_f64(prob.v_samples()[i])
                );
            }
        }
        _ => {
            let _ = writeln!(out, "x0,x1,u,V");
            for (i, v) in field.values().iter().enumerate() {
                let p = grid.point(i);
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(p[0]),
                    fmt_f64(p[1]),
                    fmt_f64(*v),
                    fmt_f64(prob.v_samples()[i])
                );
            }
        }
    }
    write_atomic(path, &out)
}

/// Plot data: spectrum magnitude against |ξ|, ascending.
pub fn save_spectrum(field: &Field, hash: u64, path: &Path) -> Result<(), IoError> {
    let grid = field.grid();
    let mut rows: Vec<(f64, f64)> = field
        .spectrum()
        .iter()
        .zip(grid.xi_norms())
        .map(|(c, &xi)| (xi, c.norm()))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = String::new();
    let _ = writeln!(out, "# nehari-fs spectrum v1");
    let _ = writeln!(out, "# config_hash = {hash:016x}");
    let _ = writeln!(out, "xi_abs,u_hat_abs");
    for (xi, mag) in rows {
        let _ = writeln!(out, "{},{}", fmt_f64(xi), fmt_f64(mag));
    }
    write_atomic(path, &out)
}

/// Flat key = value summary; keys appear in the given order.
pub fn save_summary(pairs: &[(String, String)], hash: u64, path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    let _ = writeln!(out, "# nehari-fs summary v1");
    let _ = writeln!(out, "config_hash = {hash:016x}");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    write_atomic(path, &out)
}

fn write_atomic(path: &Path, content: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// Diagnostic L∞ distance between a field and a saved/loaded copy.
pub fn roundtrip_linf(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    #[test]
    fn field_roundtrip_is_bit_exact() {
        let g = TorusGrid::new(1, 3, 16).unwrap();
        let u = Field::from_fn(g, |x| (x[0] * 1.7).sin() / 3.0 + 1e-17);
        let dir = std::env::temp_dir().join("nehari_fs_io_test");
        let path = dir.join("field.csv");
        save_field(&u, 1.5, 0xabcd, &path).unwrap();
        let (back, alpha) = load_field(&path).unwrap();
        assert_eq!(alpha, 1.5);
        assert_eq!(u.values(), back.values(), "bit-exact after parse");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn field_roundtrip_2d() {
        let g = TorusGrid::new(2, 2, 8).unwrap();
        let u = Field::from_fn(g, |x| x[0] - 0.3 * x[1]);
        let dir = std::env::temp_dir().join("nehari_fs_io_test_2d");
        let path = dir.join("field.csv");
        save_field(&u, 2.0, 1, &path).unwrap();
        let (back, _) = load_field(&path).unwrap();
        assert_eq!(u.values(), back.values());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_and_mismatched_files_error() {
        let dir = std::env::temp_dir().join("nehari_fs_io_test_err");
        std::fs::create_dir_all(&dir).unwrap();
        let empty = dir.join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(load_field(&empty), Err(IoError::Empty { .. })));

        // truncate a valid file: grid mismatch
        let g = TorusGrid::new(1, 2, 8).unwrap();
        let u = Field::from_fn(g, |x| x[0]);
        let path = dir.join("field.csv");
        save_field(&u, 1.0, 2, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(text.lines().count() - 3).collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        assert!(matches!(
            load_field(&path),
            Err(IoError::GridMismatch { .. })
        ));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = config_hash("problem.alpha = 2");
        let b = config_hash("problem.alpha = 2");
        let c = config_hash("problem.alpha = 1");
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
