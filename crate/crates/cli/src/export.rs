//! Affinity matrices as CSV and 8-bit grayscale PGM heatmaps.

use std::fs;
use std::path::{Path, PathBuf};

use flnnsc_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::report::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityExport {
    pub csv: PathBuf,
    pub pgm: PathBuf,
    /// Sample order used for both files.
    pub order: Vec<usize>,
    /// Share of affinity mass between samples of different true classes.
    pub off_block_fraction: Option<f64>,
    pub all_zero: bool,
}

/// Indices sorted by label (stable), or the identity without labels.
pub fn label_order(labels: Option<&[usize]>, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(l) = labels {
        order.sort_by_key(|&i| l[i]);
    }
    order
}

pub fn off_block_fraction(g: &Matrix, labels: &[usize]) -> Option<f64> {
    let n = g.rows();
    let (mut off, mut total) = (0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let v = g[(i, j)];
            total += v;
            if labels[i] != labels[j] {
                off += v;
            }
        }
    }
    (total > 0.0).then(|| off / total)
}

/// Min-max normalized bytes in row-major order.
pub fn quantize(g: &Matrix) -> Vec<u8> {
    let (lo, hi) = g
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    let mut out = Vec::with_capacity(g.rows() * g.cols());
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let t = if span > 0.0 { (g[(i, j)] - lo) / span } else { 0.0 };
            out.push((t * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<(), CliError> {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    write_atomic(path, &bytes)
}

/// Reads a binary (P5) 8-bit PGM: `(width, height, row-major pixels)`.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let bad = |m: &str| CliError::Format {
        path: path.to_path_buf(),
        message: m.to_string(),
    };
    // header: magic, width, height, maxval, each whitespace separated
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(bad("not a P5 PGM"));
    }
    let w: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let h: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    if fields[3] != "255" {
        return Err(bad("only 8-bit PGM is supported"));
    }
    let pixels = bytes.get(pos..pos + w * h).ok_or_else(|| bad("truncated pixel data"))?;
    Ok((w, h, pixels.to_vec()))
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<(), CliError> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Format {
                    path: path.to_path_buf(),
                    message: format!("line {}: non-numeric field", i + 1),
                })
        })
        .collect::<Result<_, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: "ragged rows".into(),
        });
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Writes `affinity.csv` and `affinity.pgm` with samples grouped by label.
pub fn export_affinity(dir: &Path, g: &Matrix, labels: Option<&[usize]>) -> Result<AffinityExport, CliError> {
    let n = g.rows();
    let order = label_order(labels, n);
    let ordered = Matrix::from_fn(n, n, |i, j| g[(order[i], order[j])]);
    let all_zero = g.as_slice().iter().all(|&v| v == 0.0);
    if all_zero {
        log::warn!("affinity matrix is identically zero; the heatmap is blank");
    }
    let csv = dir.join("affinity.csv");
    let pgm = dir.join("affinity.pgm");
    write_matrix_csv(&csv, &ordered)?;
    write_pgm(&pgm, n, n, &quantize(&ordered))?;
    Ok(AffinityExport {
        csv,
        pgm,
        order,
        off_block_fraction: labels.and_then(|l| off_block_fraction(g, l)),
        all_zero,
    })
}
