//! Text readers for matrices, graphs and strategies.
//!
//! Supported inputs:
//! - dense CSV: `n` lines of `n` comma-separated reals;
//! - MatrixMarket coordinate files (`real` or `integer`, `general` or `symmetric`);
//! - whitespace edge lists `src dst`, 0- or 1-based (detected from the smallest id).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linops::Matrix;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("not a number: {:?}", tok.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {v}")));
    }
    Ok(v)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_dense_csv(text: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (lineno, line) in content_lines(text) {
        let row = line.split(',').map(|t| parse_f64(t, lineno)).collect::<Result<Vec<_>>>()?;
        rows.push((lineno, row));
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(1, "empty matrix"));
    }
    for (lineno, row) in &rows {
        if row.len() != n {
            return Err(parse_err(*lineno, format!("expected {n} columns, found {}", row.len())));
        }
    }
    let data: Vec<f64> = rows.into_iter().flat_map(|(_, r)| r).collect();
    Matrix::dense(n, data)
}

pub fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field {:?}", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}"))),
    };
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(size_line, format!("bad size token {t:?}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(parse_err(size_line, "size line must be 'rows cols nnz'"));
    }
    if dims[0] != dims[1] {
        return Err(parse_err(size_line, format!("matrix is {}x{}, not square", dims[0], dims[1])));
    }
    let n = dims[0];
    let mut trips = Vec::with_capacity(dims[2]);
    for (lineno, line) in body {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(lineno, "entry must be 'row col value'"));
        }
        let idx = |t: &str| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| parse_err(lineno, format!("bad index {t:?}")))?;
            if v == 0 || v > n {
                return Err(parse_err(lineno, format!("index {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let (i, j) = (idx(toks[0])?, idx(toks[1])?);
        let v = parse_f64(toks[2], lineno)?;
        trips.push((i, j, v));
        if symmetric && i != j {
            trips.push((j, i, v));
        }
    }
    let expected = dims[2];
    let got = trips.len() - if symmetric { trips.iter().filter(|t| t.0 > t.1).count() } else { 0 };
    if got != expected {
        return Err(parse_err(size_line, format!("declared {expected} entries, found {got}")));
    }
    Matrix::from_triplets(n, &trips)
}

/// Edge list with auto-detected base. Returns 0-based edges and the node count.
pub fn parse_edge_list(text: &str) -> Result<(Vec<(usize, usize)>, usize)> {
    let mut raw = Vec::new();
    for (lineno, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(parse_err(lineno, "edge must be 'src dst'"));
        }
        let id = |t: &str| -> Result<usize> { t.parse().map_err(|_| parse_err(lineno, format!("bad node id {t:?}"))) };
        raw.push((id(toks[0])?, id(toks[1])?));
    }
    if raw.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let min = raw.iter().map(|&(s, d)| s.min(d)).min().unwrap_or(0);
    let base = usize::from(min >= 1);
    let edges: Vec<(usize, usize)> = raw.into_iter().map(|(s, d)| (s - base, d - base)).collect();
    let n = edges.iter().map(|&(s, d)| s.max(d)).max().unwrap_or(0) + 1;
    Ok((edges, n))
}

/// Dense CSV unless the first line is a MatrixMarket banner.
pub fn parse_matrix_auto(text: &str) -> Result<Matrix> {
    if text.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
        parse_matrix_market(text)
    } else {
        parse_dense_csv(text)
    }
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    parse_matrix_auto(&fs::read_to_string(path)?)
}

pub fn read_edge_list(path: &Path) -> Result<(Vec<(usize, usize)>, usize)> {
    parse_edge_list(&fs::read_to_string(path)?)
}

/// A single line of comma-separated reals (first content line of the text).
pub fn parse_vector_csv(text: &str) -> Result<Vec<f64>> {
    let (lineno, line) = content_lines(text).next().ok_or_else(|| parse_err(1, "empty vector"))?;
    line.split(',').map(|t| parse_f64(t, lineno)).collect()
}

pub fn format_vector_csv(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}
