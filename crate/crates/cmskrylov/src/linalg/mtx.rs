//! Matrix Market file reader for the operator and metric inputs.
//!
//! Supports `coordinate` and `array` formats with `real`, `integer` or
//! `complex` fields and `general`, `symmetric` or `hermitian` symmetry.
//! Only square matrices are accepted; symmetry mirroring fills the upper
//! triangle from the stored lower one.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::matrix::CMatrix;
use super::LinalgError;

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> LinalgError {
    LinalgError::MatrixMarket {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Reads a square matrix from a Matrix Market file.
///
/// # Errors
/// `Io` on filesystem failures; `MatrixMarket` with the offending line
/// number on malformed content, non-square shapes, or unsupported
/// format/field/symmetry combinations.
pub fn read_matrix_market(path: &Path) -> Result<CMatrix, LinalgError> {
    let text = fs::read_to_string(path).map_err(|source| LinalgError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 4 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_error(
            path,
            header_no,
            "expected header `%%MatrixMarket matrix <format> <field> <symmetry>`",
        ));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(parse_error(path, header_no, format!("unsupported format `{other}`"))),
    };
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        other => return Err(parse_error(path, header_no, format!("unsupported field `{other}`"))),
    };
    let symmetry = match tokens.get(4).map(String::as_str) {
        Some("general") | None => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        Some("hermitian") => Symmetry::Hermitian,
        Some(other) => {
            return Err(parse_error(path, header_no, format!("unsupported symmetry `{other}`")))
        }
    };

    // Skip comments and blank lines up to the size line.
    let (size_no, size_line) = loop {
        match lines.next() {
            Some((_, l)) if l.trim_start().starts_with('%') || l.trim().is_empty() => continue,
            Some((no, l)) => break (no, l),
            None => return Err(parse_error(path, header_no, "missing size line")),
        }
    };
    let dims: Vec<&str> = size_line.split_whitespace().collect();

    let values_per_entry = match field {
        Field::Complex => 2,
        Field::Real | Field::Integer => 1,
    };
    let parse_value = |toks: &[&str], no: usize| -> Result<Complex64, LinalgError> {
        let re: f64 = toks[0]
            .parse()
            .map_err(|_| parse_error(path, no, format!("invalid number `{}`", toks[0])))?;
        let im: f64 = if values_per_entry == 2 {
            toks[1]
                .parse()
                .map_err(|_| parse_error(path, no, format!("invalid number `{}`", toks[1])))?
        } else {
            0.0
        };
        Ok(Complex64::new(re, im))
    };

    match format {
        Format::Coordinate => {
            if dims.len() != 3 {
                return Err(parse_error(path, size_no, "expected `nrows ncols nnz`"));
            }
            let nrows: usize = dims[0]
                .parse()
                .map_err(|_| parse_error(path, size_no, "invalid row count"))?;
            let ncols: usize = dims[1]
                .parse()
                .map_err(|_| parse_error(path, size_no, "invalid column count"))?;
            let nnz: usize = dims[2]
                .parse()
                .map_err(|_| parse_error(path, size_no, "invalid entry count"))?;
            if nrows != ncols {
                return Err(parse_error(path, size_no, "matrix must be square"));
            }
            let mut a = CMatrix::zeros(nrows, ncols);
            let mut seen = 0usize;
            for (no, raw) in lines {
                let l = raw.trim();
                if l.is_empty() || l.starts_with('%') {
                    continue;
                }
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != 2 + values_per_entry {
                    return Err(parse_error(path, no, "wrong number of fields in entry"));
                }
                let i: usize = toks[0]
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i >= 1 && i <= nrows)
                    .ok_or_else(|| parse_error(path, no, "row index out of range"))?;
                let j: usize = toks[1]
                    .parse::<usize>()
                    .ok()
                    .filter(|&j| j >= 1 && j <= ncols)
                    .ok_or_else(|| parse_error(path, no, "column index out of range"))?;
                let v = parse_value(&toks[2..], no)?;
                let (i, j) = (i - 1, j - 1);
                a[(i, j)] = v;
                if i != j {
                    match symmetry {
                        Symmetry::Symmetric => a[(j, i)] = v,
                        Symmetry::Hermitian => a[(j, i)] = v.conj(),
                        Symmetry::General => {}
                    }
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_error(
                    path,
                    size_no,
                    format!("declared {nnz} entries but found {seen}"),
                ));
            }
            Ok(a)
        }
        Format::Array => {
            if dims.len() != 2 {
                return Err(parse_error(path, size_no, "expected `nrows ncols`"));
            }
            let nrows: usize = dims[0]
                .parse()
                .map_err(|_| parse_error(path, size_no, "invalid row count"))?;
            let ncols: usize = dims[1]
                .parse()
                .map_err(|_| parse_error(path, size_no, "invalid column count"))?;
            if nrows != ncols {
                return Err(parse_error(path, size_no, "matrix must be square"));
            }
            let n = nrows;
            // Column-major order; symmetric/hermitian files store the lower
            // triangle only.
            let mut positions: Vec<(usize, usize)> = Vec::new();
            for j in 0..n {
                let start = if symmetry == Symmetry::General { 0 } else { j };
                for i in start..n {
                    positions.push((i, j));
                }
            }
            let mut a = CMatrix::zeros(n, n);
            let mut idx = 0usize;
            let mut last_no = size_no;
            for (no, raw) in lines {
                let l = raw.trim();
                if l.is_empty() || l.starts_with('%') {
                    continue;
                }
                last_no = no;
                let toks: Vec<&str> = l.split_whitespace().collect();
                if !toks.len().is_multiple_of(values_per_entry) {
                    return Err(parse_error(path, no, "wrong number of fields in entry"));
                }
                for chunk in toks.chunks(values_per_entry) {
                    if idx >= positions.len() {
                        return Err(parse_error(path, no, "more values than the shape allows"));
                    }
                    let v = parse_value(chunk, no)?;
                    let (i, j) = positions[idx];
                    a[(i, j)] = v;
                    if i != j {
                        match symmetry {
                            Symmetry::Symmetric => a[(j, i)] = v,
                            Symmetry::Hermitian => a[(j, i)] = v.conj(),
                            Symmetry::General => {}
                        }
                    }
                    idx += 1;
                }
            }
            if idx != positions.len() {
                return Err(parse_error(
                    path,
                    last_no,
                    format!("expected {} values but found {idx}", positions.len()),
                ));
            }
            Ok(a)
        }
    }
}
