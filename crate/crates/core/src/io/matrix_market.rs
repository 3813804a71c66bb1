//! Matrix Market reader. Files are densified on load.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixMarketHeader {
    pub format: MmFormat,
    pub field: MmField,
    pub symmetry: MmSymmetry,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str, no: usize) -> Result<MatrixMarketHeader> {
    if !line.starts_with("%%MatrixMarket") {
        return Err(parse_err(no, "missing %%MatrixMarket banner"));
    }
    let toks: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if toks.len() != 5 {
        return Err(parse_err(
            no,
            "banner needs object, format, field and symmetry",
        ));
    }
    if toks[1] != "matrix" {
        return Err(parse_err(no, format!("unsupported object {:?}", toks[1])));
    }
    let format = match toks[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => return Err(parse_err(no, format!("unsupported format {other:?}"))),
    };
    let field = match toks[3].as_str() {
        "real" => MmField::Real,
        "integer" => MmField::Integer,
        "pattern" => MmField::Pattern,
        other => return Err(parse_err(no, format!("unsupported field {other:?}"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        other => return Err(parse_err(no, format!("unsupported symmetry {other:?}"))),
    };
    if format == MmFormat::Array && field == MmField::Pattern {
        return Err(parse_err(
            no,
            "pattern field is only valid for coordinate format",
        ));
    }
    Ok(MatrixMarketHeader {
        format,
        field,
        symmetry,
    })
}

fn parse_usize(tok: &str, no: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(no, format!("invalid {what} {tok:?}")))
}

fn parse_value(tok: Option<&str>, field: MmField, no: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(no, "missing value"))?;
    let v = match field {
        MmField::Integer => tok
            .parse::<i64>()
            .map(|v| v as f64)
            .map_err(|_| parse_err(no, format!("invalid integer {tok:?}")))?,
        _ => tok
            .parse::<f64>()
            .map_err(|_| parse_err(no, format!("invalid real {tok:?}")))?,
    };
    if !v.is_finite() {
        return Err(parse_err(no, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    seen: Vec<bool>,
}

impl Dense {
    fn put(&mut self, i: usize, j: usize, v: f64, line: usize) -> Result<()> {
        let at = i * self.cols + j;
        if self.seen[at] {
            return Err(Error::DuplicateEntry {
                line,
                row: i + 1,
                col: j + 1,
            });
        }
        self.seen[at] = true;
        self.data[at] = v;
        Ok(())
    }
}

/// Reads a whole Matrix Market stream into a dense matrix.
pub fn parse_matrix_market<T: Real, R: BufRead>(reader: R) -> Result<DenseMatrix<T>> {
    parse_matrix_market_with_header(reader).map(|(_, m)| m)
}

pub fn parse_matrix_market_str<T: Real>(text: &str) -> Result<DenseMatrix<T>> {
    parse_matrix_market(text.as_bytes())
}

pub fn read_matrix_market<T: Real>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    let f = File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_matrix_market(BufReader::new(f))
}

pub fn parse_matrix_market_with_header<T: Real, R: BufRead>(
    reader: R,
) -> Result<(MatrixMarketHeader, DenseMatrix<T>)> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (no, banner) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = parse_header(&banner?, no)?;

    // Data lines with comments and blanks stripped.
    let mut data = lines.filter_map(|(no, l)| match l {
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('%')).then(|| Ok((no, t.to_string())))
        }
        Err(e) => Some(Err(Error::from(e))),
    });

    let (size_no, size_line) = data
        .next()
        .ok_or_else(|| parse_err(no, "missing size line"))??;
    let toks: Vec<&str> = size_line.split_whitespace().collect();
    let want = match header.format {
        MmFormat::Coordinate => 3,
        MmFormat::Array => 2,
    };
    if toks.len() != want {
        return Err(parse_err(
            size_no,
            format!("size line needs {want} integers"),
        ));
    }
    let rows = parse_usize(toks[0], size_no, "row count")?;
    let cols = parse_usize(toks[1], size_no, "column count")?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(size_no, "matrix dimensions must be positive"));
    }
    if header.symmetry == MmSymmetry::Symmetric && rows != cols {
        return Err(parse_err(size_no, "symmetric matrix must be square"));
    }
    let mut dense = Dense {
        rows,
        cols,
        data: vec![0.0; rows * cols],
        seen: vec![false; rows * cols],
    };
    let symmetric = header.symmetry == MmSymmetry::Symmetric;

    match header.format {
        MmFormat::Coordinate => {
            let nnz = parse_usize(toks[2], size_no, "entry count")?;
            let mut count = 0;
            for item in data {
                let (no, line) = item?;
                count += 1;
                if count > nnz {
                    return Err(parse_err(
                        no,
                        format!("more than the declared {nnz} entries"),
                    ));
                }
                let mut t = line.split_whitespace();
                let i = parse_usize(t.next().unwrap_or(""), no, "row index")?;
                let j = parse_usize(
                    t.next()
                        .ok_or_else(|| parse_err(no, "missing column index"))?,
                    no,
                    "column index",
                )?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Dimension {
                        line: no,
                        row: i,
                        col: j,
                        rows,
                        cols,
                    });
                }
                let v = match header.field {
                    MmField::Pattern => 1.0,
                    f => parse_value(t.next(), f, no)?,
                };
                if t.next().is_some() {
                    return Err(parse_err(no, "trailing tokens after entry"));
                }
                dense.put(i - 1, j - 1, v, no)?;
                if symmetric && i != j {
                    dense.put(j - 1, i - 1, v, no)?;
                }
            }
            if count != nnz {
                return Err(parse_err(
                    size_no,
                    format!("declared {nnz} entries, found {count}"),
                ));
            }
        }
        MmFormat::Array => {
            // Column-major; symmetric files list the lower triangle only.
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = if symmetric { j } else { 0 };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut it = positions.iter();
            let mut last_no = size_no;
            for item in data {
                let (no, line) = item?;
                last_no = no;
                for tok in line.split_whitespace() {
                    let &(i, j) = it
                        .next()
                        .ok_or_else(|| parse_err(no, "more values than the declared shape"))?;
                    let v = parse_value(Some(tok), header.field, no)?;
                    dense.put(i, j, v, no)?;
                    if symmetric && i != j {
                        dense.put(j, i, v, no)?;
                    }
                }
            }
            if it.next().is_some() {
                return Err(parse_err(last_no, "fewer values than the declared shape"));
            }
        }
    }

    let m = DenseMatrix::new(
        dense.rows,
        dense.cols,
        dense.data.into_iter().map(T::of).collect(),
    )?;
    Ok((header, m))
}
