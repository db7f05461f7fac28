use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

pub fn load_matrix_market<P: AsRef<Path>>(path: P) -> Result<SparseMatrix> {
    let f = File::open(path)?;
    read_matrix_market(BufReader::new(f))
}

#[derive(PartialEq)]
enum Field {
    Real,
    Pattern,
}

/// Parses a coordinate-format Matrix Market stream (`real`, `integer` or `pattern`
/// field; `general` or `symmetric` symmetry).
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix> {
    let mut lines = reader.lines().enumerate();
    let parse = |line: usize, msg: String| Error::Parse { line, msg };

    let (lno, header) = match lines.next() {
        Some((k, l)) => (k + 1, l?),
        None => return Err(parse(1, "empty file".into())),
    };
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(parse(lno, "missing %%MatrixMarket matrix header".into()));
    }
    if h[2] != "coordinate" {
        return Err(parse(lno, format!("unsupported format '{}'", h[2])));
    }
    let field = match h[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(parse(lno, format!("unsupported field '{other}'"))),
    };
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse(lno, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut n = 0;
    for (k, line) in lines {
        let lno = k + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if tok.len() != 3 {
                    return Err(parse(lno, "expected 'rows cols nnz'".into()));
                }
                let v: Vec<usize> = tok
                    .iter()
                    .map(|s| s.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse(lno, format!("bad size line: {e}")))?;
                if v[0] != v[1] {
                    return Err(Error::NotSquare {
                        rows: v[0],
                        cols: v[1],
                    });
                }
                if v[0] == 0 {
                    return Err(parse(lno, "dimension must be positive".into()));
                }
                n = v[0];
                size = Some((v[0], v[1], v[2]));
                triplets.reserve(v[2]);
            }
            Some(_) => {
                let want = if field == Field::Pattern { 2 } else { 3 };
                if tok.len() < want {
                    return Err(parse(lno, format!("expected {want} fields")));
                }
                let idx = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|e| parse(lno, format!("bad index '{s}': {e}")))
                };
                let (i, j) = (idx(tok[0])?, idx(tok[1])?);
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::IndexOutOfRange {
                        line: Some(lno),
                        row: i,
                        col: j,
                        n,
                    });
                }
                let v = if field == Field::Pattern {
                    1.0
                } else {
                    tok[2]
                        .parse::<f64>()
                        .map_err(|e| parse(lno, format!("bad value '{}': {e}", tok[2])))?
                };
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry {
                        line: Some(lno),
                        row: i,
                        col: j,
                    });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        line: Some(lno),
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    if size.is_none() {
        return Err(parse(lno, "missing size line".into()));
    }
    SparseMatrix::from_triplets(n, &triplets)
}

pub fn write_matrix_market<W: Write>(a: &SparseMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.n(), a.n(), a.nnz())?;
    for (i, j, v) in a.iter() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}
