//! Matrix Market coordinate I/O.
//!
//! Supports `real` and `complex` fields with `general` or `symmetric`
//! symmetry. Indices are 1-based on disk and 0-based in memory; symmetric
//! files are expanded to full storage on read.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn mm_read<S: Scalar>(path: impl AsRef<Path>) -> Result<CsrMatrix<S>> {
    let f = std::fs::File::open(path)?;
    mm_read_from(BufReader::new(f))
}

pub fn mm_read_from<S: Scalar>(reader: impl Read) -> Result<CsrMatrix<S>> {
    let mut lines = BufReader::new(reader).lines().enumerate();

    let (lineno, header) = loop {
        match lines.next() {
            Some((i, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break (i + 1, line);
                }
            }
            None => {
                return Err(Error::MmParse {
                    line: 0,
                    msg: "empty file".into(),
                })
            }
        }
    };

    let fields: Vec<String> = header.split_whitespace().map(|t| t.to_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::MmParse {
            line: lineno,
            msg: format!("malformed header: {header}"),
        });
    }
    if fields[2] != "coordinate" {
        return Err(Error::MmParse {
            line: lineno,
            msg: format!("unsupported format {}", fields[2]),
        });
    }
    let field = match fields[3].as_str() {
        "real" | "integer" => Field::Real,
        "complex" => Field::Complex,
        other => {
            return Err(Error::MmParse {
                line: lineno,
                msg: format!("unsupported field {other}"),
            })
        }
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => {
            return Err(Error::MmParse {
                line: lineno,
                msg: format!("unsupported symmetry {other}"),
            })
        }
    };

    // size line: skip comments
    let (sline, sizes) = loop {
        match lines.next() {
            Some((i, line)) => {
                let line = line?;
                let t = line.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                break (i + 1, line);
            }
            None => {
                return Err(Error::MmParse {
                    line: lineno,
                    msg: "missing size line".into(),
                })
            }
        }
    };
    let dims: Vec<&str> = sizes.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(Error::MmParse {
            line: sline,
            msg: format!("expected 'rows cols nnz', found: {sizes}"),
        });
    }
    let parse_count = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::MmParse {
            line: sline,
            msg: format!("bad count {s}"),
        })
    };
    let n_rows = parse_count(dims[0])?;
    let n_cols = parse_count(dims[1])?;
    let nnz = parse_count(dims[2])?;

    let mut triplets: Vec<(usize, usize, S)> = Vec::with_capacity(nnz);
    let mut seen = 0usize;
    while seen < nnz {
        let (i, line) = lines.next().ok_or(Error::MmParse {
            line: sline,
            msg: format!("expected {nnz} entries, found {seen}"),
        })?;
        let line = line?;
        let lineno = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let want = match field {
            Field::Real => 3,
            Field::Complex => 4,
        };
        if toks.len() != want {
            return Err(Error::MmParse {
                line: lineno,
                msg: format!("expected {want} tokens, found {}", toks.len()),
            });
        }
        let r: usize = toks[0].parse().map_err(|_| Error::MmParse {
            line: lineno,
            msg: format!("bad row index {}", toks[0]),
        })?;
        let c: usize = toks[1].parse().map_err(|_| Error::MmParse {
            line: lineno,
            msg: format!("bad column index {}", toks[1]),
        })?;
        if r < 1 || r > n_rows || c < 1 || c > n_cols {
            return Err(Error::MmIndexOutOfRange {
                line: lineno,
                row: r,
                col: c,
                n_rows,
                n_cols,
            });
        }
        let parse_val = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::MmParse {
                line: lineno,
                msg: format!("bad value {s}"),
            })
        };
        let re = parse_val(toks[2])?;
        let im = if field == Field::Complex {
            parse_val(toks[3])?
        } else {
            0.0
        };
        let v = S::from_parts(re, im).ok_or(Error::ComplexIntoReal)?;
        let (r0, c0) = (r - 1, c - 1);
        triplets.push((r0, c0, v));
        if symmetry == Symmetry::Symmetric && r0 != c0 {
            triplets.push((c0, r0, v));
        }
        seen += 1;
    }

    CsrMatrix::from_triplets(n_rows, n_cols, triplets)
}

pub fn mm_write<S: Scalar>(a: &CsrMatrix<S>, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    mm_write_to(a, BufWriter::new(f))
}

pub fn mm_write_to<S: Scalar>(a: &CsrMatrix<S>, mut w: impl Write) -> Result<()> {
    let field = if S::IS_COMPLEX { "complex" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for r in 0..a.n_rows() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if S::IS_COMPLEX {
                writeln!(w, "{} {} {} {}", r + 1, c + 1, v.re(), v.im())?;
            } else {
                writeln!(w, "{} {} {}", r + 1, c + 1, v.re())?;
            }
        }
    }
    Ok(())
}
