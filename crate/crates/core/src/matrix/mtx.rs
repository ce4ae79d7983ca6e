//! Matrix Market (`.mtx`) reader and writer for real matrices.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::csr::CsrMatrix;
use super::dense::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Reads a real or integer Matrix Market file into CSR form.
///
/// Symmetric storage is expanded, indices become 0-based and duplicate
/// coordinate entries are summed. `pattern` and `complex` fields are rejected.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_market(&text, path)
}

/// Parses Matrix Market text; `origin` is only used in diagnostics.
pub fn parse_matrix_market(text: &str, origin: &Path) -> Result<CsrMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(hline, format!("malformed header `{header}`")));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(err(hline, format!("unsupported format `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        "pattern" => {
            return Err(err(
                hline,
                "pattern matrices carry no values and cannot define a linear system".into(),
            ))
        }
        other => return Err(err(hline, format!("unsupported field type `{other}`"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(err(hline, format!("unsupported symmetry `{other}`"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = data.next().ok_or_else(|| err(hline, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| err(sline, format!("bad size line `{size}`: {e}")))?;
    let expected_dims = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(err(
            sline,
            format!("size line needs {expected_dims} integers, got `{size}`"),
        ));
    }
    let (m, n) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && m != n {
        return Err(err(sline, format!("{m}x{n} matrix cannot be stored symmetric")));
    }

    let parse_val = |line: usize, t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|e| err(line, format!("bad value `{t}`: {e}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(line, format!("non-finite value `{t}`")))
        }
    };

    let mut triplets = Vec::new();
    let mut push = |i: usize, j: usize, v: f64| {
        triplets.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, v)),
                Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
            }
        }
    };

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (line, l) in data {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(err(line, format!("expected `row col value`, got `{l}`")));
                }
                let idx = |s: &str, dim: usize| -> Result<usize> {
                    let k: usize = s.parse().map_err(|e| err(line, format!("bad index `{s}`: {e}")))?;
                    if k == 0 || k > dim {
                        return Err(err(line, format!("index {k} out of range 1..={dim}")));
                    }
                    Ok(k - 1)
                };
                let i = idx(t[0], m)?;
                let j = idx(t[1], n)?;
                if symmetry != Symmetry::General && j > i {
                    return Err(err(
                        line,
                        format!("entry ({}, {}) above the diagonal in symmetric storage", i + 1, j + 1),
                    ));
                }
                if symmetry == Symmetry::SkewSymmetric && i == j {
                    return Err(err(line, "diagonal entry in skew-symmetric storage".into()));
                }
                push(i, j, parse_val(line, t[2])?);
                seen += 1;
            }
            if seen != nnz {
                return Err(err(sline, format!("header promises {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // column-major; symmetric storage lists the lower triangle only
            let mut cells = Vec::new();
            for j in 0..n {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                for i in start..m {
                    cells.push((i, j));
                }
            }
            let mut k = 0;
            for (line, l) in data {
                for tok in l.split_whitespace() {
                    let Some(&(i, j)) = cells.get(k) else {
                        return Err(err(line, "more values than the array holds".into()));
                    };
                    push(i, j, parse_val(line, tok)?);
                    k += 1;
                }
            }
            if k != cells.len() {
                return Err(err(sline, format!("array needs {} values, found {k}", cells.len())));
            }
        }
    }
    CsrMatrix::from_triplets(m, n, &triplets)
}

/// Writes a matrix in `coordinate real general` form.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(f, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
    writeln!(f, "{} {} {}", a.rows(), a.cols(), a.nnz()).map_err(io)?;
    for i in 0..a.rows() {
        let (idx, vals) = a.row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            writeln!(f, "{} {} {:?}", i + 1, j + 1, v).map_err(io)?;
        }
    }
    f.flush().map_err(io)
}

/// Convenience for dense inputs.
pub fn write_dense_matrix_market(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    write_matrix_market(path, &CsrMatrix::from_dense(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CsrMatrix> {
        parse_matrix_market(s, Path::new("test.mtx"))
    }

    #[test]
    fn minimal_coordinate() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2.0\n2 2 3.0\n").unwrap();
        assert_eq!(a.to_dense(), DenseMatrix::from_diag(&[2.0, 3.0]));
    }

    #[test]
    fn symmetric_lower_triangle_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 4\n2 1 1\n3 2 -2\n3 3 5\n";
        let a = parse(text).unwrap().to_dense();
        let expect =
            DenseMatrix::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 0.0, -2.0], vec![0.0, -2.0, 5.0]]).unwrap();
        assert_eq!(a, expect);
    }

    #[test]
    fn duplicates_summed() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n1 1 2.0\n").unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.values(), &[3.0]);
    }

    #[test]
    fn array_format_is_column_major() {
        let a = parse("%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n").unwrap();
        assert_eq!(
            a.to_dense(),
            DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
        );
    }

    #[test]
    fn integer_field_accepted() {
        let a = parse("%%MatrixMarket matrix coordinate integer general\n1 2 1\n1 2 7\n").unwrap();
        assert_eq!(a.get(0, 1), 7.0);
    }

    #[test]
    fn rejects_pattern_and_complex() {
        assert!(parse("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").is_err());
    }

    #[test]
    fn diagnostics_name_the_line() {
        let e = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2.0\n3 1 1.0\n").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            parse("%%MatrixMarket vector coordinate real general\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 2.0\n").is_err());
    }
}
