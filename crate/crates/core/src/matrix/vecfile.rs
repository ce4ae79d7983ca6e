//! Plain-text vectors: one real per line, blank lines and `%`/`#` comments ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_vector(&text, path)
}

pub fn parse_vector(text: &str, origin: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse {
            path: origin.to_path_buf(),
            line: k + 1,
            message: format!("expected one real number, found {t:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: k + 1,
                message: format!("non-finite value {t}"),
            });
        }
        out.push(v);
    }
    Ok(out)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    for x in v {
        writeln!(f, "{x:e}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks_skipped() {
        let v = parse_vector("% rhs\n1.5\n\n-2e-3\n# end\n", Path::new("b.vec")).unwrap();
        assert_eq!(v, vec![1.5, -2e-3]);
    }

    #[test]
    fn bad_line_is_named() {
        let e = parse_vector("1\n2\nthree\n", Path::new("b.vec")).unwrap_err();
        assert!(e.to_string().contains('3'), "{e}");
        assert!(parse_vector("nan\n", Path::new("b.vec")).is_err());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.vec");
        let v = vec![0.1, -3.25, 1e-300, 7.0];
        write_vector(&p, &v).unwrap();
        assert_eq!(read_vector(&p).unwrap(), v);
    }
}
