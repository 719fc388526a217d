//! Plain-text matrix format: a header line `q d`, then `q·q` lines with `d`
//! real components each (row-major). Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::matrix::{CMat, SquareMatrix};
use super::params::Field;
use crate::error::{Error, Result};

pub fn parse_matrix(text: &str) -> Result<SquareMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty matrix file".into() })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::Parse { line: hline, message: format!("expected header `q d`, got `{header}`") });
    }
    let q: usize = head[0]
        .parse()
        .map_err(|_| Error::Parse { line: hline, message: format!("bad matrix size `{}`", head[0]) })?;
    let d: usize = head[1]
        .parse()
        .map_err(|_| Error::Parse { line: hline, message: format!("bad field dimension `{}`", head[1]) })?;
    let field = Field::from_d(d).map_err(|e| Error::Parse { line: hline, message: e.to_string() })?;
    if q == 0 {
        return Err(Error::Parse { line: hline, message: "matrix size must be positive".into() });
    }
    let mut entries = Vec::with_capacity(q * q);
    let mut last_line = hline;
    for (lineno, line) in lines {
        last_line = lineno;
        if entries.len() == q * q {
            return Err(Error::Parse { line: lineno, message: format!("more than {} entry lines", q * q) });
        }
        let comps = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse { line: lineno, message: format!("bad number: {e}") })?;
        if comps.len() != d {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {d} component(s), got {}", comps.len()),
            });
        }
        entries.push(Complex64::new(comps[0], if d == 2 { comps[1] } else { 0.0 }));
    }
    if entries.len() != q * q {
        return Err(Error::Parse {
            line: last_line,
            message: format!("expected {} entry lines, got {}", q * q, entries.len()),
        });
    }
    SquareMatrix::from_data(field, CMat::from_fn(q, q, |i, j| entries[i * q + j]))
}

pub fn format_matrix(m: &SquareMatrix) -> String {
    let q = m.q();
    let d = m.field().d();
    let mut out = format!("{q} {d}\n");
    for i in 0..q {
        for j in 0..q {
            let z = m.get(i, j);
            if d == 1 {
                writeln!(out, "{:e}", z.re).unwrap();
            } else {
                writeln!(out, "{:e} {:e}", z.re, z.im).unwrap();
            }
        }
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<SquareMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &SquareMatrix) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_real_and_complex() {
        let m = parse_matrix("2 1\n1\n2\n2\n3\n").unwrap();
        assert_eq!(m.field(), Field::Real);
        assert_eq!(m.get(1, 0).re, 2.0);
        let c = parse_matrix("# comment\n1 2\n0.5 -0.25\n").unwrap();
        assert_eq!(c.get(0, 0), Complex64::new(0.5, -0.25));
    }

    #[test]
    fn round_trip_is_exact() {
        let m = SquareMatrix::from_complex_rows(
            2,
            &[
                Complex64::new(1.0 / 3.0, 0.0),
                Complex64::new(0.1, -0.7),
                Complex64::new(0.1, 0.7),
                Complex64::new(2e-17, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn diagnostics_name_the_line() {
        match parse_matrix("2 1\n1\nx\n2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_matrix("2 1\n1 0\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("component"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_matrix("2 4\n").unwrap_err().to_string().contains("quaternion"));
        assert!(parse_matrix("2 1\n1\n2\n").is_err());
    }
}
