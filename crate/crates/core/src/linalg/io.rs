//! Plain-text matrix format: a header line `R C`, then `R` lines of `C`
//! whitespace-separated entries. Rational entries are written `p/q`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::matrix::{IntMatrix, Matrix, RatMatrix};
use crate::error::{Error, Result};

pub fn write_matrix<T: std::fmt::Display>(m: &Matrix<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", m.rows(), m.cols());
    for row in m.iter_rows() {
        let line: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

fn parse_with<T>(text: &str, parse: impl Fn(&str) -> Option<T>) -> Result<(Matrix<T>, usize)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty matrix text".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("header must be `R C`, got `{header}`")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut consumed = 1;
    for _ in 0..rows {
        let (ln, line) = lines.next().ok_or_else(|| Error::Parse("too few rows".into()))?;
        consumed = ln + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse(format!("line {}: expected {cols} entries, got {}", ln + 1, toks.len())));
        }
        for t in toks {
            data.push(parse(t).ok_or_else(|| Error::Parse(format!("line {}: bad entry `{t}`", ln + 1)))?);
        }
    }
    Ok((Matrix::from_vec(rows, cols, data)?, consumed))
}

pub fn parse_int_matrix(text: &str) -> Result<IntMatrix> {
    parse_int_matrix_prefix(text).map(|(m, _)| m)
}

/// Parses one integer matrix from the start of `text`, returning it together
/// with the number of lines consumed.
pub fn parse_int_matrix_prefix(text: &str) -> Result<(IntMatrix, usize)> {
    parse_with(text, |t| BigInt::from_str(t).ok())
}

pub fn parse_rat_matrix(text: &str) -> Result<RatMatrix> {
    parse_rat_matrix_prefix(text).map(|(m, _)| m)
}

pub fn parse_rat_matrix_prefix(text: &str) -> Result<(RatMatrix, usize)> {
    parse_with(text, parse_rational)
}

fn parse_rational(t: &str) -> Option<BigRational> {
    match t.split_once('/') {
        Some((p, q)) => {
            let q = BigInt::from_str(q).ok()?;
            if q == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(BigInt::from_str(p).ok()?, q))
        }
        None => Some(BigRational::from_integer(BigInt::from_str(t).ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rational_tokens() {
        let m = parse_rat_matrix("2 2\n4/3 -7/21\n0 5\n").unwrap();
        assert_eq!(m[(0, 1)], BigRational::new((-1).into(), 3.into()));
        assert_eq!(write_matrix(&m), "2 2\n4/3 -1/3\n0 5\n");
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_int_matrix("").is_err());
        assert!(parse_int_matrix("2 2\n1 2\n").is_err());
        assert!(parse_int_matrix("1 2\n1 2 3\n").is_err());
        assert!(parse_int_matrix("1 1\nx\n").is_err());
        assert!(parse_rat_matrix("1 1\n1/0\n").is_err());
    }

    proptest! {
        #[test]
        fn int_roundtrip_is_bit_exact(rows in 1usize..6, cols in 1usize..6, seed in proptest::collection::vec(-10_000i64..10_000, 36)) {
            let m = IntMatrix::from_i64(rows, cols, &seed[..rows * cols]).unwrap();
            let text = write_matrix(&m);
            let back = parse_int_matrix(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(write_matrix(&back), text);
        }
    }
}
