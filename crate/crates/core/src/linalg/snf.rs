use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;
use crate::error::{Error, Result};

/// Elementary divisors `d₁ | d₂ | … | dₙ` of a nonsingular square matrix.
pub fn snf_diagonal(m: &IntMatrix) -> Result<Vec<BigInt>> {
    if !m.is_square() {
        return Err(Error::Dimension("Smith form of non-square matrix".into()));
    }
    let n = m.rows();
    let mut a: Vec<Vec<BigInt>> = m.iter_rows().map(|r| r.to_vec()).collect();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { return Err(Error::Singular) };
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            let p = a[k][k].clone();
            let mut dirty = false;
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let q = a[i][k].div_floor(&p);
                for j in k..n {
                    let t = &q * &a[k][j];
                    a[i][j] -= t;
                }
                dirty |= !a[i][k].is_zero();
            }
            for j in k + 1..n {
                if a[k][j].is_zero() {
                    continue;
                }
                let q = a[k][j].div_floor(&p);
                for i in k..n {
                    let t = &q * &a[i][k];
                    a[i][j] -= t;
                }
                dirty |= !a[k][j].is_zero();
            }
            if dirty {
                continue;
            }
            // pivot must divide the whole trailing block
            let bad = (k + 1..n).find(|&i| (k + 1..n).any(|j| !a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    for j in k..n {
                        let t = a[i][j].clone();
                        a[k][j] += t;
                    }
                }
                None => break,
            }
        }
        diag.push(a[k][k].abs());
    }
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn diagonal_cases() {
        assert_eq!(snf_diagonal(&IntMatrix::identity(4)).unwrap(), ints(&[1, 1, 1, 1]));
        let m = IntMatrix::from_i64_rows(&[[2, 0], [0, 4]]).unwrap();
        assert_eq!(snf_diagonal(&m).unwrap(), ints(&[2, 4]));
        let m = IntMatrix::from_i64_rows(&[[4, 0], [0, 6]]).unwrap();
        assert_eq!(snf_diagonal(&m).unwrap(), ints(&[2, 12]));
    }

    #[test]
    fn discriminant_of_block_lattice() {
        let mut d = vec![3i64; 20];
        d.extend(vec![21i64; 20]);
        let m = IntMatrix::diagonal(&ints(&d));
        assert_eq!(snf_diagonal(&m).unwrap(), ints(&d));
    }

    #[test]
    fn singular_is_rejected() {
        let m = IntMatrix::from_i64_rows(&[[1, 2], [2, 4]]).unwrap();
        assert!(snf_diagonal(&m).is_err());
    }
}
