use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::matrix::{IntMatrix, RatMatrix};
use crate::error::{Error, Result};

/// Exact determinant by fraction-free Bareiss elimination.
pub fn det(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("determinant of {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a: Vec<Vec<BigInt>> = m.iter_rows().map(|r| r.to_vec()).collect();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if sign < 0 { -d } else { d })
}

/// Determinant of a rational matrix, by clearing denominators row-wise.
pub fn det_rational(m: &RatMatrix) -> Result<BigRational> {
    if !m.is_square() {
        return Err(Error::Dimension("determinant of non-square matrix".into()));
    }
    let den = m.denominator_lcm();
    let scaled = m.map(|x| (x * BigRational::from_integer(den.clone())).to_integer());
    let d = det(&scaled)?;
    let scale = num_traits::pow(den, m.rows());
    Ok(BigRational::new(d, scale))
}

/// Exact inverse by Gauss–Jordan elimination over the rationals.
pub fn inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension("inverse of non-square matrix".into()));
    }
    let n = m.rows();
    let mut a: Vec<Vec<BigRational>> = m.iter_rows().map(|r| r.to_vec()).collect();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero()).ok_or(Error::Singular)?;
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for j in 0..n {
            a[c][j] = &a[c][j] / &piv;
            inv[c][j] = &inv[c][j] / &piv;
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..n {
                let x = &f * &a[c][j];
                a[i][j] -= x;
                let y = &f * &inv[c][j];
                inv[i][j] -= y;
            }
        }
    }
    RatMatrix::from_rows(&inv)
}

/// Inverse of an integer matrix with determinant ±1.
pub fn unimodular_inverse(m: &IntMatrix) -> Result<IntMatrix> {
    inverse(&m.to_rational())?
        .to_integer()
        .ok_or_else(|| Error::InvalidArgument("matrix is not unimodular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_determinants() {
        assert_eq!(det(&IntMatrix::identity(5)).unwrap(), BigInt::one());
        let m = IntMatrix::from_i64_rows(&[[6, 3], [3, 12]]).unwrap();
        assert_eq!(det(&m).unwrap(), BigInt::from(63));
        let sw = IntMatrix::from_i64_rows(&[[0, 1], [1, 0]]).unwrap();
        assert_eq!(det(&sw).unwrap(), BigInt::from(-1));
        let sing = IntMatrix::from_i64_rows(&[[1, 2], [2, 4]]).unwrap();
        assert!(det(&sing).unwrap().is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = IntMatrix::from_i64_rows(&[[2, 1, 0], [1, 3, 1], [0, 1, 4]]).unwrap().to_rational();
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), RatMatrix::identity(3));
        let z = RatMatrix::zeros(2, 2);
        assert!(matches!(inverse(&z), Err(Error::Singular)));
    }

    #[test]
    fn rational_determinant() {
        let m = IntMatrix::from_i64_rows(&[[28, 7], [7, 2]]).unwrap().to_rational();
        let m = m.scale(&BigRational::new(BigInt::one(), BigInt::from(21)));
        assert_eq!(det_rational(&m).unwrap(), BigRational::new(BigInt::one(), BigInt::from(63)));
    }
}
