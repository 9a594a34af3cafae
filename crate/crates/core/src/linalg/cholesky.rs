use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::RatMatrix;
use crate::error::{Error, Result};

/// Exact decomposition `G = Lᵀ · D · L` with `L` unit upper-triangular.
///
/// Equivalently `xGxᵀ = Σᵢ dᵢ (xᵢ + Σ_{j>i} lᵢⱼ xⱼ)²`, the form consumed by
/// enumeration.
#[derive(Clone, Debug)]
pub struct Ldl {
    pub l: RatMatrix,
    pub d: Vec<BigRational>,
}

impl Ldl {
    pub fn recompose(&self) -> RatMatrix {
        let d = RatMatrix::diagonal(&self.d);
        self.l.transpose().mul(&d).and_then(|x| x.mul(&self.l)).expect("square")
    }
}

pub fn rational_cholesky(g: &RatMatrix) -> Result<Ldl> {
    if !g.is_symmetric() {
        return Err(Error::InvalidArgument("Gram matrix is not symmetric".into()));
    }
    let n = g.rows();
    let mut l = RatMatrix::identity(n);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let mut di = g[(i, i)].clone();
        for k in 0..i {
            let lki = &l[(k, i)];
            di -= lki * lki * &d[k];
        }
        if !di.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        for j in i + 1..n {
            let mut s = g[(i, j)].clone();
            for k in 0..i {
                s -= &l[(k, i)] * &l[(k, j)] * &d[k];
            }
            l[(i, j)] = s / &di;
        }
        d.push(di);
    }
    debug_assert!((0..n).all(|i| l[(i, i)].is_one() && (0..i).all(|j| l[(i, j)].is_zero())));
    Ok(Ldl { l, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMatrix;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn identity_and_scalar() {
        let c = rational_cholesky(&RatMatrix::identity(3)).unwrap();
        assert_eq!(c.l, RatMatrix::identity(3));
        assert!(c.d.iter().all(One::is_one));
        let c = rational_cholesky(&IntMatrix::from_i64_rows(&[[4]]).unwrap().to_rational()).unwrap();
        assert_eq!(c.d, vec![q(4, 1)]);
    }

    #[test]
    fn rank_two_block() {
        let g = IntMatrix::from_i64_rows(&[[6, 3], [3, 12]]).unwrap().to_rational();
        let c = rational_cholesky(&g).unwrap();
        assert_eq!(c.d, vec![q(6, 1), q(21, 2)]);
        assert_eq!(c.l[(0, 1)], q(1, 2));
        assert_eq!(c.recompose(), g);
    }

    #[test]
    fn indefinite_is_rejected() {
        let g = IntMatrix::from_i64_rows(&[[1, 2], [2, 1]]).unwrap().to_rational();
        assert!(matches!(rational_cholesky(&g), Err(Error::NotPositiveDefinite)));
        let z = RatMatrix::zeros(2, 2);
        assert!(matches!(rational_cholesky(&z), Err(Error::NotPositiveDefinite)));
    }
}
