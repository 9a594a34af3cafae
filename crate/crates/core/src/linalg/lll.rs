//! Integral LLL reduction of a positive definite Gram matrix.
//!
//! Works entirely with the integers `dᵢ` (leading principal minors) and the
//! scaled Gram–Schmidt coefficients `λₖⱼ = dⱼ μₖⱼ`, so no rational number
//! is ever formed during the reduction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::{IntMatrix, RatMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LllResult {
    /// `T · G · Tᵀ`.
    pub gram: RatMatrix,
    /// Unimodular change of basis; row `i` expresses new basis vector `i`.
    pub transform: IntMatrix,
}

pub fn default_delta() -> BigRational {
    BigRational::new(BigInt::from(3), BigInt::from(4))
}

pub fn lll_reduce_gram(g: &RatMatrix, delta: &BigRational) -> Result<LllResult> {
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    if delta <= &quarter || delta > &BigRational::one() {
        return Err(Error::InvalidArgument(format!("LLL parameter {delta} outside (1/4, 1]")));
    }
    if !g.is_symmetric() {
        return Err(Error::InvalidArgument("Gram matrix is not symmetric".into()));
    }
    let den = g.denominator_lcm();
    let scaled = g.map(|x| (x * BigRational::from_integer(den.clone())).to_integer());
    let transform = lll_integral(&scaled, delta.numer(), delta.denom())?;
    let gram = transform.to_rational().congruence(g)?;
    Ok(LllResult { gram, transform })
}

/// Integer Gram version returning the transform only.
pub fn lll_transform(g: &IntMatrix) -> Result<IntMatrix> {
    let d = default_delta();
    lll_integral(g, d.numer(), d.denom())
}

struct State {
    b: Vec<Vec<BigInt>>,
    h: Vec<Vec<BigInt>>,
    // 1-based bookkeeping; d[0] = 1
    d: Vec<BigInt>,
    lam: Vec<Vec<BigInt>>,
}

impl State {
    fn red(&mut self, k: usize, l: usize) {
        let two_lam: BigInt = &self.lam[k][l] * 2;
        if two_lam.abs() <= self.d[l] {
            return;
        }
        // nearest integer to λ/d
        let dl = self.d[l].clone();
        let q = (&two_lam + &dl).div_floor(&(&dl * 2));
        let (k0, l0) = (k - 1, l - 1);
        for j in 0..self.h[k0].len() {
            let t = &q * &self.h[l0][j];
            self.h[k0][j] -= t;
        }
        let n = self.b.len();
        for j in 0..n {
            let t = &q * &self.b[l0][j];
            self.b[k0][j] -= t;
        }
        for i in 0..n {
            let t = &q * &self.b[i][l0];
            self.b[i][k0] -= t;
        }
        let t = &q * &dl;
        self.lam[k][l] -= t;
        for i in 1..l {
            let t = &q * &self.lam[l][i];
            self.lam[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        let (k0, k1) = (k - 1, k - 2);
        self.h.swap(k0, k1);
        self.b.swap(k0, k1);
        for row in self.b.iter_mut() {
            row.swap(k0, k1);
        }
        for j in 1..k - 1 {
            let t = std::mem::take(&mut self.lam[k][j]);
            self.lam[k][j] = std::mem::replace(&mut self.lam[k - 1][j], t);
        }
        let lam = self.lam[k][k - 1].clone();
        let bb = (&self.d[k - 2] * &self.d[k] + &lam * &lam) / &self.d[k - 1];
        for i in k + 1..=kmax {
            let t = self.lam[i][k].clone();
            let nik = (&self.d[k] * &self.lam[i][k - 1] - &lam * &t) / &self.d[k - 1];
            let nik1 = (&bb * &t + &lam * &nik) / &self.d[k];
            self.lam[i][k] = nik;
            self.lam[i][k - 1] = nik1;
        }
        self.d[k - 1] = bb;
    }
}

fn lll_integral(g: &IntMatrix, p: &BigInt, q: &BigInt) -> Result<IntMatrix> {
    let n = g.rows();
    let b: Vec<Vec<BigInt>> = g.iter_rows().map(|r| r.to_vec()).collect();
    let h: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect()).collect();
    if n == 0 {
        return Ok(IntMatrix::zeros(0, 0));
    }
    if !b[0][0].is_positive() {
        return Err(Error::NotPositiveDefinite);
    }
    let mut st = State {
        d: {
            let mut d = vec![BigInt::zero(); n + 1];
            d[0] = BigInt::one();
            d[1] = b[0][0].clone();
            d
        },
        b,
        h,
        lam: vec![vec![BigInt::zero(); n + 1]; n + 1],
    };
    let mut k = 2;
    let mut kmax = 1;
    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = st.b[k - 1][j - 1].clone();
                for i in 1..j {
                    u = (&st.d[i] * &u - &st.lam[k][i] * &st.lam[j][i]) / &st.d[i - 1];
                }
                if j < k {
                    st.lam[k][j] = u;
                } else {
                    if !u.is_positive() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    st.d[k] = u;
                }
            }
        }
        loop {
            st.red(k, k - 1);
            let lhs = q * &st.d[k] * &st.d[k - 2];
            let lam = &st.lam[k][k - 1];
            let rhs = p * &st.d[k - 1] * &st.d[k - 1] - q * lam * lam;
            if lhs < rhs {
                st.swap(k, kmax);
                k = (k - 1).max(2);
            } else {
                for l in (1..k - 1).rev() {
                    st.red(k, l);
                }
                k += 1;
                break;
            }
        }
    }
    IntMatrix::from_rows(&st.h)
}
