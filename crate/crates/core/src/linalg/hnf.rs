//! Row-style Hermite normal form over the integers.
//!
//! Convention: the nonzero rows form an upper echelon matrix with positive
//! pivots, every entry above a pivot lies in `[0, pivot)`, and zero rows sit
//! at the bottom. Two integer matrices generate the same row lattice iff the
//! nonzero parts of their Hermite forms are equal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;

#[derive(Clone, Debug)]
pub struct Hnf {
    /// The Hermite normal form, same shape as the input.
    pub h: IntMatrix,
    /// Unimodular `T` with `T · M = H`.
    pub transform: IntMatrix,
    /// Pivot column of each nonzero row.
    pub pivots: Vec<usize>,
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// The nonzero rows of `H`.
    pub fn basis(&self) -> IntMatrix {
        self.h.submatrix(0..self.rank(), 0..self.h.cols())
    }
}

fn axpy(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let (t, s) = if target < source {
        let (a, b) = rows.split_at_mut(source);
        (&mut a[target], &b[0])
    } else {
        let (a, b) = rows.split_at_mut(target);
        (&mut b[0], &a[source])
    };
    for (x, y) in t.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// Hermite normal form with transform, `T · M = H`.
pub fn hnf(m: &IntMatrix) -> Hnf {
    hnf_impl(m, true)
}

/// Hermite normal form without tracking the transform.
pub fn hnf_only(m: &IntMatrix) -> Hnf {
    hnf_impl(m, false)
}

fn hnf_impl(m: &IntMatrix, track: bool) -> Hnf {
    let (nr, nc) = (m.rows(), m.cols());
    let mut a: Vec<Vec<BigInt>> = m.iter_rows().map(|r| r.to_vec()).collect();
    let mut t: Vec<Vec<BigInt>> = if track {
        (0..nr)
            .map(|i| (0..nr).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect()
    } else {
        Vec::new()
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nc {
        if r == nr {
            break;
        }
        loop {
            let best = (r..nr)
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()).then(i.cmp(&j)));
            let Some(best) = best else { break };
            a.swap(r, best);
            if track {
                t.swap(r, best);
            }
            let mut clean = true;
            for i in r + 1..nr {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                axpy(&mut a, i, r, &q);
                if track {
                    axpy(&mut t, i, r, &q);
                }
                if !a[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r < nr && !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                a[r].iter_mut().for_each(|x| *x = -&*x);
                if track {
                    t[r].iter_mut().for_each(|x| *x = -&*x);
                }
            }
            for i in 0..r {
                let q = a[i][c].div_floor(&a[r][c]);
                axpy(&mut a, i, r, &q);
                if track {
                    axpy(&mut t, i, r, &q);
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    let h = IntMatrix::from_rows(&a).expect("rectangular");
    let transform = if track {
        IntMatrix::from_rows(&t).expect("square")
    } else {
        IntMatrix::zeros(0, 0)
    };
    let h = if nr == 0 { IntMatrix::zeros(0, nc) } else { h };
    Hnf { h, transform, pivots }
}

/// Coefficients `c` with `c · basis = v`, where `basis` is in Hermite form
/// (as returned by [`Hnf::basis`]). `None` if `v` is not in the row lattice.
pub fn solve_in_hnf(basis: &IntMatrix, pivots: &[usize], v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = v.to_vec();
    let mut coeffs = Vec::with_capacity(pivots.len());
    for (k, &c) in pivots.iter().enumerate() {
        let p = &basis[(k, c)];
        let (q, rem) = rest[c].div_rem(p);
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (x, y) in rest.iter_mut().zip(basis.row(k)) {
                *x -= &q * y;
            }
        }
        coeffs.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn identity_is_fixed() {
        let i3 = IntMatrix::identity(3);
        let h = hnf(&i3);
        assert_eq!(h.h, i3);
        assert_eq!(h.transform, i3);
    }

    #[test]
    fn two_by_two_example() {
        let h = hnf(&m(&[&[2, 0], &[1, 1]]));
        assert_eq!(h.h, m(&[&[1, 1], &[0, 2]]));
        assert_eq!(h.transform.mul(&m(&[&[2, 0], &[1, 1]])).unwrap(), h.h);
    }

    #[test]
    fn rank_deficient_rows_go_to_bottom() {
        let a = m(&[&[2, 4], &[1, 2], &[3, 6]]);
        let h = hnf(&a);
        assert_eq!(h.rank(), 1);
        assert_eq!(h.h, m(&[&[1, 2], &[0, 0], &[0, 0]]));
        assert_eq!(h.transform.mul(&a).unwrap(), h.h);
    }

    #[test]
    fn entries_above_pivots_are_reduced() {
        let a = m(&[&[3, 5, 7], &[0, 4, -9], &[0, 0, 6]]);
        let h = hnf(&a).h;
        for (k, c) in [(0usize, 0usize), (1, 1), (2, 2)] {
            let p = &h[(k, c)];
            assert!(p.is_positive());
            for i in 0..k {
                assert!(!h[(i, c)].is_negative() && &h[(i, c)] < p);
            }
        }
    }

    #[test]
    fn solve_membership() {
        let h = hnf(&m(&[&[3, 0], &[0, 21]]));
        let b = h.basis();
        let yes = solve_in_hnf(&b, &h.pivots, &[BigInt::from(6), BigInt::from(-21)]).unwrap();
        assert_eq!(yes, vec![BigInt::from(2), BigInt::from(-1)]);
        assert!(solve_in_hnf(&b, &h.pivots, &[BigInt::from(1), BigInt::from(0)]).is_none());
    }
}
