//! Deterministic property checks that do not depend on any reference value:
//! enumeration against brute force, normal-form invariants on random
//! matrices, and structural identities of a typed minimal-vector set.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumeration::{self, VectorSet};
use crate::error::Result;
use crate::lattice::{AmbientFrame, Lattice};
use crate::linalg::{self, IntMatrix, RatMatrix};
use crate::symmetry::Orbit;
use crate::typing::{InnerProducts, Partition, TypeSig};

const SEED: u64 = 0x006c_6174_3430;

#[derive(Clone, Debug, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, range: i64) -> IntMatrix {
    let data: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-range..=range)).collect();
    IntMatrix::from_i64(rows, cols, &data).expect("shape")
}

fn random_nonsingular(rng: &mut ChaCha8Rng, n: usize, range: i64) -> IntMatrix {
    loop {
        let m = random_matrix(rng, n, n, range);
        if !linalg::det(&m).expect("square").is_zero() {
            return m;
        }
    }
}

/// Every nonzero `x ∈ ℤ⁴` with `|x|² ≤ bound` that lies in `lat`, sorted.
fn brute_force(lat: &Lattice, bound: i64) -> Vec<Vec<i64>> {
    let r = (0..).take_while(|k| k * k <= bound).last().unwrap_or(0);
    let mut out = Vec::new();
    let mut x = [-r; 4];
    loop {
        let norm: i64 = x.iter().map(|a| a * a).sum();
        if norm > 0 && norm <= bound {
            let big: Vec<BigInt> = x.iter().map(|&a| BigInt::from(a)).collect();
            if lat.contains(&big) {
                out.push(x.to_vec());
            }
        }
        let mut k = 0;
        while k < 4 && x[k] == r {
            x[k] = -r;
            k += 1;
        }
        if k == 4 {
            break;
        }
        x[k] += 1;
    }
    out.sort();
    out
}

/// Short vectors of 50 random sublattices of `ℤ⁴` agree with a scan of the cube.
pub fn enumeration_matches_brute_force() -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let frame = Arc::new(AmbientFrame::new("std4", &RatMatrix::identity(4)).expect("identity Gram"));
    let mut failures = 0;
    let cases = 50;
    for _ in 0..cases {
        let basis = random_nonsingular(&mut rng, 4, 3);
        let bound = rng.gen_range(1..=16);
        let ok = Lattice::new(frame.clone(), basis).and_then(|lat| {
            let mut got = enumeration::vectors_of_norm_at_most(&lat, bound as u64)?.vectors().to_vec();
            got.sort();
            Ok(got == brute_force(&lat, bound))
        });
        if !matches!(ok, Ok(true)) {
            failures += 1;
        }
    }
    PropertyOutcome { name: "enumeration equals brute force on random 4-dimensional lattices", cases, failures }
}

fn is_hermite(h: &IntMatrix, pivots: &[usize]) -> bool {
    let r = pivots.len();
    let echelon = pivots.windows(2).all(|w| w[0] < w[1]);
    let rows_ok = pivots.iter().enumerate().all(|(i, &p)| {
        h[(i, p)].is_positive()
            && (0..p).all(|c| h[(i, c)].is_zero())
            && (0..i).all(|k| !h[(k, p)].is_negative() && h[(k, p)] < h[(i, p)])
    });
    let zero_tail = (r..h.rows()).all(|i| h.row(i).iter().all(Zero::is_zero));
    echelon && rows_ok && zero_tail
}

/// Hermite form shape, `T·M = H` with `T` unimodular, and invariance under a
/// random unimodular change of rows.
pub fn hnf_invariants() -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut failures = 0;
    let cases = 40;
    for _ in 0..cases {
        let rows = rng.gen_range(2..=6);
        let m = random_matrix(&mut rng, rows, 4, 9);
        let h = linalg::hnf(&m);
        let mut ok = is_hermite(&h.h, &h.pivots);
        ok &= h.transform.mul(&m).map(|x| x == h.h).unwrap_or(false);
        ok &= linalg::det(&h.transform).map(|d| d.abs().is_one()).unwrap_or(false);
        // elementary row operations do not change the form
        let mut u = IntMatrix::identity(rows);
        for _ in 0..rows * 2 {
            let (a, b) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
            if a != b {
                let c = BigInt::from(rng.gen_range(-3..=3));
                for k in 0..rows {
                    let add = &c * &u[(b, k)];
                    u[(a, k)] += add;
                }
            }
        }
        ok &= u.mul(&m).map(|um| linalg::hnf(&um).h == h.h).unwrap_or(false);
        if !ok {
            failures += 1;
        }
    }
    PropertyOutcome { name: "Hermite form invariants on random matrices", cases, failures }
}

/// Elementary divisors divide each other and multiply to `|det|`.
pub fn snf_invariants() -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut failures = 0;
    let cases = 40;
    for _ in 0..cases {
        let n = rng.gen_range(1..=5);
        let m = random_nonsingular(&mut rng, n, 9);
        let ok = match (linalg::snf_diagonal(&m), linalg::det(&m)) {
            (Ok(d), Ok(det)) => {
                let chain = d.windows(2).all(|w| (&w[1] % &w[0]).is_zero()) && d.iter().all(Signed::is_positive);
                let product = d.iter().fold(BigInt::one(), |a, x| a * x);
                chain && product == det.abs()
            }
            _ => false,
        };
        if !ok {
            failures += 1;
        }
    }
    PropertyOutcome { name: "Smith form invariants on random matrices", cases, failures }
}

/// Gram–Schmidt coefficients `μ` and squared lengths `b*ᵢ·b*ᵢ` from a Gram matrix.
fn gram_schmidt(g: &RatMatrix) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = g.rows();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..i {
            let mut s = g[(i, j)].clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g[(i, i)].clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b.push(s);
    }
    (mu, b)
}

/// The reduced Gram is size reduced and satisfies the Lovász condition for
/// `δ = 3/4`, and the transform is unimodular.
pub fn lll_invariants() -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut failures = 0;
    let cases = 40;
    let half = BigRational::new(1.into(), 2.into());
    let delta = linalg::default_delta();
    for _ in 0..cases {
        let n = rng.gen_range(2..=6);
        let a = random_nonsingular(&mut rng, n, 20);
        let g = a.mul(&a.transpose()).expect("square");
        let ok = linalg::lll::lll_transform(&g).and_then(|t| {
            let unimodular = linalg::det(&t)?.abs().is_one();
            let (mu, b) = gram_schmidt(&t.to_rational().congruence(&g.to_rational())?);
            let sized = (0..n).all(|i| (0..i).all(|j| mu[i][j].abs() <= half));
            let lovasz = (1..n).all(|k| b[k] >= (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1]);
            Ok(unimodular && sized && lovasz)
        });
        if !matches!(ok, Ok(true)) {
            failures += 1;
        }
    }
    PropertyOutcome { name: "LLL invariants on random Gram matrices", cases, failures }
}

/// Minimal-vector data the structural checks run on.
pub struct TypedSet<'a> {
    pub set: &'a VectorSet,
    pub ips: &'a InnerProducts,
    pub level1: &'a Partition,
    /// Refinement of `level1` in which every block is type-homogeneous.
    pub stable: &'a Partition,
    pub orbits: &'a [Orbit],
    pub group_order: usize,
}

/// `t₀ + 2(t₁ + t₂ + t₄)` counts every vector of the reference block once:
/// the whole set for first-level types, the parent block for split types,
/// the block itself for local types of the stable blocks.
pub fn sum_rule(data: &TypedSet<'_>) -> Result<PropertyOutcome> {
    let mut cases = 0;
    let mut failures = 0;
    let total = data.set.signed_len();
    for b in &data.level1.blocks {
        cases += 1;
        failures += usize::from(weight(b.split_type) != total);
    }
    let local = data.stable.local_types(data.ips)?;
    for (b, t) in data.stable.blocks.iter().zip(local) {
        cases += 1;
        failures += usize::from(weight(t) != b.size());
        // split types of second-level blocks are taken against the first-level parent
        if b.label.len() == 2 {
            let parent = data.level1.blocks.iter().find(|p| p.label[..] == b.label[..1]).map_or(0, |p| p.size());
            cases += 1;
            failures += usize::from(weight(b.split_type) != parent);
        }
    }
    Ok(PropertyOutcome { name: "sum rule t0 + 2(t1 + t2 + t4) = |block| on all blocks", cases, failures })
}

fn weight(t: TypeSig) -> usize {
    let [t0, t1, t2, t4] = t.as_array();
    (t0 + 2 * (t1 + t2 + t4)) as usize
}

/// `−v` lies in the set for every `v`.
pub fn negation_closure(set: &VectorSet) -> PropertyOutcome {
    let full = set.unfolded();
    let failures = full
        .vectors()
        .iter()
        .filter(|v| full.position(&v.iter().map(|x| -x).collect::<Vec<_>>()).is_none())
        .count();
    PropertyOutcome { name: "negation closure of the minimal vectors", cases: full.len(), failures }
}

/// Orbit sizes divide the group order and add up to the set size.
pub fn orbit_sizes(data: &TypedSet<'_>) -> PropertyOutcome {
    let failures = data.orbits.iter().filter(|o| !data.group_order.is_multiple_of(o.size)).count()
        + usize::from(data.orbits.iter().map(|o| o.size).sum::<usize>() != data.set.signed_len());
    PropertyOutcome { name: "orbit sizes divide the group order", cases: data.orbits.len() + 1, failures }
}

/// The checks that need no lattice data.
pub fn independent_suite() -> Vec<PropertyOutcome> {
    vec![enumeration_matches_brute_force(), hnf_invariants(), snf_invariants(), lll_invariants()]
}

/// The checks on a typed minimal-vector set.
pub fn structural_suite(data: &TypedSet<'_>) -> Result<Vec<PropertyOutcome>> {
    Ok(vec![sum_rule(data)?, negation_closure(data.set), orbit_sizes(data)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_suite_passes() {
        for o in independent_suite() {
            assert!(o.passed(), "{} failed {}/{}", o.name, o.failures, o.cases);
        }
    }

    #[test]
    fn brute_force_counts_a2_scaled() {
        // rows (1,1,0,0),(0,1,1,0),(0,0,1,1),(0,0,0,2): norm-2 vectors of D4 type
        let frame = Arc::new(AmbientFrame::new("std4", &RatMatrix::identity(4)).unwrap());
        let b = IntMatrix::from_i64_rows(&[[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [0, 0, 0, 2]]).unwrap();
        let lat = Lattice::new(frame, b).unwrap();
        assert_eq!(brute_force(&lat, 2).len(), 24);
    }
}
