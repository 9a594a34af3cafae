//! Exact enumeration of lattice vectors of bounded norm.
//!
//! The search runs over an LLL-reduced basis using the decomposition
//! `Q(x) = Σ dᵢ (xᵢ + Σ_{j>i} lᵢⱼ xⱼ)²`. Every `dᵢ` and `lᵢⱼ` is enclosed in
//! a pair of floats bracketing the exact rational, and all arithmetic on the
//! pruning path rounds outward, so no vector is ever pruned wrongly. Each
//! leaf is then re-checked with exact integer arithmetic.

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{AmbientFrame, Lattice};
use crate::linalg::{self, IntMatrix};

/// A set of frame vectors, sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorSet {
    frame: Arc<AmbientFrame>,
    dim: usize,
    vectors: Vec<Vec<i64>>,
    norms: Vec<BigRational>,
    modulo_sign: bool,
}

impl VectorSet {
    pub fn new(frame: Arc<AmbientFrame>, mut vectors: Vec<Vec<i64>>, modulo_sign: bool) -> Result<Self> {
        let dim = frame.dim();
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::Dimension(format!("vector of length {} in a frame of dimension {dim}", v.len())));
        }
        if modulo_sign {
            for v in vectors.iter_mut() {
                let neg: Vec<i64> = v.iter().map(|x| -x).collect();
                if neg > *v {
                    *v = neg;
                }
            }
        }
        vectors.sort_unstable();
        vectors.dedup();
        let norms = vectors.iter().map(|v| norm_in_frame(&frame, v)).collect();
        Ok(Self { frame, dim, vectors, norms, modulo_sign })
    }

    pub fn frame(&self) -> &Arc<AmbientFrame> {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }

    pub fn norms(&self) -> &[BigRational] {
        &self.norms
    }

    pub fn is_modulo_sign(&self) -> bool {
        self.modulo_sign
    }

    /// The norm shared by all vectors, if there is one.
    pub fn common_norm(&self) -> Option<&BigRational> {
        let first = self.norms.first()?;
        self.norms.iter().all(|n| n == first).then_some(first)
    }

    /// Number of vectors counting both signs.
    pub fn signed_len(&self) -> usize {
        if self.modulo_sign {
            2 * self.len()
        } else {
            self.len()
        }
    }

    pub fn with_norm(&self, norm: &BigRational) -> Self {
        let (vectors, norms) = self
            .vectors
            .iter()
            .zip(&self.norms)
            .filter(|(_, n)| *n == norm)
            .map(|(v, n)| (v.clone(), n.clone()))
            .unzip();
        Self { frame: self.frame.clone(), dim: self.dim, vectors, norms, modulo_sign: self.modulo_sign }
    }

    /// One representative per pair `±v`.
    pub fn folded(&self) -> Self {
        if self.modulo_sign {
            return self.clone();
        }
        Self::new(self.frame.clone(), self.vectors.clone(), true).expect("same frame")
    }

    /// Both signs of every vector.
    pub fn unfolded(&self) -> Self {
        if !self.modulo_sign {
            return self.clone();
        }
        let mut all = self.vectors.clone();
        all.extend(self.vectors.iter().map(|v| v.iter().map(|x| -x).collect::<Vec<_>>()));
        Self::new(self.frame.clone(), all, false).expect("same frame")
    }

    pub fn position(&self, v: &[i64]) -> Option<usize> {
        self.vectors.binary_search_by(|w| w.as_slice().cmp(v)).ok()
    }

    /// Cache text: header `count dim norm frame-id`, then one vector per line.
    pub fn to_cache_string(&self) -> String {
        let norm = self.common_norm().map_or_else(|| "mixed".to_string(), ToString::to_string);
        let mut s = format!("{} {} {} {}\n", self.len(), self.dim, norm, self.frame.id());
        for v in &self.vectors {
            let line: Vec<String> = v.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    /// Parses cache text written by [`VectorSet::to_cache_string`], checking it
    /// against `frame`, recomputing every norm and requiring sorted order.
    pub fn from_cache_string(text: &str, frame: Arc<AmbientFrame>) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty vector cache".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let [count, dim, norm, id] = h[..] else {
            return Err(Error::Parse(format!("bad vector cache header `{header}`")));
        };
        let count: usize = count.parse().map_err(|_| Error::Parse(format!("bad count `{count}`")))?;
        let dim: usize = dim.parse().map_err(|_| Error::Parse(format!("bad dimension `{dim}`")))?;
        if id != frame.id() || dim != frame.dim() {
            return Err(Error::FrameMismatch(format!("cache is for frame {id} (dim {dim})")));
        }
        let mut vectors = Vec::with_capacity(count);
        for (ln, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("line {}: bad entry `{t}`", ln + 2))))
                .collect::<Result<_>>()?;
            if v.len() != dim {
                return Err(Error::Parse(format!("line {}: expected {dim} entries", ln + 2)));
            }
            vectors.push(v);
        }
        if vectors.len() != count {
            return Err(Error::Parse(format!("cache declares {count} vectors, found {}", vectors.len())));
        }
        if vectors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("cache vectors are not strictly sorted".into()));
        }
        let modulo_sign = {
            let set: std::collections::HashSet<&Vec<i64>> = vectors.iter().collect();
            !vectors.is_empty() && vectors.iter().all(|v| !set.contains(&v.iter().map(|x| -x).collect::<Vec<_>>()))
        };
        let vs = Self::new(frame, vectors, modulo_sign)?;
        if norm != "mixed" {
            let want: BigRational = norm.parse().map_err(|_| Error::Parse(format!("bad norm `{norm}`")))?;
            if let Some(bad) = vs.norms.iter().find(|n| **n != want) {
                return Err(Error::Parse(format!("cache vector has norm {bad}, header says {want}")));
            }
        }
        Ok(vs)
    }
}

fn norm_in_frame(frame: &AmbientFrame, v: &[i64]) -> BigRational {
    let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
    frame.inner(&big, &big)
}

// ---------------------------------------------------------------------------
// Float enclosures
// ---------------------------------------------------------------------------

/// Floats `lo ≤ r ≤ hi`, both checked exactly against `r`.
pub fn enclose(r: &BigRational) -> (f64, f64) {
    let approx = r.to_f64().unwrap_or(f64::NAN);
    assert!(approx.is_finite(), "value {r} does not fit in a double");
    let exact = |f: f64| BigRational::from_f64(f).expect("finite");
    let mut lo = approx;
    while exact(lo) > *r {
        lo = lo.next_down();
    }
    let mut hi = approx;
    while exact(hi) < *r {
        hi = hi.next_up();
    }
    (lo, hi)
}

struct Search {
    n: usize,
    d_lo: Vec<f64>,
    // row-major n×n, only j > i used
    l_lo: Vec<f64>,
    l_hi: Vec<f64>,
    gram: Vec<i128>,
    bound: i128,
    x: Vec<i64>,
    found: Vec<Vec<i64>>,
    nodes: u64,
}

impl Search {
    fn exact_norm(&self) -> i128 {
        let n = self.n;
        let mut acc = 0i128;
        for i in 0..n {
            if self.x[i] == 0 {
                continue;
            }
            let mut row = 0i128;
            for j in 0..n {
                row += self.gram[i * n + j] * self.x[j] as i128;
            }
            acc += row * self.x[i] as i128;
        }
        acc
    }

    fn center(&self, i: usize) -> (f64, f64) {
        let n = self.n;
        let (mut s_lo, mut s_hi) = (0.0f64, 0.0f64);
        for j in i + 1..n {
            let x = self.x[j];
            if x == 0 {
                continue;
            }
            let xf = x as f64;
            let (a, b) = (self.l_lo[i * n + j] * xf, self.l_hi[i * n + j] * xf);
            let (p_lo, p_hi) = if x > 0 { (a, b) } else { (b, a) };
            s_lo = (s_lo + p_lo.next_down()).next_down();
            s_hi = (s_hi + p_hi.next_up()).next_up();
        }
        (-s_hi, -s_lo)
    }

    /// Visit level `i` with remaining budget at most `r_hi`. `free_sign` is
    /// true while every coordinate above `i` is zero.
    fn visit(&mut self, i: usize, r_hi: f64, free_sign: bool) {
        self.nodes += 1;
        let (c_lo, c_hi) = self.center(i);
        let radius = (r_hi / self.d_lo[i]).next_up().sqrt().next_up();
        let mut lo = (c_lo - radius).next_down().floor() as i64;
        let hi = (c_hi + radius).next_up().ceil() as i64;
        if free_sign {
            lo = lo.max(0);
        }
        for x in lo..=hi {
            let xf = x as f64;
            let dist = if xf < c_lo {
                (c_lo - xf).next_down().max(0.0)
            } else if xf > c_hi {
                (xf - c_hi).next_down().max(0.0)
            } else {
                0.0
            };
            let used = ((dist * dist).next_down() * self.d_lo[i]).next_down();
            let rest = (r_hi - used).next_up();
            if rest < 0.0 {
                continue;
            }
            self.x[i] = x;
            if i == 0 {
                if free_sign && x == 0 {
                    continue;
                }
                let q = self.exact_norm();
                if q > 0 && q <= self.bound {
                    self.found.push(self.x.clone());
                }
            } else {
                self.visit(i - 1, rest, free_sign && x == 0);
            }
        }
        self.x[i] = 0;
    }
}

/// Coefficient vectors `x ≠ 0` with `x·G·xᵀ ≤ bound`, one per sign pair
/// (the last nonzero coordinate is positive), for a positive definite
/// integer Gram matrix `G`.
pub fn short_coefficients(g: &IntMatrix, bound: &BigInt) -> Result<Vec<Vec<i64>>> {
    if !bound.is_positive() {
        return Err(Error::InvalidArgument(format!("bound must be positive, got {bound}")));
    }
    let n = g.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let ldl = linalg::rational_cholesky(&g.to_rational())?;
    let mut l_lo = vec![0.0; n * n];
    let mut l_hi = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = enclose(&ldl.l[(i, j)]);
            l_lo[i * n + j] = a;
            l_hi[i * n + j] = b;
        }
    }
    let d_lo = ldl.d.iter().map(|d| enclose(d).0).collect();
    let gram = g
        .entries()
        .iter()
        .map(|x| x.to_i128().ok_or_else(|| Error::InvalidArgument("Gram entry too large".into())))
        .collect::<Result<_>>()?;
    let bound_i = bound.to_i128().ok_or_else(|| Error::InvalidArgument("bound too large".into()))?;
    let (_, b_hi) = enclose(&BigRational::from_integer(bound.clone()));
    let mut s = Search { n, d_lo, l_lo, l_hi, gram, bound: bound_i, x: vec![0; n], found: Vec::new(), nodes: 0 };
    s.visit(n - 1, b_hi, true);
    Ok(s.found)
}

/// Integer Gram (scaled by `scale`) of an LLL-reduced basis of `lat`,
/// together with that basis in frame coordinates.
pub struct Reduced {
    pub scale: BigInt,
    pub gram: IntMatrix,
    pub basis: IntMatrix,
}

pub fn reduce(lat: &Lattice) -> Result<Reduced> {
    let g = lat.gram();
    let scale = g.denominator_lcm();
    let gi = g.scale(&BigRational::from_integer(scale.clone())).to_integer().expect("cleared");
    let delta = BigRational::new(BigInt::from(99), BigInt::from(100));
    let red = linalg::lll_reduce_gram(&gi.to_rational(), &delta)?;
    let gram = red.gram.to_integer().expect("integer congruence");
    let basis = red.transform.mul(lat.basis())?;
    Ok(Reduced { scale, gram, basis })
}

fn to_frame(coeffs: &[Vec<i64>], basis: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let b: Vec<Vec<i64>> = basis
        .iter_rows()
        .map(|r| r.iter().map(|x| x.to_i64().ok_or_else(|| Error::InvalidArgument("basis entry too large".into()))).collect())
        .collect::<Result<_>>()?;
    let dim = basis.cols();
    Ok(coeffs
        .iter()
        .map(|c| {
            let mut v = vec![0i64; dim];
            for (ci, row) in c.iter().zip(&b) {
                if *ci != 0 {
                    for (vk, bk) in v.iter_mut().zip(row) {
                        *vk += ci * bk;
                    }
                }
            }
            v
        })
        .collect())
}

fn enumerate(lat: &Lattice, bound: &BigRational, folded: bool) -> Result<VectorSet> {
    if !bound.is_positive() {
        return Err(Error::InvalidArgument(format!("bound must be positive, got {bound}")));
    }
    let red = reduce(lat)?;
    let scaled = (bound * BigRational::from_integer(red.scale.clone())).floor().to_integer();
    let coeffs = if scaled.is_zero() { Vec::new() } else { short_coefficients(&red.gram, &scaled)? };
    let reps = to_frame(&coeffs, &red.basis)?;
    let set = VectorSet::new(lat.frame().clone(), reps, true)?;
    // independent check through the frame Gram
    if let Some(bad) = set.norms.iter().find(|n| *n > bound || n.is_zero()) {
        return Err(Error::StructureMismatch(format!("enumerated vector has norm {bad}")));
    }
    Ok(if folded { set } else { set.unfolded() })
}

/// All nonzero `v ∈ lat` with `v·v ≤ bound`, both signs.
pub fn vectors_of_norm_at_most(lat: &Lattice, bound: u64) -> Result<VectorSet> {
    enumerate(lat, &BigRational::from_integer(bound.into()), false)
}

/// As [`vectors_of_norm_at_most`], one representative per pair `±v`.
pub fn vectors_of_norm_at_most_folded(lat: &Lattice, bound: u64) -> Result<VectorSet> {
    enumerate(lat, &BigRational::from_integer(bound.into()), true)
}

/// Minimum norm of an integral lattice.
pub fn min_norm(lat: &Lattice) -> Result<u64> {
    let red = reduce(lat)?;
    if !red.scale.is_one() {
        return Err(Error::InvalidArgument("min_norm needs an integral lattice".into()));
    }
    let upper = (0..red.gram.rows()).map(|i| red.gram[(i, i)].clone()).min().expect("nonempty");
    let coeffs = short_coefficients(&red.gram, &upper)?;
    let vs = to_frame(&coeffs, &red.basis)?;
    let min = vs
        .iter()
        .map(|v| norm_in_frame(lat.frame(), v))
        .min()
        .ok_or_else(|| Error::SearchFailed("no vector below the reduced diagonal".into()))?;
    min.to_integer().to_u64().ok_or_else(|| Error::InvalidArgument("minimum out of range".into()))
}

/// Number of vectors of norm exactly `m`, both signs.
pub fn count_norm(lat: &Lattice, m: u64) -> Result<usize> {
    let set = vectors_of_norm_at_most_folded(lat, m)?;
    let target = BigRational::from_integer(m.into());
    Ok(2 * set.norms.iter().filter(|n| **n == target).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction;
    use proptest::prelude::*;

    fn std_frame(n: usize) -> Arc<AmbientFrame> {
        Arc::new(AmbientFrame::new(format!("std{n}"), &linalg::RatMatrix::identity(n)).unwrap())
    }

    #[test]
    fn enclosures_are_tight_and_correct() {
        for (p, q) in [(1i64, 3i64), (-7, 10), (22, 7), (0, 1), (1 << 40, 3)] {
            let r = BigRational::new(p.into(), q.into());
            let (lo, hi) = enclose(&r);
            assert!(BigRational::from_f64(lo).unwrap() <= r && r <= BigRational::from_f64(hi).unwrap());
            assert!(hi.next_down() <= lo);
        }
    }

    #[test]
    fn scaled_square_lattice() {
        let f = std_frame(2);
        let lat = Lattice::new(f, IntMatrix::scalar(2, 2)).unwrap();
        let s = vectors_of_norm_at_most(&lat, 4).unwrap();
        assert_eq!(s.vectors(), &[vec![-2, 0], vec![0, -2], vec![0, 2], vec![2, 0]]);
        assert_eq!(min_norm(&lat).unwrap(), 4);
        assert_eq!(count_norm(&lat, 8).unwrap(), 4);
    }

    #[test]
    fn block_lattice_has_minimum_six() {
        let l = construction::build_L();
        assert!(vectors_of_norm_at_most(&l, 4).unwrap().is_empty());
        assert_eq!(min_norm(&l).unwrap(), 6);
        let six = vectors_of_norm_at_most(&l, 6).unwrap();
        assert_eq!(six.len(), 40);
    }

    #[test]
    fn cache_roundtrip() {
        let f = std_frame(3);
        let lat = Lattice::new(f.clone(), IntMatrix::from_i64_rows(&[[2, 1, 0], [0, 2, 1], [1, 0, 3]]).unwrap()).unwrap();
        let s = vectors_of_norm_at_most(&lat, 14).unwrap();
        let text = s.to_cache_string();
        let back = VectorSet::from_cache_string(&text, f.clone()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_cache_string(), text);
        let folded = s.folded();
        let back = VectorSet::from_cache_string(&folded.to_cache_string(), f.clone()).unwrap();
        assert!(back.is_modulo_sign());
        assert_eq!(back.unfolded(), s);
        assert!(VectorSet::from_cache_string(&text.replace("std3", "other"), f.clone()).is_err());
    }

    #[test]
    fn rejects_bad_bound() {
        let lat = Lattice::new(std_frame(1), IntMatrix::identity(1)).unwrap();
        assert!(vectors_of_norm_at_most(&lat, 0).is_err());
    }

    /// Coefficient box from `xᵢ² ≤ bound · (G⁻¹)ᵢᵢ`.
    fn brute_force(g: &IntMatrix, bound: i64) -> Vec<Vec<i64>> {
        let inv = linalg::inverse(&g.to_rational()).unwrap();
        let n = g.rows();
        let r: Vec<i64> = (0..n)
            .map(|i| {
                let lim = &inv[(i, i)] * BigRational::from_integer(bound.into());
                let mut k = 0i64;
                while BigRational::from_integer(((k + 1) * (k + 1)).into()) <= lim {
                    k += 1;
                }
                k
            })
            .collect();
        let gi: Vec<i64> = g.to_i64().unwrap();
        let mut out = Vec::new();
        let mut x = vec![0i64; n];
        fn rec(i: usize, r: &[i64], x: &mut Vec<i64>, gi: &[i64], bound: i64, out: &mut Vec<Vec<i64>>) {
            let n = x.len();
            if i == n {
                let q: i64 = (0..n).map(|a| (0..n).map(|b| gi[a * n + b] * x[a] * x[b]).sum::<i64>()).sum();
                if q > 0 && q <= bound {
                    out.push(x.clone());
                }
                return;
            }
            for v in -r[i]..=r[i] {
                x[i] = v;
                rec(i + 1, r, x, gi, bound, out);
            }
        }
        rec(0, &r, &mut x, &gi, bound, &mut out);
        out.sort();
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]
        #[test]
        fn agrees_with_brute_force(entries in proptest::collection::vec(-3i64..=3, 16), bound in 1u64..30) {
            let b = IntMatrix::from_i64(4, 4, &entries).unwrap();
            prop_assume!(!linalg::det(&b).unwrap().is_zero());
            let lat = Lattice::new(std_frame(4), b.clone()).unwrap();
            let got = vectors_of_norm_at_most(&lat, bound).unwrap();
            let g = lat.integer_gram().unwrap();
            let coeffs = brute_force(&g, bound as i64);
            let want = VectorSet::new(std_frame(4), to_frame(&coeffs, &b).unwrap(), false).unwrap();
            prop_assert_eq!(got.vectors(), want.vectors());
            // negation closure
            for v in got.vectors() {
                let neg: Vec<i64> = v.iter().map(|x| -x).collect();
                prop_assert!(got.position(&neg).is_some());
            }
        }
    }
}
