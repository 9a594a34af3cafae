//! Generalized quadratic residue codes of length 20 and the glue conditions.
//!
//! Coordinates are numbered `(1, 2, …, 18, 0, ∞)`; generator rows are
//! `u₁, …, u₁₈, u₀, u_∞` in that order.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix};

pub const PRIME: u64 = 19;
pub const LENGTH: usize = 20;

/// Legendre symbol `(x / p)` for an odd prime `p`.
pub fn legendre(x: i64, p: u64) -> i8 {
    let p = p as i64;
    let r = x.rem_euclid(p);
    if r == 0 {
        return 0;
    }
    // Euler's criterion
    let mut acc = 1i64;
    let mut base = r;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

pub fn legendre19(x: i64) -> i8 {
    legendre(x, PRIME)
}

/// Field element labelling coordinate `k` (0-based) in the order `1..18, 0`.
/// Position 19 is `∞` and has no field label.
pub fn field_label(k: usize) -> Option<u64> {
    match k {
        0..=17 => Some(k as u64 + 1),
        18 => Some(0),
        _ => None,
    }
}

/// Coordinate position of field element `x`.
pub fn position_of(x: u64) -> usize {
    let x = x % PRIME;
    if x == 0 {
        18
    } else {
        x as usize - 1
    }
}

/// Modulus and parameters `(a, b, d, s, t, e)`, reduced mod `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CodeSpec {
    pub modulus: u64,
    pub params: [u64; 6],
}

impl CodeSpec {
    pub fn new(modulus: u64, params: [i64; 6]) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let m = modulus as i64;
        Ok(Self { modulus, params: params.map(|p| p.rem_euclid(m) as u64) })
    }

    pub fn o40_mod3() -> Self {
        Self::new(3, [1, 0, 0, 0, 1, 1]).expect("valid")
    }

    pub fn o40_mod21() -> Self {
        Self::new(21, [0, 7, 1, 0, 4, 17]).expect("valid")
    }

    pub fn scaled(&self, c: u64) -> Self {
        Self { modulus: self.modulus, params: self.params.map(|p| p * c % self.modulus) }
    }

    pub fn reduced(&self, m: u64) -> Self {
        Self { modulus: m, params: self.params.map(|p| p % m) }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.params;
        write!(f, "{}:{},{},{},{},{},{}", self.modulus, p[0], p[1], p[2], p[3], p[4], p[5])
    }
}

impl FromStr for CodeSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("code spec `{s}` is not of the form n:a,b,d,s,t,e"));
        let (n, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let vals: Vec<i64> = rest
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let params: [i64; 6] = vals.try_into().map_err(|_| bad())?;
        Self::new(n, params)
    }
}

/// Generator rows of a code, lifted to `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeGenerators {
    pub modulus: u64,
    pub rows: Vec<[u64; LENGTH]>,
}

impl CodeGenerators {
    pub fn to_matrix(&self) -> IntMatrix {
        IntMatrix::from_fn(self.rows.len(), LENGTH, |i, j| BigInt::from(self.rows[i][j]))
    }

    pub fn zero(modulus: u64) -> Self {
        Self { modulus, rows: vec![[0; LENGTH]; LENGTH] }
    }
}

pub fn gqr_generators(spec: &CodeSpec) -> CodeGenerators {
    let [a, b, d, s, t, e] = spec.params;
    let mut rows = Vec::with_capacity(LENGTH);
    for pi in 0..19 {
        let i = field_label(pi).expect("field position") as i64;
        let mut row = [0u64; LENGTH];
        for (pj, slot) in row.iter_mut().enumerate().take(19) {
            let j = field_label(pj).expect("field position") as i64;
            *slot = match legendre19(i - j) {
                0 => d,
                1 => s,
                _ => t,
            };
        }
        row[19] = e;
        rows.push(row);
    }
    let mut inf = [a; LENGTH];
    inf[19] = b;
    rows.push(inf);
    CodeGenerators { modulus: spec.modulus, rows }
}

/// The glue form `(x, y) ↦ x · G' · yᵀ` on pairs of 20-vectors, where
/// `G' = [[p·I, q·I], [q·I, r·I]]` is the numerator of the frame Gram.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlueForm {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub den: i64,
}

impl GlueForm {
    pub const O40: Self = Self { p: 28, q: 7, r: 2, den: 21 };

    fn pair(&self, u: &[u64; LENGTH], w: &[u64; LENGTH], u2: &[u64; LENGTH], w2: &[u64; LENGTH]) -> i64 {
        let mut acc = 0i64;
        for k in 0..LENGTH {
            let (a, b, c, d) = (u[k] as i64, w[k] as i64, u2[k] as i64, w2[k] as i64);
            acc += self.p * a * c + self.q * (a * d + b * c) + self.r * b * d;
        }
        acc
    }
}

/// Isotropy condition: pairwise products `≡ 0 mod den`, norms `≡ 0 mod 2·den`.
pub fn isotropy_check(u: &CodeGenerators, w: &CodeGenerators) -> bool {
    isotropy_check_with(u, w, &GlueForm::O40)
}

pub fn isotropy_check_with(u: &CodeGenerators, w: &CodeGenerators, form: &GlueForm) -> bool {
    let n = u.rows.len().min(w.rows.len());
    for i in 0..n {
        for j in i..n {
            let v = form.pair(&u.rows[i], &w.rows[i], &u.rows[j], &w.rows[j]);
            let m = if i == j { 2 * form.den } else { form.den };
            if v.rem_euclid(m) != 0 {
                return false;
            }
        }
    }
    true
}

/// Index condition for the O₄₀ frame: `|det B| = 63¹⁰`.
pub fn index_check(b: &IntMatrix) -> bool {
    index_check_with(b, &num_traits::pow(BigInt::from(63), 10))
}

pub fn index_check_with(b: &IntMatrix, expected: &BigInt) -> bool {
    b.is_square() && linalg::det(b).is_ok_and(|d| &d.abs() == expected)
}

/// Basis in frame coordinates of the preimage of the glue code under
/// `L^∨ → L^∨/L`, where `L = d₁ℤ²⁰ ⊕ d₂ℤ²⁰`. Returned in Hermite form.
pub fn glue_basis(u: &CodeGenerators, w: &CodeGenerators) -> Result<IntMatrix> {
    glue_basis_with(u, w, (3, 21))
}

pub fn glue_basis_with(u: &CodeGenerators, w: &CodeGenerators, invariants: (i64, i64)) -> Result<IntMatrix> {
    let n = u.rows.len().min(w.rows.len());
    let mut stack = IntMatrix::zeros(n + 2 * LENGTH, 2 * LENGTH);
    for i in 0..n {
        for k in 0..LENGTH {
            stack[(i, k)] = BigInt::from(u.rows[i][k]);
            stack[(i, LENGTH + k)] = BigInt::from(w.rows[i][k]);
        }
    }
    for k in 0..LENGTH {
        stack[(n + k, k)] = BigInt::from(invariants.0);
        stack[(n + LENGTH + k, LENGTH + k)] = BigInt::from(invariants.1);
    }
    let h = linalg::hnf_only(&stack);
    if h.rank() < 2 * LENGTH {
        return Err(Error::RankDeficient { rank: h.rank(), expected: 2 * LENGTH });
    }
    Ok(h.basis())
}

// ---------------------------------------------------------------------------
// Parameter search
// ---------------------------------------------------------------------------

/// Rank of a row set over the prime field `𝔽_p`.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let cols = a.first().map_or(0, Vec::len);
    let inv = |x: u64| -> u64 {
        let mut r = 1;
        for _ in 0..p - 2 {
            r = r * x % p;
        }
        r
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(rank, piv);
        let f = inv(a[rank][c]);
        for x in a[rank].iter_mut() {
            *x = *x * f % p;
        }
        for i in 0..a.len() {
            if i != rank && a[i][c] != 0 {
                let m = a[i][c];
                for j in 0..cols {
                    a[i][j] = (a[i][j] + (p - m) * a[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Filters used by [`search_params`].
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Allowed residues mod 3 for each of the six parameters of the first code.
    pub region3: [Vec<u64>; 6],
    /// Allowed residues mod 21 for each of the six parameters of the second code.
    pub region21: [Vec<u64>; 6],
    /// Require the glued lattice to have minimum at least this norm.
    pub min_norm: Option<u64>,
    /// Stop after this many full survivors.
    pub cap: Option<usize>,
    /// Keep only the lexicographically smallest pair in each orbit of the
    /// scalar action of `(ℤ/21ℤ)ˣ`.
    pub unit_reduction: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            region3: std::array::from_fn(|_| (0..3).collect()),
            region21: std::array::from_fn(|_| (0..21).collect()),
            min_norm: None,
            cap: None,
            unit_reduction: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    /// Size of the requested region.
    pub region: u128,
    /// Tuples mod 7 passing isotropy and the 𝔽₇-rank condition.
    pub mod7_survivors: u64,
    /// Pairs mod 3 passing isotropy and the 𝔽₃-rank condition.
    pub mod3_survivors: u64,
    /// Full pairs passing the isotropy and index conditions.
    pub glue_survivors: u128,
    /// Pairs whose glued lattice was checked for the minimum.
    pub min_checked: u64,
    /// Pairs passing every requested filter.
    pub accepted: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub code3: CodeSpec,
    pub code21: CodeSpec,
    pub isotropic: bool,
    pub index_ok: bool,
    pub min_ok: Option<bool>,
}

#[derive(Clone, Debug, Default)]
pub struct SearchOutcome {
    pub counts: StageCounts,
    pub candidates: Vec<Candidate>,
}

fn product<T: Clone>(sets: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for s in sets {
        let mut next = Vec::with_capacity(out.len() * s.len());
        for prefix in &out {
            for x in s {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Isotropy using translation invariance: only rows `u₀` and `u_∞` need
/// to be paired against every generator.
fn isotropic_fast(u: &CodeGenerators, w: &CodeGenerators, form: &GlueForm, modulus: i64, diag_modulus: i64) -> bool {
    for &i in &[18usize, 19] {
        for j in 0..LENGTH {
            let v = form.pair(&u.rows[i], &w.rows[i], &u.rows[j], &w.rows[j]);
            let m = if i == j { diag_modulus } else { modulus };
            if v.rem_euclid(m) != 0 {
                return false;
            }
        }
    }
    true
}

fn stacked_rows(u: &CodeGenerators, w: &CodeGenerators) -> Vec<Vec<u64>> {
    u.rows
        .iter()
        .zip(&w.rows)
        .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
        .collect()
}

/// Does the mod-7 part of a ℤ/21 parameter tuple give a self-orthogonal
/// code of 𝔽₇-rank 10?
fn passes_mod7(p7: [u64; 6]) -> bool {
    let w = gqr_generators(&CodeSpec { modulus: 7, params: p7 });
    let zero = CodeGenerators::zero(7);
    // only the 2·w·w' term survives mod 7
    let form = GlueForm { p: 0, q: 0, r: 1, den: 7 };
    let iso = (0..LENGTH).all(|j| {
        [18usize, 19].iter().all(|&i| form.pair(&zero.rows[i], &w.rows[i], &zero.rows[j], &w.rows[j]) % 7 == 0)
    });
    iso && rank_mod_p(&w.rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), 7) == 10
}

/// Mod-3 part: `(u, w mod 3)` isotropic for `u·u' + u·w' + w·u' + 2 w·w'`
/// and of 𝔽₃-rank 20. Norms only need to vanish mod 3 here since the
/// form with numerator `(28, 7, 2)` is even.
fn passes_mod3(p3: [u64; 6], q3: [u64; 6]) -> bool {
    let u = gqr_generators(&CodeSpec { modulus: 3, params: p3 });
    let w = gqr_generators(&CodeSpec { modulus: 3, params: q3 });
    let form = GlueForm { p: 1, q: 1, r: 2, den: 3 };
    isotropic_fast(&u, &w, &form, 3, 3) && rank_mod_p(&stacked_rows(&u, &w), 3) == 20
}

fn crt_3_7(r3: u64, r7: u64) -> u64 {
    // x ≡ r3 (3), x ≡ r7 (7): x = 7·r3·(7⁻¹ mod 3) + 3·r7·(3⁻¹ mod 7) = 7·r3 + 15·r7
    (7 * r3 + 15 * r7) % 21
}

fn canonical_under_units(p3: &[u64; 6], p21: &[u64; 6]) -> bool {
    let key = (p21.to_vec(), p3.to_vec());
    (1..21u64).filter(|c| num_integer::gcd(*c, 21) == 1).all(|c| {
        let q21: Vec<u64> = p21.iter().map(|x| x * c % 21).collect();
        let q3: Vec<u64> = p3.iter().map(|x| x * c % 3).collect();
        key <= (q21, q3)
    })
}

/// Staged enumeration of parameter pairs satisfying the isotropy and index conditions and
/// optionally a minimum-norm filter.
///
/// The isotropy condition modulo 21 splits into a condition modulo 7 that involves
/// only the second code, and one modulo 3 that involves the first code and
/// the second code reduced mod 3. The index condition `|C| = 63¹⁰` likewise
/// splits into `rank_𝔽₇ = 10` and `rank_𝔽₃ = 20`. Survivors are the CRT
/// combinations of the two stages, so the full region is covered exactly.
pub fn search_params(opts: &SearchOptions, min_filter: impl Fn(&CodeSpec, &CodeSpec) -> Result<bool>) -> Result<SearchOutcome> {
    let mut out = SearchOutcome::default();
    out.counts.region = opts.region3.iter().map(|s| s.len() as u128).product::<u128>()
        * opts.region21.iter().map(|s| s.len() as u128).product::<u128>();

    // projections of the ℤ/21 region
    let proj7: Vec<Vec<u64>> = opts
        .region21
        .iter()
        .map(|s| {
            let mut v: Vec<u64> = s.iter().map(|x| x % 7).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut s7 = Vec::new();
    for p in product(&proj7) {
        let p7: [u64; 6] = p.try_into().expect("six");
        if passes_mod7(p7) {
            s7.push(p7);
        }
    }
    out.counts.mod7_survivors = s7.len() as u64;

    let region3 = product(&opts.region3);
    let mut mod3_cache: std::collections::HashMap<([u64; 6], [u64; 6]), bool> = Default::default();
    let mut mod3_pass = std::collections::HashSet::new();
    let mut glue = Vec::new();
    for p7 in &s7 {
        // residues mod 3 compatible with the region for this mod-7 tuple
        let lifts3: Vec<Vec<u64>> = (0..6)
            .map(|k| {
                let mut v: Vec<u64> =
                    opts.region21[k].iter().filter(|x| *x % 7 == p7[k]).map(|x| x % 3).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        for q in product(&lifts3) {
            let q3: [u64; 6] = q.try_into().expect("six");
            for p in &region3 {
                let p3: [u64; 6] = p.clone().try_into().expect("six");
                let ok = *mod3_cache.entry((p3, q3)).or_insert_with(|| passes_mod3(p3, q3));
                if !ok {
                    continue;
                }
                mod3_pass.insert((p3, q3));
                let p21: [u64; 6] = std::array::from_fn(|k| crt_3_7(q3[k], p7[k]));
                if opts.unit_reduction && !canonical_under_units(&p3, &p21) {
                    continue;
                }
                glue.push((p3, p21));
            }
        }
    }
    out.counts.mod3_survivors = mod3_pass.len() as u64;
    glue.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    out.counts.glue_survivors = glue.len() as u128;

    for (p3, p21) in glue {
        if opts.cap.is_some_and(|c| out.candidates.len() >= c) {
            break;
        }
        let code3 = CodeSpec { modulus: 3, params: p3 };
        let code21 = CodeSpec { modulus: 21, params: p21 };
        let min_ok = match opts.min_norm {
            Some(_) => {
                out.counts.min_checked += 1;
                let ok = min_filter(&code3, &code21)?;
                if !ok {
                    continue;
                }
                Some(true)
            }
            None => None,
        };
        out.counts.accepted += 1;
        out.candidates.push(Candidate { code3, code21, isotropic: true, index_ok: true, min_ok });
    }
    Ok(out)
}

/// Exact cross-check of a search survivor: full isotropy and `det = 63¹⁰`.
pub fn verify_pair(code3: &CodeSpec, code21: &CodeSpec) -> Result<(bool, bool)> {
    let u = gqr_generators(code3);
    let w = gqr_generators(code21);
    let iso = isotropy_check(&u, &w);
    let idx = match glue_basis(&u, &w) {
        Ok(b) => index_check(&b),
        Err(Error::RankDeficient { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok((iso, idx))
}

/// Largest absolute entry of a generator matrix, for sanity checks.
pub fn max_entry(g: &CodeGenerators) -> u64 {
    g.to_matrix().max_abs().abs().to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn legendre_values() {
        let squares: std::collections::BTreeSet<i64> = (1..19).map(|k| k * k % 19).collect();
        assert_eq!(squares.iter().copied().collect::<Vec<_>>(), vec![1, 4, 5, 6, 7, 9, 11, 16, 17]);
        for x in -40..40i64 {
            let expect = if x.rem_euclid(19) == 0 {
                0
            } else if squares.contains(&x.rem_euclid(19)) {
                1
            } else {
                -1
            };
            assert_eq!(legendre19(x), expect, "x = {x}");
        }
        assert_eq!(legendre19(1), 1);
        assert_eq!(legendre19(0), 0);
        assert_eq!(legendre19(2), -1);
    }

    #[test]
    fn o40_code_generators() {
        let u = gqr_generators(&CodeSpec::o40_mod3());
        let mut inf = [1u64; 20];
        inf[19] = 0;
        assert_eq!(u.rows[19], inf);
        let u1 = u.rows[0];
        assert_eq!(u1[0], 0);
        assert_eq!(u1[19], 1);
        for pj in 0..19 {
            let j = field_label(pj).unwrap() as i64;
            if j == 1 {
                continue;
            }
            let want = if legendre19(1 - j) == 1 { 0 } else { 1 };
            assert_eq!(u1[pj], want);
        }
        let w = gqr_generators(&CodeSpec::o40_mod21());
        let mut winf = [0u64; 20];
        winf[19] = 7;
        assert_eq!(w.rows[19], winf);
    }

    #[test]
    fn spec_text_roundtrip() {
        let s: CodeSpec = "21:0,7,1,0,4,17".parse().unwrap();
        assert_eq!(s, CodeSpec::o40_mod21());
        assert_eq!(s.to_string(), "21:0,7,1,0,4,17");
        assert_eq!("3:4,-1,0,0,1,1".parse::<CodeSpec>().unwrap().params, [1, 2, 0, 0, 1, 1]);
        assert!("3:1,2".parse::<CodeSpec>().is_err());
        assert!("x:1,2,3,4,5,6".parse::<CodeSpec>().is_err());
    }

    #[test]
    fn o40_pair_is_isotropic() {
        let u = gqr_generators(&CodeSpec::o40_mod3());
        let w = gqr_generators(&CodeSpec::o40_mod21());
        assert!(isotropy_check(&u, &w));
        assert!(isotropy_check(&CodeGenerators::zero(3), &CodeGenerators::zero(21)));
    }

    #[test]
    fn regression_pair_with_zero_code() {
        // frozen value of a direct evaluation: u·u ≡ 28·19 ≢ 0 mod 42 for u_∞
        let u = gqr_generators(&CodeSpec::o40_mod3());
        let w = gqr_generators(&CodeSpec::new(21, [0; 6]).unwrap());
        assert!(!isotropy_check(&u, &w));
    }

    #[test]
    fn lift_choice_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = gqr_generators(&CodeSpec::o40_mod3());
        let w = gqr_generators(&CodeSpec::o40_mod21());
        let form = GlueForm::O40;
        for _ in 0..50 {
            // shift every entry by a random multiple of its modulus
            let shift = |g: &CodeGenerators, rng: &mut ChaCha8Rng| -> Vec<Vec<i64>> {
                g.rows
                    .iter()
                    .map(|r| r.iter().map(|&x| x as i64 + g.modulus as i64 * rng.gen_range(-3..=3)).collect())
                    .collect()
            };
            let (su, sw) = (shift(&u, &mut rng), shift(&w, &mut rng));
            for i in 0..20 {
                for j in i..20 {
                    let mut v = 0i64;
                    for k in 0..20 {
                        v += form.p * su[i][k] * su[j][k]
                            + form.q * (su[i][k] * sw[j][k] + sw[i][k] * su[j][k])
                            + form.r * sw[i][k] * sw[j][k];
                    }
                    let m = if i == j { 42 } else { 21 };
                    assert_eq!(v.rem_euclid(m), 0);
                }
            }
        }
    }

    #[test]
    fn fast_isotropy_agrees_with_full_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut agree_true = 0;
        for round in 0..400 {
            let (p3, p21): ([i64; 6], [i64; 6]) = if round == 0 {
                ([1, 0, 0, 0, 1, 1], [0, 7, 1, 0, 4, 17])
            } else {
                (std::array::from_fn(|_| rng.gen_range(0..3)), std::array::from_fn(|_| rng.gen_range(0..21)))
            };
            let u = gqr_generators(&CodeSpec::new(3, p3).unwrap());
            let w = gqr_generators(&CodeSpec::new(21, p21).unwrap());
            let full = isotropy_check(&u, &w);
            assert_eq!(full, isotropic_fast(&u, &w, &GlueForm::O40, 21, 42));
            agree_true += full as usize;
        }
        assert!(agree_true > 0);
    }

    #[test]
    fn index_condition_examples() {
        assert!(!index_check(&IntMatrix::identity(40)));
        let mut d = vec![BigInt::from(3); 20];
        d.extend(vec![BigInt::from(21); 20]);
        assert!(!index_check(&IntMatrix::diagonal(&d)));
    }

    #[test]
    fn glue_of_zero_codes_is_block_lattice() {
        let b = glue_basis(&CodeGenerators::zero(3), &CodeGenerators::zero(21)).unwrap();
        let mut d = vec![BigInt::from(3); 20];
        d.extend(vec![BigInt::from(21); 20]);
        assert_eq!(b, IntMatrix::diagonal(&d));
    }

    #[test]
    fn glue_of_full_codes_is_dual() {
        let id = CodeGenerators {
            modulus: 3,
            rows: (0..20).map(|i| std::array::from_fn(|j| (i == j) as u64)).collect(),
        };
        let id21 = CodeGenerators { modulus: 21, ..id.clone() };
        let zero = CodeGenerators::zero(3);
        let zero21 = CodeGenerators::zero(21);
        let b = glue_basis(&id, &zero21)
            .unwrap()
            .vstack(&glue_basis(&zero, &id21).unwrap())
            .unwrap();
        assert_eq!(linalg::hnf_only(&b).basis(), IntMatrix::identity(40));
    }

    #[test]
    fn o40_pair_glue_index() {
        let u = gqr_generators(&CodeSpec::o40_mod3());
        let w = gqr_generators(&CodeSpec::o40_mod21());
        let b = glue_basis(&u, &w).unwrap();
        assert!(index_check(&b));
        assert_eq!(verify_pair(&CodeSpec::o40_mod3(), &CodeSpec::o40_mod21()).unwrap(), (true, true));
    }

    #[test]
    fn staged_conditions_accept_the_o40_pair() {
        let p21 = CodeSpec::o40_mod21().params;
        assert!(passes_mod7(p21.map(|x| x % 7)));
        assert!(passes_mod3(CodeSpec::o40_mod3().params, p21.map(|x| x % 3)));
        for r3 in 0..3 {
            for r7 in 0..7 {
                let x = crt_3_7(r3, r7);
                assert_eq!((x % 3, x % 7), (r3, r7));
            }
        }
    }

    #[test]
    fn field_rank() {
        let rows = vec![vec![1, 2, 0], vec![2, 4, 0], vec![0, 0, 5]];
        assert_eq!(rank_mod_p(&rows, 7), 2);
        assert_eq!(rank_mod_p(&rows, 5), 1);
    }

    #[test]
    fn staged_search_matches_brute_force() {
        let mut opts = SearchOptions::default();
        opts.region3 = [vec![1], vec![0], vec![0], vec![0, 1], vec![1], vec![1, 2]];
        opts.region21 = [vec![0, 7], vec![7, 14], vec![1, 8], vec![0], vec![4, 11], vec![17]];
        let out = search_params(&opts, |_, _| Ok(true)).unwrap();
        let mut brute = Vec::new();
        for p3 in product(&opts.region3) {
            for p21 in product(&opts.region21) {
                let c3 = CodeSpec { modulus: 3, params: p3.clone().try_into().unwrap() };
                let c21 = CodeSpec { modulus: 21, params: p21.try_into().unwrap() };
                if verify_pair(&c3, &c21).unwrap() == (true, true) {
                    brute.push((c3, c21));
                }
            }
        }
        let mut got: Vec<_> = out.candidates.iter().map(|c| (c.code3, c.code21)).collect();
        got.sort();
        brute.sort();
        assert_eq!(got, brute);
        assert!(got.contains(&(CodeSpec::o40_mod3(), CodeSpec::o40_mod21())));
        assert_eq!(out.counts.region, 4 * 16);
    }

    #[test]
    fn unit_reduction_keeps_one_per_orbit() {
        let mut opts = SearchOptions::default();
        opts.region3 = [vec![1], vec![0], vec![0], vec![0], vec![1], vec![1]];
        let all = search_params(&opts, |_, _| Ok(true)).unwrap();
        opts.unit_reduction = true;
        let reduced = search_params(&opts, |_, _| Ok(true)).unwrap();
        assert!(reduced.counts.glue_survivors <= all.counts.glue_survivors);
        assert!(reduced.counts.glue_survivors > 0);
    }
}
