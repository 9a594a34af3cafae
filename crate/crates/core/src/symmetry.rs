//! Finite matrix groups acting on frame coordinates, the group `Γ` generated
//! by the code permutations and `−I`, and orbits on vector sets.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;

use crate::enumeration::VectorSet;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::IntMatrix;
use crate::qr::{field_label, position_of, PRIME};

/// Integer matrix stored by its nonzero entries, acting on row vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseAction {
    n: usize,
    rows: Vec<Vec<(usize, i64)>>,
}

impl SparseAction {
    pub fn from_dense(m: &[i64], n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).filter(|&j| m[i * n + j] != 0).map(|j| (j, m[i * n + j])).collect())
            .collect();
        Self { n, rows }
    }

    /// `v · M`.
    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.n];
        for (vi, row) in v.iter().zip(&self.rows) {
            if *vi != 0 {
                for &(j, a) in row {
                    out[j] += vi * a;
                }
            }
        }
        out
    }
}

/// A finite group of `n×n` integer matrices under the right action `v ↦ v·g`.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    n: usize,
    generators: Vec<Vec<i64>>,
    elements: Vec<Vec<i64>>,
    actions: Vec<SparseAction>,
}

pub(crate) fn mul_dense(a: &[i64], b: &[i64], n: usize) -> Vec<i64> {
    let mut c = vec![0i64; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x != 0 {
                for j in 0..n {
                    c[i * n + j] += x * b[k * n + j];
                }
            }
        }
    }
    c
}

pub(crate) fn identity_dense(n: usize) -> Vec<i64> {
    let mut m = vec![0i64; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    m
}

/// Smallest `k ≥ 1` with `gᵏ = I`, or `None` above `cap`.
pub fn matrix_order(g: &[i64], n: usize, cap: usize) -> Option<usize> {
    let id = identity_dense(n);
    let mut p = g.to_vec();
    for k in 1..=cap {
        if p == id {
            return Some(k);
        }
        p = mul_dense(&p, g, n);
    }
    None
}

impl SymmetryGroup {
    /// Closes the generators under multiplication, failing beyond `cap` elements.
    pub fn generate(generators: &[IntMatrix], cap: usize) -> Result<Self> {
        let n = generators.first().map_or(0, IntMatrix::rows);
        let gens: Vec<Vec<i64>> = generators
            .iter()
            .map(|g| {
                if g.rows() != n || g.cols() != n {
                    return Err(Error::Dimension("generators must be square of equal size".into()));
                }
                g.to_i64().ok_or_else(|| Error::InvalidArgument("generator entries too large".into()))
            })
            .collect::<Result<_>>()?;
        let id = identity_dense(n);
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::from([(id.clone(), 0)]);
        let mut elements = vec![id];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &gens {
                let h = mul_dense(&elements[i], g, n);
                if !seen.contains_key(&h) {
                    if elements.len() >= cap {
                        return Err(Error::ClosureCap(cap));
                    }
                    seen.insert(h.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(h);
                }
            }
        }
        let actions = elements.iter().map(|e| SparseAction::from_dense(e, n)).collect();
        Ok(Self { n, generators: gens, elements, actions })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> Vec<IntMatrix> {
        self.generators.iter().map(|g| IntMatrix::from_i64(self.n, self.n, g).expect("square")).collect()
    }

    pub fn generator_orders(&self) -> Vec<usize> {
        self.generators.iter().map(|g| matrix_order(g, self.n, self.order()).expect("finite group")).collect()
    }

    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elements
    }

    pub fn actions(&self) -> &[SparseAction] {
        &self.actions
    }

    /// Checks that every generator preserves the frame Gram and maps each
    /// basis row of `lat` into `lat`.
    pub fn stabilizes(&self, lat: &Lattice) -> Result<()> {
        let g_frame = lat.frame().gram();
        let m = lat.membership();
        for (k, g) in self.generators().iter().enumerate() {
            if g.to_rational().congruence(&g_frame)? != g_frame {
                return Err(Error::StructureMismatch(format!("generator {k} does not preserve the frame Gram")));
            }
            let image = lat.basis().mul(g)?;
            for row in image.iter_rows() {
                if !m.contains(row) {
                    return Err(Error::StructureMismatch(format!("generator {k} does not stabilize the lattice")));
                }
            }
        }
        Ok(())
    }
}

/// Permutation matrix sending coordinate `k` to `σ(k)` in both 20-blocks.
fn block_permutation(sigma: impl Fn(usize) -> usize) -> IntMatrix {
    let mut m = IntMatrix::zeros(40, 40);
    for k in 0..20 {
        let t = sigma(k);
        m[(k, t)] = BigInt::from(1);
        m[(20 + k, 20 + t)] = BigInt::from(1);
    }
    m
}

/// `p_c : t ↦ t + 1` on `𝔽₁₉`, fixing `∞`.
pub fn p_c() -> IntMatrix {
    block_permutation(|k| field_label(k).map_or(k, |t| position_of(t + 1)))
}

/// `p_s : t ↦ 4t` on `𝔽₁₉`, fixing `0` and `∞`.
pub fn p_s() -> IntMatrix {
    block_permutation(|k| field_label(k).map_or(k, |t| position_of(4 * t % PRIME)))
}

/// `Γ = ⟨p_c, p_s, −I⟩` acting on the O₄₀ frame.
pub fn gamma_group() -> Result<SymmetryGroup> {
    SymmetryGroup::generate(&[p_c(), p_s(), IntMatrix::scalar(40, -1)], 10_000)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    /// Lexicographically smallest vector of the orbit (over both signs).
    pub representative: Vec<i64>,
    /// Index of the representative's folded form in the set.
    pub rep_index: usize,
    /// Folded indices of the members.
    pub members: Vec<usize>,
    /// Number of vectors in the orbit counting both signs.
    pub size: usize,
}

fn fold(v: Vec<i64>) -> Vec<i64> {
    let neg: Vec<i64> = v.iter().map(|x| -x).collect();
    if neg > v {
        neg
    } else {
        v
    }
}

/// Orbits of `group` on the vectors of `set` (given folded or not); the
/// group must contain `−I` for folded input to be meaningful.
pub fn orbits(set: &VectorSet, group: &SymmetryGroup) -> Result<Vec<Orbit>> {
    let folded = set.folded();
    let vecs = folded.vectors();
    let mut seen = vec![false; vecs.len()];
    let mut out = Vec::new();
    for start in 0..vecs.len() {
        if seen[start] {
            continue;
        }
        let mut members = Vec::new();
        for act in group.actions() {
            let img = fold(act.apply(&vecs[start]));
            let idx = folded
                .position(&img)
                .ok_or_else(|| Error::StructureMismatch("orbit leaves the vector set".into()))?;
            if !seen[idx] {
                seen[idx] = true;
                members.push(idx);
            }
        }
        members.sort_unstable();
        // the lexicographically smallest signed vector is the negative of the largest folded one
        let rep_index = *members.last().expect("nonempty");
        let representative = vecs[rep_index].iter().map(|x| -x).collect();
        out.push(Orbit { representative, rep_index, size: 2 * members.len(), members });
    }
    out.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction;
    use crate::lattice::AmbientFrame;
    use crate::linalg::RatMatrix;
    use std::sync::Arc;

    #[test]
    fn gamma_has_order_342() {
        let g = gamma_group().unwrap();
        assert_eq!(g.order(), 342);
        assert_eq!(g.generator_orders(), vec![19, 9, 2]);
    }

    #[test]
    fn gamma_stabilizes_o40_and_l() {
        let g = gamma_group().unwrap();
        g.stabilizes(&construction::build_O40().unwrap()).unwrap();
        g.stabilizes(&construction::build_L()).unwrap();
    }

    #[test]
    fn gamma_preserves_o40_gram_in_its_basis() {
        let o = construction::build_O40().unwrap();
        let gram = o.integer_gram().unwrap();
        let m = o.membership();
        for g in gamma_group().unwrap().generators() {
            // rows of the image basis in O₄₀ coordinates
            let img = o.basis().mul(&g).unwrap();
            let coords: Vec<Vec<BigInt>> = img.iter_rows().map(|r| m.coordinates(r).unwrap()).collect();
            let a = IntMatrix::from_rows(&coords).unwrap();
            assert_eq!(a.congruence(&gram).unwrap(), gram);
        }
    }

    #[test]
    fn generator_outside_group_is_detected() {
        let o = construction::build_O40().unwrap();
        // swapping ∞ with 0 is not a code symmetry
        let swap = block_permutation(|k| match k {
            18 => 19,
            19 => 18,
            k => k,
        });
        let bad = SymmetryGroup::generate(&[swap], 10).unwrap();
        assert!(bad.stabilizes(&o).is_err());
    }

    #[test]
    fn closure_cap() {
        assert!(matches!(SymmetryGroup::generate(&[p_c()], 5), Err(Error::ClosureCap(5))));
    }

    #[test]
    fn sign_pair_is_one_orbit() {
        let f = Arc::new(AmbientFrame::new("std2", &RatMatrix::identity(2)).unwrap());
        let set = VectorSet::new(f, vec![vec![1, 0], vec![-1, 0]], false).unwrap();
        let g = SymmetryGroup::generate(&[IntMatrix::scalar(2, -1)], 10).unwrap();
        let o = orbits(&set, &g).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].representative, vec![-1, 0]);
        assert_eq!(o[0].size, 2);
    }
}
