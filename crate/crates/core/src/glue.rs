//! The sublattice `M ≅ A₁(2)² ⊕ A₁₉(2)²` spanned by minimal vectors and the
//! identity `L + M = O₄₀`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::enumeration::VectorSet;
use crate::error::{Error, Result};
use crate::lattice::{a_n_gram, Lattice};
use crate::linalg::{self, IntMatrix};
use crate::typing::{InnerProducts, Partition};

/// Label of the block holding the orthogonal pair.
pub const PAIR_BLOCK: &str = "S1,1";

/// Vectors `w₁,…,wₙ` of norm 4 with `wᵢ·wᵢ₊₁ = −2` and all other products 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootChain {
    pub vectors: Vec<Vec<i64>>,
}

impl RootChain {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Chain `w₁ = r₁`, `wᵢ = rᵢ − rᵢ₋₁` from vectors with all mutual products `+2`.
    pub fn from_clique(r: &[Vec<i64>]) -> Self {
        let vectors = r
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 { v.clone() } else { v.iter().zip(&r[i - 1]).map(|(a, b)| a - b).collect() })
            .collect();
        Self { vectors }
    }
}

/// Gram of `A₁(2)² ⊕ A₁₉(2)²` in the chain basis.
pub fn target_gram() -> IntMatrix {
    let two = BigInt::from(2);
    let a1 = IntMatrix::scalar(1, 4);
    let a19 = a_n_gram(19).scale(&two);
    IntMatrix::block_diagonal(&[a1.clone(), a1, a19.clone(), a19])
}

#[derive(Clone, Debug)]
pub struct SublatticeM {
    pub lattice: Lattice,
    /// The 40 set vectors spanning `M`: the pair, then both 19-sets.
    pub chosen: Vec<Vec<i64>>,
    pub pair: [Vec<i64>; 2],
    pub chains: [RootChain; 2],
    /// Gram of the pair followed by both chains.
    pub gram: IntMatrix,
    /// Label of the block the chains were taken from.
    pub chain_block: String,
    /// Number of mutually `±2` classes found in the chain block.
    pub chain_sets: usize,
}

fn block_members<'a>(partition: &'a Partition, label: &str) -> Result<&'a [usize]> {
    partition
        .blocks
        .iter()
        .find(|b| b.label_string() == label)
        .map(|b| b.members.as_slice())
        .ok_or_else(|| Error::SearchFailed(format!("partition has no block {label}")))
}

/// Finds `M` from the orthogonal pair block and the first block (in
/// partition order) that splits into two 19-vector classes orthogonal to the
/// pair and to each other.
///
/// Inside such a class every two vectors have inner product `±2`. After
/// normalising signs so that all products are `+2`, consecutive differences
/// give an `A₁₉(2)` chain.
pub fn find_sublattice_m(lat: &Lattice, set: &VectorSet, ips: &InnerProducts, partition: &Partition) -> Result<SublatticeM> {
    let set = set.folded();
    let pair = block_members(partition, PAIR_BLOCK)?;
    if pair.len() != 2 || ips.get(pair[0], pair[1]) != 0 {
        return Err(Error::SearchFailed(format!("{PAIR_BLOCK} is not a single orthogonal pair")));
    }
    let pair_vecs = [set.vectors()[pair[0]].clone(), set.vectors()[pair[1]].clone()];
    for block in &partition.blocks {
        let members = &block.members;
        if members.len() != 38 || members.iter().any(|&c| pair.iter().any(|&p| ips.get(c, p) != 0)) {
            continue;
        }
        let Some((cliques, chain_sets)) = two_cliques(&set, ips, members) else {
            continue;
        };
        let chains = [RootChain::from_clique(&cliques[0]), RootChain::from_clique(&cliques[1])];
        let rows: Vec<Vec<i64>> =
            pair_vecs.iter().cloned().chain(chains.iter().flat_map(|c| c.vectors.iter().cloned())).collect();
        let lattice = Lattice::new(lat.frame().clone(), IntMatrix::from_i64_rows(&rows)?)?;
        let gram = lattice
            .integer_gram()
            .ok_or_else(|| Error::StructureMismatch("chain Gram is not integral".into()))?;
        if gram != target_gram() {
            continue;
        }
        if !lattice.is_sublattice_of(lat) {
            return Err(Error::StructureMismatch("M is not contained in the lattice".into()));
        }
        let chosen = pair_vecs.iter().cloned().chain(cliques.into_iter().flatten()).collect();
        return Ok(SublatticeM {
            lattice,
            chosen,
            pair: pair_vecs,
            chains,
            gram,
            chain_block: block.label_string(),
            chain_sets,
        });
    }
    Err(Error::SearchFailed("no block holds two orthogonal A₁₉(2) chains".into()))
}

/// Splits `members` into classes of the graph with edges `|x·y| = 2`. Returns
/// the two classes, sign-normalised to mutual products `+2`, when there are
/// exactly two classes of 19 vectors.
fn two_cliques(set: &VectorSet, ips: &InnerProducts, members: &[usize]) -> Option<(Vec<Vec<Vec<i64>>>, usize)> {
    let mut class_of = vec![usize::MAX; members.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for start in 0..members.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[start] = id;
        let mut found = vec![start];
        let mut k = 0;
        while k < found.len() {
            let u = found[k];
            for v in 0..members.len() {
                if class_of[v] == usize::MAX && ips.get(members[u], members[v]).abs() == 2 {
                    class_of[v] = id;
                    found.push(v);
                }
            }
            k += 1;
        }
        found.sort_unstable();
        classes.push(found.into_iter().map(|i| members[i]).collect());
    }
    if classes.len() != 2 || classes.iter().any(|c| c.len() != 19) {
        return None;
    }
    let mut cliques = Vec::new();
    for class in &classes {
        let first = class[0];
        let signed: Vec<(usize, i64)> =
            class.iter().map(|&i| (i, if i == first || ips.get(first, i) == 2 { 1 } else { -1 })).collect();
        let consistent = signed
            .iter()
            .all(|&(i, si)| signed.iter().all(|&(j, sj)| i == j || si * sj * i64::from(ips.get(i, j)) == 2));
        if !consistent {
            return None;
        }
        cliques.push(signed.iter().map(|&(i, s)| set.vectors()[i].iter().map(|x| s * x).collect()).collect());
    }
    Some((cliques, classes.len()))
}

/// `L + M = O`, compared by Hermite normal form.
pub fn verify_glue_sum(l: &Lattice, m: &Lattice, o: &Lattice) -> Result<bool> {
    if l.frame() != o.frame() || m.frame() != o.frame() {
        return Ok(false);
    }
    Ok(l.sum(m)?.equals(o))
}

/// `[O : M]` as the product of the elementary divisors of `M`'s basis in `O`'s coordinates.
pub fn index_in(m: &Lattice, o: &Lattice) -> Result<BigInt> {
    let mem = o.membership();
    let rows: Vec<Vec<BigInt>> = m
        .basis()
        .iter_rows()
        .map(|r| mem.coordinates(r).ok_or_else(|| Error::InvalidArgument("not a sublattice".into())))
        .collect::<Result<_>>()?;
    let c = IntMatrix::from_rows(&rows)?;
    let d = linalg::snf_diagonal(&c)?;
    if d.iter().any(Zero::is_zero) || d.len() < o.rank() {
        return Err(Error::RankDeficient { rank: d.iter().filter(|x| !x.is_zero()).count(), expected: o.rank() });
    }
    Ok(d.iter().fold(BigInt::one(), |acc, x| acc * num_traits::Signed::abs(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction;

    #[test]
    fn clique_differences_form_a_chain() {
        // r_i = e_0 + e_i in ℤ⁴ scaled by 2: norms 4, mutual products 2
        let r: Vec<Vec<i64>> = (1..4).map(|i| (0..4).map(|j| i64::from(j == 0 || j == i)).collect()).collect();
        let w = RootChain::from_clique(&r);
        let ip = |a: &[i64], b: &[i64]| 2 * a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();
        assert_eq!(ip(&w.vectors[0], &w.vectors[0]), 4);
        for i in 0..3usize {
            for j in 0..3 {
                let want = match i.abs_diff(j) {
                    0 => 4,
                    1 => -2,
                    _ => 0,
                };
                assert_eq!(ip(&w.vectors[i], &w.vectors[j]), want);
            }
        }
    }

    #[test]
    fn target_determinant() {
        let d = linalg::det(&target_gram()).unwrap();
        let a19 = BigInt::from(2).pow(19) * 20;
        assert_eq!(d, BigInt::from(16) * &a19 * &a19);
    }

    #[test]
    fn sum_checks_on_known_lattices() {
        let o = construction::build_O40().unwrap();
        let l = construction::build_L();
        assert!(!verify_glue_sum(&l, &l, &o).unwrap());
        assert!(verify_glue_sum(&o, &l, &o).unwrap());
        // index of L in O₄₀ is √det(gram L) = 63¹⁰
        assert_eq!(index_in(&l, &o).unwrap(), BigInt::from(63).pow(10));
    }
}
