//! Inner-product types of norm-4 vectors and the refinement of `S` into
//! irreducible subsets.
//!
//! Everything works on sign-folded sets: a block of representatives `B`
//! stands for `B ∪ −B`. For a representative `v`, the vectors `u` and `−u`
//! contribute `±(u·v)`, so `t_k` for `k > 0` counts representatives with
//! `|u·v| = k`, and every orthogonal representative contributes 2 to `t₀`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::enumeration::VectorSet;
use crate::error::{Error, Result};

/// `[t₀, t₁, t₂, t₄]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TypeSig {
    pub t0: u32,
    pub t1: u32,
    pub t2: u32,
    pub t4: u32,
}

impl TypeSig {
    pub const FRAME: Self = Self { t0: 78, t1: 0, t2: 0, t4: 1 };

    pub fn new(t: [u32; 4]) -> Self {
        Self { t0: t[0], t1: t[1], t2: t[2], t4: t[3] }
    }

    pub fn as_array(&self) -> [u32; 4] {
        [self.t0, self.t1, self.t2, self.t4]
    }

    /// `t₀ + 2(t₁ + t₂ + t₄)`, the size of a negation-closed reference set.
    pub fn weight(&self) -> u32 {
        self.t0 + 2 * (self.t1 + self.t2 + self.t4)
    }
}

impl fmt::Display for TypeSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{}]", self.t0, self.t1, self.t2, self.t4)
    }
}

/// Dense table of inner products between the representatives of a folded set.
pub struct InnerProducts {
    n: usize,
    data: Vec<i8>,
}

impl InnerProducts {
    pub fn compute(set: &VectorSet) -> Result<Self> {
        let vecs = set.vectors();
        let n = vecs.len();
        let kernel = set.frame().kernel();
        let dim = set.dim();
        let narrow = |v: &[i64]| -> Result<Vec<i32>> {
            v.iter()
                .map(|&x| i32::try_from(x).map_err(|_| Error::InvalidArgument(format!("coordinate {x} out of 32-bit range"))))
                .collect()
        };
        let xs: Vec<i32> = vecs.iter().map(|v| narrow(v)).collect::<Result<Vec<_>>>()?.concat();
        let ys: Vec<i32> = vecs.iter().map(|v| narrow(&kernel.transform(v))).collect::<Result<Vec<_>>>()?.concat();
        // every |x|·|y| term must stay far from overflow
        let mx = xs.iter().map(|x| x.unsigned_abs() as i64).max().unwrap_or(0);
        let my = ys.iter().map(|x| x.unsigned_abs() as i64).max().unwrap_or(0);
        if mx * my * dim as i64 >= i32::MAX as i64 {
            return Err(Error::InvalidArgument("coordinates too large for the 32-bit kernel".into()));
        }
        let den = kernel.den as i32;
        let mut data = vec![0i8; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().try_for_each(|(i, row)| -> Result<()> {
            let y = &ys[i * dim..(i + 1) * dim];
            for (j, slot) in row.iter_mut().enumerate() {
                let x = &xs[j * dim..(j + 1) * dim];
                let num: i32 = y.iter().zip(x).map(|(a, b)| a * b).sum();
                if num % den != 0 {
                    return Err(Error::StructureMismatch(format!("inner product {num}/{den} is not an integer")));
                }
                let ip = num / den;
                *slot = i8::try_from(ip).map_err(|_| Error::InnerProductOutOfRange(ip as i64))?;
            }
            Ok(())
        })?;
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

fn tally(counts: &mut [u32; 4], ip: i8) -> Result<()> {
    match ip {
        0 => counts[0] += 2,
        1 | -1 => counts[1] += 1,
        2 | -2 => counts[2] += 1,
        4 | -4 => counts[3] += 1,
        other => return Err(Error::InnerProductOutOfRange(other as i64)),
    }
    Ok(())
}

/// Type of representative `v` against the representatives `block`.
pub fn type_in_block(ips: &InnerProducts, v: usize, block: &[usize]) -> Result<TypeSig> {
    let row = ips.row(v);
    let mut c = [0u32; 4];
    for &u in block {
        tally(&mut c, row[u])?;
    }
    Ok(TypeSig::new(c))
}

/// Type of an arbitrary frame vector `v` against a reference set.
pub fn type_of(v: &[i64], refset: &VectorSet) -> Result<TypeSig> {
    let kernel = refset.frame().kernel();
    let y = kernel.transform(v);
    let mut c = [0u32; 4];
    for u in refset.vectors() {
        let num: i64 = y.iter().zip(u).map(|(a, b)| a * b).sum();
        if num % kernel.den != 0 {
            return Err(Error::StructureMismatch(format!("inner product {num}/{} is not an integer", kernel.den)));
        }
        let ip = num / kernel.den;
        if refset.is_modulo_sign() {
            tally(&mut c, i8::try_from(ip).map_err(|_| Error::InnerProductOutOfRange(ip))?)?;
        } else {
            match ip {
                0 => c[0] += 1,
                1 => c[1] += 1,
                2 => c[2] += 1,
                4 => c[3] += 1,
                -1 | -2 | -4 => {}
                other => return Err(Error::InnerProductOutOfRange(other)),
            }
        }
    }
    Ok(TypeSig::new(c))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Position in each refinement level, 1-based.
    pub label: Vec<usize>,
    /// Sorted representative indices.
    pub members: Vec<usize>,
    /// Type of the members against the parent block this block was split from.
    pub split_type: TypeSig,
}

impl Block {
    /// Number of vectors counting both signs.
    pub fn size(&self) -> usize {
        2 * self.members.len()
    }

    pub fn label_string(&self) -> String {
        let parts: Vec<String> = self.label.iter().map(ToString::to_string).collect();
        format!("S{}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Block>,
    pub level: usize,
}

impl Partition {
    pub fn trivial(n: usize) -> Self {
        Self {
            blocks: vec![Block { label: Vec::new(), members: (0..n).collect(), split_type: TypeSig::new([0; 4]) }],
            level: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of every representative.
    pub fn block_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (b, blk) in self.blocks.iter().enumerate() {
            for &m in &blk.members {
                out[m] = b;
            }
        }
        out
    }

    pub fn total_size(&self) -> usize {
        self.blocks.iter().map(Block::size).sum()
    }

    /// Type of each block's members against the block itself, or an error if
    /// the block is not homogeneous.
    pub fn local_types(&self, ips: &InnerProducts) -> Result<Vec<TypeSig>> {
        self.blocks
            .iter()
            .map(|b| {
                let types = member_types(ips, &b.members)?;
                let first = types.first().copied().unwrap_or(TypeSig::new([0; 4]));
                if types.iter().any(|t| *t != first) {
                    return Err(Error::StructureMismatch(format!("block {} is not type-homogeneous", b.label_string())));
                }
                Ok(first)
            })
            .collect()
    }

    /// `(split type, size)` rows sorted. For the first level the split type
    /// is the type against the whole set.
    pub fn split_multiset(&self) -> Vec<(TypeSig, usize)> {
        let mut rows: Vec<(TypeSig, usize)> = self.blocks.iter().map(|b| (b.split_type, b.size())).collect();
        rows.sort();
        rows
    }

    /// `(local type, size)` rows sorted.
    pub fn type_multiset(&self, ips: &InnerProducts) -> Result<Vec<(TypeSig, usize)>> {
        let mut rows: Vec<(TypeSig, usize)> =
            self.local_types(ips)?.into_iter().zip(self.blocks.iter().map(Block::size)).collect();
        rows.sort();
        Ok(rows)
    }
}

fn member_types(ips: &InnerProducts, members: &[usize]) -> Result<Vec<TypeSig>> {
    members.par_iter().map(|&v| type_in_block(ips, v, members)).collect()
}

/// One refinement pass: every block is split by the type of its members
/// against the block. The first pass orders blocks by `t₂`, later passes
/// order sub-blocks by type.
pub fn refine_once(ips: &InnerProducts, p: &Partition) -> Result<Partition> {
    let mut blocks = Vec::new();
    for b in &p.blocks {
        let types = member_types(ips, &b.members)?;
        let mut groups: BTreeMap<(u32, TypeSig), Vec<usize>> = BTreeMap::new();
        for (&m, t) in b.members.iter().zip(&types) {
            let key = if p.level == 0 { (t.t2, *t) } else { (0, *t) };
            groups.entry(key).or_default().push(m);
        }
        for (j, ((_, t), members)) in groups.into_iter().enumerate() {
            let mut label = b.label.clone();
            label.push(j + 1);
            blocks.push(Block { label, members, split_type: t });
        }
    }
    Ok(Partition { blocks, level: p.level + 1 })
}

/// `S₁, …, S₁₈`: the split of the whole set by type.
pub fn partition_by_type(ips: &InnerProducts) -> Result<Partition> {
    refine_once(ips, &Partition::trivial(ips.len()))
}

/// Refines until a pass produces no split. Returns the stable partition and
/// the number of passes that changed something.
pub fn refine_to_irreducible(ips: &InnerProducts, initial: &Partition) -> Result<(Partition, usize)> {
    let mut current = initial.clone();
    let mut splitting_passes = 0;
    loop {
        let next = refine_once(ips, &current)?;
        if next.blocks.len() == current.blocks.len() {
            return Ok((current, splitting_passes));
        }
        splitting_passes += 1;
        current = next;
    }
}

/// Some block has local type `[78, 0, 0, 1]`.
pub fn frame_signature_present(ips: &InnerProducts, p: &Partition) -> Result<bool> {
    Ok(p.local_types(ips)?.contains(&TypeSig::FRAME))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::AmbientFrame;
    use crate::linalg::{IntMatrix, RatMatrix};
    use std::sync::Arc;

    fn frame_4i(n: usize) -> Arc<AmbientFrame> {
        Arc::new(AmbientFrame::new("4I", &RatMatrix::identity(n).scale(&num_rational::BigRational::from_integer(4.into()))).unwrap())
    }

    fn standard_vectors(n: usize) -> VectorSet {
        let vs = (0..n)
            .map(|i| {
                let mut v = vec![0i64; n];
                v[i] = 1;
                v
            })
            .collect();
        VectorSet::new(frame_4i(n), vs, true).unwrap()
    }

    #[test]
    fn frame_standin_has_frame_signature() {
        let s = standard_vectors(40);
        assert_eq!(s.signed_len(), 80);
        let ips = InnerProducts::compute(&s).unwrap();
        let p = partition_by_type(&ips).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.local_types(&ips).unwrap(), vec![TypeSig::FRAME]);
        assert!(frame_signature_present(&ips, &p).unwrap());
        assert_eq!(type_of(&s.vectors()[0], &s.unfolded()).unwrap(), TypeSig::FRAME);
    }

    #[test]
    fn self_pair_type() {
        let s = standard_vectors(3);
        let only = VectorSet::new(s.frame().clone(), vec![vec![1, 0, 0]], false).unwrap();
        let pm = VectorSet::new(s.frame().clone(), vec![vec![1, 0, 0], vec![-1, 0, 0]], false).unwrap();
        assert_eq!(type_of(&[1, 0, 0], &pm).unwrap(), TypeSig::new([0, 0, 0, 1]));
        assert_eq!(type_of(&[1, 0, 0], &only).unwrap(), TypeSig::new([0, 0, 0, 1]));
    }

    #[test]
    fn empty_set_has_no_signature() {
        let s = VectorSet::new(frame_4i(2), Vec::new(), true).unwrap();
        let ips = InnerProducts::compute(&s).unwrap();
        let p = partition_by_type(&ips).unwrap();
        assert!(!frame_signature_present(&ips, &p).unwrap());
    }

    #[test]
    fn stable_partition_is_unchanged() {
        let s = standard_vectors(5);
        let ips = InnerProducts::compute(&s).unwrap();
        let p = partition_by_type(&ips).unwrap();
        let (q, passes) = refine_to_irreducible(&ips, &p).unwrap();
        assert_eq!(passes, 0);
        assert_eq!(q, p);
    }

    #[test]
    fn out_of_range_products_are_reported() {
        // Gram 4I, vectors e₁ and 2e₁+… give inner product 8
        let f = frame_4i(2);
        let s = VectorSet::new(f, vec![vec![1, 0], vec![2, 1]], true).unwrap();
        let ips = InnerProducts::compute(&s).unwrap();
        assert!(matches!(type_in_block(&ips, 0, &[0, 1]), Err(Error::InnerProductOutOfRange(8))));
    }

    #[test]
    fn mixed_block_splits_and_sum_rule_holds() {
        // A₂ scaled to norm 4 together with an orthogonal norm-4 line
        let f = Arc::new(
            AmbientFrame::new("a2+", &IntMatrix::from_i64_rows(&[[4, -2, 0], [-2, 4, 0], [0, 0, 4]]).unwrap().to_rational())
                .unwrap(),
        );
        let s = VectorSet::new(f, vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 1]], true).unwrap();
        let ips = InnerProducts::compute(&s).unwrap();
        let p = partition_by_type(&ips).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.total_size(), 8);
        for b in &p.blocks {
            for &v in &b.members {
                let t = type_in_block(&ips, v, &b.members).unwrap();
                assert_eq!(t.weight() as usize, b.size());
            }
        }
    }
}
