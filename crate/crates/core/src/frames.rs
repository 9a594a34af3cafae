//! Sets of pairwise orthogonal norm-4 vectors.
//!
//! Vectors are the representatives of a sign-folded set `S`; orthogonality
//! does not see the sign, so a set of orthogonal representatives stands for
//! a set of orthogonal vectors of the same size.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;

use rayon::prelude::*;
use serde::Serialize;

use crate::enumeration::{self, VectorSet};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::symmetry::{Orbit, SymmetryGroup};
use crate::typing::InnerProducts;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut b = Self::new(n);
        for i in 0..n {
            b.insert(i);
        }
        b
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn intersect_with(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a &= !b;
        }
    }

    pub fn count_and(&self, other: &[u64]) -> usize {
        self.words.iter().zip(other).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn intersects(&self, other: &[u64]) -> bool {
        self.words.iter().zip(other).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(64 * k + b)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Orthogonality graph on representatives, one bitset row per vertex.
pub struct OrthoGraph {
    n: usize,
    words: usize,
    perp: Vec<u64>,
}

impl OrthoGraph {
    pub fn new(ips: &InnerProducts) -> Self {
        let n = ips.len();
        let words = n.div_ceil(64);
        let mut perp = vec![0u64; n * words];
        perp.par_chunks_mut(words.max(1)).enumerate().for_each(|(i, out)| {
            for (j, &ip) in ips.row(i).iter().enumerate() {
                if ip == 0 {
                    out[j / 64] |= 1u64 << (j % 64);
                }
            }
        });
        Self { n, words, perp }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn perp(&self, i: usize) -> &[u64] {
        &self.perp[i * self.words..(i + 1) * self.words]
    }

    pub fn perp_set(&self, i: usize) -> Bitset {
        Bitset { words: self.perp(i).to_vec() }
    }
}

/// How ties between equally good candidates are broken in the greedy chain.
#[derive(Clone, Debug)]
pub enum TieBreak {
    /// Smallest index, i.e. lexicographically smallest representative.
    SmallestIndex,
    /// Smallest `(key[u], u)`.
    Keyed(Vec<usize>),
}

/// The greedy chain: starting from `P = {u ⊥ v}`, repeatedly choose `u ∈ P`
/// maximizing `|P ∩ u^⊥|` and replace `P` by `P ∩ u^⊥`, until `P` is
/// empty. Returns the chosen representatives, starting with `v`.
pub fn greedy_chain(g: &OrthoGraph, v: usize, tie: &TieBreak) -> Vec<usize> {
    let mut chosen = vec![v];
    let mut pool = g.perp_set(v);
    while !pool.is_empty() {
        let mut best: Option<(usize, (usize, usize))> = None;
        for u in pool.iter() {
            let gain = pool.count_and(g.perp(u));
            let key = match tie {
                TieBreak::SmallestIndex => (u, u),
                TieBreak::Keyed(k) => (k[u], u),
            };
            let better = match best {
                None => true,
                Some((bg, bk)) => gain > bg || (gain == bg && key < bk),
            };
            if better {
                best = Some((gain, key));
            }
        }
        let (_, (_, u)) = best.expect("pool is nonempty");
        chosen.push(u);
        pool.intersect_with(g.perp(u));
    }
    chosen
}

/// Greedy orthogonal set through `v` inside an arbitrary vector set.
pub fn max_orthogonal_set(v: &[i64], set: &VectorSet) -> Result<VectorSet> {
    let folded = set.folded();
    let start = folded.position(&fold(v)).ok_or_else(|| Error::InvalidArgument("vector is not in the set".into()))?;
    let ips = InnerProducts::compute(&folded)?;
    let g = OrthoGraph::new(&ips);
    let chain = greedy_chain(&g, start, &TieBreak::SmallestIndex);
    let vecs = chain.iter().map(|&i| folded.vectors()[i].clone()).collect();
    VectorSet::new(set.frame().clone(), vecs, true)
}

fn fold(v: &[i64]) -> Vec<i64> {
    let neg: Vec<i64> = v.iter().map(|x| -x).collect();
    if neg.as_slice() > v {
        neg
    } else {
        v.to_vec()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainSummary {
    pub representative: Vec<i64>,
    pub m: usize,
}

/// Greedy `m` for every orbit representative, and the `m ↦ count` table.
pub fn orthogonal_table(g: &OrthoGraph, orbits: &[Orbit], tie: &TieBreak) -> (Vec<ChainSummary>, BTreeMap<usize, usize>) {
    let rows: Vec<ChainSummary> = orbits
        .par_iter()
        .map(|o| ChainSummary { representative: o.representative.clone(), m: greedy_chain(g, o.rep_index, tie).len() })
        .collect();
    let mut table = BTreeMap::new();
    for r in &rows {
        *table.entry(r.m).or_insert(0) += 1;
    }
    (rows, table)
}

// ---------------------------------------------------------------------------
// Exact search for frames
// ---------------------------------------------------------------------------

/// How a partial orthogonal set can be extended towards a frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Some vector outside the span of the chosen set is orthogonal to the
    /// whole pool, so no completion spans the space.
    Dead,
    /// Every vector lies in the span of the chosen set.
    Spanned,
    /// The completion must contain one of these pool members.
    Options(Vec<usize>),
}

/// Covering rule for frame completion. `rest[w] > 0` marks the vectors not
/// yet in the span of the chosen set; each of them needs a non-orthogonal
/// partner among the remaining frame vectors, which all come from `pool`.
/// Returns the smallest such partner set.
pub fn covering_branch(g: &OrthoGraph, pool: &Bitset, rest: &[i32]) -> Branch {
    let size = pool.count();
    let mut best: Option<(usize, usize)> = None;
    for (w, &r) in rest.iter().enumerate() {
        if r == 0 {
            continue;
        }
        let options = size - pool.count_and(g.perp(w));
        if options == 0 {
            return Branch::Dead;
        }
        if best.is_none_or(|(bo, _)| options < bo) {
            best = Some((options, w));
        }
    }
    match best {
        None => Branch::Spanned,
        Some((_, w)) => {
            let mut opts = pool.clone();
            opts.subtract(g.perp(w));
            Branch::Options(opts.iter().collect())
        }
    }
}

/// `rest` after adding `u` to the chosen set.
pub fn remove_component(ips: &InnerProducts, rest: &[i32], u: usize) -> Vec<i32> {
    rest.iter().zip(ips.row(u)).map(|(&r, &ip)| r - (ip as i32) * (ip as i32)).collect()
}

/// Outcome of the exhaustive search for an orthogonal `target`-set.
#[derive(Clone, Debug, Serialize)]
pub struct FrameSearch {
    pub start: usize,
    pub found: Option<Vec<usize>>,
    pub nodes: u64,
    /// False when the node budget ran out before the tree was exhausted.
    pub complete: bool,
}

struct FrameSearcher<'a> {
    g: &'a OrthoGraph,
    ips: &'a InnerProducts,
    target: usize,
    nodes: u64,
    node_cap: u64,
    capped: bool,
}

impl FrameSearcher<'_> {
    /// `chosen` are pairwise orthogonal, `pool` holds the representatives
    /// still allowed to join and `rest[w] = norm·|proj(w)|²` for the
    /// projection of `w` orthogonal to the chosen set.
    fn search(&mut self, chosen: &mut Vec<usize>, pool: &Bitset, rest: &[i32]) -> Option<Vec<usize>> {
        if chosen.len() == self.target {
            return Some(chosen.clone());
        }
        if self.nodes >= self.node_cap {
            self.capped = true;
            return None;
        }
        self.nodes += 1;
        if chosen.len() + pool.count() < self.target {
            return None;
        }
        let options = match covering_branch(self.g, pool, rest) {
            Branch::Options(o) => o,
            Branch::Dead | Branch::Spanned => return None,
        };
        let mut local_pool = pool.clone();
        for u in options {
            let mut next_pool = local_pool.clone();
            next_pool.intersect_with(self.g.perp(u));
            let next_rest = remove_component(self.ips, rest, u);
            chosen.push(u);
            let res = self.search(chosen, &next_pool, &next_rest);
            chosen.pop();
            if res.is_some() || self.capped {
                return res;
            }
            // later branches may assume u is not in the set
            local_pool.remove(u);
        }
        None
    }
}

/// Exhaustive search for `target` pairwise orthogonal representatives
/// containing `start` and avoiding `excluded`. All vectors must have norm
/// `norm`; `rest` starts at `norm²` so that it tracks `norm·|proj(w)|²`.
pub fn search_frame(
    g: &OrthoGraph,
    ips: &InnerProducts,
    start: usize,
    excluded: &Bitset,
    target: usize,
    norm: i32,
    node_cap: u64,
) -> FrameSearch {
    let mut pool = g.perp_set(start);
    pool.subtract(excluded.words());
    let rest0 = vec![norm * norm; g.len()];
    let rest = remove_component(ips, &rest0, start);
    let mut s = FrameSearcher { g, ips, target, nodes: 0, node_cap, capped: false };
    let found = s.search(&mut vec![start], &pool, &rest);
    FrameSearch { start, found, nodes: s.nodes, complete: !s.capped }
}

/// Searches for frames through orbit representatives in order, each search
/// avoiding the orbits searched before it. When every orbit is listed and
/// every search is complete without a frame, no frame exists: a frame meets
/// some orbit, and the first such orbit in the list is searched with none
/// of the frame excluded.
#[derive(Clone, Debug, Serialize)]
pub struct FrameCertificate {
    pub searches: Vec<FrameSearch>,
    pub frame: Option<Vec<usize>>,
    /// Whether the listed orbits cover the whole set.
    pub covers_all_orbits: bool,
}

impl FrameCertificate {
    pub fn complete(&self) -> bool {
        self.searches.iter().all(|s| s.complete)
    }

    /// `Some(false)` only for a complete search over all orbits.
    pub fn verdict(&self) -> Option<bool> {
        if self.frame.is_some() {
            Some(true)
        } else if self.complete() && self.covers_all_orbits {
            Some(false)
        } else {
            None
        }
    }

    pub fn nodes(&self) -> u64 {
        self.searches.iter().map(|s| s.nodes).sum()
    }
}

pub fn certify_frames(
    g: &OrthoGraph,
    ips: &InnerProducts,
    orbits: &[&Orbit],
    total_orbits: usize,
    target: usize,
    norm: i32,
    node_cap: u64,
) -> FrameCertificate {
    let mut excluded = Bitset::new(g.len());
    let mut searches = Vec::new();
    let covers_all_orbits = orbits.len() == total_orbits;
    for o in orbits {
        let s = search_frame(g, ips, o.rep_index, &excluded, target, norm, node_cap);
        let found = s.found.clone();
        searches.push(s);
        if found.is_some() {
            return FrameCertificate { searches, frame: found, covers_all_orbits };
        }
        for &m in &o.members {
            excluded.insert(m);
        }
    }
    FrameCertificate { searches, frame: None, covers_all_orbits }
}

/// The candidates a greedy step may choose: all `u ∈ pool` with the largest
/// `|pool ∩ u^⊥|`, together with that size.
fn greedy_ties(g: &OrthoGraph, pool: &Bitset) -> (usize, Vec<usize>) {
    let mut best = 0;
    let mut ties = Vec::new();
    for u in pool.iter() {
        let gain = pool.count_and(g.perp(u));
        if gain > best || ties.is_empty() {
            if gain > best {
                ties.clear();
            }
            best = gain;
        }
        if gain == best {
            ties.push(u);
        }
    }
    (best, ties)
}

/// Explores every way of breaking ties in the greedy chain. Pools are
/// memoized, so the work is bounded by the number of distinct pools.
struct TieTree<'a> {
    g: &'a OrthoGraph,
    memo: HashMap<Vec<u64>, BTreeSet<usize>>,
    budget: usize,
}

impl TieTree<'_> {
    /// Numbers of further choices until the pool is empty.
    fn outcomes(&mut self, pool: &Bitset) -> Result<BTreeSet<usize>> {
        if pool.is_empty() {
            return Ok(BTreeSet::from([0]));
        }
        if let Some(r) = self.memo.get(pool.words()) {
            return Ok(r.clone());
        }
        if self.memo.len() >= self.budget {
            return Err(Error::SearchFailed(format!("tie tree has more than {} pools", self.budget)));
        }
        let (_, ties) = greedy_ties(self.g, pool);
        let mut out = BTreeSet::new();
        for u in ties {
            let mut next = pool.clone();
            next.intersect_with(self.g.perp(u));
            out.extend(self.outcomes(&next)?.into_iter().map(|k| k + 1));
        }
        self.memo.insert(pool.words().to_vec(), out.clone());
        Ok(out)
    }
}

/// Every chain length `m` that the greedy chain from `v` attains under some
/// tie-breaking rule.
pub fn greedy_outcomes(g: &OrthoGraph, v: usize, budget: usize) -> Result<BTreeSet<usize>> {
    let mut t = TieTree { g, memo: HashMap::new(), budget };
    Ok(t.outcomes(&g.perp_set(v))?.into_iter().map(|k| k + 1).collect())
}

/// A greedy chain from `v` of length exactly `m`, breaking ties as needed.
pub fn greedy_chain_of_length(g: &OrthoGraph, v: usize, m: usize, budget: usize) -> Result<Option<Vec<usize>>> {
    let mut t = TieTree { g, memo: HashMap::new(), budget };
    let mut pool = g.perp_set(v);
    let mut chain = vec![v];
    if !t.outcomes(&pool)?.contains(&(m.saturating_sub(1))) || m == 0 {
        return Ok(None);
    }
    while !pool.is_empty() {
        let need = m - chain.len() - 1;
        let (_, ties) = greedy_ties(g, &pool);
        let mut advanced = false;
        for u in ties {
            let mut next = pool.clone();
            next.intersect_with(g.perp(u));
            if t.outcomes(&next)?.contains(&need) {
                chain.push(u);
                pool = next;
                advanced = true;
                break;
            }
        }
        debug_assert!(advanced, "memoized outcome must be realizable");
    }
    Ok(Some(chain))
}

/// Reachable greedy lengths for every orbit representative.
pub fn outcome_table(g: &OrthoGraph, orbits: &[Orbit], budget: usize) -> Result<Vec<BTreeSet<usize>>> {
    orbits.par_iter().map(|o| greedy_outcomes(g, o.rep_index, budget)).collect()
}

/// Whether some choice of one reachable length per representative yields
/// exactly the multiset `table` (`m ↦ count`). Decided by a perfect
/// matching between representatives and the slots of the table.
pub fn table_attainable(outcomes: &[BTreeSet<usize>], table: &BTreeMap<usize, usize>) -> bool {
    let slots: Vec<usize> = table.iter().flat_map(|(&m, &c)| std::iter::repeat_n(m, c)).collect();
    if slots.len() != outcomes.len() {
        return false;
    }
    let mut graph = UnGraph::<(), ()>::new_undirected();
    let left: Vec<_> = outcomes.iter().map(|_| graph.add_node(())).collect();
    let right: Vec<_> = slots.iter().map(|_| graph.add_node(())).collect();
    for (i, reach) in outcomes.iter().enumerate() {
        for (j, m) in slots.iter().enumerate() {
            if reach.contains(m) {
                graph.add_edge(left[i], right[j], ());
            }
        }
    }
    maximum_matching(&graph).len() == outcomes.len()
}

/// Largest greedy length over orbit representatives and all tie-breaking
/// rules.
pub fn n_max(g: &OrthoGraph, orbits: &[Orbit], budget: usize) -> Result<usize> {
    Ok(outcome_table(g, orbits, budget)?.iter().filter_map(|r| r.last().copied()).max().unwrap_or(0))
}

/// Whether `lat` has `rank` pairwise orthogonal norm-4 vectors, decided by
/// exhaustive search over the orbits of `group`. `None` when some search
/// exceeded `node_cap` nodes before a frame was found.
pub fn has_4frame(lat: &Lattice, group: &SymmetryGroup, node_cap: u64) -> Result<Option<bool>> {
    let s = enumeration::vectors_of_norm_at_most_folded(lat, 4)?;
    let four = s.with_norm(&num_rational::BigRational::from_integer(4.into()));
    if four.is_empty() {
        return Ok(Some(false));
    }
    let ips = InnerProducts::compute(&four)?;
    let g = OrthoGraph::new(&ips);
    let orbits = crate::symmetry::orbits(&four, group)?;
    let all: Vec<&Orbit> = orbits.iter().collect();
    Ok(certify_frames(&g, &ips, &all, orbits.len(), lat.rank(), 4, node_cap).verdict())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction;
    use crate::lattice::AmbientFrame;
    use crate::linalg::{IntMatrix, RatMatrix};
    use num_rational::BigRational;
    use std::sync::Arc;

    fn scaled_z(n: usize) -> Lattice {
        let f = AmbientFrame::new(format!("4I{n}"), &RatMatrix::identity(n).scale(&BigRational::from_integer(4.into()))).unwrap();
        Lattice::new(Arc::new(f), IntMatrix::identity(n)).unwrap()
    }

    fn sign_group(n: usize) -> SymmetryGroup {
        SymmetryGroup::generate(&[IntMatrix::scalar(n, -1)], 4).unwrap()
    }

    #[test]
    fn bitset_basics() {
        let mut b = Bitset::new(130);
        b.insert(0);
        b.insert(64);
        b.insert(129);
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(b.count(), 3);
        b.remove(64);
        assert!(!b.contains(64));
        assert_eq!(Bitset::full(70).count(), 70);
    }

    #[test]
    fn scaled_square_lattice_axes() {
        let l = scaled_z(2);
        let s = enumeration::vectors_of_norm_at_most(&l, 4).unwrap();
        let m = max_orthogonal_set(&[1, 0], &s).unwrap();
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn scaled_z4_brute_force() {
        let l = scaled_z(4);
        let s = enumeration::vectors_of_norm_at_most_folded(&l, 4).unwrap();
        assert_eq!(s.signed_len(), 8);
        let ips = InnerProducts::compute(&s).unwrap();
        let g = OrthoGraph::new(&ips);
        let orbits = crate::symmetry::orbits(&s, &sign_group(4)).unwrap();
        assert_eq!(n_max(&g, &orbits, 1000).unwrap(), 4);
        // brute force over subsets of the 4 representatives
        let best = (0u32..16)
            .filter(|mask| (0..4).all(|i| (0..4).all(|j| i == j || mask >> i & 1 == 0 || mask >> j & 1 == 0 || ips.get(i, j) == 0)))
            .map(|m| m.count_ones())
            .max()
            .unwrap();
        assert_eq!(best, 4);
        assert!(has_4frame(&l, &sign_group(4), u64::MAX).unwrap().unwrap());
    }

    #[test]
    fn frame_standin_and_block_lattice() {
        assert!(has_4frame(&scaled_z(40), &sign_group(40), u64::MAX).unwrap().unwrap());
        assert!(!has_4frame(&construction::build_L(), &sign_group(40), u64::MAX).unwrap().unwrap());
    }

    #[test]
    fn scaled_d4_and_a2() {
        // D₄ scaled by 2: 24 norm-4 vectors, and it has 4 orthogonal ones
        let d4 = IntMatrix::from_i64_rows(&[[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]]).unwrap();
        let f = AmbientFrame::new("d4x2", &d4.to_rational().scale(&BigRational::from_integer(2.into()))).unwrap();
        let l = Lattice::new(Arc::new(f), IntMatrix::identity(4)).unwrap();
        assert_eq!(enumeration::count_norm(&l, 4).unwrap(), 24);
        assert!(has_4frame(&l, &sign_group(4), u64::MAX).unwrap().unwrap());
        // A₂ scaled by 2 has no two orthogonal norm-4 vectors
        let a2 = IntMatrix::from_i64_rows(&[[4, -2], [-2, 4]]).unwrap();
        let f = AmbientFrame::new("a2x2", &a2.to_rational()).unwrap();
        let l = Lattice::new(Arc::new(f), IntMatrix::identity(2)).unwrap();
        assert!(!has_4frame(&l, &sign_group(2), u64::MAX).unwrap().unwrap());
    }
}
