//! Automorphism group of a lattice with a known norm-4 set: a basis of
//! norm-4 vectors, the block-constrained isometry search, closure with `Γ`
//! and the semidirect-product structure check.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::enumeration::{self, VectorSet};
use crate::error::{Error, Result};
use crate::fixtures::Fixtures;
use crate::lattice::{AmbientFrame, Lattice};
use crate::linalg::{self, IntMatrix};
use crate::symmetry::{identity_dense, mul_dense, orbits, SymmetryGroup};
use crate::typing::{InnerProducts, Partition};

/// Block of each basis vector of the fixture Gram, in basis order.
pub const FIXTURE_BASIS_BLOCKS: [&str; 40] = [
    "S1,1", "S7,7", "S15,1", "S15,1", "S2,2", "S16,1", "S9,3", "S16,1", "S9,3", "S9,3", //
    "S9,3", "S9,3", "S16,1", "S16,1", "S9,3", "S9,3", "S16,1", "S10,3", "S9,3", "S9,3", //
    "S9,3", "S9,3", "S16,1", "S9,3", "S16,1", "S16,1", "S16,1", "S6,4", "S16,1", "S16,1", //
    "S10,8", "S9,3", "S16,1", "S8,4", "S10,6", "S9,3", "S16,1", "S16,1", "S9,5", "S7,4",
];

/// Position of the fixture basis vector lying in `S7,7`.
pub const FIXTURE_ANCHOR: usize = 1;

/// Lattice coordinates of every vector of a folded set, as `i64`.
pub fn set_coordinates(lat: &Lattice, set: &VectorSet) -> Result<Vec<Vec<i64>>> {
    let m = lat.membership();
    set.vectors()
        .par_iter()
        .map(|v| {
            let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
            let c = m
                .coordinates(&big)
                .ok_or_else(|| Error::StructureMismatch("set vector outside the lattice".into()))?;
            c.iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::InvalidArgument("coordinate too large".into())))
                .collect()
        })
        .collect()
}

fn to_i64_matrix(m: &IntMatrix) -> Result<Vec<i64>> {
    m.to_i64().ok_or_else(|| Error::InvalidArgument("matrix entries too large".into()))
}

/// A basis of the lattice made of vectors of the short set.
#[derive(Clone, Debug)]
pub struct BasisSelection {
    /// Folded set index of each basis vector.
    pub indices: Vec<usize>,
    /// Frame coordinates of the basis vectors.
    pub vectors: Vec<Vec<i64>>,
    /// Rows are the basis vectors in coordinates of the lattice basis.
    pub change: IntMatrix,
    pub gram: IntMatrix,
}

impl BasisSelection {
    pub fn labels(&self, partition: &Partition) -> Vec<String> {
        let of = partition.block_of(partition.total_size() / 2);
        self.indices.iter().map(|&i| partition.blocks[of[i]].label_string()).collect()
    }
}

fn row_norm(c: &[i64], g: &[i64], n: usize) -> i64 {
    let mut s = 0;
    for i in 0..n {
        if c[i] == 0 {
            continue;
        }
        for j in 0..n {
            s += c[i] * g[i * n + j] * c[j];
        }
    }
    s
}

/// Basis of `lat` whose vectors all lie in `set` (folded, one common norm).
///
/// LLL-reduces the inverse Gram of a unimodular lattice (the Gram itself
/// otherwise), keeps the rows already of the set norm and exchanges each
/// other row for a set vector whose coefficient at that row is `±1`.
pub fn four_vector_basis(lat: &Lattice, set: &VectorSet) -> Result<BasisSelection> {
    let set = set.folded();
    let norm = set
        .common_norm()
        .ok_or_else(|| Error::SearchFailed("no short vectors to build a basis from".into()))?
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::InvalidArgument("norm too large".into()))?;
    let n = lat.rank();
    let gram = lat.integer_gram().ok_or_else(|| Error::InvalidArgument("lattice is not integral".into()))?;
    let g = to_i64_matrix(&gram)?;
    let coords = set_coordinates(lat, &set)?;
    let mut basis = if lat.is_unimodular() {
        // rows of T·G⁻¹ are lattice vectors whose Gram is the reduced inverse form
        let inv = linalg::unimodular_inverse(&gram)?;
        linalg::lll::lll_transform(&inv)?.mul(&inv)?
    } else {
        linalg::lll::lll_transform(&gram)?
    };
    let mut indices: Vec<Option<usize>> = vec![None; n];
    loop {
        let b = to_i64_matrix(&basis)?;
        for (p, slot) in indices.iter_mut().enumerate() {
            if slot.is_none() {
                let row = &b[p * n..(p + 1) * n];
                if row_norm(row, &g, n) == norm {
                    *slot = coords.iter().position(|c| c == row || c.iter().zip(row).all(|(a, r)| *a == -r));
                }
            }
        }
        let open: Vec<usize> = (0..n).filter(|&p| indices[p].is_none()).collect();
        if open.is_empty() {
            break;
        }
        let inv = to_i64_matrix(&linalg::unimodular_inverse(&basis)?)?;
        let mut progress = false;
        for &p in &open {
            // coefficient of set vector s on basis row p is (s · B⁻¹)_p
            let hit = coords.par_iter().position_first(|s| {
                let c: i64 = (0..n).map(|k| s[k] * inv[k * n + p]).sum();
                c.abs() == 1
            });
            if let Some(k) = hit {
                for (j, x) in coords[k].iter().enumerate() {
                    basis[(p, j)] = BigInt::from(*x);
                }
                indices[p] = Some(k);
                progress = true;
                break;
            }
        }
        if !progress {
            return Err(Error::SearchFailed(format!("no basis of norm-{norm} vectors found")));
        }
    }
    let indices: Vec<usize> = indices.into_iter().map(|i| i.expect("filled")).collect();
    let change = IntMatrix::from_i64_rows(&indices.iter().map(|&i| coords[i].clone()).collect::<Vec<_>>())?;
    if !linalg::det(&change)?.abs().is_one() {
        return Err(Error::StructureMismatch("selected vectors are not a basis".into()));
    }
    let gram_sel = change.congruence(&gram)?;
    let vectors = indices.iter().map(|&i| set.vectors()[i].clone()).collect();
    Ok(BasisSelection { indices, vectors, change, gram: gram_sel })
}

/// A signed set vector: `idx` of the folded set with a sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedVector {
    pub index: usize,
    pub negative: bool,
}

impl SignedVector {
    fn sign(self) -> i64 {
        if self.negative {
            -1
        } else {
            1
        }
    }
}

/// Rows drawn from per-position candidate lists whose Gram equals `target`.
#[derive(Clone, Debug)]
pub struct IsometryProblem {
    pub target: Vec<Vec<i64>>,
    /// Folded indices allowed at each position; both signs are tried.
    pub candidates: Vec<Vec<usize>>,
    /// Position whose candidates are fixed signed vectors (orbit transversal).
    pub anchor: Option<(usize, Vec<SignedVector>)>,
}

impl IsometryProblem {
    /// Candidates from the block of each selected vector.
    pub fn from_selection(sel: &BasisSelection, partition: &Partition, anchor: Option<(usize, Vec<SignedVector>)>) -> Result<Self> {
        let of = partition.block_of(partition.total_size() / 2);
        let candidates = sel.indices.iter().map(|&i| partition.blocks[of[i]].members.clone()).collect();
        Self::new(&sel.gram, candidates, anchor)
    }

    pub fn new(target: &IntMatrix, candidates: Vec<Vec<usize>>, anchor: Option<(usize, Vec<SignedVector>)>) -> Result<Self> {
        let n = target.rows();
        if candidates.len() != n || target.cols() != n {
            return Err(Error::Dimension("one candidate list per target row required".into()));
        }
        let t = to_i64_matrix(target)?;
        Ok(Self { target: t.chunks(n).map(<[i64]>::to_vec).collect(), candidates, anchor })
    }

    /// All solutions, found by fail-first backtracking; each candidate list
    /// is filtered by the inner products with every placed row.
    pub fn solve(&self, ips: &InnerProducts) -> Vec<Vec<SignedVector>> {
        let n = self.target.len();
        let mut lists: Vec<Vec<SignedVector>> = self
            .candidates
            .iter()
            .enumerate()
            .map(|(p, c)| {
                c.iter()
                    .flat_map(|&index| [false, true].map(|negative| SignedVector { index, negative }))
                    .filter(|s| i64::from(ips.get(s.index, s.index)) == self.target[p][p])
                    .collect()
            })
            .collect();
        let roots: Vec<(usize, SignedVector)> = match &self.anchor {
            Some((p, reps)) => {
                let allowed: HashSet<SignedVector> = lists[*p].iter().copied().collect();
                lists[*p] = reps.iter().copied().filter(|s| allowed.contains(s)).collect();
                lists[*p].iter().map(|&s| (*p, s)).collect()
            }
            None => {
                let p = (0..n).min_by_key(|&p| lists[p].len()).unwrap_or(0);
                lists.get(p).map_or_else(Vec::new, |l| l.iter().map(|&s| (p, s)).collect())
            }
        };
        roots
            .par_iter()
            .flat_map_iter(|&(p, s)| {
                let mut placed: Vec<Option<SignedVector>> = vec![None; n];
                let mut out = Vec::new();
                if let Some(next) = self.place(ips, &lists, p, s) {
                    placed[p] = Some(s);
                    self.descend(ips, next, &mut placed, &mut out);
                }
                out
            })
            .collect()
    }

    fn ip(ips: &InnerProducts, a: SignedVector, b: SignedVector) -> i64 {
        a.sign() * b.sign() * i64::from(ips.get(a.index, b.index))
    }

    /// Lists after placing `s` at `p`, or `None` when some list empties.
    fn place(&self, ips: &InnerProducts, lists: &[Vec<SignedVector>], p: usize, s: SignedVector) -> Option<Vec<Vec<SignedVector>>> {
        let mut next = Vec::with_capacity(lists.len());
        for (q, l) in lists.iter().enumerate() {
            if q == p {
                next.push(vec![s]);
                continue;
            }
            let want = self.target[p][q];
            let f: Vec<SignedVector> = l.iter().copied().filter(|&t| Self::ip(ips, s, t) == want).collect();
            if f.is_empty() {
                return None;
            }
            next.push(f);
        }
        Some(next)
    }

    fn descend(&self, ips: &InnerProducts, lists: Vec<Vec<SignedVector>>, placed: &mut [Option<SignedVector>], out: &mut Vec<Vec<SignedVector>>) {
        let open = (0..lists.len()).filter(|&q| placed[q].is_none()).min_by_key(|&q| lists[q].len());
        let Some(p) = open else {
            out.push(placed.iter().map(|s| s.expect("complete")).collect());
            return;
        };
        for &s in &lists[p] {
            if let Some(next) = self.place(ips, &lists, p, s) {
                placed[p] = Some(s);
                self.descend(ips, next, placed, out);
                placed[p] = None;
            }
        }
    }
}

/// Matrix whose rows are the lattice coordinates of the signed vectors.
pub fn solution_matrix(solution: &[SignedVector], coords: &[Vec<i64>]) -> Result<IntMatrix> {
    let rows: Vec<Vec<i64>> =
        solution.iter().map(|s| coords[s.index].iter().map(|x| s.sign() * x).collect()).collect();
    IntMatrix::from_i64_rows(&rows)
}

/// A finite group of isometries of an integral Gram, acting on row
/// coordinate vectors from the right.
#[derive(Clone, Debug)]
pub struct AutGroup {
    pub gram: IntMatrix,
    pub group: SymmetryGroup,
}

impl AutGroup {
    pub fn generate(gram: IntMatrix, generators: &[IntMatrix], cap: usize) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if g.congruence(&gram)? != gram {
                return Err(Error::StructureMismatch(format!("generator {k} does not preserve the Gram matrix")));
            }
        }
        Ok(Self { gram, group: SymmetryGroup::generate(generators, cap)? })
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn elements(&self) -> &[Vec<i64>] {
        self.group.elements()
    }

    pub fn contains(&self, m: &IntMatrix) -> bool {
        m.to_i64().is_some_and(|d| self.group.elements().contains(&d))
    }
}

/// Frame matrix `γ` as the matrix `B γ B⁻¹` acting on lattice coordinates.
pub fn to_lattice_coordinates(lat: &Lattice, gamma: &IntMatrix) -> Result<IntMatrix> {
    let b = lat.basis();
    let img = b.mul(gamma)?;
    let m = lat.membership();
    let rows: Vec<Vec<BigInt>> = img
        .iter_rows()
        .map(|r| m.coordinates(r).ok_or_else(|| Error::StructureMismatch("matrix does not stabilize the lattice".into())))
        .collect::<Result<_>>()?;
    IntMatrix::from_rows(&rows)
}

/// Everything produced on the way to the full group.
#[derive(Clone, Debug)]
pub struct AutComputation {
    pub selection: BasisSelection,
    pub anchor_position: usize,
    pub anchor_reps: Vec<SignedVector>,
    pub solutions: Vec<IntMatrix>,
    /// `B′⁻¹X` for every solution `X`.
    pub adjoined: Vec<IntMatrix>,
    pub group: AutGroup,
}

/// Safety cap for the closure; a wrong candidate generates an infinite group.
pub const CLOSURE_CAP: usize = 1_000_000;

/// `Aut(lat)` from `Γ` and the isometry search over a norm-4 basis.
///
/// The anchor is the basis position whose block is a union of the fewest
/// `Γ`-orbits, all regular. Any automorphism composed with a suitable
/// `γ ∈ Γ` sends the anchor vector into the transversal, and only one `γ`
/// does so because the orbit is regular, so solutions correspond to the
/// cosets of `Γ`.
pub fn full_aut(lat: &Lattice, set: &VectorSet, ips: &InnerProducts, partition: &Partition, gamma: &SymmetryGroup) -> Result<AutComputation> {
    let set = set.folded();
    let selection = four_vector_basis(lat, &set)?;
    let orbs = orbits(&set, gamma)?;
    let of = partition.block_of(set.len());
    let mut per_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, o) in orbs.iter().enumerate() {
        per_block.entry(of[o.rep_index]).or_default().push(k);
    }
    let (anchor_position, block) = selection
        .indices
        .iter()
        .enumerate()
        .map(|(p, &i)| (p, of[i]))
        .filter(|(_, b)| per_block[b].iter().all(|&k| orbs[k].size == gamma.order()))
        .min_by_key(|&(p, b)| (per_block[&b].len(), p))
        .ok_or_else(|| Error::SearchFailed("no basis vector lies in a block of regular orbits".into()))?;
    let anchor_reps: Vec<SignedVector> =
        per_block[&block].iter().map(|&k| SignedVector { index: orbs[k].rep_index, negative: false }).collect();
    let problem = IsometryProblem::from_selection(&selection, partition, Some((anchor_position, anchor_reps.clone())))?;
    let coords = set_coordinates(lat, &set)?;
    let mut found = problem.solve(ips);
    found.sort_by_key(|s| s.iter().map(|x| (x.index, x.negative)).collect::<Vec<_>>());
    let solutions: Vec<IntMatrix> = found.iter().map(|s| solution_matrix(s, &coords)).collect::<Result<_>>()?;
    let b_inv = linalg::unimodular_inverse(&selection.change)?;
    let adjoined: Vec<IntMatrix> = solutions.iter().map(|x| b_inv.mul(x)).collect::<Result<_>>()?;
    let mut gens: Vec<IntMatrix> =
        gamma.generators().iter().map(|g| to_lattice_coordinates(lat, g)).collect::<Result<_>>()?;
    gens.extend(adjoined.iter().cloned());
    let gram = lat.integer_gram().ok_or_else(|| Error::InvalidArgument("lattice is not integral".into()))?;
    let group = AutGroup::generate(gram, &gens, CLOSURE_CAP)?;
    Ok(AutComputation { selection, anchor_position, anchor_reps, solutions, adjoined, group })
}

/// Witnesses of `G = ⟨g₂⟩ ⋊ ⟨g₁⟩` with `g₁g₂g₁⁻¹ = g₂ᵏ`.
#[derive(Clone, Debug)]
pub struct SemidirectReport {
    pub g1: IntMatrix,
    pub g2: IntMatrix,
    pub order_g1: usize,
    pub order_g2: usize,
    pub exponent: usize,
    pub normal: bool,
    pub trivial_intersection: bool,
    pub product_is_group: bool,
    /// Element order ↦ number of elements.
    pub order_census: BTreeMap<usize, usize>,
}

fn powers(g: &[i64], n: usize) -> Vec<Vec<i64>> {
    let id = identity_dense(n);
    let mut out = vec![id.clone()];
    let mut p = g.to_vec();
    while p != id {
        out.push(p.clone());
        p = mul_dense(&p, g, n);
    }
    out
}

/// `k` with `g₁g₂g₁⁻¹ = g₂ᵏ`, if any, for matrices of finite order.
pub fn conjugation_exponent(g1: &IntMatrix, g2: &IntMatrix, cap: usize) -> Result<Option<usize>> {
    let n = g1.rows();
    let a = to_i64_matrix(g1)?;
    let b = to_i64_matrix(g2)?;
    let pa = powers_capped(&a, n, cap)?;
    let pb = powers_capped(&b, n, cap)?;
    let inv = pa.last().cloned().unwrap_or_else(|| identity_dense(n));
    let c = mul_dense(&mul_dense(&a, &b, n), &inv, n);
    Ok(pb.iter().position(|p| *p == c))
}

fn powers_capped(g: &[i64], n: usize, cap: usize) -> Result<Vec<Vec<i64>>> {
    let id = identity_dense(n);
    let mut out = vec![id.clone()];
    let mut p = g.to_vec();
    while p != id {
        if out.len() >= cap {
            return Err(Error::ClosureCap(cap));
        }
        out.push(p.clone());
        p = mul_dense(&p, g, n);
    }
    Ok(out)
}

/// Order of `a` modulo `m`, for `gcd(a, m) = 1`.
pub fn multiplicative_order(a: u64, m: u64) -> Option<u64> {
    let mut x = a % m;
    for k in 1..=m {
        if x == 1 % m {
            return Some(k);
        }
        x = x * a % m;
    }
    None
}

/// Finds `g₁`, `g₂` of orders `order1`, `order2` with `g₁g₂g₁⁻¹ = g₂^exponent`
/// and checks the semidirect decomposition.
pub fn verify_semidirect(g: &AutGroup, order1: usize, order2: usize, exponent: usize) -> Result<SemidirectReport> {
    let n = g.dim();
    let elements = g.elements();
    let index: HashMap<&Vec<i64>, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let orders: Vec<usize> = elements.par_iter().map(|e| powers(e, n).len()).collect();
    let mut order_census = BTreeMap::new();
    for &o in &orders {
        *order_census.entry(o).or_insert(0) += 1;
    }
    let g2 = orders
        .iter()
        .position(|&o| o == order2)
        .map(|i| elements[i].clone())
        .ok_or_else(|| Error::StructureMismatch(format!("no element of order {order2}")))?;
    let p2 = powers(&g2, n);
    let p2_index: HashMap<&Vec<i64>, usize> = p2.iter().enumerate().map(|(k, p)| (p, k)).collect();
    let g1 = (0..elements.len())
        .filter(|&i| orders[i] == order1)
        .find(|&i| {
            let a = &elements[i];
            let inv = &powers(a, n)[order1 - 1];
            let c = mul_dense(&mul_dense(a, &g2, n), inv, n);
            p2_index.get(&c) == Some(&exponent)
        })
        .map(|i| elements[i].clone())
        .ok_or_else(|| {
            Error::StructureMismatch(format!("no element of order {order1} conjugates g₂ to its power {exponent}"))
        })?;
    let p1 = powers(&g1, n);
    let normal = g.group.generators().iter().all(|h| {
        let h = h.to_i64().expect("small entries");
        let inv = powers(&h, n).last().cloned().expect("nonempty");
        p2_index.contains_key(&mul_dense(&mul_dense(&h, &g2, n), &inv, n))
    });
    let trivial_intersection = p1.iter().skip(1).all(|p| !p2_index.contains_key(p));
    let mut products = HashSet::new();
    let mut inside = true;
    for a in &p2 {
        for b in &p1 {
            let ab = mul_dense(a, b, n);
            inside &= index.contains_key(&ab);
            products.insert(ab);
        }
    }
    let product_is_group = inside && products.len() == elements.len();
    let to_matrix = |d: &[i64]| IntMatrix::from_i64(n, n, d);
    Ok(SemidirectReport {
        g1: to_matrix(&g1)?,
        g2: to_matrix(&g2)?,
        order_g1: p1.len(),
        order_g2: p2.len(),
        exponent,
        normal,
        trivial_intersection,
        product_is_group,
        order_census,
    })
}

/// Checks on the fixture Gram matrix and generators.
#[derive(Clone, Debug)]
pub struct FixtureReport {
    pub even: bool,
    pub unimodular: bool,
    pub positive_definite: bool,
    pub min_norm: Option<u64>,
    pub min_count: Option<usize>,
    /// Solutions of the isometry search into `S` with the fixture's block pattern.
    pub isometry_solutions: usize,
    /// Rows are the fixture basis in lattice coordinates, from the first solution.
    pub basis_change: Option<IntMatrix>,
    pub generators_preserve_gram: bool,
    pub generator_orders: (Option<usize>, Option<usize>),
    pub relation_exponent: Option<usize>,
    /// Both generators, moved into lattice coordinates, lie in the group.
    pub generators_in_group: Option<bool>,
}

/// Lattice with identity basis and the given Gram, or `None` if not positive definite.
fn lattice_of_gram(gram: &IntMatrix) -> Option<Lattice> {
    let frame = AmbientFrame::new("fixture-gram", &gram.to_rational()).ok()?;
    Lattice::new(Arc::new(frame), IntMatrix::identity(gram.rows())).ok()
}

/// Verifies the fixture Gram and generators against `lat`. The isometry
/// search uses the fixture block pattern with the anchor restricted to
/// `anchor_reps`; `group` (lattice coordinates) is optional.
#[allow(clippy::too_many_arguments)]
pub fn check_fixtures(
    fix: &Fixtures,
    lat: &Lattice,
    set: &VectorSet,
    ips: &InnerProducts,
    partition: &Partition,
    anchor_reps: &[SignedVector],
    group: Option<&AutGroup>,
    enumerate: bool,
) -> Result<FixtureReport> {
    let gram = &fix.gram_o40;
    let n = gram.rows();
    let even = gram.is_symmetric() && (0..n).all(|i| (&gram[(i, i)] % 2u32).is_zero());
    let unimodular = linalg::det(gram)?.abs().is_one();
    let flat = lattice_of_gram(gram);
    let positive_definite = flat.is_some();
    let (min_norm, min_count) = match (&flat, enumerate) {
        (Some(l), true) => {
            let m = enumeration::min_norm(l)?;
            (Some(m), Some(enumeration::count_norm(l, m)?))
        }
        _ => (None, None),
    };
    let set = set.folded();
    let labels: HashMap<String, usize> =
        partition.blocks.iter().enumerate().map(|(b, blk)| (blk.label_string(), b)).collect();
    let candidates: Vec<Vec<usize>> = FIXTURE_BASIS_BLOCKS
        .iter()
        .map(|l| {
            labels
                .get(*l)
                .map(|&b| partition.blocks[b].members.clone())
                .ok_or_else(|| Error::StructureMismatch(format!("partition has no block {l}")))
        })
        .collect::<Result<_>>()?;
    let problem = IsometryProblem::new(gram, candidates, Some((FIXTURE_ANCHOR, anchor_reps.to_vec())))?;
    let mut found = problem.solve(ips);
    found.sort_by_key(|s| s.iter().map(|x| (x.index, x.negative)).collect::<Vec<_>>());
    let coords = set_coordinates(lat, &set)?;
    let basis_change = match found.first() {
        Some(s) => {
            let x = solution_matrix(s, &coords)?;
            let lg = lat.integer_gram().ok_or_else(|| Error::InvalidArgument("lattice is not integral".into()))?;
            if x.congruence(&lg)? != *gram || !linalg::det(&x)?.abs().is_one() {
                return Err(Error::StructureMismatch("isometry solution does not reproduce the fixture Gram".into()));
            }
            Some(x)
        }
        None => None,
    };
    let generators_preserve_gram = fix.g1.congruence(gram)? == *gram && fix.g2.congruence(gram)? == *gram;
    let order = |m: &IntMatrix| m.to_i64().and_then(|d| crate::symmetry::matrix_order(&d, n, 1000));
    let generator_orders = (order(&fix.g1), order(&fix.g2));
    let relation_exponent =
        if generators_preserve_gram { conjugation_exponent(&fix.g1, &fix.g2, 1000)? } else { None };
    let generators_in_group = match (group, &basis_change) {
        (Some(grp), Some(x)) => {
            // the fixture generator g acts on fixture coordinates; X⁻¹gX acts on lattice coordinates
            let x_inv = linalg::unimodular_inverse(x)?;
            let mut ok = true;
            for g in [&fix.g1, &fix.g2] {
                ok &= grp.contains(&x_inv.mul(g)?.mul(x)?);
            }
            Some(ok)
        }
        _ => None,
    };
    Ok(FixtureReport {
        even,
        unimodular,
        positive_definite,
        min_norm,
        min_count,
        isometry_solutions: found.len(),
        basis_change,
        generators_preserve_gram,
        generator_orders,
        relation_exponent,
        generators_in_group,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction;
    use crate::typing::partition_by_type;

    fn scaled_square() -> (Lattice, VectorSet) {
        let f = Arc::new(AmbientFrame::new("4I2", &IntMatrix::scalar(2, 4).to_rational()).unwrap());
        let lat = Lattice::new(f, IntMatrix::from_i64_rows(&[[1, 1], [0, 1]]).unwrap()).unwrap();
        let s = enumeration::vectors_of_norm_at_most_folded(&lat, 4).unwrap();
        (lat, s)
    }

    #[test]
    fn scaled_square_basis_is_standard() {
        let (lat, s) = scaled_square();
        let sel = four_vector_basis(&lat, &s).unwrap();
        assert_eq!(sel.gram, IntMatrix::scalar(2, 4));
        let mut v = sel.vectors.clone();
        for r in &mut v {
            if r.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
                r.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v.sort();
        assert_eq!(v, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn block_lattice_has_no_norm4_basis() {
        let l = construction::build_L();
        let s = enumeration::vectors_of_norm_at_most_folded(&l, 4).unwrap();
        assert!(s.is_empty());
        assert!(matches!(four_vector_basis(&l, &s), Err(Error::SearchFailed(_))));
    }

    #[test]
    fn scaled_square_isometries_match_brute_force() {
        let (lat, s) = scaled_square();
        let ips = InnerProducts::compute(&s).unwrap();
        let sel = four_vector_basis(&lat, &s).unwrap();
        let all = vec![(0..s.len()).collect::<Vec<_>>(); 2];
        let free = IsometryProblem::new(&sel.gram, all.clone(), None).unwrap().solve(&ips);
        // brute force: every pair of signed vectors with Gram 4I
        let signed: Vec<SignedVector> =
            (0..s.len()).flat_map(|index| [false, true].map(|negative| SignedVector { index, negative })).collect();
        let mut brute = 0;
        for &a in &signed {
            for &b in &signed {
                let ok = IsometryProblem::ip(&ips, a, a) == 4
                    && IsometryProblem::ip(&ips, b, b) == 4
                    && IsometryProblem::ip(&ips, a, b) == 0;
                brute += usize::from(ok);
            }
        }
        assert_eq!(free.len(), brute);
        assert_eq!(free.len(), 8);
        let anchored = IsometryProblem::new(&sel.gram, all, Some((0, vec![SignedVector { index: 0, negative: false }])))
            .unwrap()
            .solve(&ips);
        assert_eq!(anchored.len(), 2);
        let coords = set_coordinates(&lat, &s).unwrap();
        let g = lat.integer_gram().unwrap();
        for sol in &free {
            let x = solution_matrix(sol, &coords).unwrap();
            assert_eq!(x.congruence(&g).unwrap(), sel.gram);
        }
    }

    #[test]
    fn perturbed_target_has_no_solution() {
        let (lat, s) = scaled_square();
        let ips = InnerProducts::compute(&s).unwrap();
        let sel = four_vector_basis(&lat, &s).unwrap();
        let mut t = sel.gram.clone();
        t[(0, 1)] = BigInt::from(1);
        t[(1, 0)] = BigInt::from(1);
        let p = IsometryProblem::new(&t, vec![(0..s.len()).collect(); 2], None).unwrap();
        assert!(p.solve(&ips).is_empty());
    }

    #[test]
    fn scaled_square_automorphisms() {
        let (lat, s) = scaled_square();
        let ips = InnerProducts::compute(&s).unwrap();
        let part = partition_by_type(&ips).unwrap();
        let minus = SymmetryGroup::generate(&[IntMatrix::scalar(2, -1)], 10).unwrap();
        let comp = full_aut(&lat, &s, &ips, &part, &minus).unwrap();
        // the dihedral group of the square
        assert_eq!(comp.group.order(), 8);
        for e in comp.group.elements() {
            let m = IntMatrix::from_i64(2, 2, e).unwrap();
            assert_eq!(m.congruence(&comp.group.gram).unwrap(), comp.group.gram);
        }
    }

    #[test]
    fn dihedral_semidirect() {
        // D₅ ⊂ GL₂(ℤ[…]) is not integral, so use the symmetric group S₃ on the A₂ root lattice:
        // C₃ ⋊ C₂ with the involution inverting the rotation
        let gram = IntMatrix::from_i64_rows(&[[2, -1], [-1, 2]]).unwrap();
        let rot = IntMatrix::from_i64_rows(&[[0, 1], [-1, -1]]).unwrap();
        let refl = IntMatrix::from_i64_rows(&[[0, 1], [1, 0]]).unwrap();
        let g = AutGroup::generate(gram, &[rot, refl], 100).unwrap();
        assert_eq!(g.order(), 6);
        let r = verify_semidirect(&g, 2, 3, 2).unwrap();
        assert!(r.normal && r.trivial_intersection && r.product_is_group);
        assert_eq!(r.order_census, BTreeMap::from([(1, 1), (2, 3), (3, 2)]));
        assert!(verify_semidirect(&g, 2, 3, 1).is_err());
    }

    #[test]
    fn non_isometry_generator_rejected() {
        let gram = IntMatrix::from_i64_rows(&[[2, -1], [-1, 2]]).unwrap();
        let shear = IntMatrix::from_i64_rows(&[[1, 1], [0, 1]]).unwrap();
        assert!(AutGroup::generate(gram, &[shear], 100).is_err());
    }

    #[test]
    fn cube_map_has_order_18_mod_19() {
        assert_eq!(multiplicative_order(3, 19), Some(18));
        assert_eq!(multiplicative_order(3, 19).map(|k| 36 % k), Some(0));
        assert_eq!(multiplicative_order(2, 4), None);
    }

    #[test]
    fn fixture_generators_satisfy_relation() {
        let fix = Fixtures::embedded().unwrap();
        let gram = &fix.gram_o40;
        assert_eq!(fix.g1.congruence(gram).unwrap(), *gram);
        assert_eq!(fix.g2.congruence(gram).unwrap(), *gram);
        assert_eq!(conjugation_exponent(&fix.g1, &fix.g2, 100).unwrap(), Some(3));
        assert!(lattice_of_gram(gram).unwrap().is_unimodular());
    }
}
