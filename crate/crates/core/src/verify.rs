//! One-shot reproduction of every claim about O₄₀ in the reference data, in dependency
//! order, with a structured per-claim report.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::aut::{self, AutGroup, SignedVector};
use crate::construction;
use crate::enumeration::{self, VectorSet};
use crate::error::{Error, Result};
use crate::fixtures::Fixtures;
use crate::frames::{self, OrthoGraph, TieBreak};
use crate::glue;
use crate::lattice::{self, Lattice};
use crate::linalg;
use crate::selfcheck::{self, TypedSet};
use crate::symmetry::{self, Orbit, SymmetryGroup};
use crate::typing::{self, InnerProducts, Partition, TypeSig};

pub const SCHEMA_VERSION: u32 = 1;

/// `[t₀, t₁, t₂, t₄, size]` of the split of the norm-4 vectors by type.
pub const LEVEL1_ROWS: [[u32; 5]; 18] = [
    [24018, 7752, 38, 1, 4],
    [24234, 7608, 74, 1, 304],
    [24270, 7584, 80, 1, 684],
    [24342, 7536, 92, 1, 912],
    [24378, 7512, 98, 1, 2736],
    [24414, 7488, 104, 1, 5472],
    [24450, 7464, 110, 1, 9576],
    [24486, 7440, 116, 1, 4788],
    [24522, 7416, 122, 1, 4788],
    [24558, 7392, 128, 1, 5016],
    [24594, 7368, 134, 1, 1368],
    [24630, 7344, 140, 1, 2052],
    [24666, 7320, 146, 1, 228],
    [24738, 7272, 158, 1, 684],
    [24810, 7224, 170, 1, 152],
    [24918, 7152, 188, 1, 684],
    [24990, 7104, 200, 1, 76],
    [25206, 6960, 236, 1, 76],
];

/// `[t₀, t₁, t₂, t₄, size]` of the irreducible blocks.
pub const STABLE_ROWS: [[u32; 5]; 64] = [
    [2, 0, 0, 1, 4],
    [38, 18, 0, 1, 76],
    [162, 32, 0, 1, 228],
    [434, 120, 4, 1, 684],
    [114, 56, 0, 1, 228],
    [422, 128, 2, 1, 684],
    [362, 154, 6, 1, 684],
    [402, 138, 2, 1, 684],
    [414, 130, 4, 1, 684],
    [438, 120, 2, 1, 684],
    [330, 168, 8, 1, 684],
    [422, 128, 2, 1, 684],
    [422, 128, 2, 1, 684],
    [422, 128, 2, 1, 684],
    [446, 114, 4, 1, 684],
    [434, 120, 4, 1, 684],
    [434, 122, 2, 1, 684],
    [446, 112, 6, 1, 684],
    [330, 168, 8, 1, 684],
    [302, 178, 12, 1, 684],
    [362, 160, 0, 1, 684],
    [374, 152, 2, 1, 684],
    [374, 152, 2, 1, 684],
    [438, 120, 2, 1, 684],
    [850, 252, 6, 1, 1368],
    [426, 128, 0, 1, 684],
    [840, 260, 3, 1, 1368],
    [434, 122, 2, 1, 684],
    [402, 138, 2, 1, 684],
    [390, 146, 0, 1, 684],
    [362, 154, 6, 1, 684],
    [446, 114, 4, 1, 684],
    [434, 120, 4, 1, 684],
    [446, 114, 4, 1, 684],
    [434, 120, 4, 1, 684],
    [398, 136, 6, 1, 684],
    [446, 112, 6, 1, 684],
    [302, 178, 12, 1, 684],
    [422, 130, 0, 1, 684],
    [470, 98, 8, 1, 684],
    [434, 122, 2, 1, 684],
    [386, 144, 4, 1, 684],
    [426, 128, 0, 1, 684],
    [450, 112, 4, 1, 684],
    [434, 120, 4, 1, 684],
    [422, 128, 2, 1, 684],
    [422, 128, 2, 1, 684],
    [446, 114, 4, 1, 684],
    [422, 128, 2, 1, 684],
    [398, 136, 6, 1, 684],
    [114, 56, 0, 1, 228],
    [362, 154, 6, 1, 684],
    [422, 130, 0, 1, 684],
    [434, 122, 2, 1, 684],
    [330, 168, 8, 1, 684],
    [446, 114, 4, 1, 684],
    [422, 128, 2, 1, 684],
    [90, 62, 6, 1, 228],
    [450, 112, 4, 1, 684],
    [38, 0, 18, 1, 76],
    [38, 18, 0, 1, 76],
    [614, 0, 34, 1, 684],
    [38, 0, 18, 1, 76],
    [38, 0, 18, 1, 76],
];

/// Greedy orthogonal-set length `m ↦ number of Γ-orbit representatives`.
pub const GREEDY_TABLE: [(usize, usize); 10] =
    [(19, 6), (20, 15), (21, 30), (22, 12), (23, 12), (24, 12), (25, 15), (26, 8), (28, 21), (32, 1)];

/// Block whose `Γ`-orbits are counted.
const ORBIT_COUNT_BLOCK: &str = "S7,7";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Blocked,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Blocked => "BLOCKED",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub id: u32,
    pub name: &'static str,
    /// Where the claim is stated, by subject.
    pub location: &'static str,
    pub expected: String,
    pub computed: String,
    pub status: Status,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub claims: Vec<Claim>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(|c| c.status == Status::Pass)
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    /// Distinct pools explored per representative when resolving greedy ties.
    pub tie_budget: usize,
    /// Node cap for each exhaustive frame search.
    pub frame_node_cap: u64,
    /// Representatives whose greedy length reaches this are certified.
    pub certify_from: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { tie_budget: 2_000_000, frame_node_cap: 1_000, certify_from: 28 }
    }
}

/// Intermediate results shared between claims.
#[derive(Default)]
struct Stage {
    fixtures: Option<Fixtures>,
    o40: Option<Lattice>,
    set: Option<VectorSet>,
    ips: Option<InnerProducts>,
    level1: Option<Partition>,
    stable: Option<Partition>,
    gamma: Option<SymmetryGroup>,
    orbits: Option<Vec<Orbit>>,
    group: Option<AutGroup>,
}

struct Runner<'a> {
    claims: Vec<Claim>,
    on_claim: &'a mut dyn FnMut(&Claim),
}

impl Runner<'_> {
    fn run(
        &mut self,
        id: u32,
        name: &'static str,
        location: &'static str,
        expected: impl Into<String>,
        ready: bool,
        body: impl FnOnce() -> Result<(bool, String)>,
    ) {
        let start = Instant::now();
        let (status, computed) = if !ready {
            (Status::Blocked, "prerequisite stage failed".to_string())
        } else {
            match body() {
                Ok((true, c)) => (Status::Pass, c),
                Ok((false, c)) => (Status::Fail, c),
                Err(e) => (Status::Fail, format!("error: {e}")),
            }
        };
        let claim = Claim {
            id,
            name,
            location,
            expected: expected.into(),
            computed,
            status,
            wall_ms: start.elapsed().as_millis() as u64,
        };
        (self.on_claim)(&claim);
        self.claims.push(claim);
    }
}

fn rows_of(expected: &[[u32; 5]]) -> Vec<(TypeSig, usize)> {
    let mut rows: Vec<(TypeSig, usize)> =
        expected.iter().map(|r| (TypeSig::new([r[0], r[1], r[2], r[3]]), r[4] as usize)).collect();
    rows.sort();
    rows
}

fn compare_rows(got: &[(TypeSig, usize)], want: &[(TypeSig, usize)]) -> (bool, String) {
    if got == want {
        return (true, format!("{} blocks, (type, size) multiset equal", got.len()));
    }
    let missing: Vec<String> = want.iter().filter(|r| !got.contains(r)).map(|(t, s)| format!("{t}:{s}")).collect();
    let extra: Vec<String> = got.iter().filter(|r| !want.contains(r)).map(|(t, s)| format!("{t}:{s}")).collect();
    (false, format!("{} blocks; missing {missing:?}; unexpected {extra:?}", got.len()))
}

fn block_by_label<'p>(p: &'p Partition, label: &str) -> Result<&'p typing::Block> {
    p.blocks
        .iter()
        .find(|b| b.label_string() == label)
        .ok_or_else(|| Error::SearchFailed(format!("partition has no block {label}")))
}

fn orbit_reps_in(orbits: &[Orbit], block: &typing::Block) -> Vec<SignedVector> {
    orbits
        .iter()
        .filter(|o| block.members.binary_search(&o.rep_index).is_ok())
        .map(|o| SignedVector { index: o.rep_index, negative: false })
        .collect()
}

fn table_string(t: &BTreeMap<usize, usize>) -> String {
    let parts: Vec<String> = t.iter().map(|(m, c)| format!("{m}:{c}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Runs every claim. `fixtures` is the outcome of loading the fixture
/// matrices; `load_set` returns the folded norm-≤4 vectors of the lattice
/// (possibly from a cache). `on_claim` sees each claim as it completes.
pub fn run(
    fixtures: Result<Fixtures>,
    opts: &Options,
    load_set: &mut dyn FnMut(&Lattice) -> Result<VectorSet>,
    on_claim: &mut dyn FnMut(&Claim),
) -> Report {
    let mut st = Stage::default();
    let mut r = Runner { claims: Vec::new(), on_claim };
    let four = BigRational::from_integer(4.into());

    r.run(1, "construction", "construction of O40", "glued lattice = reference basis lattice; |det B| = 63^10; even; det Gram = 1", true, || {
        let fx = fixtures?;
        let o = construction::build_O40_with(&fx)?;
        let det_b = linalg::det(&fx.reference_basis())?.abs();
        let det_gram = o.determinant();
        let pass = det_b == BigInt::from(63).pow(10) && o.is_even() && det_gram.is_one();
        let c = format!("hnf equal; |det B| = {det_b}; even = {}; det Gram = {det_gram}", o.is_even());
        st.fixtures = Some(fx);
        st.o40 = Some(o);
        Ok((pass, c))
    });

    r.run(2, "extremality", "minimum and kissing number", "min = 4 = 2(1 + floor(40/24)); 39600 vectors of norm 4", st.o40.is_some(), || {
        let o = st.o40.as_ref().expect("ready");
        let bound = lattice::extremal_min_bound(40)?;
        let min = enumeration::min_norm(o)?;
        let s = load_set(o)?.folded();
        let below = s.norms().iter().filter(|n| **n < four).count();
        let s4 = s.with_norm(&four);
        let count = s4.signed_len();
        let pass = bound == 4 && min == 4 && below == 0 && count == 39600;
        st.set = Some(s4);
        Ok((pass, format!("bound = {bound}; min = {min}; vectors below 4 = {below}; count = {count}")))
    });

    r.run(3, "type split", "split of S by type", "18 blocks matching the reference (type, size) rows", st.set.is_some(), || {
        let s = st.set.as_ref().expect("ready");
        let ips = InnerProducts::compute(s)?;
        let p1 = typing::partition_by_type(&ips)?;
        let (pass, c) = compare_rows(&p1.split_multiset(), &rows_of(&LEVEL1_ROWS));
        st.ips = Some(ips);
        st.level1 = Some(p1);
        Ok((pass, c))
    });

    r.run(4, "irreducible split", "irreducible subsets of S", "64 blocks matching the reference (local type, size) rows; stable under refinement", st.level1.is_some(), || {
        let ips = st.ips.as_ref().expect("ready");
        let (p, _) = typing::refine_to_irreducible(ips, st.level1.as_ref().expect("ready"))?;
        let (rows_ok, c) = compare_rows(&p.type_multiset(ips)?, &rows_of(&STABLE_ROWS));
        let again = typing::refine_once(ips, &p)?.len();
        let pass = rows_ok && again == p.len();
        st.stable = Some(p);
        Ok((pass, format!("{c}; blocks after one more pass = {again}")))
    });

    r.run(5, "no frame signature", "irreducible types", "no block of local type [78,0,0,1]", st.stable.is_some(), || {
        let present = typing::frame_signature_present(st.ips.as_ref().expect("ready"), st.stable.as_ref().expect("ready"))?;
        Ok((!present, format!("frame signature present = {present}")))
    });

    r.run(6, "symmetry group", "the group Gamma", "order 342; generator orders (19, 9, 2); isometries of O40; |S/Gamma| = 132; |S7,7/Gamma| = 4", st.stable.is_some(), || {
        let o = st.o40.as_ref().expect("ready");
        let s = st.set.as_ref().expect("ready");
        let gamma = symmetry::gamma_group()?;
        let orders = gamma.generator_orders();
        let isometric = gamma.stabilizes(o).is_ok();
        let orbs = symmetry::orbits(s, &gamma)?;
        let block = block_by_label(st.stable.as_ref().expect("ready"), ORBIT_COUNT_BLOCK)?;
        let in_block = orbit_reps_in(&orbs, block).len();
        let pass = gamma.order() == 342 && orders == [19, 9, 2] && isometric && orbs.len() == 132 && in_block == 4;
        let c = format!(
            "order {}; generator orders {orders:?}; isometries = {isometric}; |S/Gamma| = {}; |{ORBIT_COUNT_BLOCK}/Gamma| = {in_block}",
            gamma.order(),
            orbs.len()
        );
        st.gamma = Some(gamma);
        st.orbits = Some(orbs);
        Ok((pass, c))
    });

    let expected_table: BTreeMap<usize, usize> = GREEDY_TABLE.into_iter().collect();
    r.run(
        7,
        "orthogonal sets",
        "orthogonal 4-vectors and frames",
        format!(
            "n_max = 32; greedy table {} attainable; has_4frame = false by exhaustive search from representatives with m >= {}",
            table_string(&expected_table),
            opts.certify_from
        ),
        st.orbits.is_some(),
        || {
            let ips = st.ips.as_ref().expect("ready");
            let orbs = st.orbits.as_ref().expect("ready");
            let g = OrthoGraph::new(ips);
            let outcomes = frames::outcome_table(&g, orbs, opts.tie_budget)?;
            let n_max = outcomes.iter().filter_map(|o| o.last().copied()).max().unwrap_or(0);
            let attainable = frames::table_attainable(&outcomes, &expected_table);
            let (_, lexicographic) = frames::orthogonal_table(&g, orbs, &TieBreak::SmallestIndex);
            let mut certified: Vec<&Orbit> = orbs
                .iter()
                .zip(&outcomes)
                .filter(|(_, o)| o.last().is_some_and(|&m| m >= opts.certify_from))
                .map(|(orbit, _)| orbit)
                .collect();
            certified.sort_by_key(|o| o.rep_index);
            let cert = frames::certify_frames(&g, ips, &certified, orbs.len(), 40, 4, opts.frame_node_cap);
            let complete = cert.searches.iter().filter(|s| s.complete).count();
            let verdict = match cert.verdict() {
                Some(true) => "true",
                Some(false) => "false",
                None if cert.frame.is_none() && cert.complete() => "undetermined (searched representatives exhausted, other orbits not excluded)",
                None => "undetermined (node cap reached)",
            };
            let pass = n_max == 32 && attainable && cert.verdict() == Some(false);
            let c = format!(
                "n_max = {n_max}; table attainable = {attainable}; lexicographic tie-break table {}; searches complete {complete}/{} ({} nodes, cap {} each); has_4frame = {verdict}",
                table_string(&lexicographic),
                certified.len(),
                cert.nodes(),
                opts.frame_node_cap
            );
            Ok((pass, c))
        },
    );

    r.run(8, "automorphism group", "Aut(O40)", "order 684; g1 of order 36, g2 of order 19, g1 g2 g1^-1 = g2^3; <g2> normal; trivial intersection; product is the group", st.orbits.is_some(), || {
        let comp = aut::full_aut(
            st.o40.as_ref().expect("ready"),
            st.set.as_ref().expect("ready"),
            st.ips.as_ref().expect("ready"),
            st.stable.as_ref().expect("ready"),
            st.gamma.as_ref().expect("ready"),
        )?;
        let rep = aut::verify_semidirect(&comp.group, 36, 19, 3)?;
        let pass = comp.group.order() == 684
            && rep.order_g1 == 36
            && rep.order_g2 == 19
            && rep.exponent == 3
            && rep.normal
            && rep.trivial_intersection
            && rep.product_is_group;
        let c = format!(
            "order {}; isometry solutions {}; g1 order {}; g2 order {}; exponent {}; normal {}; trivial intersection {}; product {}",
            comp.group.order(),
            comp.solutions.len(),
            rep.order_g1,
            rep.order_g2,
            rep.exponent,
            rep.normal,
            rep.trivial_intersection,
            rep.product_is_group
        );
        st.group = Some(comp.group);
        Ok((pass, c))
    });

    r.run(9, "fixture matrices", "explicit Gram matrix and generators", "Gram even, unimodular, positive definite, min 4, 39600 minimal vectors, congruent to Gram(O40); g1, g2 preserve it and satisfy the relation", st.orbits.is_some() && st.fixtures.is_some(), || {
        let o = st.o40.as_ref().expect("ready");
        let fx = st.fixtures.as_ref().expect("ready");
        let p = st.stable.as_ref().expect("ready");
        let anchor = block_by_label(p, aut::FIXTURE_BASIS_BLOCKS[aut::FIXTURE_ANCHOR])?;
        let reps = orbit_reps_in(st.orbits.as_ref().expect("ready"), anchor);
        let f = aut::check_fixtures(fx, o, st.set.as_ref().expect("ready"), st.ips.as_ref().expect("ready"), p, &reps, st.group.as_ref(), true)?;
        let gram = o.integer_gram().ok_or_else(|| Error::StructureMismatch("O40 is not integral".into()))?;
        let congruent = match &f.basis_change {
            Some(t) => t.mul(&gram)?.mul(&t.transpose())? == fx.gram_o40,
            None => false,
        };
        let pass = f.even
            && f.unimodular
            && f.positive_definite
            && f.min_norm == Some(4)
            && f.min_count == Some(39600)
            && congruent
            && f.generators_preserve_gram
            && f.generator_orders == (Some(36), Some(19))
            && f.relation_exponent == Some(3)
            && f.generators_in_group != Some(false);
        let c = format!(
            "even {}; unimodular {}; positive definite {}; min {:?}; count {:?}; congruent {congruent} ({} isometries); generators preserve {}; orders {:?}; exponent {:?}; in group {:?}",
            f.even,
            f.unimodular,
            f.positive_definite,
            f.min_norm,
            f.min_count,
            f.isometry_solutions,
            f.generators_preserve_gram,
            f.generator_orders,
            f.relation_exponent,
            f.generators_in_group
        );
        Ok((pass, c))
    });

    r.run(10, "glue sum", "sublattice M and O40 = L + M", "Gram of M = A1(2)+A1(2)+A19(2)+A19(2); L + M = O40", st.stable.is_some(), || {
        let o = st.o40.as_ref().expect("ready");
        let m = glue::find_sublattice_m(o, st.set.as_ref().expect("ready"), st.ips.as_ref().expect("ready"), st.stable.as_ref().expect("ready"))?;
        let gram_ok = m.gram == glue::target_gram();
        let sum = glue::verify_glue_sum(&construction::build_L(), &m.lattice, o)?;
        let index = glue::index_in(&m.lattice, o)?;
        let index_ok = &index * &index == linalg::det(&m.gram)?;
        let c = format!(
            "Gram matches = {gram_ok}; chains from {}; L + M = O40: {sum}; [O40:M] = {index}, squared = det Gram(M): {index_ok}",
            m.chain_block
        );
        Ok((gram_ok && sum && index_ok, c))
    });

    r.run(11, "property suites", "independent invariants", "all property checks pass", st.orbits.is_some() && st.stable.is_some(), || {
        let data = TypedSet {
            set: st.set.as_ref().expect("ready"),
            ips: st.ips.as_ref().expect("ready"),
            level1: st.level1.as_ref().expect("ready"),
            stable: st.stable.as_ref().expect("ready"),
            orbits: st.orbits.as_ref().expect("ready"),
            group_order: st.gamma.as_ref().expect("ready").order(),
        };
        let mut all = selfcheck::independent_suite();
        all.extend(selfcheck::structural_suite(&data)?);
        let pass = all.iter().all(selfcheck::PropertyOutcome::passed);
        let parts: Vec<String> = all.iter().map(|o| format!("{}: {}/{}", o.name, o.cases - o.failures, o.cases)).collect();
        Ok((pass, parts.join("; ")))
    });

    Report { schema_version: SCHEMA_VERSION, claims: r.claims }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_construction_blocks_everything_else() {
        let mut load = |_: &Lattice| -> Result<VectorSet> { panic!("must not enumerate") };
        let mut seen = Vec::new();
        let rep = run(Err(Error::FixtureChecksum("b1.mat".into())), &Options::default(), &mut load, &mut |c| seen.push(c.id));
        assert_eq!(seen, (1..=11).collect::<Vec<_>>());
        assert_eq!(rep.claims[0].status, Status::Fail);
        assert!(rep.claims[1..].iter().all(|c| c.status == Status::Blocked));
        assert!(!rep.all_passed());
    }

    #[test]
    fn reference_tables_are_consistent() {
        assert_eq!(LEVEL1_ROWS.iter().map(|r| r[4]).sum::<u32>(), 39600);
        assert_eq!(STABLE_ROWS.iter().map(|r| r[4]).sum::<u32>(), 39600);
        assert_eq!(GREEDY_TABLE.iter().map(|&(_, c)| c).sum::<usize>(), 132);
        for r in LEVEL1_ROWS {
            assert_eq!(r[0] + 2 * (r[1] + r[2] + r[3]), 39600);
        }
        for r in STABLE_ROWS {
            assert_eq!(r[0] + 2 * (r[1] + r[2] + r[3]), r[4]);
        }
    }
}
