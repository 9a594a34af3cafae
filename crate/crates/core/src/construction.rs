//! The concrete objects: `R`, `L = R^{⊕20}`, `O₄₀` and the variant lattices.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::fixtures::Fixtures;
use crate::lattice::{AmbientFrame, Lattice, O40_FRAME_ID};
use crate::linalg::{self, IntMatrix};
use crate::qr::{self, CodeSpec, GlueForm, LENGTH};

pub type Gram2 = [[i64; 2]; 2];

pub const O40_R: Gram2 = [[6, 3], [3, 12]];
pub const VARIANT_RS: [Gram2; 4] = [[[4, 0], [0, 4]], [[4, 1], [1, 6]], [[4, 2], [2, 6]], [[6, 1], [1, 6]]];

/// How the frame `e₁, e₂` of `R^∨` sits relative to the dual basis
/// `r₁*, r₂*`: `e = W · r*`, chosen so that `R` becomes `d₁ℤ ⊕ d₂ℤ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockFrame {
    pub r: Gram2,
    pub w: Gram2,
    pub invariants: (i64, i64),
    pub form: GlueForm,
}

fn det2(m: &Gram2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn mul2(a: &Gram2, b: &Gram2) -> Gram2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

fn inv_unimodular2(w: &Gram2) -> Gram2 {
    let d = det2(w);
    [[w[1][1] * d, -w[0][1] * d], [-w[1][0] * d, w[0][0] * d]]
}

fn is_diag_hnf(m: &Gram2, inv: (i64, i64)) -> bool {
    let h = linalg::hnf_only(&IntMatrix::from_i64_rows(m).expect("2×2")).basis();
    h == IntMatrix::from_i64_rows(&[[inv.0, 0], [0, inv.1]]).expect("2×2")
}

impl BlockFrame {
    pub fn new(r: Gram2) -> Result<Self> {
        if r[0][1] != r[1][0] {
            return Err(Error::InvalidArgument("R is not symmetric".into()));
        }
        let det = det2(&r);
        if r[0][0] <= 0 || det <= 0 {
            return Err(Error::NotPositiveDefinite);
        }
        if r[0][0] % 2 != 0 || r[1][1] % 2 != 0 {
            return Err(Error::InvalidArgument("R is not even".into()));
        }
        let snf = linalg::snf_diagonal(&IntMatrix::from_i64_rows(&r).expect("2×2"))?;
        let inv = (i64::try_from(&snf[0]).expect("small"), i64::try_from(&snf[1]).expect("small"));

        // prefer W = [[1,k],[0,1]] with the smallest k ≥ 0
        let shear = (0..=inv.1.max(1)).map(|k| [[1, k], [0, 1]]);
        let bound = inv.1.max(2);
        let general = (-bound..=bound).flat_map(move |a| {
            (-bound..=bound).flat_map(move |b| {
                (-bound..=bound).flat_map(move |c| (-bound..=bound).map(move |d| [[a, b], [c, d]]))
            })
        });
        let w = shear
            .chain(general.filter(|w| det2(w).abs() == 1))
            .find(|w| is_diag_hnf(&mul2(&r, &inv_unimodular2(w)), inv))
            .ok_or_else(|| Error::FrameMismatch(format!("no small frame diagonalizes R = {r:?}")))?;

        // block Gram of e = W r*: W · adj(R) · Wᵀ / det R, in lowest terms
        let adj = [[r[1][1], -r[0][1]], [-r[1][0], r[0][0]]];
        let wt = [[w[0][0], w[1][0]], [w[0][1], w[1][1]]];
        let num = mul2(&mul2(&w, &adj), &wt);
        let g = [num[0][0], num[0][1], num[1][1], det].iter().fold(0i64, |acc, x| acc.gcd(x));
        let form = GlueForm { p: num[0][0] / g, q: num[0][1] / g, r: num[1][1] / g, den: det / g };
        Ok(Self { r, w, invariants: inv, form })
    }

    pub fn frame_id(&self) -> String {
        if self.r == O40_R {
            O40_FRAME_ID.to_string()
        } else {
            format!("R[{},{};{},{}]", self.r[0][0], self.r[0][1], self.r[1][0], self.r[1][1])
        }
    }

    pub fn ambient(&self) -> Result<AmbientFrame> {
        let f = self.form;
        AmbientFrame::from_block_gram(&self.frame_id(), &[[f.p, f.q], [f.q, f.r]], f.den, LENGTH)
    }

    /// `|det B|` required of a glued unimodular lattice in this frame.
    pub fn required_index(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.invariants.0 * self.invariants.1), LENGTH / 2)
    }

    /// Basis of `R^{⊕20}` in frame coordinates: rows of `R · W⁻¹`, first
    /// row of every copy, then second row of every copy.
    pub fn block_lattice_basis(&self) -> IntMatrix {
        let rw = mul2(&self.r, &inv_unimodular2(&self.w));
        let mut b = IntMatrix::zeros(2 * LENGTH, 2 * LENGTH);
        for half in 0..2 {
            for c in 0..LENGTH {
                b[(half * LENGTH + c, c)] = rw[half][0].into();
                b[(half * LENGTH + c, LENGTH + c)] = rw[half][1].into();
            }
        }
        b
    }
}

pub fn o40_block_frame() -> BlockFrame {
    BlockFrame::new(O40_R).expect("O₄₀ block Gram is valid")
}

pub fn o40_frame() -> Arc<AmbientFrame> {
    Arc::new(AmbientFrame::o40())
}

/// `L = R^{⊕20}` with Gram `[[6I, 3I], [3I, 12I]]`.
#[allow(non_snake_case)]
pub fn build_L() -> Lattice {
    let bf = o40_block_frame();
    Lattice::new(o40_frame(), bf.block_lattice_basis()).expect("full rank")
}

/// The lattice spanned by the rows of the reference basis.
pub fn reference_lattice(fx: &Fixtures) -> Result<Lattice> {
    Lattice::new(o40_frame(), fx.reference_basis())
}

#[allow(non_snake_case)]
pub fn build_O40() -> Result<Lattice> {
    build_O40_with(&Fixtures::embedded()?)
}

/// Glues the two O₄₀ codes and checks the result against the reference basis.
#[allow(non_snake_case)]
pub fn build_O40_with(fx: &Fixtures) -> Result<Lattice> {
    let glued = build_variant(O40_R, &CodeSpec::o40_mod3(), &CodeSpec::o40_mod21())?;
    let reference = reference_lattice(fx)?;
    if !glued.equals(&reference) {
        return Err(Error::ConstructionMismatch);
    }
    Ok(glued)
}

/// Overlattice of `R^{⊕20}` glued by the pair of codes given by `spec1`
/// (modulo `d₁`) and `spec2` (modulo `d₂`), where `(d₁, d₂)` are the
/// elementary divisors of `R`.
pub fn build_variant(r: Gram2, spec1: &CodeSpec, spec2: &CodeSpec) -> Result<Lattice> {
    let bf = BlockFrame::new(r)?;
    let (d1, d2) = bf.invariants;
    if spec1.modulus != d1 as u64 || spec2.modulus != d2 as u64 {
        return Err(Error::GlueCondition {
            stage: "moduli",
            detail: format!("R has elementary divisors ({d1}, {d2}), codes are mod ({}, {})", spec1.modulus, spec2.modulus),
        });
    }
    let u = qr::gqr_generators(spec1);
    let w = qr::gqr_generators(spec2);
    if !qr::isotropy_check_with(&u, &w, &bf.form) {
        return Err(Error::GlueCondition { stage: "isotropy", detail: format!("{spec1} / {spec2} is not isotropic") });
    }
    let basis = qr::glue_basis_with(&u, &w, bf.invariants)?;
    if !qr::index_check_with(&basis, &bf.required_index()) {
        let d = linalg::det(&basis)?;
        return Err(Error::GlueCondition {
            stage: "index",
            detail: format!("|det B| = {} but {} is required", num_traits::Signed::abs(&d), bf.required_index()),
        });
    }
    let lat = Lattice::new(Arc::new(bf.ambient()?), basis)?;
    if !(lat.is_even() && lat.is_unimodular()) {
        return Err(Error::GlueCondition { stage: "unimodular", detail: "glued Gram is not even unimodular".into() });
    }
    Ok(lat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn o40_frame_shear() {
        let bf = o40_block_frame();
        assert_eq!(bf.w, [[1, 4], [0, 1]]);
        assert_eq!(bf.invariants, (3, 21));
        assert_eq!(bf.form, GlueForm::O40);
        assert_eq!(bf.ambient().unwrap(), AmbientFrame::o40());
    }

    #[test]
    fn variant_frames() {
        let ks: Vec<(Gram2, (i64, i64))> =
            VARIANT_RS.iter().map(|r| { let b = BlockFrame::new(*r).unwrap(); (b.w, b.invariants) }).collect();
        assert_eq!(ks[0], ([[1, 0], [0, 1]], (4, 4)));
        assert_eq!(ks[1], ([[1, 6], [0, 1]], (1, 23)));
        assert_eq!(ks[2], ([[1, 3], [0, 1]], (2, 10)));
        assert_eq!(ks[3], ([[1, 6], [0, 1]], (1, 35)));
        for r in VARIANT_RS {
            let bf = BlockFrame::new(r).unwrap();
            // the frame Gram of R-basis rows recovers R
            let l = Lattice::new(Arc::new(bf.ambient().unwrap()), bf.block_lattice_basis()).unwrap();
            let g = l.gram();
            assert_eq!(g[(0, 0)], BigRational::from_integer(r[0][0].into()));
            assert_eq!(g[(0, LENGTH)], BigRational::from_integer(r[0][1].into()));
            assert_eq!(g[(LENGTH, LENGTH)], BigRational::from_integer(r[1][1].into()));
            assert_eq!(g[(0, 1)], BigRational::from_integer(0.into()));
        }
    }

    #[test]
    fn bad_r_is_rejected() {
        assert!(BlockFrame::new([[1, 2], [2, 1]]).is_err());
        assert!(BlockFrame::new([[3, 1], [1, 4]]).is_err());
        assert!(BlockFrame::new([[4, 1], [2, 4]]).is_err());
        assert!(build_variant([[-4, 0], [0, -4]], &CodeSpec::o40_mod3(), &CodeSpec::o40_mod21()).is_err());
    }

    #[test]
    fn l_gram_is_block_form() {
        let l = build_L();
        let g = l.integer_gram().unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let want = match (i / 20, j / 20, i % 20 == j % 20) {
                    (_, _, false) => 0,
                    (0, 0, true) => 6,
                    (1, 1, true) => 12,
                    _ => 3,
                };
                assert_eq!(g[(i, j)], want.into(), "({i},{j})");
            }
        }
        assert!(l.is_even());
        let mut d = vec![BigInt::from(3); 20];
        d.extend(vec![BigInt::from(21); 20]);
        assert_eq!(l.hnf_basis(), IntMatrix::diagonal(&d));
    }

    #[test]
    fn o40_matches_reference_basis() {
        let o = build_O40().unwrap();
        assert!(o.is_even() && o.is_unimodular());
        assert_eq!(linalg::det(&Fixtures::embedded().unwrap().reference_basis()).unwrap(), num_traits::pow(BigInt::from(63), 10));
        assert!(build_L().is_sublattice_of(&o));
        assert!(o.is_sublattice_of(&build_L().dual().unwrap()));
    }

    #[test]
    fn corrupted_b1_is_detected() {
        let mut fx = Fixtures::embedded().unwrap();
        fx.b1[(0, 0)] = 1.into();
        assert!(matches!(build_O40_with(&fx), Err(Error::ConstructionMismatch)));
    }

    #[test]
    fn failing_stage_is_named() {
        let e = build_variant(O40_R, &CodeSpec::o40_mod3(), &CodeSpec::new(21, [0; 6]).unwrap()).unwrap_err();
        assert!(matches!(e, Error::GlueCondition { stage: "isotropy", .. }));
        let e = build_variant(O40_R, &CodeSpec::new(3, [0; 6]).unwrap(), &CodeSpec::new(21, [0; 6]).unwrap()).unwrap_err();
        assert!(matches!(e, Error::GlueCondition { stage: "index", .. }));
        let e = build_variant(O40_R, &CodeSpec::o40_mod21(), &CodeSpec::o40_mod3()).unwrap_err();
        assert!(matches!(e, Error::GlueCondition { stage: "moduli", .. }));
    }
}
