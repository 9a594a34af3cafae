//! Lattices given by integer bases in a fixed ambient coordinate frame.
//!
//! Every lattice of interest lives inside the dual of the block lattice
//! `L = R^{⊕20}`, so all coordinates are integers relative to a basis
//! `e₁,…,e₄₀` of `L^∨`; only the frame Gram carries denominators.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix, RatMatrix};

pub const O40_FRAME_ID: &str = "paper40";

/// Reference basis `e₁,…,eₙ` with Gram `numerator / denominator`.
#[derive(Clone, PartialEq, Eq)]
pub struct AmbientFrame {
    id: String,
    numerator: IntMatrix,
    denominator: BigInt,
}

impl fmt::Debug for AmbientFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AmbientFrame({}, dim {}, /{})", self.id, self.dim(), self.denominator)
    }
}

impl AmbientFrame {
    pub fn new(id: impl Into<String>, gram: &RatMatrix) -> Result<Self> {
        let den = gram.denominator_lcm();
        let numerator = gram
            .scale(&BigRational::from_integer(den.clone()))
            .to_integer()
            .expect("cleared denominators");
        let frame = Self { id: id.into(), numerator, denominator: den };
        frame.validate()?;
        Ok(frame)
    }

    fn validate(&self) -> Result<()> {
        if !self.numerator.is_symmetric() {
            return Err(Error::InvalidArgument("frame Gram is not symmetric".into()));
        }
        linalg::rational_cholesky(&self.numerator.to_rational())?;
        Ok(())
    }

    /// Basis of `L^∨` for `L = R^{⊕20}`, `R = [[6,3],[3,12]]`, with Gram
    /// `(1/21)·[[28I, 7I], [7I, 2I]]`. In this frame `L = 3ℤ²⁰ ⊕ 21ℤ²⁰`.
    pub fn o40() -> Self {
        Self::from_block_gram(O40_FRAME_ID, &[[28, 7], [7, 2]], 21, 20).expect("positive definite")
    }

    /// Frame of dimension `2·copies` whose Gram is `block/den ⊗ I`, with
    /// coordinates ordered as all first components, then all second components.
    pub fn from_block_gram(id: &str, block: &[[i64; 2]; 2], den: i64, copies: usize) -> Result<Self> {
        let n = 2 * copies;
        let gram = RatMatrix::from_fn(n, n, |i, j| {
            let (bi, ci) = (i / copies, i % copies);
            let (bj, cj) = (j / copies, j % copies);
            if ci == cj {
                BigRational::new(BigInt::from(block[bi][bj]), BigInt::from(den))
            } else {
                BigRational::zero()
            }
        });
        Self::new(id, &gram)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.numerator.rows()
    }

    pub fn gram(&self) -> RatMatrix {
        self.numerator
            .to_rational()
            .scale(&BigRational::new(BigInt::one(), self.denominator.clone()))
    }

    pub fn numerator(&self) -> &IntMatrix {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    /// Exact inner product of two coordinate rows.
    pub fn inner(&self, x: &[BigInt], y: &[BigInt]) -> BigRational {
        let mut acc = BigInt::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let mut row = BigInt::zero();
            for (j, yj) in y.iter().enumerate() {
                let g = &self.numerator[(i, j)];
                if !g.is_zero() && !yj.is_zero() {
                    row += g * yj;
                }
            }
            acc += xi * row;
        }
        BigRational::new(acc, self.denominator.clone())
    }

    /// Inner product that must be an integer; fails loudly otherwise,
    /// which catches vectors taken from the wrong frame.
    pub fn inner_integral(&self, x: &[BigInt], y: &[BigInt]) -> i64 {
        let q = self.inner(x, y);
        assert!(q.is_integer(), "non-integral inner product {q} in frame {}", self.id);
        q.to_integer().to_i64().expect("inner product fits i64")
    }

    /// Small-integer kernel for hot loops.
    pub fn kernel(&self) -> FrameKernel {
        let n = self.dim();
        let g: Vec<i64> = self.numerator.to_i64().expect("frame Gram numerator fits i64");
        FrameKernel { n, g, den: self.denominator.to_i64().expect("denominator fits i64") }
    }

    pub fn scaled(&self, c: &BigRational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        Self::new(format!("{}*{c}", self.id), &self.gram().scale(c))
    }
}

/// Dense `i64` copy of a frame Gram numerator.
#[derive(Clone, Debug)]
pub struct FrameKernel {
    pub n: usize,
    pub g: Vec<i64>,
    pub den: i64,
}

impl FrameKernel {
    /// `x · G'` as a row, so that `x·y = (xG')·y / den`.
    pub fn transform(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (o, g) in out.iter_mut().zip(&self.g[i * self.n..(i + 1) * self.n]) {
                *o += xi * g;
            }
        }
        out
    }

    pub fn inner(&self, x: &[i64], y: &[i64]) -> i64 {
        let num: i64 = self.transform(x).iter().zip(y).map(|(a, b)| a * b).sum();
        assert!(num % self.den == 0, "non-integral inner product {num}/{}", self.den);
        num / self.den
    }
}

/// A full-row-rank sublattice of the frame, stored by its integer basis rows.
#[derive(Clone, Debug)]
pub struct Lattice {
    frame: Arc<AmbientFrame>,
    basis: IntMatrix,
}

impl Lattice {
    pub fn new(frame: Arc<AmbientFrame>, basis: IntMatrix) -> Result<Self> {
        if basis.cols() != frame.dim() {
            return Err(Error::Dimension(format!(
                "basis has {} columns, frame dimension is {}",
                basis.cols(),
                frame.dim()
            )));
        }
        let rank = linalg::hnf_only(&basis).rank();
        if rank < basis.rows() {
            return Err(Error::RankDeficient { rank, expected: basis.rows() });
        }
        Ok(Self { frame, basis })
    }

    /// Lattice generated by arbitrary (possibly dependent) rows.
    pub fn generated_by(frame: Arc<AmbientFrame>, rows: &IntMatrix) -> Result<Self> {
        let h = linalg::hnf_only(rows);
        Self::new(frame, h.basis())
    }

    pub fn frame(&self) -> &Arc<AmbientFrame> {
        &self.frame
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.frame.dim()
    }

    pub fn gram(&self) -> RatMatrix {
        self.basis.to_rational().congruence(&self.frame.gram()).expect("conformable")
    }

    /// Gram matrix as integers, if the lattice is integral.
    pub fn integer_gram(&self) -> Option<IntMatrix> {
        self.gram().to_integer()
    }

    pub fn is_integral(&self) -> bool {
        self.gram().entries().iter().all(BigRational::is_integer)
    }

    pub fn is_even(&self) -> bool {
        let g = self.gram();
        self.is_integral() && (0..g.rows()).all(|i| g[(i, i)].to_integer().is_even())
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_integral() && linalg::det_rational(&self.gram()).is_ok_and(|d| d.abs().is_one())
    }

    pub fn determinant(&self) -> BigRational {
        linalg::det_rational(&self.gram()).expect("square Gram")
    }

    /// Dual lattice in the same frame. Requires full rank and that the dual
    /// basis has integer coordinates in the frame.
    pub fn dual(&self) -> Result<Self> {
        if !self.is_full_rank() {
            return Err(Error::InvalidArgument("dual of a lattice that is not full rank".into()));
        }
        // dual basis X satisfies X · G_e · Bᵀ = I
        let m = self.frame.gram().mul(&self.basis.to_rational().transpose())?;
        let x = linalg::inverse(&m)?;
        let x = x
            .to_integer()
            .ok_or_else(|| Error::InvalidArgument("dual lattice is not contained in the frame lattice".into()))?;
        Self::generated_by(self.frame.clone(), &x)
    }

    fn same_frame(&self, other: &Self) -> Result<()> {
        if self.frame != other.frame {
            return Err(Error::InvalidArgument(format!(
                "frames differ: {} vs {}",
                self.frame.id(),
                other.frame.id()
            )));
        }
        Ok(())
    }

    pub fn hnf_basis(&self) -> IntMatrix {
        linalg::hnf_only(&self.basis).basis()
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.same_frame(other)?;
        Self::generated_by(self.frame.clone(), &self.basis.vstack(&other.basis)?)
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.frame == other.frame && self.hnf_basis() == other.hnf_basis()
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Integer coefficients `c` with `c · basis = v`.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let h = linalg::hnf(&self.basis);
        let coeffs = linalg::solve_in_hnf(&h.basis(), &h.pivots, v)?;
        // express in the stored basis: c_hnf · T · B = v, and T·B = H
        let t = h.transform.submatrix(0..h.rank(), 0..self.rank());
        let mut out = vec![BigInt::zero(); self.rank()];
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, tkj) in out.iter_mut().zip(t.row(k)) {
                *o += c * tkj;
            }
        }
        Some(out)
    }

    /// Coordinates of many vectors at once, against the HNF of the basis.
    pub fn membership(&self) -> Membership {
        let h = linalg::hnf(&self.basis);
        Membership {
            basis: h.basis(),
            pivots: h.pivots.clone(),
            transform: h.transform.submatrix(0..h.rank(), 0..self.rank()),
        }
    }

    pub fn is_sublattice_of(&self, other: &Self) -> bool {
        if self.frame != other.frame {
            return false;
        }
        let m = other.membership();
        self.basis.iter_rows().all(|r| m.contains(r))
    }

    /// Lattice with the same basis in a frame whose Gram is scaled by `c`.
    pub fn scale(&self, c: &BigRational) -> Result<Self> {
        Self::new(Arc::new(self.frame.scaled(c)?), self.basis.clone())
    }

    /// Elementary divisors of `L^∨/L` for an integral full-rank lattice.
    pub fn discriminant_invariants(&self) -> Result<Vec<BigInt>> {
        let g = self
            .integer_gram()
            .ok_or_else(|| Error::InvalidArgument("discriminant group of a non-integral lattice".into()))?;
        linalg::snf_diagonal(&g)
    }

    /// Text form: a line `frame: <id>` followed by the basis matrix. Frames
    /// other than the O₄₀ frame are written `frame: inline <id>` with their
    /// Gram matrix before the basis.
    pub fn to_file_string(&self) -> String {
        let mut s = if self.frame.id() == O40_FRAME_ID && *self.frame == AmbientFrame::o40() {
            format!("frame: {O40_FRAME_ID}\n")
        } else {
            format!("frame: inline {}\n{}", self.frame.id(), linalg::write_matrix(&self.frame.gram()))
        };
        s.push_str(&linalg::write_matrix(&self.basis));
        s
    }

    pub fn from_file_string(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or_else(|| Error::Parse("empty lattice file".into()))?;
        let spec = header
            .trim()
            .strip_prefix("frame:")
            .ok_or_else(|| Error::Parse(format!("expected `frame: <id>`, got `{header}`")))?
            .trim();
        let rest: String = text.lines().skip(ln + 1).map(|l| format!("{l}\n")).collect();
        let (frame, rest) = if spec == O40_FRAME_ID {
            (AmbientFrame::o40(), rest)
        } else if let Some(id) = spec.strip_prefix("inline ") {
            let (gram, used) = linalg::parse_rat_matrix_prefix(&rest)?;
            let tail: String = rest.lines().skip(used).map(|l| format!("{l}\n")).collect();
            (AmbientFrame::new(id.trim(), &gram)?, tail)
        } else {
            return Err(Error::Parse(format!("unknown frame `{spec}`")));
        };
        let basis = linalg::parse_int_matrix(&rest)?;
        Self::new(Arc::new(frame), basis)
    }

    /// Same lattice, new basis `T · basis` for unimodular `T`.
    pub fn with_basis_change(&self, t: &IntMatrix) -> Result<Self> {
        if !linalg::det(t)?.abs().is_one() {
            return Err(Error::InvalidArgument("basis change is not unimodular".into()));
        }
        Self::new(self.frame.clone(), t.mul(&self.basis)?)
    }
}

/// Cached Hermite data for repeated membership tests.
#[derive(Clone, Debug)]
pub struct Membership {
    basis: IntMatrix,
    pivots: Vec<usize>,
    transform: IntMatrix,
}

impl Membership {
    pub fn contains(&self, v: &[BigInt]) -> bool {
        linalg::solve_in_hnf(&self.basis, &self.pivots, v).is_some()
    }

    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let c = linalg::solve_in_hnf(&self.basis, &self.pivots, v)?;
        let mut out = vec![BigInt::zero(); self.transform.cols()];
        for (k, ck) in c.iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            for (o, t) in out.iter_mut().zip(self.transform.row(k)) {
                *o += ck * t;
            }
        }
        Some(out)
    }
}

/// Block-diagonal Gram of an orthogonal sum.
pub fn orthogonal_sum(grams: &[RatMatrix]) -> RatMatrix {
    RatMatrix::block_diagonal(grams)
}

/// Gram of the root lattice `Aₙ` in its simple-root basis.
pub fn a_n_gram(n: usize) -> IntMatrix {
    IntMatrix::from_fn(n, n, |i, j| {
        BigInt::from(match i.abs_diff(j) {
            0 => 2,
            1 => -1,
            _ => 0,
        })
    })
}

/// Largest possible minimum `2(1 + ⌊n/24⌋)` of an even unimodular lattice of rank `n`.
pub fn extremal_min_bound(n: usize) -> Result<u64> {
    if n == 0 || n % 8 != 0 {
        return Err(Error::InvalidArgument(format!("rank {n} of an even unimodular lattice must be a positive multiple of 8")));
    }
    Ok(2 * (1 + (n / 24) as u64))
}
