//! Exact integer and rational matrix arithmetic.

pub mod cholesky;
pub mod det;
pub mod hnf;
pub mod io;
pub mod lll;
mod matrix;
pub mod snf;

pub use cholesky::{rational_cholesky, Ldl};
pub use det::{det, det_rational, inverse, unimodular_inverse};
pub use hnf::{hnf, hnf_only, solve_in_hnf, Hnf};
pub use io::{parse_int_matrix, parse_int_matrix_prefix, parse_rat_matrix, parse_rat_matrix_prefix, write_matrix};
pub use lll::{default_delta, lll_reduce_gram, LllResult};
pub use matrix::{IntMatrix, Matrix, RatMatrix};
pub use snf::snf_diagonal;
