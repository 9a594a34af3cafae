//! Exact lattice computations around a 40-dimensional extremal even
//! unimodular lattice glued from two generalized quadratic residue codes.

pub mod error;
pub mod linalg;

pub use error::{Error, Result};
pub mod lattice;
pub mod qr;
pub mod fixtures;
pub mod construction;
pub mod enumeration;
pub mod typing;
pub mod symmetry;
pub mod frames;
pub mod aut;
pub mod glue;
pub mod selfcheck;
pub mod verify;

pub use lattice::{AmbientFrame, Lattice};
