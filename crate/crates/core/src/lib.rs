//! Exact low-rank plus sparse decompositions of Kronecker products.

pub mod cert;
pub mod decomp;
pub mod error;
pub mod field;
pub mod hadamard;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod predict;
pub mod score;
pub mod vfactor;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldSpec, PrimeField, Rationals};
