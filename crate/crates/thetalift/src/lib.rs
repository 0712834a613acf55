//! Lattices, Weil representations, matrix polynomials and genus-2 / Jacobi theta
//! functions, together with suites that verify the identities relating them.

pub mod error;
pub mod exactalg;
pub mod lattice;
pub mod localpadic;
pub mod numeric;
pub mod polyengine;
pub mod theta;
pub mod verify;
pub mod weilrep;

pub use error::{Error, Result};
