//! Truncated evaluation of genus-2 and Jacobi theta functions attached to a lattice
//! and a Grassmannian frame, and the identities that relate them: modularity, the
//! Schrödinger model, the splitting formula, the Fourier–Jacobi expansion, the Jacobi
//! Poincaré-series expansion and the S-transformation cases.

mod enumerate;
mod fourier_jacobi;
mod jacobi;
mod poincare;
mod scases;
mod schrodinger;
mod siegel;
mod space;
mod splitting;

pub use enumerate::{enumerate_ellipsoid, enumerate_majorant};
pub use fourier_jacobi::{fj_quadrature_check, fourier_jacobi_rhs, FjQuadrature};
pub use jacobi::{theta_jacobi, JacobiPoint};
pub use poincare::{jacobi_poincare_rhs, PoincareBounds};
pub use scases::{s_case_identities_check, SCaseReport};
pub use schrodinger::schrodinger_f_alpha;
pub use siegel::{theta_genus2, theta_genus2_shifted, transform_characteristics, SiegelPoint};
pub use space::{ThetaSpace, TruncatedThetaValue};
pub use splitting::{disc_projection, splitting_rhs};

/// `[0; n]` for both columns, the neutral characteristic.
pub fn zero_pair(n: usize) -> [Vec<f64>; 2] {
    [vec![0.0; n], vec![0.0; n]]
}
