//! Genus-1 and genus-2 Weil representations, metaplectic words, the Jacobi
//! restriction `ρ_{L,σ₂}` and Kiefer's identity.

mod jacobi;
mod mp2;
mod mp4;

pub use jacobi::{
    embedded_s, heisenberg_matrix, jacobi_compatibility_deviation, kiefer_identity_check, kiefer_sides, rho_jacobi,
    rho_jacobi_with, JacobiElement,
};
pub use mp2::{mobius, sl2_mul, Mp2Token, Mp2Word, Sl2, WeilRep1, MP2_TEST_POINT};
pub use mp4::{mp4_test_point, sp4_act, sp4_cd, sp4_identity, sp4_mul, Mp4Token, Mp4Word, Siegel, Sp4, WeilRep2};
