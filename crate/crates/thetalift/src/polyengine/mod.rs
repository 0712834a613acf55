//! Exact multivariate polynomials on coordinate grids, the Kudla–Millson
//! polynomials `P_α`, `Q_α`, and their decomposition along a hyperbolic split.

mod coeff;
mod decompose;
mod json;
mod km;
mod poly;

pub use coeff::{Coeff, PiRat};
pub use decompose::{
    closed_form_component, closed_form_on_grid, combine_p_w_h, decompose_one_column, decompose_p_w, shear_columns,
    tau_transform_check, Components, HPair, TauCheck,
};
pub use json::{from_json, to_json, ParsedPolynomial};
pub use km::{build_p_alpha, build_q_alpha, identity2, km_schwartz_coefficients, very_homogeneous_check, IndexTuple};
pub use poly::{CompiledPoly, MatrixPolynomial, Monomial};
