use num_complex::Complex64;
use serde::Serialize;

use super::siegel::{theta_genus2, SiegelPoint};
use super::space::ThetaSpace;
use super::splitting::split_components;
use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, SplitGeometry};
use crate::numeric::max_dev;
use crate::polyengine::{HPair, MatrixPolynomial};
use crate::weilrep::{Mp4Token, Mp4Word, WeilRep2};

/// Deviations of the three S-transformation identities for `Θ_{K,2}` with the
/// non-modular components `P_{w,0,2}`, `P_{w,1,1}`, `P_{w,2,0}`.
#[derive(Clone, Debug, Serialize)]
pub struct SCaseReport {
    pub cases: Vec<(HPair, f64)>,
    pub max_deviation: f64,
    /// Twice the exponent `s` of `det(τ)^s` used in the identities.
    pub twice_exponent: i32,
}

const CASES: [HPair; 3] = [(0, 2), (1, 1), (2, 0)];

/// `c_{h,h′}(τ)`: coefficient of `ρ_K(S)Θ_K(−τ⁻¹, −β, α, P_{w,h′})` in the expansion of
/// `Θ_K(τ, α, β, P_{w,h})`.
fn coefficient(h: HPair, hp: HPair, t: &[Complex64; 3]) -> Complex64 {
    let [t1, t2, t3] = *t;
    match (h, hp) {
        ((0, 2), (0, 2)) => t3 * t3,
        ((0, 2), (1, 1)) => t2 * t3,
        ((0, 2), (2, 0)) => t2 * t2,
        ((1, 1), (0, 2)) => t2 * t3 * 2.0,
        ((1, 1), (1, 1)) => t1 * t3 + t2 * t2,
        ((1, 1), (2, 0)) => t1 * t2 * 2.0,
        ((2, 0), (0, 2)) => t2 * t2,
        ((2, 0), (1, 1)) => t2 * t1,
        ((2, 0), (2, 0)) => t1 * t1,
        _ => unreachable!("only total degree 2 components enter"),
    }
}

pub(crate) fn s_case_deviations(
    lattice: &EvenLattice,
    geometry: &SplitGeometry,
    tau: &SiegelPoint,
    alpha: &[Vec<f64>; 2],
    beta: &[Vec<f64>; 2],
    poly: &MatrixPolynomial<Complex64>,
    twice_exponent: i32,
    eps: f64,
) -> Result<SCaseReport> {
    if lattice.bminus() != 2 {
        return Err(Error::Precondition("S-case identities need L of signature (b, 2)".into()));
    }
    let space = ThetaSpace::for_sublattice(lattice, geometry)?;
    let k = geometry.split.k_lattice(lattice)?;
    let rho = WeilRep2::new(&k);
    let comps = split_components(lattice, geometry, poly);
    let s_word = Mp4Word::new(vec![Mp4Token::S]);
    let t = tau.tau();
    let entries = [t[(0, 0)], t[(0, 1)], t[(1, 1)]];
    let moved = SiegelPoint::new(s_word.act(t))?;
    // det(τ)^s on the metaplectic branch: φ_S(−τ⁻¹)^{−2s}.
    let det_power = s_word.phi(moved.tau()).powi(-twice_exponent);
    let minus_beta = [beta[0].iter().map(|x| -x).collect(), beta[1].iter().map(|x| -x).collect()];
    let mut transformed = Vec::new();
    for hp in CASES {
        let th = theta_genus2(&space, &moved, &minus_beta, alpha, &comps.get(hp), eps / 16.0)?;
        transformed.push(rho.apply(&s_word, &th.value));
    }
    let mut cases = Vec::new();
    for h in CASES {
        let lhs = theta_genus2(&space, tau, alpha, beta, &comps.get(h), eps / 4.0)?;
        let mut rhs = vec![Complex64::new(0.0, 0.0); lhs.value.len()];
        for (hp, v) in CASES.iter().zip(&transformed) {
            let c = coefficient(h, *hp, &entries) * det_power;
            for (r, z) in rhs.iter_mut().zip(v) {
                *r += c * z;
            }
        }
        cases.push((h, max_dev(&lhs.value, &rhs)));
    }
    let max_deviation = cases.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(SCaseReport { cases, max_deviation, twice_exponent })
}

/// Check the three S-case identities
/// `Θ_K(τ, α, β, P_{w,h}) = det(τ)^{−b/2−1} Σ_{h′} c_{h,h′}(τ) ρ_K(S)Θ_K(−τ⁻¹, −β, α, P_{w,h′})`
/// for `h ∈ {(0,2), (1,1), (2,0)}`, where `L` has signature `(b, 2)` and `P` is very
/// homogeneous of degree `(2, 0)`.
pub fn s_case_identities_check(
    lattice: &EvenLattice,
    geometry: &SplitGeometry,
    tau: &SiegelPoint,
    alpha: &[Vec<f64>; 2],
    beta: &[Vec<f64>; 2],
    poly: &MatrixPolynomial<Complex64>,
    eps: f64,
) -> Result<SCaseReport> {
    let b = lattice.bplus() as i32;
    s_case_deviations(lattice, geometry, tau, alpha, beta, poly, -b - 2, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GrassmannianFrame, HyperbolicSplit};
    use crate::polyengine::{build_p_alpha, IndexTuple};
    use crate::theta::zero_pair;
    use rand::SeedableRng;

    fn setup() -> (EvenLattice, SplitGeometry, MatrixPolynomial<Complex64>) {
        let l = EvenLattice::from_name("U+U+A1").unwrap();
        let split = HyperbolicSplit::find(&l, 2).unwrap();
        let f = GrassmannianFrame::random_near_base(&l, &mut rand_chacha::ChaCha8Rng::seed_from_u64(12), 0.2).unwrap();
        let geo = SplitGeometry::new(&f, &split).unwrap();
        let poly = build_p_alpha(IndexTuple::new(1, 1, 2, 3), 3, 2).unwrap();
        (l, geo, poly)
    }

    #[test]
    fn identities_hold_with_characteristics() {
        let (l, geo, poly) = setup();
        let tau =
            SiegelPoint::from_entries(Complex64::new(0.05, 1.0), Complex64::new(0.1, 0.1), Complex64::new(-0.1, 1.1)).unwrap();
        let a = [vec![0.1, 0.2, -0.1], vec![0.0, -0.3, 0.2]];
        let bb = [vec![0.2, 0.0, 0.1], vec![-0.1, 0.1, 0.0]];
        let r = s_case_identities_check(&l, &geo, &tau, &a, &bb, &poly, 1e-10).unwrap();
        assert!(r.max_deviation < 5e-8, "{r:?}");
    }

    #[test]
    fn identities_hold_at_i_and_shifted_exponent_fails() {
        let (l, geo, poly) = setup();
        let i = Complex64::new(0.0, 1.0);
        let tau = SiegelPoint::from_entries(i, Complex64::new(0.0, 0.0), i).unwrap();
        let z = zero_pair(3);
        let r = s_case_identities_check(&l, &geo, &tau, &z, &z, &poly, 1e-10).unwrap();
        assert!(r.max_deviation < 5e-8, "{r:?}");
        let tau =
            SiegelPoint::from_entries(Complex64::new(0.05, 1.0), Complex64::new(0.1, 0.1), Complex64::new(-0.1, 1.1)).unwrap();
        let shifted = s_case_deviations(&l, &geo, &tau, &z, &z, &poly, -7, 1e-10).unwrap();
        assert!(shifted.max_deviation > 1e-3);
    }
}
