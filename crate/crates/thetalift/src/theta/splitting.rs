use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use std::f64::consts::PI;

use super::siegel::{theta_genus2, SiegelPoint};
use super::space::{ThetaSpace, TruncatedThetaValue};
use crate::error::{Error, Result};
use crate::exactalg::Rat;
use crate::lattice::{EvenLattice, SplitGeometry};
use crate::numeric::NeumaierSum;
use crate::polyengine::{decompose_p_w, Components, MatrixPolynomial};

/// For a split of level 1, the isomorphism `D_L → D_K` induced by the orthogonal
/// projection `L′ → K′`, as a table of `D_K` indices.
pub fn disc_projection(lattice: &EvenLattice, geometry: &SplitGeometry) -> Result<Vec<usize>> {
    if geometry.split.level != 1 {
        return Err(Error::Precondition(format!("D_L ≅ D_K needs a split of level 1, got {}", geometry.split.level)));
    }
    let k = geometry.split.k_lattice(lattice)?;
    let dl = lattice.discriminant_group();
    let dk = k.discriminant_group();
    if dl.order() != dk.order() {
        return Err(Error::Precondition("discriminant groups of L and K differ in order".into()));
    }
    let den = k.det().abs().to_i64().ok_or_else(|| Error::InvalidLattice("det K too large".into()))?;
    (0..dl.order())
        .map(|s| {
            let coords = geometry.project_to_k(&dl.lift_f64(s));
            let exact: Vec<Rat> =
                coords.iter().map(|c| Rat::new(BigInt::from((c * den as f64).round() as i64), BigInt::from(den))).collect();
            dk.index_of(&exact)
        })
        .collect()
}

/// Polynomial components `P_{w,h₁,h₂}` of `P` for the direction `g(u_{z⊥})`.
pub(crate) fn split_components(
    lattice: &EvenLattice,
    geometry: &SplitGeometry,
    poly: &MatrixPolynomial<Complex64>,
) -> Components<Complex64> {
    let bplus = lattice.bplus();
    let n: Vec<Complex64> = geometry
        .u_zperp_ambient()
        .iter()
        .enumerate()
        .map(|(i, &x)| Complex64::new(if i < bplus { x } else { 0.0 }, 0.0))
        .collect();
    decompose_p_w(poly, &n, bplus)
}

/// Right-hand side of the splitting formula for `Θ_{L,2}(τ, 0, 0, g, P)`:
///
/// `1/(2u²) Σ_{c,d ∈ Z^{1×2}} Σ_h exp(−π ā y⁻¹ aᵗ/2u²) r₁^{h₁} r₂^{h₂} (−2i)^{−h₁−h₂}
///  Θ_{K,2}(τ, μd, −μc, borw, P_{w,h})`,
///
/// where `u² = (u_{z⊥}, u_{z⊥})`, `a = cτ + d`, `r = (cτ̄ + d)y⁻¹` and the sum runs over
/// `max(|c|, |d|) ≤ bound`.  Components are reported on `D_L²` via [`disc_projection`].
pub fn splitting_rhs(
    lattice: &EvenLattice,
    geometry: &SplitGeometry,
    tau: &SiegelPoint,
    poly: &MatrixPolynomial<Complex64>,
    bound: i64,
    eps: f64,
) -> Result<TruncatedThetaValue> {
    if bound < 0 {
        return Err(Error::InvalidInput("coset bound must be non-negative".into()));
    }
    let proj = disc_projection(lattice, geometry)?;
    let space = ThetaSpace::for_sublattice(lattice, geometry)?;
    let comps = split_components(lattice, geometry, poly);
    let u2 = geometry.uzperp2;
    let mu = geometry.project_to_k(&geometry.mu());
    let t = tau.tau();
    let yinv = tau.y_inv();
    let i = Complex64::i();
    let max_h = comps.parts.keys().map(|&(a, b)| a + b).max().unwrap_or(0);

    let mut pairs = Vec::new();
    for c1 in -bound..=bound {
        for c2 in -bound..=bound {
            for d1 in -bound..=bound {
                for d2 in -bound..=bound {
                    pairs.push(([c1 as f64, c2 as f64], [d1 as f64, d2 as f64]));
                }
            }
        }
    }
    let count = pairs.len() as f64;
    let nk = space.disc().order();
    let nl = proj.len();
    let mut acc = vec![NeumaierSum::new(); nk * nk];
    let (mut terms, mut tail, mut radius) = (0usize, 0.0f64, 0.0f64);
    for (c, d) in pairs {
        let a = [0, 1].map(|j| c[0] * t[(0, j)] + c[1] * t[(1, j)] + d[j]);
        let abar = [0, 1].map(|j| c[0] * t[(0, j)].conj() + c[1] * t[(1, j)].conj() + d[j]);
        let quad: Complex64 = (0..2).map(|j| (0..2).map(|k| abar[j] * yinv[(j, k)] * a[k]).sum::<Complex64>()).sum();
        let pref = (-PI * quad / (2.0 * u2)).exp() / (2.0 * u2);
        let r = [0, 1].map(|k| (0..2).map(|j| abar[j] * yinv[(j, k)]).sum::<Complex64>());
        let weight = pref.norm() * (1.0 + r[0].norm() + r[1].norm()).powi(max_h as i32);
        if weight < 1e-4 * eps / count {
            continue;
        }
        let mut p = MatrixPolynomial::zero(comps.rows(), 2, 0);
        for (&(h1, h2), part) in &comps.parts {
            let coeff = r[0].powu(h1 as u32) * r[1].powu(h2 as u32) / (-2.0 * i).powu((h1 + h2) as u32);
            p = p.add(&part.scale(&coeff));
        }
        if p.is_zero() {
            continue;
        }
        let alpha = [mu.iter().map(|m| m * d[0]).collect(), mu.iter().map(|m| m * d[1]).collect()];
        let beta = [mu.iter().map(|m| -m * c[0]).collect(), mu.iter().map(|m| -m * c[1]).collect()];
        let theta = theta_genus2(&space, tau, &alpha, &beta, &p, (eps / (count * pref.norm())).max(1e-15))?;
        for (s, z) in acc.iter_mut().zip(&theta.value) {
            s.add(pref * z);
        }
        terms += theta.terms_used;
        tail += pref.norm() * theta.tail_estimate;
        radius = radius.max(theta.radius);
    }
    let mut value = vec![Complex64::new(0.0, 0.0); nl * nl];
    for s1 in 0..nl {
        for s2 in 0..nl {
            value[s1 * nl + s2] = acc[proj[s1] * nk + proj[s2]].value();
        }
    }
    Ok(TruncatedThetaValue { value, radius, terms_used: terms, tail_estimate: tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GrassmannianFrame, HyperbolicSplit};
    use crate::numeric::max_dev;
    use crate::polyengine::{build_p_alpha, IndexTuple};
    use crate::theta::zero_pair;
    use rand::SeedableRng;

    #[test]
    fn projection_is_a_bijection() {
        let l = EvenLattice::from_name("U+U+A1").unwrap();
        let split = HyperbolicSplit::find(&l, 2).unwrap();
        let f = GrassmannianFrame::random_near_base(&l, &mut rand_chacha::ChaCha8Rng::seed_from_u64(2), 0.3).unwrap();
        let geo = SplitGeometry::new(&f, &split).unwrap();
        let p = disc_projection(&l, &geo).unwrap();
        let mut sorted = p.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1]);
        assert_eq!(p[0], 0);
    }

    #[test]
    fn splitting_converges_on_u_u_a1() {
        let l = EvenLattice::from_name("U+U+A1").unwrap();
        let split = HyperbolicSplit::find(&l, 2).unwrap();
        let f = GrassmannianFrame::random_near_base(&l, &mut rand_chacha::ChaCha8Rng::seed_from_u64(4), 0.3).unwrap();
        let geo = SplitGeometry::new(&f, &split).unwrap();
        let tau =
            SiegelPoint::from_entries(Complex64::new(0.1, 1.0), Complex64::new(0.03, 0.0), Complex64::new(-0.05, 1.0)).unwrap();
        let poly: MatrixPolynomial<Complex64> = build_p_alpha(IndexTuple::new(1, 2, 2, 3), 3, 2).unwrap();
        let space = ThetaSpace::for_lattice(&l, &f).unwrap();
        let lhs = theta_genus2(&space, &tau, &zero_pair(5), &zero_pair(5), &poly, 1e-10).unwrap();
        let mut devs = Vec::new();
        for bound in [0, 1, 2] {
            let rhs = splitting_rhs(&l, &geo, &tau, &poly, bound, 1e-10).unwrap();
            devs.push(max_dev(&lhs.value, &rhs.value));
        }
        assert!(crate::numeric::max_abs(&lhs.value) > 1e-4);
        assert!(devs[1] <= devs[0] && devs[2] <= devs[1] && devs[2] < 5e-8, "{devs:?}");
    }
}
