use nalgebra::DVector;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::jacobi::{theta_jacobi, JacobiPoint};
use super::space::{ThetaSpace, TruncatedThetaValue};
use crate::error::{Error, Result};
use crate::exactalg::Rat;
use crate::lattice::{EvenLattice, SplitGeometry};
use crate::numeric::{e, e_c, NeumaierSum};
use crate::polyengine::{decompose_one_column, MatrixPolynomial};
use crate::weilrep::{Mp2Word, WeilRep1};

/// Truncation of the Poincaré series: coprime `(c, d)` with `|c|, |d| ≤ coset_bound`
/// and `1 ≤ n ≤ n_bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoincareBounds {
    pub coset_bound: i64,
    pub n_bound: i64,
}

impl Default for PoincareBounds {
    fn default() -> Self {
        PoincareBounds { coset_bound: 5, n_bound: 4 }
    }
}

/// `a, b` with `ad − bc = 1` for coprime `(c, d)`.
fn complete_row(c: i64, d: i64) -> [[i64; 2]; 2] {
    let g = c.extended_gcd(&d);
    // g.x·c + g.y·d = ±1; take a = y, b = −x (scaled to make the determinant 1).
    let s = g.gcd.signum();
    [[g.y * s, -g.x * s], [c, d]]
}

/// Right-hand side of the rewriting of `θ_{L,η}(τ₁, τ₂, g, P)` (with `(η, u) = 0`) as a
/// Poincaré series over `Γ_∞\SL₂(Z)` in theta functions of `K` embedded by `borw`.
///
/// `eta_k` is given in `K` coordinates; `poly` is a one-column polynomial on the ambient
/// grid of `L`.  The result is indexed by `D_L`.
pub fn jacobi_poincare_rhs(
    lattice: &EvenLattice,
    geometry: &SplitGeometry,
    eta_k: &[f64],
    point: &JacobiPoint,
    poly: &MatrixPolynomial<Complex64>,
    bounds: PoincareBounds,
    eps: f64,
) -> Result<TruncatedThetaValue> {
    let split = &geometry.split;
    let level = split.level as i64;
    if level == 0 {
        return Err(Error::Precondition("split level must be positive".into()));
    }
    let degree = poly.degree().unwrap_or(0);
    if !poly.is_homogeneous_of_degree(degree) && !poly.is_zero() {
        return Err(Error::Precondition("P must be homogeneous".into()));
    }
    let space_k = ThetaSpace::for_sublattice(lattice, geometry)?;
    if eta_k.len() != space_k.rank() {
        return Err(Error::DimensionMismatch("η must be given in K coordinates".into()));
    }
    let dl = lattice.discriminant_group();
    let dk = space_k.disc();
    let bplus = lattice.bplus();
    let n_vec: Vec<Complex64> = geometry
        .u_zperp_ambient()
        .iter()
        .enumerate()
        .map(|(i, &x)| Complex64::new(if i < bplus { x } else { 0.0 }, 0.0))
        .collect();
    let parts = decompose_one_column(poly, &n_vec);
    let u2 = geometry.uzperp2;
    let eta_l = split.k_to_l(eta_k);
    let eta_u = geometry.frame.bilinear(&eta_l, &geometry.u_zperp);
    let q_eta = 0.5 * space_k.gram_times(eta_k).iter().zip(eta_k).map(|(a, b)| a * b).sum::<f64>();
    let mu = geometry.project_to_k(&geometry.mu());
    let zero = vec![0.0; space_k.rank()];
    let norm = 1.0 / (2.0 * u2).sqrt();
    let rho = WeilRep1::new(lattice);
    let sig_exp = lattice.bminus() as i32 - lattice.bplus() as i32 - 2 * degree as i32;

    let u_over_n: Vec<Rat> = split.u.iter().map(|&x| Rat::new(x.into(), level.into())).collect();
    let u_class = dl.index_of(&u_over_n)?;
    let k_in_l: Vec<usize> = (0..dk.order()).map(|s| dl.index_of(&split.k_to_l_rat(dk.lift(s)))).collect::<Result<_>>()?;
    let lift_to_l = |theta_k: &[Complex64], n: i64| -> DVector<Complex64> {
        let mut v = DVector::from_element(dl.order(), Complex64::new(0.0, 0.0));
        for (s, z) in theta_k.iter().enumerate() {
            for m in 0..level {
                v[dl.add(k_in_l[s], dl.scale(m, u_class))] += z * e(-((m * n) as f64) / level as f64);
            }
        }
        v
    };

    let mut acc = vec![NeumaierSum::new(); dl.order()];
    let (mut terms, mut tail, mut radius) = (0usize, 0.0f64, 0.0f64);

    // Main term.
    if let Some(p0) = parts.get(&0) {
        let th = theta_jacobi(&space_k, eta_k, point, &zero, &zero, p0, eps / 4.0 / norm)?;
        for (a, z) in acc.iter_mut().zip(lift_to_l(&th.value, 0).iter()) {
            a.add(z * norm);
        }
        terms += th.terms_used;
        tail += norm * th.tail_estimate;
        radius = radius.max(th.radius);
    }

    let cb = bounds.coset_bound;
    let mut cosets = Vec::new();
    for c in -cb..=cb {
        for d in -cb..=cb {
            if c.gcd(&d) == 1 {
                cosets.push((c, d));
            }
        }
    }
    let count = (cosets.len() as i64 * bounds.n_bound.max(1)) as f64;
    let max_h = parts.keys().copied().max().unwrap_or(0) as i32;
    for (c, d) in cosets {
        let gamma = complete_row(c, d);
        let word = Mp2Word::standard_preimage(&gamma)?;
        let j = point.tau1 * c as f64 + d as f64;
        let moved = point.act(&word);
        let im1 = moved.tau1.im;
        let im2 = moved.tau2.im;
        let phi = word.phi(point.tau1);
        let base = e_c(-(point.tau2 * point.tau2) * q_eta * c as f64 / j) * phi.powi(sig_exp);
        let rho_inv = rho.matrix(&word).adjoint();
        // Size of the K theta prefactor at the moved point.
        let k_scale = im1.powf(space_k.bminus() as f64 / 2.0) * (2.0 * PI * q_eta * im2 * im2 / im1).exp();
        for n in 1..=bounds.n_bound {
            let nf = n as f64;
            let gauss = e_c(
                -(Complex64::new(nf * nf, 0.0) + Complex64::i() * 4.0 * nf * im2 * eta_u) / (Complex64::i() * 4.0 * im1 * u2)
            );
            let scalar = base * gauss * norm;
            let weight = scalar.norm() * k_scale * (1.0 + nf / (2.0 * im1)).powi(max_h);
            if weight < 1e-4 * eps / count {
                continue;
            }
            let mut p = MatrixPolynomial::zero(space_k.rows(), 1, 0);
            for (&h, part) in &parts {
                let coeff = Complex64::new(nf.powi(h as i32), 0.0) / (Complex64::new(0.0, -2.0 * im1)).powi(h as i32);
                p = p.add(&part.scale(&coeff));
            }
            let alpha: Vec<f64> = mu.iter().map(|m| m * nf).collect();
            let th = theta_jacobi(&space_k, eta_k, &moved, &alpha, &zero, &p, (eps / (4.0 * count * scalar.norm())).max(1e-15))?;
            let v = &rho_inv * lift_to_l(&th.value, n);
            for (a, z) in acc.iter_mut().zip(v.iter()) {
                a.add(z * scalar);
            }
            terms += th.terms_used;
            tail += scalar.norm() * th.tail_estimate;
            radius = radius.max(th.radius);
        }
    }
    Ok(TruncatedThetaValue {
        value: acc.iter().map(NeumaierSum::value).collect(),
        radius,
        terms_used: terms,
        tail_estimate: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use crate::lattice::{GrassmannianFrame, HyperbolicSplit};
    use crate::numeric::max_dev;
    use rand::SeedableRng;

    #[test]
    fn completes_rows() {
        for (c, d) in [(0, 1), (0, -1), (1, 0), (-1, 0), (3, 5), (-4, 3), (5, -2)] {
            let m = complete_row(c, d);
            assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1, "{c} {d}");
        }
    }

    fn check(name: &str, split: HyperbolicSplit, eta_k: &[f64]) -> f64 {
        let l = EvenLattice::from_name(name).unwrap();
        let f = GrassmannianFrame::random_near_base(&l, &mut rand_chacha::ChaCha8Rng::seed_from_u64(6), 0.2).unwrap();
        let geo = SplitGeometry::new(&f, &split).unwrap();
        let x = |i| MatrixPolynomial::<Complex64>::var(3, 1, 0, i, 0);
        let poly = x(0).mul(&x(0)).add(&x(0).mul(&x(1)).scale(&Complex64::new(3.0, 0.0)));
        let point = JacobiPoint::new(Complex64::new(0.0, 1.0), Complex64::new(0.1, 0.2)).unwrap();
        let space = ThetaSpace::for_lattice(&l, &f).unwrap();
        let eta_l = split.k_to_l(eta_k);
        let lhs = theta_jacobi(&space, &eta_l, &point, &[0.0; 3], &[0.0; 3], &poly, 1e-10).unwrap();
        let rhs = jacobi_poincare_rhs(&l, &geo, eta_k, &point, &poly, PoincareBounds::default(), 1e-10).unwrap();
        assert!(crate::numeric::max_abs(&lhs.value) > 1e-3);
        let dev = max_dev(&lhs.value, &rhs.value);
        dev
    }

    #[test]
    fn level_one_split() {
        let l = EvenLattice::from_name("U+A1").unwrap();
        let split = HyperbolicSplit::find(&l, 2).unwrap();
        assert_eq!(split.level, 1);
        assert!(check("U+A1", split, &[0.5]) < 5e-8);
    }

    #[test]
    fn level_two_split() {
        let l = EvenLattice::from_name("U(2)+A1").unwrap();
        let split = HyperbolicSplit::from_vectors(&l, vec![1, 0, 0], vec![rat(0, 1), rat(1, 2), rat(0, 1)]).unwrap();
        assert!(check("U(2)+A1", split, &[0.5]) < 5e-8);
    }
}
