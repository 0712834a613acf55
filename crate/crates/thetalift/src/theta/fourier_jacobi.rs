use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::enumerate::enumerate_ellipsoid;
use super::jacobi::{theta_jacobi, JacobiPoint};
use super::siegel::{theta_genus2_shifted, SiegelPoint};
use super::space::{sqrt_det_pd, SumShape, ThetaSpace, TruncatedThetaValue};
use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, GrassmannianFrame};
use crate::numeric::{e, e_c, max_dev, NeumaierSum};
use crate::polyengine::MatrixPolynomial;

/// Terms of the outer `η` sum whose Gaussian weight is below this fraction of the
/// tolerance are dropped.
const OUTER_SAFETY: f64 = 1e-2;

fn fj_sum(
    lattice: &EvenLattice,
    frame: &GrassmannianFrame,
    tau: &SiegelPoint,
    alpha: &[Vec<f64>; 2],
    poly: &MatrixPolynomial<Complex64>,
    eps: f64,
    only_sigma2: Option<usize>,
    keep: impl Fn(f64) -> bool,
) -> Result<TruncatedThetaValue> {
    let space = ThetaSpace::for_lattice(lattice, frame)?;
    let n = space.rank();
    let rows = space.rows();
    if poly.rows() != rows || poly.cols() != 2 || poly.extra() != 0 {
        return Err(Error::DimensionMismatch(format!("polynomial must live on a {rows}x2 grid")));
    }
    if alpha.iter().any(|a| a.len() != n) {
        return Err(Error::DimensionMismatch(format!("α must have {n} coordinates")));
    }
    let t = tau.tau();
    let y = tau.y();
    let (y1, det_y) = (y[(0, 0)], tau.det_y());
    let w = det_y / y1;
    let jp = JacobiPoint::new(t[(0, 0)], t[(0, 1)])?;
    let partial = vec![vec![Complex64::new(0.0, 0.0); 2], vec![Complex64::new(0.0, 0.0), Complex64::new(y1 / det_y, 0.0)]];
    let p_outer = poly.exp_operator(&partial);
    let compiled = p_outer.compile();
    let m = space.majorant();
    let g: DMatrix<f64> = &m * w;
    let shape = SumShape {
        dim: n,
        sqrt_det: sqrt_det_pd(&g)?,
        mass: 10.0 * compiled.coefficient_mass().max(1.0) * w,
        degree: compiled.degree(),
        c: w,
    };
    let budget = shape.budget(OUTER_SAFETY * eps)?;
    let p = space.positive_rows();
    let d = space.disc();
    let nd = d.order();
    let zero = vec![0.0; n];
    let s_alpha2 = space.gram_times(&alpha[1]);
    let mut acc = vec![NeumaierSum::new(); nd * nd];
    let (mut terms, mut tail) = (0usize, budget.heuristic);
    for s2 in 0..nd {
        if only_sigma2.is_some_and(|s| s != s2) {
            continue;
        }
        let lift = d.lift_f64(s2);
        let center: Vec<f64> = lift.iter().map(|v| -v).collect();
        let mut etas = Vec::new();
        enumerate_ellipsoid(&g, &center, budget.r2, |l, _| {
            etas.push((0..n).map(|a| lift[a] + l[a] as f64).collect::<Vec<f64>>());
        })?;
        let count = etas.len().max(1) as f64;
        for eta in etas {
            let q_eta = 0.5 * space.gram_times(&eta).iter().zip(&eta).map(|(a, b)| a * b).sum::<f64>();
            if !keep(q_eta) {
                continue;
            }
            let ge = space.embed(&eta);
            let neg2: f64 = ge[p..].iter().map(|x| x * x).sum();
            // 4π q(η_z) det y/y₁ with q(η_z) = −½|(gη)⁻|².
            let outer = Complex64::new(w * (-2.0 * PI * neg2 * w).exp(), 0.0)
                * e_c(t[(1, 1)] * q_eta)
                * e(-eta.iter().zip(&s_alpha2).map(|(a, b)| a * b).sum::<f64>());
            if outer.norm() == 0.0 {
                continue;
            }
            let mut values = vec![Complex64::new(0.0, 0.0); rows * 2];
            for i in 0..rows {
                values[2 * i + 1] = Complex64::new(ge[i], 0.0);
            }
            let r_eta = p_outer.restrict_to_column(0, &values);
            let jeps = (eps / (4.0 * count * outer.norm())).max(1e-15);
            let th = theta_jacobi(&space, &eta, &jp, &alpha[0], &zero, &r_eta, jeps)?;
            for s1 in 0..nd {
                acc[s1 * nd + s2].add(outer * th.value[s1]);
            }
            terms += th.terms_used;
            tail += outer.norm() * th.tail_estimate;
        }
    }
    Ok(TruncatedThetaValue {
        value: acc.iter().map(NeumaierSum::value).collect(),
        radius: budget.r2.sqrt(),
        terms_used: terms,
        tail_estimate: tail,
    })
}

/// Fourier–Jacobi expansion of `Θ_{L,2}(τ, α, 0, g, P)`:
///
/// `Θ^{(σ₁,σ₂)} = (det y/y₁) Σ_{η ∈ σ₂+L} θ^{σ₁}_{L,η}(τ₁, τ₂, α₁, 0, g, R_η)
///   · exp(4π q(η_z) det y/y₁) · e(q(η)τ₃ − (η, α₂))`,
///
/// where `R_η` is `exp(−(y₁/det y)Δ₂/8π)P` with its second column set to `gη`.
pub fn fourier_jacobi_rhs(
    lattice: &EvenLattice,
    frame: &GrassmannianFrame,
    tau: &SiegelPoint,
    alpha: &[Vec<f64>; 2],
    poly: &MatrixPolynomial<Complex64>,
    eps: f64,
) -> Result<TruncatedThetaValue> {
    fj_sum(lattice, frame, tau, alpha, poly, eps, None, |_| true)
}

/// Comparison of the lowest Fourier–Jacobi layer with a quadrature in `Re τ₃`.
#[derive(Clone, Debug, Serialize)]
pub struct FjQuadrature {
    pub nodes: usize,
    #[serde(skip)]
    pub quadrature: Vec<Complex64>,
    #[serde(skip)]
    pub layer: Vec<Complex64>,
    pub max_deviation: f64,
}

/// `(1/N) Σ_k Θ^{(σ₁,0)}(τ₁, τ₂, k/N + i y₃)` against the `q(η) = 0` terms of the
/// expansion, for every `σ₁`.
pub fn fj_quadrature_check(
    lattice: &EvenLattice,
    frame: &GrassmannianFrame,
    tau: &SiegelPoint,
    alpha: &[Vec<f64>; 2],
    poly: &MatrixPolynomial<Complex64>,
    nodes: usize,
    eps: f64,
) -> Result<FjQuadrature> {
    if nodes == 0 {
        return Err(Error::InvalidInput("quadrature needs at least one node".into()));
    }
    let space = ThetaSpace::for_lattice(lattice, frame)?;
    let nd = space.disc().order();
    let t = tau.tau();
    let zero = [vec![0.0; space.rank()], vec![0.0; space.rank()]];
    // Nodes x₃ = k/N on the line Re τ₃ = 0, evaluated in one pass.
    let point = SiegelPoint::from_entries(t[(0, 0)], t[(0, 1)], Complex64::new(0.0, t[(1, 1)].im))?;
    let shifts: Vec<f64> = (0..nodes).map(|k| k as f64 / nodes as f64).collect();
    let mut quad = vec![NeumaierSum::new(); nd];
    for th in theta_genus2_shifted(&space, &point, alpha, &zero, poly, &shifts, eps)? {
        for s1 in 0..nd {
            quad[s1].add(th.value[s1 * nd] / nodes as f64);
        }
    }
    let layer_full = fj_sum(lattice, frame, tau, alpha, poly, eps, Some(0), |q| q.abs() < 0.5)?;
    let layer: Vec<Complex64> = (0..nd).map(|s1| layer_full.value[s1 * nd]).collect();
    let quadrature: Vec<Complex64> = quad.iter().map(NeumaierSum::value).collect();
    let max_deviation = max_dev(&quadrature, &layer);
    Ok(FjQuadrature { nodes, quadrature, layer, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyengine::{build_p_alpha, IndexTuple};
    use crate::theta::theta_genus2;
    use rand::SeedableRng;

    fn setup() -> (EvenLattice, GrassmannianFrame, SiegelPoint, MatrixPolynomial<Complex64>) {
        let l = EvenLattice::from_name("U+U").unwrap();
        let f = GrassmannianFrame::random_near_base(&l, &mut rand_chacha::ChaCha8Rng::seed_from_u64(8), 0.25).unwrap();
        let tau =
            SiegelPoint::from_entries(Complex64::new(0.1, 1.1), Complex64::new(0.2, 0.15), Complex64::new(-0.1, 0.9)).unwrap();
        let poly = build_p_alpha(IndexTuple::new(1, 1, 2, 2), 2, 2).unwrap();
        (l, f, tau, poly)
    }

    #[test]
    fn expansion_matches_theta() {
        let (l, f, tau, poly) = setup();
        let alpha = [vec![0.1, 0.0, -0.2, 0.05], vec![0.0, 0.3, 0.1, -0.1]];
        let space = ThetaSpace::for_lattice(&l, &f).unwrap();
        let lhs = theta_genus2(&space, &tau, &alpha, &super::super::zero_pair(4), &poly, 1e-10).unwrap();
        let rhs = fourier_jacobi_rhs(&l, &f, &tau, &alpha, &poly, 1e-10).unwrap();
        let dev = max_dev(&lhs.value, &rhs.value);
        assert!(crate::numeric::max_abs(&lhs.value) > 1e-4);
        assert!(dev < 5e-8, "{dev} {:?} {:?}", lhs.value, rhs.value);
    }

    #[test]
    fn lowest_layer_by_quadrature() {
        let (l, f, tau, poly) = setup();
        let r = fj_quadrature_check(&l, &f, &tau, &super::super::zero_pair(4), &poly, 32, 1e-10).unwrap();
        assert!(r.max_deviation < 1e-6, "{r:?}");
    }
}
