use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::space::{assemble, gaussian_sum, sqrt_det_pd, ShellSum, SumShape, ThetaSpace, TruncatedThetaValue};
use crate::error::{Error, Result};
use crate::numeric::e;
use crate::polyengine::MatrixPolynomial;
use crate::weilrep::{mobius, Mp2Word};

/// A point `(τ₁, τ₂) ∈ H × C` of the Jacobi half space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiPoint {
    pub tau1: Complex64,
    pub tau2: Complex64,
}

impl JacobiPoint {
    pub fn new(tau1: Complex64, tau2: Complex64) -> Result<Self> {
        if !(tau1.im > 0.0) || !tau1.re.is_finite() || !tau2.re.is_finite() || !tau2.im.is_finite() {
            return Err(Error::InvalidInput(format!("({tau1}, {tau2}) is not in H × C")));
        }
        Ok(JacobiPoint { tau1, tau2 })
    }

    /// `(γτ₁, τ₂/(cτ₁ + d))`.
    pub fn act(&self, word: &Mp2Word) -> JacobiPoint {
        let m = word.matrix();
        let j = self.tau1 * m[1][0] as f64 + m[1][1] as f64;
        JacobiPoint { tau1: mobius(&m, self.tau1), tau2: self.tau2 / j }
    }

    /// `(τ₁, τ₂ + λ + μτ₁)`.
    pub fn translate(&self, lambda: i64, mu: i64) -> JacobiPoint {
        JacobiPoint { tau1: self.tau1, tau2: self.tau2 + lambda as f64 + self.tau1 * mu as f64 }
    }
}

/// Jacobi theta function `θ^{σ}_{L,η}(τ₁, τ₂, α, β, E, P)`, one component per `σ ∈ D`.
///
/// With `v = λ + β`, `X = Ev`, `Y = Eη` and `t = y₂/y₁`, each term is
/// `exp(−Δ/8πy₁)P(E(v + tη))·e(½|X⁺|²τ₁ − ½|X⁻|²τ̄₁ + τ₂X⁺·Y⁺ − τ̄₂X⁻·Y⁻ − (λ + β/2, α))`,
/// and the sum carries the prefactor `y₁^{b⁻/2}·exp(4π q(η_z) y₂²/y₁)`.
pub fn theta_jacobi(
    space: &ThetaSpace,
    eta: &[f64],
    point: &JacobiPoint,
    alpha: &[f64],
    beta: &[f64],
    poly: &MatrixPolynomial<Complex64>,
    eps: f64,
) -> Result<TruncatedThetaValue> {
    let n = space.rank();
    let rows = space.rows();
    if poly.rows() != rows || poly.cols() != 1 || poly.extra() != 0 {
        return Err(Error::DimensionMismatch(format!("polynomial must live on a {rows}x1 grid")));
    }
    if eta.len() != n || alpha.len() != n || beta.len() != n {
        return Err(Error::DimensionMismatch(format!("η, α, β must have {n} coordinates")));
    }
    let (x1, y1) = (point.tau1.re, point.tau1.im);
    let (x2, y2) = (point.tau2.re, point.tau2.im);
    let t = y2 / y1;
    let yinv = vec![vec![Complex64::new(1.0 / y1, 0.0)]];
    let p_eff = poly.exp_operator(&yinv).compile();
    let m = space.majorant();
    let g: DMatrix<f64> = &m * y1;
    let q_eta = 0.5 * space.gram_times(eta).iter().zip(eta).map(|(a, b)| a * b).sum::<f64>();
    // y₁^{b⁻/2}·exp(4π q(η_z)y₂²/y₁) times the factor exp(π y₂²|Y|²/y₁) released by
    // completing the square in the Gaussian.
    let scale = y1.powf(space.bminus() as f64 / 2.0) * (2.0 * PI * q_eta * y2 * y2 / y1).exp();
    let shape =
        SumShape { dim: n, sqrt_det: sqrt_det_pd(&g)?, mass: p_eff.coefficient_mass() * scale, degree: p_eff.degree(), c: y1 };
    let budget = shape.budget(eps / 4.0)?;
    let s_alpha = space.gram_times(alpha);
    let p = space.positive_rows();
    let emb = space.embedding();
    let ye = space.embed(eta);
    let d = space.disc();
    let sums: Result<Vec<ShellSum>> = (0..d.order())
        .into_par_iter()
        .map(|sigma| {
            let lift = d.lift_f64(sigma);
            let base: Vec<f64> = (0..n).map(|a| lift[a] + beta[a]).collect();
            let center: Vec<f64> = (0..n).map(|a| -(base[a] + t * eta[a])).collect();
            let mut v = vec![0.0; n];
            let mut xs = vec![0.0; rows];
            let mut shifted = vec![0.0; rows];
            gaussian_sum(&g, &center, budget.r2, |l, q| {
                for a in 0..n {
                    v[a] = base[a] + l[a] as f64;
                }
                for i in 0..rows {
                    xs[i] = (0..n).map(|a| emb[(i, a)] * v[a]).sum();
                    shifted[i] = xs[i] + t * ye[i];
                }
                let pv = p_eff.eval(&shifted);
                if pv == Complex64::new(0.0, 0.0) {
                    return pv;
                }
                let (mut xx, mut xy) = (0.0, 0.0);
                for i in 0..rows {
                    let sign = if i < p { 1.0 } else { -1.0 };
                    xx += sign * xs[i] * xs[i];
                    xy += sign * xs[i] * ye[i];
                }
                let pairing: f64 = (0..n).map(|a| (v[a] - 0.5 * beta[a]) * s_alpha[a]).sum();
                pv * (-PI * q).exp() * e(0.5 * x1 * xx + x2 * xy - pairing)
            })
        })
        .collect();
    Ok(assemble(sums?, Complex64::new(scale, 0.0), budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use crate::lattice::{EvenLattice, GrassmannianFrame};
    use crate::numeric::{e_c, max_dev};
    use crate::weilrep::{heisenberg_matrix, WeilRep1};
    use rand::SeedableRng;

    fn setup() -> (EvenLattice, ThetaSpace, MatrixPolynomial<Complex64>) {
        let l = EvenLattice::from_name("U+A1").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = GrassmannianFrame::random_near_base(&l, &mut rng, 0.2).unwrap();
        let s = ThetaSpace::for_lattice(&l, &f).unwrap();
        let x = |i| MatrixPolynomial::<Complex64>::var(3, 1, 0, i, 0);
        let poly = x(0).mul(&x(0)).add(&x(0).mul(&x(1)).scale(&Complex64::new(3.0, 0.0)));
        (l, s, poly)
    }

    #[test]
    fn modular_transformation() {
        let (l, s, poly) = setup();
        let rho = WeilRep1::new(&l);
        let eta = [1.0, -1.0, 0.5];
        let q_eta = 0.5 * s.gram_times(&eta).iter().zip(&eta).map(|(a, b)| a * b).sum::<f64>();
        let pt = JacobiPoint::new(Complex64::new(0.1, 1.05), Complex64::new(0.2, 0.15)).unwrap();
        let (alpha, beta) = ([0.1, 0.2, -0.3], [0.05, -0.1, 0.2]);
        let base = theta_jacobi(&s, &eta, &pt, &alpha, &beta, &poly, 1e-10).unwrap();
        let weight = (l.bplus() + 4) as i32 - l.bminus() as i32;
        for w in ["S", "T", "T,S", "S,T^2"] {
            let word = Mp2Word::parse(w).unwrap();
            let [[a, b], [c, dd]] = word.matrix();
            let moved = pt.act(&word);
            let a2: Vec<f64> = (0..3).map(|i| a as f64 * alpha[i] + b as f64 * beta[i]).collect();
            let b2: Vec<f64> = (0..3).map(|i| c as f64 * alpha[i] + dd as f64 * beta[i]).collect();
            let lhs = theta_jacobi(&s, &eta, &moved, &a2, &b2, &poly, 1e-10).unwrap();
            let j = pt.tau1 * c as f64 + dd as f64;
            let factor = word.phi(pt.tau1).powi(weight) * e_c(pt.tau2 * pt.tau2 * q_eta * c as f64 / j);
            let rhs: Vec<Complex64> =
                (rho.matrix(&word) * nalgebra::DVector::from_vec(base.value.clone())).iter().map(|z| z * factor).collect();
            let dev = max_dev(&lhs.value, &rhs);
            assert!(dev < 5e-8, "{w}: {dev}");
        }
    }

    #[test]
    fn heisenberg_law() {
        let (l, s, poly) = setup();
        let d = l.discriminant_group();
        let eta = [1.0, -1.0, 0.5];
        let sigma2 = d.index_of(&[rat(0, 1), rat(0, 1), rat(1, 2)]).unwrap();
        let q_eta = 0.5 * s.gram_times(&eta).iter().zip(&eta).map(|(a, b)| a * b).sum::<f64>();
        let pt = JacobiPoint::new(Complex64::new(-0.2, 0.95), Complex64::new(0.3, -0.1)).unwrap();
        let (alpha, beta) = ([0.1, 0.2, -0.3], [0.05, -0.1, 0.2]);
        let base = theta_jacobi(&s, &eta, &pt, &alpha, &beta, &poly, 1e-10).unwrap();
        let pair = |x: &[f64], y: &[f64]| s.gram_times(x).iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        for (lam, mu) in [(1, 0), (0, 1), (1, 1), (-2, 1)] {
            let lhs = theta_jacobi(&s, &eta, &pt.translate(lam, mu), &alpha, &beta, &poly, 1e-10).unwrap();
            let (lf, mf) = (lam as f64, mu as f64);
            let factor = e(lf * pair(&beta, &eta) + mf * pair(&eta, &alpha) - lf * mf * q_eta)
                * e_c(-(pt.tau1 * mf * mf * q_eta) - pt.tau2 * 2.0 * mf * q_eta);
            let h = heisenberg_matrix(&d, sigma2, lam, mu, 0);
            let rhs: Vec<Complex64> = (h * nalgebra::DVector::from_vec(base.value.clone())).iter().map(|z| z * factor).collect();
            let dev = max_dev(&lhs.value, &rhs);
            assert!(dev < 5e-8, "({lam},{mu}): {dev}");
        }
    }
}
