use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::space::{assemble, gaussian_sum_batch, sqrt_det_pd, ShellSum, SumShape, ThetaSpace, TruncatedThetaValue};
use crate::error::{Error, Result};
use crate::numeric::e;
use crate::polyengine::MatrixPolynomial;
use crate::weilrep::{Siegel, Sp4};

/// A point of the Siegel upper half space of degree 2 with cached real data.
#[derive(Clone, Debug)]
pub struct SiegelPoint {
    tau: Siegel,
    x: Matrix2<f64>,
    y: Matrix2<f64>,
    y_inv: Matrix2<f64>,
}

impl SiegelPoint {
    /// Validate symmetry and `Im τ > 0`.
    pub fn new(tau: Siegel) -> Result<Self> {
        if tau.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("τ has non-finite entries".into()));
        }
        let scale = 1.0 + tau.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (tau[(0, 1)] - tau[(1, 0)]).norm() > 1e-12 * scale {
            return Err(Error::InvalidInput("τ must be symmetric".into()));
        }
        let off = (tau[(0, 1)] + tau[(1, 0)]) * 0.5;
        let tau = Siegel::new(tau[(0, 0)], off, off, tau[(1, 1)]);
        let y = tau.map(|z| z.im);
        let tol = 1e-12 * scale * scale;
        if !(y[(0, 0)] > tol && y.determinant() > tol) {
            return Err(Error::InvalidInput("Im τ must be positive definite".into()));
        }
        let y_inv = y.try_inverse().ok_or(Error::Singular)?;
        Ok(SiegelPoint { x: tau.map(|z| z.re), tau, y, y_inv })
    }

    /// `[[τ₁, τ₂], [τ₂, τ₃]]`.
    pub fn from_entries(t1: Complex64, t2: Complex64, t3: Complex64) -> Result<Self> {
        SiegelPoint::new(Siegel::new(t1, t2, t2, t3))
    }

    pub fn tau(&self) -> &Siegel {
        &self.tau
    }

    pub fn x(&self) -> &Matrix2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Matrix2<f64> {
        &self.y
    }

    pub fn y_inv(&self) -> &Matrix2<f64> {
        &self.y_inv
    }

    pub fn det_y(&self) -> f64 {
        self.y.determinant()
    }

    /// Smallest eigenvalue of `Im τ`.
    pub fn lambda_min(&self) -> f64 {
        let (a, b, c) = (self.y[(0, 0)], self.y[(0, 1)], self.y[(1, 1)]);
        0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt()
    }

    /// The symmetric positive square root of `Im τ`.
    pub fn sqrt_y(&self) -> Matrix2<f64> {
        let s = self.det_y().sqrt();
        let t = (self.y.trace() + 2.0 * s).sqrt();
        (self.y + Matrix2::identity() * s) / t
    }
}

pub(crate) fn complex_rows(m: &Matrix2<f64>) -> Vec<Vec<Complex64>> {
    (0..2).map(|i| (0..2).map(|j| Complex64::new(m[(i, j)], 0.0)).collect()).collect()
}

/// Genus-2 theta function `Θ_{L,2}(τ, α, β, g, P)`, one component per
/// `(σ₁, σ₂) ∈ D²` at index `σ₁·|D| + σ₂`.
///
/// Each term is `exp(−tr(Δy⁻¹)/8π)P(X)·e(tr(½X⁺ᵗX⁺τ) − tr(½X⁻ᵗX⁻τ̄) − Σ_j(λ_j + β_j/2, α_j))`
/// with `X = (E(λ₁+β₁), E(λ₂+β₂))`, and the sum carries the prefactor `det(y)^{b⁻/2}`.
/// Terms are summed until the estimated tail falls below `eps/4` per component.
pub fn theta_genus2(
    space: &ThetaSpace,
    tau: &SiegelPoint,
    alpha: &[Vec<f64>; 2],
    beta: &[Vec<f64>; 2],
    poly: &MatrixPolynomial<Complex64>,
    eps: f64,
) -> Result<TruncatedThetaValue> {
    Ok(theta_genus2_shifted(space, tau, alpha, beta, poly, &[0.0], eps)?.remove(0))
}

/// `theta_genus2` at the points `τ + diag(0, s)` for every `s` in `shifts`, sharing one
/// lattice enumeration (the shifts only change the phase of each term).
pub fn theta_genus2_shifted(
    space: &ThetaSpace,
    tau: &SiegelPoint,
    alpha: &[Vec<f64>; 2],
    beta: &[Vec<f64>; 2],
    poly: &MatrixPolynomial<Complex64>,
    shifts: &[f64],
    eps: f64,
) -> Result<Vec<TruncatedThetaValue>> {
    let n = space.rank();
    let rows = space.rows();
    if poly.rows() != rows || poly.cols() != 2 || poly.extra() != 0 {
        return Err(Error::DimensionMismatch(format!("polynomial must live on a {rows}x2 grid")));
    }
    if alpha.iter().chain(beta).any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("characteristics must have {n} coordinates")));
    }
    let p_eff = poly.exp_operator(&complex_rows(tau.y_inv())).compile();
    let m = space.majorant();
    let y = tau.y();
    let g = DMatrix::from_fn(2 * n, 2 * n, |a, b| y[(a / n, b / n)] * m[(a % n, b % n)]);
    let prefactor = tau.det_y().powf(space.bminus() as f64 / 2.0);
    let shape = SumShape {
        dim: 2 * n,
        sqrt_det: sqrt_det_pd(&g)?,
        mass: p_eff.coefficient_mass() * prefactor,
        degree: p_eff.degree(),
        c: tau.lambda_min(),
    };
    let budget = shape.budget(eps / 4.0)?;
    let s_alpha = [space.gram_times(&alpha[0]), space.gram_times(&alpha[1])];
    let x = tau.x();
    let p = space.positive_rows();
    let emb = space.embedding();
    let d = space.disc();
    let nd = d.order();
    let sums: Result<Vec<Vec<ShellSum>>> = (0..nd * nd)
        .into_par_iter()
        .map(|idx| {
            let lifts = [d.lift_f64(idx / nd), d.lift_f64(idx % nd)];
            let base: Vec<Vec<f64>> = (0..2).map(|j| (0..n).map(|a| lifts[j][a] + beta[j][a]).collect()).collect();
            let center: Vec<f64> = base.iter().flatten().map(|v| -v).collect();
            let mut v = [vec![0.0; n], vec![0.0; n]];
            let mut grid = vec![0.0; rows * 2];
            gaussian_sum_batch(&g, &center, budget.r2, shifts.len(), |l, q, out| {
                for j in 0..2 {
                    for a in 0..n {
                        v[j][a] = base[j][a] + l[j * n + a] as f64;
                    }
                    for i in 0..rows {
                        grid[2 * i + j] = (0..n).map(|a| emb[(i, a)] * v[j][a]).sum();
                    }
                }
                let pv = p_eff.eval(&grid);
                if pv == Complex64::new(0.0, 0.0) {
                    out.fill(pv);
                    return;
                }
                let mut phase = 0.0;
                let mut q22 = 0.0;
                for j in 0..2 {
                    for k in 0..2 {
                        let (mut gp, mut gm) = (0.0, 0.0);
                        for i in 0..rows {
                            let t = grid[2 * i + j] * grid[2 * i + k];
                            if i < p {
                                gp += t;
                            } else {
                                gm += t;
                            }
                        }
                        phase += 0.5 * (gp - gm) * x[(k, j)];
                        if j == 1 && k == 1 {
                            q22 = 0.5 * (gp - gm);
                        }
                    }
                    phase -= (0..n).map(|a| (v[j][a] - 0.5 * beta[j][a]) * s_alpha[j][a]).sum::<f64>();
                }
                let t = pv * (-PI * q).exp();
                for (o, s) in out.iter_mut().zip(shifts) {
                    *o = t * e(phase + q22 * s);
                }
            })
        })
        .collect();
    let sums = sums?;
    Ok((0..shifts.len())
        .map(|k| assemble(sums.iter().map(|per_shift| per_shift[k]).collect(), Complex64::new(prefactor, 0.0), budget))
        .collect())
}

/// `(αAᵗ + βBᵗ, αCᵗ + βDᵗ)` for `γ = [[A, B], [C, D]]`, with `α = (α₁, α₂)` as columns.
pub fn transform_characteristics(gamma: &Sp4, alpha: &[Vec<f64>; 2], beta: &[Vec<f64>; 2]) -> ([Vec<f64>; 2], [Vec<f64>; 2]) {
    let n = alpha[0].len();
    let comb = |row: usize, off_a: usize, off_b: usize| -> Vec<f64> {
        (0..n)
            .map(|i| (0..2).map(|k| gamma[row][off_a + k] as f64 * alpha[k][i] + gamma[row][off_b + k] as f64 * beta[k][i]).sum())
            .collect()
    };
    ([comb(0, 0, 2), comb(1, 0, 2)], [comb(2, 0, 2), comb(3, 0, 2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{EvenLattice, GrassmannianFrame};
    use crate::numeric::max_dev;
    use crate::polyengine::{build_p_alpha, IndexTuple};
    use crate::weilrep::{Mp4Word, WeilRep2};
    use rand::SeedableRng;

    fn point(t1: (f64, f64), t2: (f64, f64), t3: (f64, f64)) -> SiegelPoint {
        SiegelPoint::from_entries(Complex64::new(t1.0, t1.1), Complex64::new(t2.0, t2.1), Complex64::new(t3.0, t3.1)).unwrap()
    }

    #[test]
    fn rejects_bad_points() {
        let z = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        assert!(SiegelPoint::from_entries(i, i, i).is_err());
        assert!(SiegelPoint::from_entries(i, z, -i).is_err());
        assert!(SiegelPoint::new(Siegel::new(i, z, Complex64::new(1.0, 0.0), i)).is_err());
        let p = point((0.0, 2.0), (0.0, 0.5), (0.0, 1.0));
        let r = p.sqrt_y();
        assert!((r * r - p.y()).amax() < 1e-14);
        assert!((p.lambda_min() - p.y().symmetric_eigenvalues().min()).abs() < 1e-14);
    }

    #[test]
    fn positive_definite_sum_matches_direct_count() {
        // A1 with a constant polynomial: Θ = Σ_{λ₁,λ₂ ∈ σ+Z} e(tr(q(λ)τ)) for diagonal τ.
        let l = EvenLattice::from_name("A1").unwrap();
        let f = GrassmannianFrame::base(&l).unwrap();
        let s = ThetaSpace::for_lattice(&l, &f).unwrap();
        let tau = point((0.1, 1.1), (0.0, 0.0), (-0.2, 0.9));
        let one = MatrixPolynomial::constant(1, 2, 0, Complex64::new(1.0, 0.0));
        let v = theta_genus2(&s, &tau, &super::super::zero_pair(1), &super::super::zero_pair(1), &one, 1e-12).unwrap();
        let th = |t: Complex64, shift: f64| -> Complex64 {
            (-40..=40).map(|n| e(0.0) * crate::numeric::e_c(t * (n as f64 + shift).powi(2))).sum()
        };
        let (t1, t3) = (tau.tau()[(0, 0)], tau.tau()[(1, 1)]);
        for (idx, (a, b)) in [(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)].iter().enumerate() {
            let expected = th(t1, *a) * th(t3, *b);
            assert!((v.value[idx] - expected).norm() < 1e-11, "{idx}");
        }
    }

    #[test]
    fn modularity_on_u_plus_u() {
        let l = EvenLattice::from_name("U+U").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = GrassmannianFrame::random_near_base(&l, &mut rng, 0.2).unwrap();
        let s = ThetaSpace::for_lattice(&l, &f).unwrap();
        let poly: MatrixPolynomial<Complex64> = build_p_alpha(IndexTuple::new(1, 1, 2, 2), 2, 2).unwrap();
        let rho = WeilRep2::new(&l);
        let tau = point((0.05, 1.0), (0.1, 0.05), (-0.03, 1.1));
        let alpha = [vec![0.1, -0.2, 0.05, 0.3], vec![0.0, 0.15, -0.1, 0.2]];
        let beta = [vec![0.2, 0.0, -0.1, 0.05], vec![-0.3, 0.1, 0.0, 0.12]];
        let base = theta_genus2(&s, &tau, &alpha, &beta, &poly, 1e-10).unwrap();
        assert!(crate::numeric::max_abs(&base.value) > 1e-2);
        let two_k = (l.bplus() as i32 - l.bminus() as i32) + 4;
        for w in ["S", "T[[1,0],[0,0]]", "S,T[[1,1],[1,0]]"] {
            let word = Mp4Word::parse(w).unwrap();
            let moved = SiegelPoint::new(word.act(tau.tau())).unwrap();
            let (a2, b2) = transform_characteristics(&word.matrix(), &alpha, &beta);
            let lhs = theta_genus2(&s, &moved, &a2, &b2, &poly, 1e-10).unwrap();
            let phi = word.phi(tau.tau()).powi(two_k);
            let rhs: Vec<Complex64> = rho.apply(&word, &base.value).into_iter().map(|z| z * phi).collect();
            let dev = max_dev(&lhs.value, &rhs);
            assert!(dev < 5e-8, "{w}: {dev}");
        }
    }

    #[test]
    fn shifted_batch_matches_single_evaluations() {
        let l = EvenLattice::from_name("U+A1").unwrap();
        let f = GrassmannianFrame::base(&l).unwrap();
        let s = ThetaSpace::for_lattice(&l, &f).unwrap();
        let x = |i, j| MatrixPolynomial::<Complex64>::var(3, 2, 0, i, j);
        let poly = x(0, 1).mul(&x(0, 1)).add(&x(1, 0));
        let tau = point((0.1, 0.9), (0.2, 0.1), (0.0, 1.2));
        let alpha = [vec![0.1, 0.0, 0.2], vec![0.0, -0.3, 0.1]];
        let z = super::super::zero_pair(3);
        let shifts = [0.0, 0.25, 0.5, -0.7];
        let batch = theta_genus2_shifted(&s, &tau, &alpha, &z, &poly, &shifts, 1e-10).unwrap();
        for (sh, b) in shifts.iter().zip(&batch) {
            let t = tau.tau();
            let moved = SiegelPoint::from_entries(t[(0, 0)], t[(0, 1)], t[(1, 1)] + sh).unwrap();
            let single = theta_genus2(&s, &moved, &alpha, &z, &poly, 1e-10).unwrap();
            assert!(max_dev(&single.value, &b.value) < 1e-12, "shift {sh}");
        }
    }
}
