use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::siegel::SiegelPoint;
use super::space::{assemble, gaussian_sum, sqrt_det_pd, ShellSum, SumShape, ThetaSpace, TruncatedThetaValue};
use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, GrassmannianFrame};
use crate::numeric::e;
use crate::polyengine::{build_q_alpha, Coeff, IndexTuple};

/// `F_α(τ) = det(y)^{−k/2} Σ_{v ∈ σ + L²} (ω(T_x)ω(A_{√y})φ_α)(v)` in the Schrödinger model,
/// where `φ_α(v) = Q_α(gv)·exp(−π tr((gv)ᵗgv))`, `ω(A)φ(v) = det A^{k}φ(vA)`,
/// `ω(T_B)φ(v) = e(tr(B q(v)))φ(v)` and `k = rank/2`.
///
/// The Gaussian is evaluated in the form `exp(−π tr(XᵗX y))`, which is the same
/// quadratic form used by the enumeration.
pub fn schrodinger_f_alpha(
    lattice: &EvenLattice,
    frame: &GrassmannianFrame,
    tau: &SiegelPoint,
    alpha: IndexTuple,
    eps: f64,
) -> Result<TruncatedThetaValue> {
    if lattice.bminus() != 2 {
        return Err(Error::Precondition("the Schrödinger model is set up for signature (b, 2)".into()));
    }
    let space = ThetaSpace::for_lattice(lattice, frame)?;
    let q_alpha = build_q_alpha(alpha, lattice.bplus(), 2)?.map_coeffs(|c| c.to_c64()).compile();
    let n = space.rank();
    let rows = space.rows();
    let k = n as f64 / 2.0;
    let sqrt_y = tau.sqrt_y();
    // det(√y)^k from ω(A_{√y}) against det(y)^{−k/2}.
    let scale = sqrt_y.determinant().powf(k) * tau.det_y().powf(-k / 2.0);
    let m = space.majorant();
    let y = tau.y();
    let g = DMatrix::from_fn(2 * n, 2 * n, |a, b| y[(a / n, b / n)] * m[(a % n, b % n)]);
    let shape = SumShape {
        dim: 2 * n,
        sqrt_det: sqrt_det_pd(&g)?,
        mass: q_alpha.coefficient_mass() * scale * (1.0 + y.norm()).powi(q_alpha.degree() as i32),
        degree: q_alpha.degree(),
        c: tau.lambda_min(),
    };
    let budget = shape.budget(eps / 4.0)?;
    let x = tau.x();
    let emb = space.embedding();
    let gram = space.gram();
    let d = space.disc();
    let nd = d.order();
    let sums: Result<Vec<ShellSum>> = (0..nd * nd)
        .into_par_iter()
        .map(|idx| {
            let lifts = [d.lift_f64(idx / nd), d.lift_f64(idx % nd)];
            let center: Vec<f64> = lifts.iter().flatten().map(|v| -v).collect();
            let mut v = [vec![0.0; n], vec![0.0; n]];
            let mut gv = [vec![0.0; rows], vec![0.0; rows]];
            let mut z = vec![0.0; rows * 2];
            gaussian_sum(&g, &center, budget.r2, |l, q| {
                for j in 0..2 {
                    for a in 0..n {
                        v[j][a] = lifts[j][a] + l[j * n + a] as f64;
                    }
                    for i in 0..rows {
                        gv[j][i] = (0..n).map(|a| emb[(i, a)] * v[j][a]).sum();
                    }
                }
                // Z = (gv)·√y.
                for i in 0..rows {
                    for j in 0..2 {
                        z[2 * i + j] = gv[0][i] * sqrt_y[(0, j)] + gv[1][i] * sqrt_y[(1, j)];
                    }
                }
                let pv = q_alpha.eval(&z);
                // tr(x·q(v)) with q(v) = ½((v_i, v_j)).
                let mut phase = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        let vij: f64 = (0..n).map(|a| (0..n).map(|b| v[i][a] * gram[(a, b)] * v[j][b]).sum::<f64>()).sum();
                        phase += 0.5 * x[(j, i)] * vij;
                    }
                }
                pv * (-PI * q).exp() * e(phase)
            })
        })
        .collect();
    Ok(assemble(sums?, Complex64::new(scale, 0.0), budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::max_dev;
    use crate::polyengine::build_p_alpha;
    use crate::theta::{theta_genus2, zero_pair};
    use rand::SeedableRng;

    #[test]
    fn agrees_with_theta_of_p_alpha() {
        let l = EvenLattice::from_name("U+U").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let f = GrassmannianFrame::random_near_base(&l, &mut rng, 0.3).unwrap();
        let tau =
            SiegelPoint::from_entries(Complex64::new(0.1, 1.2), Complex64::new(-0.05, 0.2), Complex64::new(0.2, 0.9)).unwrap();
        let alpha = IndexTuple::new(1, 2, 2, 1);
        let f_alpha = schrodinger_f_alpha(&l, &f, &tau, alpha, 1e-10).unwrap();
        let space = ThetaSpace::for_lattice(&l, &f).unwrap();
        let p = build_p_alpha(alpha, 2, 2).unwrap();
        let theta = theta_genus2(&space, &tau, &zero_pair(4), &zero_pair(4), &p, 1e-10).unwrap();
        assert!(crate::numeric::max_abs(&theta.value) > 1e-3);
        assert!(max_dev(&f_alpha.value, &theta.value) < 2e-8);
    }
}
