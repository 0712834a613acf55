use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::algebraic::level_two_split;
use super::{rng_for, CheckResult, SuiteConfig, TauEntries};
use crate::error::Result;
use crate::lattice::{EvenLattice, GrassmannianFrame, HyperbolicSplit, SplitGeometry};
use crate::numeric::{e, e_c, max_dev};
use crate::polyengine::{build_p_alpha, IndexTuple, MatrixPolynomial};
use crate::theta::{
    fj_quadrature_check, fourier_jacobi_rhs, jacobi_poincare_rhs, s_case_identities_check, schrodinger_f_alpha, splitting_rhs,
    theta_genus2, theta_jacobi, transform_characteristics, zero_pair, JacobiPoint, PoincareBounds, SiegelPoint, ThetaSpace,
};
use crate::weilrep::{heisenberg_matrix, Mp2Word, Mp4Word, WeilRep1, WeilRep2};

/// Tolerance of the quadrature extraction of the lowest Fourier–Jacobi layer.
const QUADRATURE_TOLERANCE: f64 = 1e-6;

pub(crate) fn siegel_point(t: &TauEntries) -> Result<SiegelPoint> {
    let c = |k: usize| Complex64::new(t[k][0], t[k][1]);
    SiegelPoint::from_entries(c(0), c(1), c(2))
}

fn frame(l: &EvenLattice, config: &SuiteConfig, salt: u64, size: f64) -> Result<GrassmannianFrame> {
    GrassmannianFrame::random_near_base(l, &mut rng_for(config, salt), size)
}

/// The Kudla–Millson polynomial used for a lattice of signature `(b, 2)`.
fn p_alpha_for(l: &EvenLattice) -> Result<(IndexTuple, MatrixPolynomial<Complex64>)> {
    let b = l.bplus();
    let alpha = if b >= 3 { IndexTuple::new(1, 1, 2, 3) } else { IndexTuple::new(1, 1, 2, 2) };
    Ok((alpha, build_p_alpha(alpha, b, l.bminus())?))
}

fn dot(gv: &[f64], v: &[f64]) -> f64 {
    gv.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(super) fn theta_modularity(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    // S·T_B uses a rank-one B: the image of the grid then keeps det Im ≥ ½, where the
    // ten-dimensional sum for U⊕U⊕A1 stays tractable.  The generic B is checked through T_B.
    let words = ["T[[1,1],[1,0]]", "T[[0,0],[0,1]]", "S", "S,T[[0,0],[0,1]]"];
    let mut out = Vec::new();
    for (salt, name) in [(61, "U+U"), (62, "U+U+A1")] {
        let l = EvenLattice::from_name(name)?;
        let f = frame(&l, config, salt, 0.2)?;
        let space = ThetaSpace::for_lattice(&l, &f)?;
        let (alpha, poly) = p_alpha_for(&l)?;
        let rho = WeilRep2::new(&l);
        let two_k = l.bplus() as i32 - l.bminus() as i32 + 4;
        let z = zero_pair(l.rank());
        let devs = config
            .tau_grid
            .par_iter()
            .map(|t| -> Result<f64> {
                let tau = siegel_point(t)?;
                let base = theta_genus2(&space, &tau, &z, &z, &poly, config.work_eps())?;
                let mut dev: f64 = 0.0;
                for w in words {
                    let word = Mp4Word::parse(w)?;
                    let moved = SiegelPoint::new(word.act(tau.tau()))?;
                    let (a2, b2) = transform_characteristics(&word.matrix(), &z, &z);
                    let lhs = theta_genus2(&space, &moved, &a2, &b2, &poly, config.work_eps())?;
                    let phi = word.phi(tau.tau()).powi(two_k);
                    let rhs: Vec<Complex64> = rho.apply(&word, &base.value).into_iter().map(|x| x * phi).collect();
                    dev = dev.max(max_dev(&lhs.value, &rhs));
                }
                Ok(dev)
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(CheckResult::new(
            "theta-modularity",
            name,
            json!({"alpha": alpha.to_string(), "words": words, "grid_points": config.tau_grid.len(), "eps": config.eps}),
            devs.into_iter().fold(0.0, f64::max),
            config.float_threshold(),
        ));
    }
    Ok(out)
}

/// Jacobi evaluation points derived from the τ grid: `(τ₁, τ₂)` of each entry.
fn jacobi_points(config: &SuiteConfig) -> Result<Vec<JacobiPoint>> {
    config
        .tau_grid
        .iter()
        .map(|t| JacobiPoint::new(Complex64::new(t[0][0], t[0][1]), Complex64::new(t[1][0] + 0.1, t[1][1] + 0.1)))
        .collect()
}

fn degree_two_test_poly() -> MatrixPolynomial<Complex64> {
    let x = |i| MatrixPolynomial::<Complex64>::var(3, 1, 0, i, 0);
    x(0).mul(&x(0)).add(&x(0).mul(&x(1)).scale(&Complex64::new(3.0, 0.0)))
}

pub(super) fn jacobi_modularity(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let name = "U+A1";
    let l = EvenLattice::from_name(name)?;
    let d = l.discriminant_group();
    let f = frame(&l, config, 71, 0.2)?;
    let space = ThetaSpace::for_lattice(&l, &f)?;
    let poly = degree_two_test_poly();
    let rho = WeilRep1::new(&l);
    let weight = (l.bplus() + 4) as i32 - l.bminus() as i32;
    let (alpha, beta) = ([0.1, 0.2, -0.3], [0.05, -0.1, 0.2]);
    let points = jacobi_points(config)?;
    let pair = |x: &[f64], y: &[f64]| dot(&space.gram_times(x), y);
    let mut out = Vec::new();
    // Vectors of L′ with 0 < q(η) ≤ 2.
    for eta in [[1.0, 1.0, 0.0], [0.0, 0.0, 0.5], [1.0, 1.0, 0.5], [2.0, 1.0, 0.0], [1.0, 0.0, 1.0]] {
        let q_eta = 0.5 * pair(&eta, &eta);
        let sigma2 = d.index_of(&eta.map(|x| crate::exactalg::Rat::from_float(x).expect("finite")))?;
        let results = points
            .par_iter()
            .map(|pt| -> Result<(f64, f64)> {
                let base = theta_jacobi(&space, &eta, pt, &alpha, &beta, &poly, config.work_eps())?;
                let base_vec = DVector::from_vec(base.value.clone());
                let mut modular: f64 = 0.0;
                for w in ["S", "T", "T,S", "S,T^2"] {
                    let word = Mp2Word::parse(w)?;
                    let [[a, b], [c, dd]] = word.matrix();
                    let moved = pt.act(&word);
                    let a2: Vec<f64> = (0..3).map(|i| a as f64 * alpha[i] + b as f64 * beta[i]).collect();
                    let b2: Vec<f64> = (0..3).map(|i| c as f64 * alpha[i] + dd as f64 * beta[i]).collect();
                    let lhs = theta_jacobi(&space, &eta, &moved, &a2, &b2, &poly, config.work_eps())?;
                    let j = pt.tau1 * c as f64 + dd as f64;
                    let factor = word.phi(pt.tau1).powi(weight) * e_c(pt.tau2 * pt.tau2 * q_eta * c as f64 / j);
                    let rhs: Vec<Complex64> = (rho.matrix(&word) * &base_vec).iter().map(|z| z * factor).collect();
                    modular = modular.max(max_dev(&lhs.value, &rhs));
                }
                let mut heis: f64 = 0.0;
                for (lam, mu) in [(1, 0), (0, 1), (1, 1), (-2, 1)] {
                    let lhs = theta_jacobi(&space, &eta, &pt.translate(lam, mu), &alpha, &beta, &poly, config.work_eps())?;
                    let (lf, mf) = (lam as f64, mu as f64);
                    let factor = e(lf * pair(&beta, &eta) + mf * pair(&eta, &alpha) - lf * mf * q_eta)
                        * e_c(-(pt.tau1 * mf * mf * q_eta) - pt.tau2 * 2.0 * mf * q_eta);
                    // Compare in slash form, factor⁻¹·φ(τ, z + λ + μτ) = ρ(h)φ(τ, z): the
                    // factor reaches ~e^{4πq(η)}, beyond which absolute f64 accuracy is lost.
                    let h = heisenberg_matrix(&d, sigma2, lam, mu, 0);
                    let slashed: Vec<Complex64> = lhs.value.iter().map(|z| z / factor).collect();
                    heis = heis.max(max_dev(&slashed, (h * &base_vec).as_slice()));
                }
                Ok((modular, heis))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let modular = results.iter().map(|r| r.0).fold(0.0, f64::max);
        let heis = results.iter().map(|r| r.1).fold(0.0, f64::max);
        let params = json!({"eta": eta, "q_eta": q_eta, "points": points.len()});
        out.push(CheckResult::new("jacobi-modularity/modular", name, params.clone(), modular, config.float_threshold()));
        out.push(CheckResult::new("jacobi-modularity/heisenberg", name, params, heis, config.float_threshold()));
    }
    Ok(out)
}

/// `τ = iI₂ + 0.1·x` with a fixed symmetric real perturbation `x`.
fn splitting_tau() -> Result<SiegelPoint> {
    SiegelPoint::from_entries(Complex64::new(0.1, 1.0), Complex64::new(0.03, 0.0), Complex64::new(-0.05, 1.0))
}

/// Deviations `|LHS − RHS(bound)|` of the splitting identity at each configured bound.
pub fn splitting_deviations(config: &SuiteConfig) -> Result<Vec<(i64, f64)>> {
    let l = EvenLattice::from_name("U+U+A1")?;
    let split = HyperbolicSplit::find(&l, 2)?;
    let f = frame(&l, config, 81, 0.3)?;
    let geo = SplitGeometry::new(&f, &split)?;
    let tau = splitting_tau()?;
    let (_, poly) = p_alpha_for(&l)?;
    let space = ThetaSpace::for_lattice(&l, &f)?;
    let z = zero_pair(l.rank());
    let lhs = theta_genus2(&space, &tau, &z, &z, &poly, config.work_eps())?;
    config
        .splitting_bounds
        .par_iter()
        .map(|&b| Ok((b, max_dev(&lhs.value, &splitting_rhs(&l, &geo, &tau, &poly, b, config.work_eps())?.value))))
        .collect()
}

pub(super) fn splitting(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let devs = splitting_deviations(config)?;
    let params = json!({"bounds": devs.iter().map(|d| d.0).collect::<Vec<_>>(), "deviations": devs.iter().map(|d| d.1).collect::<Vec<_>>()});
    let last = devs.last().map(|d| d.1).unwrap_or(f64::NAN);
    // Largest increase of the deviation between consecutive bounds ≥ 1.
    let increase = devs.windows(2).filter(|w| w[0].0 >= 1).map(|w| (w[1].1 - w[0].1).max(0.0)).fold(0.0, f64::max);
    Ok(vec![
        CheckResult::new("splitting/final-bound", "U+U+A1", params.clone(), last, config.float_threshold()),
        CheckResult::new("splitting/monotone", "U+U+A1", params, increase, 0.0),
    ])
}

pub(super) fn fourier_jacobi(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (salt, name) in [(91, "U+U"), (92, "U+U+A1")] {
        let l = EvenLattice::from_name(name)?;
        let f = frame(&l, config, salt, 0.25)?;
        let space = ThetaSpace::for_lattice(&l, &f)?;
        let (alpha_idx, poly) = p_alpha_for(&l)?;
        let n = l.rank();
        let chars = [
            zero_pair(n),
            [(0..n).map(|i| 0.1 * (i as f64) - 0.15).collect(), (0..n).map(|i| 0.05 * (i as f64 % 3.0)).collect()],
        ];
        let results = config
            .tau_grid
            .par_iter()
            .map(|t| -> Result<(f64, f64)> {
                let tau = siegel_point(t)?;
                let mut dev: f64 = 0.0;
                for alpha in &chars {
                    let lhs = theta_genus2(&space, &tau, alpha, &zero_pair(n), &poly, config.work_eps())?;
                    let rhs = fourier_jacobi_rhs(&l, &f, &tau, alpha, &poly, config.work_eps())?;
                    dev = dev.max(max_dev(&lhs.value, &rhs.value));
                }
                let quad = fj_quadrature_check(&l, &f, &tau, &zero_pair(n), &poly, 32, config.work_eps())?;
                Ok((dev, quad.max_deviation))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let params = json!({"alpha": alpha_idx.to_string(), "grid_points": config.tau_grid.len()});
        out.push(CheckResult::new(
            "fourier-jacobi/expansion",
            name,
            params.clone(),
            results.iter().map(|r| r.0).fold(0.0, f64::max),
            config.float_threshold(),
        ));
        out.push(CheckResult::new(
            "fourier-jacobi/quadrature-32",
            name,
            params,
            results.iter().map(|r| r.1).fold(0.0, f64::max),
            QUADRATURE_TOLERANCE,
        ));
    }
    Ok(out)
}

pub(super) fn poincare(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let bounds = PoincareBounds { coset_bound: config.coset_bound, n_bound: config.n_bound };
    let point = JacobiPoint::new(Complex64::new(0.0, 1.0), Complex64::new(0.1, 0.2))?;
    let poly = degree_two_test_poly();
    let mut out = Vec::new();
    for (salt, name) in [(101, "U+A1"), (102, "U(2)+A1")] {
        let l = EvenLattice::from_name(name)?;
        let split = if name == "U+A1" { HyperbolicSplit::find(&l, 2)? } else { level_two_split(&l)? };
        let f = frame(&l, config, salt, 0.2)?;
        let geo = SplitGeometry::new(&f, &split)?;
        let space = ThetaSpace::for_lattice(&l, &f)?;
        let mut dev: f64 = 0.0;
        let etas: [[f64; 1]; 2] = [[0.5], [1.0]];
        for eta_k in &etas {
            let eta_l = split.k_to_l(eta_k);
            let lhs = theta_jacobi(&space, &eta_l, &point, &[0.0; 3], &[0.0; 3], &poly, config.work_eps())?;
            let rhs = jacobi_poincare_rhs(&l, &geo, eta_k, &point, &poly, bounds, config.work_eps())?;
            dev = dev.max(max_dev(&lhs.value, &rhs.value));
        }
        out.push(CheckResult::new(
            "poincare",
            name,
            json!({"level": split.level, "coset_bound": bounds.coset_bound, "n_bound": bounds.n_bound, "eta_k": etas, "tau1": [0.0, 1.0], "tau2": [0.1, 0.2]}),
            dev,
            config.float_threshold(),
        ));
    }
    Ok(out)
}

pub(super) fn s_cases(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let name = "U+U+A1";
    let l = EvenLattice::from_name(name)?;
    let split = HyperbolicSplit::find(&l, 2)?;
    let f = frame(&l, config, 111, 0.2)?;
    let geo = SplitGeometry::new(&f, &split)?;
    let (alpha_idx, poly) = p_alpha_for(&l)?;
    let k = split.k_basis.len();
    let chars = [
        (zero_pair(k), zero_pair(k)),
        ([vec![0.1, 0.2, -0.1], vec![0.0, -0.3, 0.2]], [vec![0.2, 0.0, 0.1], vec![-0.1, 0.1, 0.0]]),
    ];
    let devs = config
        .tau_grid
        .par_iter()
        .map(|t| -> Result<f64> {
            let tau = siegel_point(t)?;
            let mut dev: f64 = 0.0;
            for (a, b) in &chars {
                dev = dev.max(s_case_identities_check(&l, &geo, &tau, a, b, &poly, config.work_eps())?.max_deviation);
            }
            Ok(dev)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vec![CheckResult::new(
        "s-cases",
        "K=U+A1 in U+U+A1",
        json!({"alpha": alpha_idx.to_string(), "grid_points": config.tau_grid.len(), "exponent": "-b/2-1"}),
        devs.into_iter().fold(0.0, f64::max),
        config.float_threshold(),
    )])
}

pub(super) fn schrodinger(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (salt, name) in [(121, "U+U"), (122, "U+U+A1")] {
        let l = EvenLattice::from_name(name)?;
        let f = frame(&l, config, salt, 0.3)?;
        let space = ThetaSpace::for_lattice(&l, &f)?;
        let b = l.bplus();
        let alphas: Vec<IndexTuple> = IndexTuple::all_admissible(b).into_iter().take(4).collect();
        let z = zero_pair(l.rank());
        let devs = config
            .tau_grid
            .par_iter()
            .map(|t| -> Result<f64> {
                let tau = siegel_point(t)?;
                let mut dev: f64 = 0.0;
                for &alpha in &alphas {
                    let fa = schrodinger_f_alpha(&l, &f, &tau, alpha, config.work_eps())?;
                    let p = build_p_alpha(alpha, b, l.bminus())?;
                    let th = theta_genus2(&space, &tau, &z, &z, &p, config.work_eps())?;
                    dev = dev.max(max_dev(&fa.value, &th.value));
                }
                Ok(dev)
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(CheckResult::new(
            "schrodinger",
            name,
            json!({"alphas": alphas.iter().map(ToString::to_string).collect::<Vec<_>>(), "grid_points": config.tau_grid.len()}),
            devs.into_iter().fold(0.0, f64::max),
            2.0 * config.eps,
        ));
    }
    Ok(out)
}
