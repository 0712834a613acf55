use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{rng_for, CheckResult, SuiteConfig, REPRESENTATION_TOLERANCE};
use crate::error::Result;
use crate::exactalg::rat;
use crate::lattice::{eichler_transform, milgram_expected, EvenLattice, GrassmannianFrame, HyperbolicSplit, SplitGeometry};
use crate::polyengine::{
    build_p_alpha, closed_form_on_grid, decompose_p_w, tau_transform_check, very_homogeneous_check, Coeff, IndexTuple, PiRat,
};
use crate::weilrep::{
    jacobi_compatibility_deviation, kiefer_identity_check, JacobiElement, Mp2Token, Mp2Word, Mp4Token, WeilRep2,
};

/// Tolerance of the Eichler invariance identities.
const EICHLER_TOLERANCE: f64 = 1e-10;

fn lattice(name: &str) -> Result<EvenLattice> {
    EvenLattice::from_name(name)
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(super) fn milgram(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut names: Vec<String> = ["U", "A1", "A1(-1)", "A2", "U+A1"].map(String::from).to_vec();
    for n in &config.corpus {
        if !names.contains(n) {
            names.push(n.clone());
        }
    }
    names
        .iter()
        .map(|name| {
            let l = lattice(name)?;
            let d = l.discriminant_group();
            let dev = (d.milgram_sum() - milgram_expected(d.order(), l.bplus(), l.bminus())).norm();
            Ok(CheckResult::new(
                "milgram",
                name.as_str(),
                json!({"order": d.order(), "signature": [l.bplus(), l.bminus()]}),
                dev,
                REPRESENTATION_TOLERANCE,
            ))
        })
        .collect()
}

/// Generators used for the word enumeration of the Weil-relation suite.
fn weil_generators() -> Vec<Mp4Token> {
    vec![Mp4Token::S, Mp4Token::T([[1, 0], [0, 0]]), Mp4Token::T([[0, 1], [1, 0]]), Mp4Token::A([[0, 1], [1, 0]])]
}

/// A complex matrix stored as real and imaginary parts, so that products run on the
/// optimised real kernels.
struct SplitMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl SplitMatrix {
    fn new(m: &DMatrix<Complex64>) -> Self {
        SplitMatrix { re: m.map(|z| z.re), im: m.map(|z| z.im) }
    }

    fn mul(&self, o: &SplitMatrix) -> SplitMatrix {
        SplitMatrix { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    /// `max |(M*M − I)_{ij}|`.
    fn unitarity_defect(&self) -> f64 {
        let re = self.re.tr_mul(&self.re) + self.im.tr_mul(&self.im);
        let im = self.re.tr_mul(&self.im) - self.im.tr_mul(&self.re);
        let n = re.nrows();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| Complex64::new(re[(i, j)] - if i == j { 1.0 } else { 0.0 }, im[(i, j)]).norm())
            .fold(0.0, f64::max)
    }
}

pub(super) fn weil_relations(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    const MAX_LENGTH: usize = 6;
    let mut names: Vec<String> = ["A1", "A2"].map(String::from).to_vec();
    names.extend(config.corpus.iter().cloned());
    names.dedup();
    let mut out = Vec::new();
    for name in &names {
        let l = lattice(name)?;
        if l.discriminant_group().order() > 9 {
            continue;
        }
        let rho = WeilRep2::new(&l);
        let n = rho.dim();
        let id = DMatrix::<Complex64>::identity(n, n);
        let s = rho.generator(Mp4Token::S);
        let s4 = &s * &s * &s * &s;
        out.push(CheckResult::new(
            "weil-relations/S^4",
            name.as_str(),
            json!({"dim": n}),
            max_entry(&(s4 - &id)),
            REPRESENTATION_TOLERANCE,
        ));

        // Unitarity of every word of length ≤ MAX_LENGTH, by extending prefixes.
        let gens: Vec<SplitMatrix> = weil_generators().into_iter().map(|t| SplitMatrix::new(&rho.generator(t))).collect();
        let mut layer = vec![SplitMatrix::new(&id)];
        let mut dev: f64 = 0.0;
        let mut words = 0usize;
        for _ in 0..MAX_LENGTH {
            let next: Vec<SplitMatrix> = layer.par_iter().flat_map_iter(|w| gens.iter().map(move |g| w.mul(g))).collect();
            let layer_dev = next.par_iter().map(SplitMatrix::unitarity_defect).reduce(|| 0.0, f64::max);
            dev = dev.max(layer_dev);
            words += next.len();
            layer = next;
        }
        out.push(CheckResult::new(
            "weil-relations/unitarity",
            name.as_str(),
            json!({"dim": n, "max_length": MAX_LENGTH, "words": words, "generators": ["S", "T[[1,0],[0,0]]", "T[[0,1],[1,0]]", "A[[0,1],[1,0]]"]}),
            dev,
            REPRESENTATION_TOLERANCE,
        ));
    }
    Ok(out)
}

/// Twenty deterministic Jacobi-group elements: Heisenberg triples with entries in
/// `[−2, 2]` followed by `Mp₂(Z)` words of length ≤ 3.
pub(crate) fn jacobi_grid(config: &SuiteConfig) -> Vec<JacobiElement> {
    let mut rng = rng_for(config, 3);
    let tokens = [Mp2Token::S, Mp2Token::T(1), Mp2Token::T(-1), Mp2Token::T(2), Mp2Token::Z];
    (0..20)
        .map(|i| {
            let len = i % 4;
            let word = Mp2Word::new((0..len).map(|_| tokens[rng.gen_range(0..tokens.len())]).collect());
            JacobiElement { lambda: rng.gen_range(-2..=2), mu: rng.gen_range(-2..=2), kappa: rng.gen_range(-2..=2), mp2: word }
        })
        .collect()
}

fn word_string(w: &Mp2Word) -> String {
    w.tokens
        .iter()
        .map(|t| match t {
            Mp2Token::S => "S".to_string(),
            Mp2Token::Z => "Z".to_string(),
            Mp2Token::T(n) => format!("T^{n}"),
        })
        .collect::<Vec<_>>()
        .join(",")
}

pub(super) fn jacobi_compat(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let grid = jacobi_grid(config);
    let mut out = Vec::new();
    for name in ["A1", "U(2)+A1"] {
        let l = lattice(name)?;
        let devs: Vec<f64> = grid.par_iter().map(|el| jacobi_compatibility_deviation(&l, el)).collect();
        let dev = devs.iter().copied().fold(0.0, f64::max);
        let elements: Vec<_> =
            grid.iter().map(|e| json!({"lambda": e.lambda, "mu": e.mu, "kappa": e.kappa, "word": word_string(&e.mp2)})).collect();
        out.push(CheckResult::new("jacobi-compat", name, json!({"elements": elements}), dev, REPRESENTATION_TOLERANCE));
    }
    Ok(out)
}

/// The level-2 split of `U(2) ⊕ A1`: `u = e₁`, `u′ = e₂/2`.
pub(crate) fn level_two_split(l: &EvenLattice) -> Result<HyperbolicSplit> {
    HyperbolicSplit::from_vectors(l, vec![1, 0, 0], vec![rat(0, 1), rat(1, 2), rat(0, 1)])
}

pub(super) fn kiefer(_config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let l = lattice("U(2)+A1")?;
    let split = level_two_split(&l)?;
    let mut out = Vec::new();
    for w in ["T", "S", "T,S"] {
        let word = Mp2Word::parse(w)?;
        for n in 0..=2 {
            let dev = kiefer_identity_check(&l, &split, &word, n)?;
            out.push(CheckResult::new(
                "kiefer",
                "U(2)+A1",
                json!({"word": w, "n": n, "level": split.level}),
                dev,
                REPRESENTATION_TOLERANCE,
            ));
        }
    }
    Ok(out)
}

fn pr(n: i64, d: i64) -> PiRat {
    PiRat::rational(rat(n, d))
}

/// Directions `n = g(u_{z⊥})` used by the symbolic suite: signed coordinate axes
/// and one generic rational direction, all supported on the positive rows.
fn symbolic_directions(b: usize) -> Vec<Vec<PiRat>> {
    let rows = b + 2;
    let mut out = Vec::new();
    for j in 0..b {
        let mut n = vec![PiRat::zero(); rows];
        n[j] = pr(if j % 2 == 0 { 1 } else { -1 }, 1);
        out.push(n);
    }
    out.push(generic_direction(b));
    out
}

fn generic_direction(b: usize) -> Vec<PiRat> {
    let mut n = vec![PiRat::zero(); b + 2];
    for (j, g) in n.iter_mut().enumerate().take(b) {
        *g = pr(j as i64 + 1, 3);
    }
    n
}

pub(super) fn poly_symbolic(_config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    // (a) P_α is very homogeneous of degree (2, 0).
    for b in 1..=6 {
        let alphas = IndexTuple::all_admissible(b);
        let failures = alphas
            .par_iter()
            .map(|&a| build_p_alpha::<PiRat>(a, b, 2).map(|p| usize::from(!very_homogeneous_check(&p, b, 2, 0))))
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum::<usize>();
        out.push(CheckResult::new(
            "poly-symbolic/a-very-homogeneous",
            format!("b={b}"),
            json!({"alphas": alphas.len()}),
            failures as f64,
            0.0,
        ));
    }

    for b in 2..=4 {
        let alphas = IndexTuple::all_admissible(b);
        // (b) components equal the closed forms; (c) τ-transformation rules;
        // (d) components with h₁ + h₂ ∈ {1, 2} are not very homogeneous.
        let counts = alphas
            .par_iter()
            .map(|&alpha| -> Result<[usize; 3]> {
                let p = build_p_alpha::<PiRat>(alpha, b, 2)?;
                let mut c = [0usize; 3];
                for n in symbolic_directions(b) {
                    let comps = decompose_p_w(&p, &n, b);
                    for h1 in 0..=2u16 {
                        for h2 in 0..=2 - h1 {
                            if comps.get((h1, h2)) != closed_form_on_grid(alpha, (h1, h2), &n) {
                                c[0] += 1;
                            }
                        }
                    }
                }
                let comps = decompose_p_w(&p, &generic_direction(b), b);
                c[1] += tau_transform_check(&comps, None).max_deviation();
                for (&(h1, h2), comp) in &comps.parts {
                    if h1 + h2 == 0 || comp.is_zero() {
                        continue;
                    }
                    if (0..=2).any(|m| very_homogeneous_check(comp, b, m, 0)) {
                        c[2] += 1;
                    }
                }
                Ok(c)
            })
            .collect::<Result<Vec<[usize; 3]>>>()?;
        let total = |k: usize| counts.iter().map(|c| c[k]).sum::<usize>() as f64;
        let params = json!({"alphas": alphas.len(), "directions": b + 1});
        out.push(CheckResult::new("poly-symbolic/b-closed-forms", format!("b={b}"), params.clone(), total(0), 0.0));
        out.push(CheckResult::new("poly-symbolic/c-tau-rules", format!("b={b}"), params.clone(), total(1), 0.0));
        out.push(CheckResult::new("poly-symbolic/d-not-very-homogeneous", format!("b={b}"), params, total(2), 0.0));
    }
    Ok(out)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn apply(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).iter().copied().collect()
}

/// Deviations of the five Eichler invariance statements for one `(λ, frame)` pair.
pub(crate) fn eichler_deviations(
    l: &EvenLattice,
    split: &HyperbolicSplit,
    frame: &GrassmannianFrame,
    lambda: &[f64],
) -> Result<[f64; 5]> {
    let n = l.rank();
    let e = eichler_transform(l, &split.u_f64(), lambda)?;
    let geo = SplitGeometry::new(frame, split)?;
    let geo_p = SplitGeometry::new(&frame.compose(&e)?, split)?;
    let unit = |k: usize| -> Vec<f64> { (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect() };

    // (i) E(w′) = w and E(w′⊥) = w⊥: images of spanning vectors stay in the subspace.
    let mut d1: f64 = 0.0;
    for k in 0..n {
        let p = geo_p.projections(&unit(k));
        let img_w = apply(&e, &p.vw);
        d1 = d1.max(norm(&diff(&geo.projections(&img_w).vw, &img_w)));
        let img_wp = apply(&e, &p.vwperp);
        d1 = d1.max(norm(&diff(&geo.projections(&img_wp).vwperp, &img_wp)));
    }

    // (ii) E(μ′) = μ + λ + q(λ)u.
    let q_lambda = l.q_f64(lambda);
    let expected: Vec<f64> = (0..n).map(|i| geo.mu()[i] + lambda[i] + q_lambda * geo.u[i]).collect();
    let d2 = norm(&diff(&apply(&e, &geo_p.mu()), &expected));

    // (iii) borw = borw for the frame g∘E, and (v) v²_{w⊥} = v²_{w′⊥}, on K ⊗ R.
    let (mut d3, mut d5): (f64, f64) = (0.0, 0.0);
    for b in &split.k_basis {
        let v: Vec<f64> = b.iter().map(|&x| x as f64).collect();
        d3 = d3.max(norm(&diff(&geo.borw(&v), &geo_p.borw(&v))));
        let (a, c) = (geo.projections(&v).vwperp, geo_p.projections(&v).vwperp);
        d5 = d5.max((l.bilinear_f64(&a, &a) - l.bilinear_f64(&c, &c)).abs());
    }

    // (iv) u²_{z⊥} is unchanged.
    let d4 = (geo.uzperp2 - geo_p.uzperp2).abs();
    Ok([d1, d2, d3, d4, d5])
}

pub(super) fn eichler(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    const PAIRS: usize = 20;
    let name = "U+U+A1";
    let l = lattice(name)?;
    let split = HyperbolicSplit::find(&l, 2)?;
    let mut rng = rng_for(config, 13);
    let eta_k = [1i64, 1, 1];
    let eta = split.k_to_l(&eta_k.map(|x| x as f64));
    let eta2 = l.bilinear_f64(&eta, &eta);
    let mut worst = [0.0f64; 5];
    for _ in 0..PAIRS {
        let frame = GrassmannianFrame::random_near_base(&l, &mut rng, 0.3)?;
        let coeffs: Vec<f64> = split.k_basis.iter().map(|_| rng.gen_range(-1.5..1.5)).collect();
        let mut lambda = vec![0.0; l.rank()];
        for (c, b) in coeffs.iter().zip(&split.k_basis) {
            for (x, &bi) in lambda.iter_mut().zip(b) {
                *x += c * bi as f64;
            }
        }
        let t = l.bilinear_f64(&lambda, &eta) / eta2;
        for (x, y) in lambda.iter_mut().zip(&eta) {
            *x -= t * y;
        }
        let d = eichler_deviations(&l, &split, &frame, &lambda)?;
        for (w, x) in worst.iter_mut().zip(d) {
            *w = w.max(x);
        }
    }
    let labels = ["i-w-spaces", "ii-mu", "iii-borw", "iv-uzperp", "v-wperp-norms"];
    Ok(labels
        .iter()
        .zip(worst)
        .map(|(lab, dev)| {
            CheckResult::new(format!("eichler/{lab}"), name, json!({"pairs": PAIRS, "eta_k": eta_k}), dev, EICHLER_TOLERANCE)
        })
        .collect())
}
