use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::OnceLock;

use super::mp2::{Mp2Token, Mp2Word, WeilRep1};
use super::mp4::{mp4_test_point, Mp4Token, Mp4Word};
use crate::error::{Error, Result};
use crate::exactalg::{rat_to_f64, Rat};
use crate::lattice::{DiscriminantGroup, EvenLattice, HyperbolicSplit};
use crate::numeric::e;

/// An element `(λ, μ, κ)·M` of the metaplectic Jacobi group: a Heisenberg part
/// followed by an `Mp₂(Z)` word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JacobiElement {
    pub lambda: i64,
    pub mu: i64,
    pub kappa: i64,
    pub mp2: Mp2Word,
}

impl JacobiElement {
    pub fn heisenberg(lambda: i64, mu: i64, kappa: i64) -> Self {
        JacobiElement { lambda, mu, kappa, mp2: Mp2Word::identity() }
    }

    pub fn modular(mp2: Mp2Word) -> Self {
        JacobiElement { mp2, ..Default::default() }
    }

    /// Image in `Mp₄(Z)`.  The Heisenberg triple maps to `A([[1,0],[μ,1]])·T([[0,λ],[λ,κ−λμ]])`,
    /// which acts on `(τ, z) = (τ₁, τ₂)` by `z ↦ z + λ + μτ`; `Mp₂` generators map to the
    /// Klingen-parabolic copies acting on `τ₁`, with `φ̃(τ) = φ(τ₁)`.
    pub fn embed(&self) -> Mp4Word {
        let mut tokens = Vec::new();
        if (self.lambda, self.mu, self.kappa) != (0, 0, 0) {
            tokens.push(Mp4Token::A([[1, 0], [self.mu, 1]]));
            tokens.push(Mp4Token::T([[0, self.lambda], [self.lambda, self.kappa - self.lambda * self.mu]]));
        }
        for t in &self.mp2.tokens {
            match *t {
                Mp2Token::T(n) => tokens.push(Mp4Token::T([[n, 0], [0, 0]])),
                Mp2Token::S => tokens.extend(embedded_s().tokens.iter().copied()),
                Mp2Token::Z => {
                    tokens.extend(embedded_s().tokens.iter().copied());
                    tokens.extend(embedded_s().tokens.iter().copied());
                }
            }
        }
        Mp4Word::new(tokens)
    }
}

/// `((0,−1;1,0), √τ)` embedded in `Mp₄(Z)`: `T(−E₁₁)·S⁻¹·T(−E₁₁)·S·T(−E₁₁)`, with the
/// covering sign fixed so that `φ̃(τ) = √τ₁`.
pub fn embedded_s() -> &'static Mp4Word {
    static CELL: OnceLock<Mp4Word> = OnceLock::new();
    CELL.get_or_init(|| {
        let tm = Mp4Token::T([[-1, 0], [0, 0]]);
        let s = Mp4Token::S;
        let mut word = Mp4Word::new(vec![tm, s, s, s, tm, s, tm]);
        let tau = mp4_test_point();
        if (word.phi(&tau) - tau[(0, 0)].sqrt()).norm() > 1e-9 {
            word.tokens.push(Mp4Token::Minus);
        }
        word
    })
}

/// The representation `ρ_{L,σ₂}` of the Jacobi group on `C[D_L]`.
pub fn rho_jacobi(lattice: &EvenLattice, sigma2: usize, element: &JacobiElement) -> DMatrix<Complex64> {
    let rho1 = WeilRep1::new(lattice);
    rho_jacobi_with(&rho1, sigma2, element)
}

pub fn rho_jacobi_with(rho1: &WeilRep1, sigma2: usize, element: &JacobiElement) -> DMatrix<Complex64> {
    heisenberg_matrix(rho1.disc(), sigma2, element.lambda, element.mu, element.kappa) * rho1.matrix(&element.mp2)
}

/// `e_{σ₁} ↦ e_{σ₁ − μσ₂}(λ(σ₁,σ₂) + (κ − λμ)q(σ₂))`.
pub fn heisenberg_matrix(d: &DiscriminantGroup, sigma2: usize, lambda: i64, mu: i64, kappa: i64) -> DMatrix<Complex64> {
    let n = d.order();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let target_shift = d.scale(-mu, sigma2);
    for s1 in 0..n {
        let phase = lambda as f64 * d.bilinear_f64(s1, sigma2) + (kappa - lambda * mu) as f64 * d.q_f64(sigma2);
        m[(d.add(s1, target_shift), s1)] = e(phase);
    }
    m
}

/// Maximum deviation between `ρ_{L,2}(embedded element)` restricted to the slice
/// `σ₂` and `ρ_{L,σ₂}(element) ⊗ e_{σ₂}`.
pub fn jacobi_compatibility_deviation(lattice: &EvenLattice, element: &JacobiElement) -> f64 {
    let rho2 = super::WeilRep2::new(lattice);
    let rho1 = WeilRep1::new(lattice);
    let big = rho2.matrix(&element.embed());
    let n = rho1.dim();
    let mut dev: f64 = 0.0;
    for s2 in 0..n {
        let small = rho_jacobi_with(&rho1, s2, element);
        for s1 in 0..n {
            let col = rho2.index(s1, s2);
            for t1 in 0..n {
                for t2 in 0..n {
                    let expected = if t2 == s2 { small[(t1, s1)] } else { Complex64::new(0.0, 0.0) };
                    dev = dev.max((big[(rho2.index(t1, t2), col)] - expected).norm());
                }
            }
        }
    }
    dev
}

/// Embed a `K′` vector (in `K` coordinates) into `D_L`.
fn k_class_in_l(disc_l: &DiscriminantGroup, split: &HyperbolicSplit, k_vec: &[Rat]) -> Result<usize> {
    disc_l.index_of(&split.k_to_l_rat(k_vec))
}

/// Evaluate both sides of Kiefer's identity for `σ ∈ D_K`, an `Mp₂(Z)` word and `n ∈ Z`,
/// returning `(lhs, rhs)` as vectors of `C[D_L]`.
pub fn kiefer_sides(
    lattice: &EvenLattice,
    split: &HyperbolicSplit,
    sigma: usize,
    word: &Mp2Word,
    n: i64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let k = split.k_lattice(lattice)?;
    let dl = lattice.discriminant_group();
    let dk = k.discriminant_group();
    if sigma >= dk.order() {
        return Err(Error::InvalidInput("σ outside D_K".into()));
    }
    let level = split.level as i64;
    if level == 0 {
        return Err(Error::Precondition("split level must be positive".into()));
    }
    let rho_l = WeilRep1::new(lattice);
    let rho_k = WeilRep1::new(&k);
    let nl = dl.order();
    let u_over_n: Vec<Rat> = split.u.iter().map(|&x| Rat::new(x.into(), level.into())).collect();
    let u_class = dl.index_of(&u_over_n)?;
    let up_class = dl.index_of(&split.u_prime)?;
    let q_up = rat_to_f64(&(lattice.bilinear_rat(&split.u_prime, &split.u_prime) / Rat::from_integer(2.into())));
    let [[a, _], [c, _]] = word.matrix();

    let sigma_l = k_class_in_l(&dl, split, dk.lift(sigma))?;
    let mut v = DVector::from_element(nl, Complex64::new(0.0, 0.0));
    for m in 0..level {
        v[dl.add(sigma_l, dl.scale(m, u_class))] += e(-((m * n) as f64) / level as f64);
    }
    let lhs = rho_l.matrix(word) * v;

    let mut ek = DVector::from_element(dk.order(), Complex64::new(0.0, 0.0));
    ek[sigma] = Complex64::new(1.0, 0.0);
    let kside = rho_k.matrix(word) * ek;
    let mut rhs = vec![Complex64::new(0.0, 0.0); nl];
    for (sk, coeff) in kside.iter().enumerate() {
        if coeff.norm() == 0.0 {
            continue;
        }
        let base = k_class_in_l(&dl, split, dk.lift(sk))?;
        for m in 0..level {
            let shift = dl.add(dl.scale(m, u_class), dl.scale(-n * c, up_class));
            let phase = -((a * m * n) as f64) / level as f64 + q_up * (a * c * n * n) as f64;
            rhs[dl.add(base, shift)] += coeff * e(phase);
        }
    }
    Ok((lhs.iter().copied().collect(), rhs))
}

/// Maximum entrywise deviation in Kiefer's identity over all `σ ∈ D_K`.
pub fn kiefer_identity_check(lattice: &EvenLattice, split: &HyperbolicSplit, word: &Mp2Word, n: i64) -> Result<f64> {
    let k = split.k_lattice(lattice)?;
    let mut dev: f64 = 0.0;
    for sigma in 0..k.discriminant_group().order() {
        let (lhs, rhs) = kiefer_sides(lattice, split, sigma, word, n)?;
        dev = dev.max(crate::numeric::max_dev(&lhs, &rhs));
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn embedded_s_has_klingen_shape() {
        let w = embedded_s();
        let m = w.matrix();
        let expected = [[0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]];
        assert_eq!(m, expected);
        let tau = mp4_test_point();
        assert!((w.phi(&tau) - tau[(0, 0)].sqrt()).norm() < 1e-10);
    }

    #[test]
    fn heisenberg_embedding_acts_on_z() {
        let el = JacobiElement::heisenberg(2, -1, 3);
        let tau = mp4_test_point();
        let img = el.embed().act(&tau);
        assert!((img[(0, 0)] - tau[(0, 0)]).norm() < 1e-12);
        let z = tau[(0, 1)] + 2.0 - tau[(0, 0)];
        assert!((img[(0, 1)] - z).norm() < 1e-12);
    }

    #[test]
    fn heisenberg_examples() {
        let l = EvenLattice::from_name("A1").unwrap();
        let id = rho_jacobi(&l, 1, &JacobiElement::default());
        assert!((id - DMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-15));
        let m = rho_jacobi(&l, 1, &JacobiElement::heisenberg(1, 0, 0));
        // (gen, gen) = 1/2 → e(1/2) = −1.
        assert!((m[(1, 1)] + 1.0).norm() < 1e-15);
        assert!((m[(0, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn compatibility_small() {
        let l = EvenLattice::from_name("A1").unwrap();
        for el in [
            JacobiElement::heisenberg(1, 0, 0),
            JacobiElement::heisenberg(0, 1, 0),
            JacobiElement::heisenberg(1, 1, 1),
            JacobiElement::modular(Mp2Word::parse("T").unwrap()),
            JacobiElement::modular(Mp2Word::parse("S").unwrap()),
            JacobiElement { lambda: 2, mu: -1, kappa: 1, mp2: Mp2Word::parse("S,T^2,S,Z").unwrap() },
        ] {
            let dev = jacobi_compatibility_deviation(&l, &el);
            assert!(dev < 1e-12, "{el:?}: {dev}");
        }
    }

    #[test]
    fn kiefer_on_u2_a1() {
        let l = EvenLattice::from_name("U(2)+A1").unwrap();
        let split = HyperbolicSplit::from_vectors(&l, vec![1, 0, 0], vec![rat(0, 1), rat(1, 2), rat(0, 1)]).unwrap();
        assert_eq!(split.level, 2);
        for w in ["", "T", "S", "T,S", "S,T^3,S"] {
            for n in 0..3 {
                let dev = kiefer_identity_check(&l, &split, &Mp2Word::parse(w).unwrap(), n).unwrap();
                assert!(dev < 1e-12, "{w} {n}: {dev}");
            }
        }
    }
}
