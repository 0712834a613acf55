use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{DiscriminantGroup, EvenLattice};
use crate::numeric::e;

/// Integer 2×2 matrix `[[a, b], [c, d]]`.
pub type Sl2 = [[i64; 2]; 2];

pub fn sl2_mul(x: &Sl2, y: &Sl2) -> Sl2 {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Möbius action `(aτ + b)/(cτ + d)`.
pub fn mobius(m: &Sl2, tau: Complex64) -> Complex64 {
    (tau * m[0][0] as f64 + m[0][1] as f64) / (tau * m[1][0] as f64 + m[1][1] as f64)
}

/// Generators of `Mp₂(Z)`: `T^n = ([[1,n],[0,1]], 1)`, `S = ([[0,−1],[1,0]], √τ)`,
/// and `Z = S² = (−I, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mp2Token {
    T(i64),
    S,
    Z,
}

impl Mp2Token {
    pub fn matrix(&self) -> Sl2 {
        match *self {
            Mp2Token::T(n) => [[1, n], [0, 1]],
            Mp2Token::S => [[0, -1], [1, 0]],
            Mp2Token::Z => [[-1, 0], [0, -1]],
        }
    }

    /// The square-root factor `φ(τ)`.
    pub fn phi(&self, tau: Complex64) -> Complex64 {
        match self {
            Mp2Token::T(_) => Complex64::new(1.0, 0.0),
            Mp2Token::S => tau.sqrt(),
            Mp2Token::Z => Complex64::new(0.0, 1.0),
        }
    }
}

/// A word in the generators of `Mp₂(Z)`, multiplied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mp2Word {
    pub tokens: Vec<Mp2Token>,
}

/// Generic test point used to compare square-root branches.
pub const MP2_TEST_POINT: Complex64 = Complex64::new(0.1234, 1.3579);

impl Mp2Word {
    pub fn new(tokens: Vec<Mp2Token>) -> Self {
        Mp2Word { tokens }
    }

    pub fn identity() -> Self {
        Mp2Word::default()
    }

    pub fn matrix(&self) -> Sl2 {
        self.tokens.iter().fold([[1, 0], [0, 1]], |acc, t| sl2_mul(&acc, &t.matrix()))
    }

    /// `φ(τ)` for the product, using `(M, f)(N, g) = (MN, f(N·)g(·))`.
    pub fn phi(&self, tau: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut cur = tau;
        for t in self.tokens.iter().rev() {
            acc *= t.phi(cur);
            cur = mobius(&t.matrix(), cur);
        }
        acc
    }

    pub fn act(&self, tau: Complex64) -> Complex64 {
        mobius(&self.matrix(), tau)
    }

    pub fn concat(&self, other: &Mp2Word) -> Mp2Word {
        Mp2Word { tokens: self.tokens.iter().chain(&other.tokens).copied().collect() }
    }

    /// Whether `φ` is the principal root `√(cτ + d)` (the standard preimage).
    pub fn is_standard(&self) -> bool {
        let m = self.matrix();
        let std = (MP2_TEST_POINT * m[1][0] as f64 + m[1][1] as f64).sqrt();
        (self.phi(MP2_TEST_POINT) - std).norm() < 1e-6 * std.norm().max(1.0)
    }

    /// Standard preimage of `γ ∈ SL₂(Z)` (principal `√(cτ + d)`) as a generator word.
    pub fn standard_preimage(gamma: &Sl2) -> Result<Mp2Word> {
        let det = gamma[0][0] * gamma[1][1] - gamma[0][1] * gamma[1][0];
        if det != 1 {
            return Err(Error::InvalidInput(format!("{gamma:?} is not in SL2(Z)")));
        }
        // Euclid: γ = T^{n₁} S T^{n₂} S ⋯, reducing |c| each step.
        let mut tokens = Vec::new();
        let mut m = *gamma;
        while m[1][0] != 0 {
            let n = m[0][0].div_euclid(m[1][0]);
            if n != 0 {
                tokens.push(Mp2Token::T(n));
            }
            // m ← S⁻¹ T^{-n} m
            let r = [[m[0][0] - n * m[1][0], m[0][1] - n * m[1][1]], [m[1][0], m[1][1]]];
            m = [[r[1][0], r[1][1]], [-r[0][0], -r[0][1]]];
            tokens.push(Mp2Token::S);
        }
        if m[0][0] == -1 {
            tokens.push(Mp2Token::Z);
            m = [[-m[0][0], -m[0][1]], [0, -m[1][1]]];
        }
        if m[0][1] != 0 {
            tokens.push(Mp2Token::T(m[0][1]));
        }
        let mut word = Mp2Word::new(tokens);
        debug_assert_eq!(word.matrix(), *gamma);
        if !word.is_standard() {
            word.tokens.extend([Mp2Token::Z, Mp2Token::Z]);
        }
        debug_assert!(word.is_standard());
        Ok(word)
    }

    /// Parse `"S,T,T^3,T^-1,Z"` (also `T[n]`).
    pub fn parse(s: &str) -> Result<Mp2Word> {
        let mut tokens = Vec::new();
        for raw in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let tok = match raw {
                "S" => Mp2Token::S,
                "Z" => Mp2Token::Z,
                "T" => Mp2Token::T(1),
                _ => {
                    let exp = raw
                        .strip_prefix("T^")
                        .or_else(|| raw.strip_prefix("T[").and_then(|r| r.strip_suffix(']')))
                        .ok_or_else(|| Error::Parse(format!("unknown Mp2 generator {raw:?}")))?;
                    Mp2Token::T(exp.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in {raw:?}")))?)
                }
            };
            tokens.push(tok);
        }
        Ok(Mp2Word::new(tokens))
    }
}

/// The genus-1 Weil representation `ρ_L` of `Mp₂(Z)` on `C[D_L]`.
#[derive(Clone, Debug)]
pub struct WeilRep1 {
    disc: DiscriminantGroup,
    bplus: usize,
    bminus: usize,
}

impl WeilRep1 {
    pub fn new(lattice: &EvenLattice) -> Self {
        WeilRep1 { disc: lattice.discriminant_group(), bplus: lattice.bplus(), bminus: lattice.bminus() }
    }

    pub fn from_parts(disc: DiscriminantGroup, bplus: usize, bminus: usize) -> Self {
        WeilRep1 { disc, bplus, bminus }
    }

    pub fn disc(&self) -> &DiscriminantGroup {
        &self.disc
    }

    pub fn dim(&self) -> usize {
        self.disc.order()
    }

    fn sig(&self) -> f64 {
        self.bminus as f64 - self.bplus as f64
    }

    pub fn generator(&self, t: Mp2Token) -> DMatrix<Complex64> {
        let n = self.dim();
        match t {
            Mp2Token::T(k) => {
                DMatrix::from_fn(n, n, |i, j| if i == j { e(k as f64 * self.disc.q_f64(i)) } else { Complex64::new(0.0, 0.0) })
            }
            Mp2Token::S => {
                let c = Complex64::from_polar(1.0 / (n as f64).sqrt(), std::f64::consts::PI * self.sig() / 4.0);
                DMatrix::from_fn(n, n, |i, j| c * e(-self.disc.bilinear_f64(i, j)))
            }
            Mp2Token::Z => {
                let c = Complex64::from_polar(1.0, std::f64::consts::PI * self.sig() / 2.0);
                DMatrix::from_fn(n, n, |i, j| if i == self.disc.neg(j) { c } else { Complex64::new(0.0, 0.0) })
            }
        }
    }

    pub fn matrix(&self, word: &Mp2Word) -> DMatrix<Complex64> {
        let n = self.dim();
        word.tokens.iter().fold(DMatrix::identity(n, n), |acc, &t| acc * self.generator(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        (a - b).iter().all(|z| z.norm() < 1e-12)
    }

    #[test]
    fn euclid_preimages() {
        for gamma in
            [[[1, 0], [0, 1]], [[-1, 0], [0, -1]], [[2, 1], [1, 1]], [[1, 0], [-3, 1]], [[-5, 2], [-3, 1]], [[0, 1], [-1, 0]]]
        {
            let w = Mp2Word::standard_preimage(&gamma).unwrap();
            assert_eq!(w.matrix(), gamma);
            assert!(w.is_standard());
        }
        assert!(Mp2Word::standard_preimage(&[[2, 0], [0, 1]]).is_err());
    }

    #[test]
    fn relations_a1() {
        let l = EvenLattice::from_name("A1").unwrap();
        let rho = WeilRep1::new(&l);
        let s = rho.generator(Mp2Token::S);
        let z = rho.generator(Mp2Token::Z);
        assert!(close(&(&s * &s), &z));
        let st = Mp2Word::parse("S,T").unwrap();
        let m = rho.matrix(&st);
        // (ST)³ = S² = Z in Mp₂(Z).
        assert!(close(&(&m * &m * &m), &z));
        assert!(close(&(m.adjoint() * &m), &DMatrix::identity(2, 2)));
        // T acts by e(q(γ)) = e(1/4) on the generator.
        let t = rho.generator(Mp2Token::T(1));
        assert!((t[(1, 1)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn parse_words() {
        let w = Mp2Word::parse("S, T^-2,T[3],Z").unwrap();
        assert_eq!(w.tokens, vec![Mp2Token::S, Mp2Token::T(-2), Mp2Token::T(3), Mp2Token::Z]);
        assert!(Mp2Word::parse("Q").is_err());
    }
}
