use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{DiscriminantGroup, EvenLattice};
use crate::numeric::e;

/// Integer 4×4 symplectic matrix in block form `[[A, B], [C, D]]`.
pub type Sp4 = [[i64; 4]; 4];

/// Complex symmetric 2×2 matrix (a point of the Siegel upper half-space).
pub type Siegel = Matrix2<Complex64>;

pub fn sp4_mul(x: &Sp4, y: &Sp4) -> Sp4 {
    let mut out = [[0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    out
}

pub fn sp4_identity() -> Sp4 {
    let mut m = [[0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

fn block(m: &Sp4, r: usize, c: usize) -> Siegel {
    Matrix2::from_fn(|i, j| Complex64::new(m[2 * r + i][2 * c + j] as f64, 0.0))
}

/// `M·τ = (Aτ + B)(Cτ + D)⁻¹`.
pub fn sp4_act(m: &Sp4, tau: &Siegel) -> Siegel {
    let (a, b, c, d) = (block(m, 0, 0), block(m, 0, 1), block(m, 1, 0), block(m, 1, 1));
    let inv = (c * tau + d).try_inverse().expect("Cτ + D is invertible on H₂");
    let r = (a * tau + b) * inv;
    // Symmetrise against rounding.
    Matrix2::from_fn(|i, j| (r[(i, j)] + r[(j, i)]) * 0.5)
}

/// `Cτ + D`.
pub fn sp4_cd(m: &Sp4, tau: &Siegel) -> Siegel {
    block(m, 1, 0) * tau + block(m, 1, 1)
}

/// Generators of `Mp₄(Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mp4Token {
    /// `(diag(A, A⁻ᵗ), √det A)` for `A ∈ GL₂(Z)`.
    A([[i64; 2]; 2]),
    /// `([[I, B], [0, I]], 1)` for symmetric integral `B`.
    T([[i64; 2]; 2]),
    /// `([[0, −I], [I, 0]], det(τ)^{1/2})` with the holomorphic root equal to `√τ₁√τ₃` on diagonal `τ`.
    S,
    /// `Z = S² = (−I₄, −1)`.
    Z,
    /// `(I₄, −1)`, the nontrivial element of the kernel of the covering map.
    Minus,
}

fn det_i(a: &[[i64; 2]; 2]) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

impl Mp4Token {
    pub fn validate(&self) -> Result<()> {
        match self {
            Mp4Token::A(a) if det_i(a).abs() != 1 => Err(Error::InvalidInput(format!("A{a:?} is not in GL2(Z)"))),
            Mp4Token::T(b) if b[0][1] != b[1][0] => Err(Error::InvalidInput(format!("T{b:?} is not symmetric"))),
            _ => Ok(()),
        }
    }

    pub fn matrix(&self) -> Sp4 {
        let mut m = [[0; 4]; 4];
        match *self {
            Mp4Token::A(a) => {
                let det = det_i(&a);
                // A⁻ᵗ = (1/det)[[d, −c], [−b, a]]
                let ait = [[a[1][1] * det, -a[1][0] * det], [-a[0][1] * det, a[0][0] * det]];
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] = a[i][j];
                        m[2 + i][2 + j] = ait[i][j];
                    }
                }
            }
            Mp4Token::T(b) => {
                m = sp4_identity();
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][2 + j] = b[i][j];
                    }
                }
            }
            Mp4Token::S => {
                for i in 0..2 {
                    m[i][2 + i] = -1;
                    m[2 + i][i] = 1;
                }
            }
            Mp4Token::Z => {
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = -1;
                }
            }
            Mp4Token::Minus => m = sp4_identity(),
        }
        m
    }

    pub fn phi(&self, tau: &Siegel) -> Complex64 {
        match self {
            Mp4Token::A(a) => Complex64::new(det_i(a) as f64, 0.0).sqrt(),
            Mp4Token::T(_) => Complex64::new(1.0, 0.0),
            Mp4Token::S => Complex64::new(0.0, 1.0) * (-tau.determinant()).sqrt(),
            Mp4Token::Z | Mp4Token::Minus => Complex64::new(-1.0, 0.0),
        }
    }

    fn parse(raw: &str) -> Result<Self> {
        let raw = raw.trim();
        let tok = match raw {
            "S" => Mp4Token::S,
            "Z" => Mp4Token::Z,
            "-1" | "Minus" => Mp4Token::Minus,
            _ => {
                let (kind, rest) = raw.split_at(1);
                let m: Vec<Vec<i64>> = serde_json::from_str(rest.trim())
                    .map_err(|e| Error::Parse(format!("bad matrix in generator {raw:?}: {e}")))?;
                if m.len() != 2 || m.iter().any(|r| r.len() != 2) {
                    return Err(Error::Parse(format!("generator {raw:?} needs a 2x2 matrix")));
                }
                let a = [[m[0][0], m[0][1]], [m[1][0], m[1][1]]];
                match kind {
                    "A" => Mp4Token::A(a),
                    "T" => Mp4Token::T(a),
                    _ => return Err(Error::Parse(format!("unknown Mp4 generator {raw:?}"))),
                }
            }
        };
        tok.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(tok)
    }
}

impl std::fmt::Display for Mp4Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mat = |m: &[[i64; 2]; 2]| format!("[[{},{}],[{},{}]]", m[0][0], m[0][1], m[1][0], m[1][1]);
        match self {
            Mp4Token::A(a) => write!(f, "A{}", mat(a)),
            Mp4Token::T(b) => write!(f, "T{}", mat(b)),
            Mp4Token::S => write!(f, "S"),
            Mp4Token::Z => write!(f, "Z"),
            Mp4Token::Minus => write!(f, "-1"),
        }
    }
}

/// Generic test point of `H₂` for branch comparisons.
pub fn mp4_test_point() -> Siegel {
    Matrix2::new(
        Complex64::new(0.113, 1.21),
        Complex64::new(0.071, 0.173),
        Complex64::new(0.071, 0.173),
        Complex64::new(-0.052, 1.37),
    )
}

/// A word in the generators of `Mp₄(Z)`, multiplied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mp4Word {
    pub tokens: Vec<Mp4Token>,
}

impl Mp4Word {
    pub fn new(tokens: Vec<Mp4Token>) -> Self {
        Mp4Word { tokens }
    }

    pub fn identity() -> Self {
        Mp4Word::default()
    }

    pub fn matrix(&self) -> Sp4 {
        self.tokens.iter().fold(sp4_identity(), |acc, t| sp4_mul(&acc, &t.matrix()))
    }

    pub fn concat(&self, other: &Mp4Word) -> Mp4Word {
        Mp4Word { tokens: self.tokens.iter().chain(&other.tokens).copied().collect() }
    }

    /// `φ(τ)`, a holomorphic square root of `det(Cτ + D)`.
    pub fn phi(&self, tau: &Siegel) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut cur = *tau;
        for t in self.tokens.iter().rev() {
            acc *= t.phi(&cur);
            cur = sp4_act(&t.matrix(), &cur);
        }
        acc
    }

    pub fn act(&self, tau: &Siegel) -> Siegel {
        sp4_act(&self.matrix(), tau)
    }

    /// Parse comma-separated generators such as `"S,T[[1,0],[0,0]],A[[0,1],[1,0]],Z"`.
    pub fn parse(s: &str) -> Result<Mp4Word> {
        let mut tokens = Vec::new();
        let mut depth = 0i32;
        let mut cur = String::new();
        for ch in s.chars() {
            match ch {
                '[' => depth += 1,
                ']' => depth -= 1,
                _ => {}
            }
            if ch == ',' && depth == 0 {
                if !cur.trim().is_empty() {
                    tokens.push(Mp4Token::parse(&cur)?);
                }
                cur.clear();
            } else {
                cur.push(ch);
            }
        }
        if depth != 0 {
            return Err(Error::Parse("unbalanced brackets in word".into()));
        }
        if !cur.trim().is_empty() {
            tokens.push(Mp4Token::parse(&cur)?);
        }
        Ok(Mp4Word::new(tokens))
    }
}

impl std::fmt::Display for Mp4Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.tokens.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The genus-2 Weil representation `ρ_{L,2}` of `Mp₄(Z)` on `C[D_L²]`; the basis
/// vector `e_{(σ₁,σ₂)}` has index `σ₁·|D_L| + σ₂`.
#[derive(Clone, Debug)]
pub struct WeilRep2 {
    disc: DiscriminantGroup,
    bplus: usize,
    bminus: usize,
}

impl WeilRep2 {
    pub fn new(lattice: &EvenLattice) -> Self {
        WeilRep2 { disc: lattice.discriminant_group(), bplus: lattice.bplus(), bminus: lattice.bminus() }
    }

    pub fn disc(&self) -> &DiscriminantGroup {
        &self.disc
    }

    pub fn dim(&self) -> usize {
        self.disc.order().pow(2)
    }

    pub fn pair(&self, idx: usize) -> (usize, usize) {
        let n = self.disc.order();
        (idx / n, idx % n)
    }

    pub fn index(&self, s1: usize, s2: usize) -> usize {
        s1 * self.disc.order() + s2
    }

    fn sig(&self) -> f64 {
        self.bminus as f64 - self.bplus as f64
    }

    /// `σ·M` for a row vector `σ = (σ₁, σ₂) ∈ D_L²` and an integer 2×2 matrix `M`.
    fn right_mul(&self, idx: usize, m: &[[i64; 2]; 2]) -> usize {
        let (s1, s2) = self.pair(idx);
        let d = &self.disc;
        let c1 = d.add(d.scale(m[0][0], s1), d.scale(m[1][0], s2));
        let c2 = d.add(d.scale(m[0][1], s1), d.scale(m[1][1], s2));
        self.index(c1, c2)
    }

    pub fn generator(&self, t: Mp4Token) -> DMatrix<Complex64> {
        let n = self.dim();
        let zero = Complex64::new(0.0, 0.0);
        let d = &self.disc;
        match t {
            Mp4Token::A(a) => {
                let det = det_i(&a);
                let ainv = [[a[1][1] * det, -a[0][1] * det], [-a[1][0] * det, a[0][0] * det]];
                let c = crate::numeric::cpow_principal(Complex64::new(det as f64, 0.0), self.sig() / 2.0);
                let mut m = DMatrix::from_element(n, n, zero);
                for j in 0..n {
                    m[(self.right_mul(j, &ainv), j)] = c;
                }
                m
            }
            Mp4Token::T(b) => DMatrix::from_fn(n, n, |i, j| {
                if i != j {
                    return zero;
                }
                let (s1, s2) = self.pair(i);
                // tr(q(σ)B) with q(σ) = ½((σ_i, σ_j)).
                let phase = b[0][0] as f64 * d.q_f64(s1) + b[1][1] as f64 * d.q_f64(s2) + b[0][1] as f64 * d.bilinear_f64(s1, s2);
                e(phase)
            }),
            Mp4Token::S => {
                let c = Complex64::from_polar(1.0 / d.order() as f64, std::f64::consts::PI * self.sig() / 2.0);
                DMatrix::from_fn(n, n, |i, j| {
                    let (a1, a2) = self.pair(i);
                    let (b1, b2) = self.pair(j);
                    c * e(-(d.bilinear_f64(a1, b1) + d.bilinear_f64(a2, b2)))
                })
            }
            Mp4Token::Z => {
                let c = Complex64::new(if (self.bminus + self.bplus) % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
                let mut m = DMatrix::from_element(n, n, zero);
                for j in 0..n {
                    let (s1, s2) = self.pair(j);
                    m[(self.index(d.neg(s1), d.neg(s2)), j)] = c;
                }
                m
            }
            Mp4Token::Minus => {
                let c = if (self.bminus + self.bplus) % 2 == 0 { 1.0 } else { -1.0 };
                DMatrix::from_diagonal_element(n, n, Complex64::new(c, 0.0))
            }
        }
    }

    pub fn matrix(&self, word: &Mp4Word) -> DMatrix<Complex64> {
        let n = self.dim();
        word.tokens.iter().fold(DMatrix::identity(n, n), |acc, &t| acc * self.generator(t))
    }

    pub fn apply(&self, word: &Mp4Word, v: &[Complex64]) -> Vec<Complex64> {
        let mut cur = nalgebra::DVector::from_column_slice(v);
        for &t in word.tokens.iter().rev() {
            cur = self.generator(t) * cur;
        }
        cur.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    #[test]
    fn branch_of_s_and_relations() {
        let tau = mp4_test_point();
        // S² = Z as metaplectic elements.
        let s2 = Mp4Word::parse("S,S").unwrap();
        assert_eq!(s2.matrix(), Mp4Token::Z.matrix());
        assert!((s2.phi(&tau) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let s4 = Mp4Word::parse("S,S,S,S").unwrap();
        assert!((s4.phi(&tau) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // φ_S is a square root of det(Cτ + D) = det τ.
        let s = Mp4Word::parse("S").unwrap();
        assert!((s.phi(&tau).powi(2) - tau.determinant()).norm() < 1e-12);
        let diag =
            Matrix2::new(Complex64::new(0.3, 1.1), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-0.2, 0.7));
        assert!((s.phi(&diag) - diag[(0, 0)].sqrt() * diag[(1, 1)].sqrt()).norm() < 1e-12);
    }

    #[test]
    fn trivial_discriminant() {
        let l = EvenLattice::from_name("U+U").unwrap();
        let rho = WeilRep2::new(&l);
        for w in ["S", "T[[1,0],[0,0]]", "A[[0,1],[1,0]]", "Z"] {
            let m = rho.matrix(&Mp4Word::parse(w).unwrap());
            assert_eq!(m.shape(), (1, 1));
            assert!((m[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15, "{w}");
        }
    }

    #[test]
    fn relations_a1() {
        let l = EvenLattice::from_name("A1").unwrap();
        let rho = WeilRep2::new(&l);
        let s = rho.generator(Mp4Token::S);
        let z = rho.generator(Mp4Token::Z);
        assert!(close(&(&s * &s), &z, 1e-12));
        assert!(close(&(&z * &z), &DMatrix::identity(4, 4), 1e-12));
        // A1: T(diag(1,0)) on (gen, gen) gives e(1/4) = i.
        let t = rho.generator(Mp4Token::T([[1, 0], [0, 0]]));
        let idx = rho.index(1, 1);
        assert!((t[(idx, idx)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        // (I, −1) = Z·A(−I).
        let w = Mp4Word::parse("Z,A[[-1,0],[0,-1]]").unwrap();
        assert!(close(&rho.matrix(&w), &rho.generator(Mp4Token::Minus), 1e-12));
        assert!((w.phi(&mp4_test_point()) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn parse_and_display() {
        let w = Mp4Word::parse("S, T[[1,0],[0,0]],A[[0,1],[1,0]],Z").unwrap();
        assert_eq!(w.tokens.len(), 4);
        assert_eq!(w.to_string(), "S,T[[1,0],[0,0]],A[[0,1],[1,0]],Z");
        assert!(Mp4Word::parse("T[[1,2],[0,0]]").is_err());
        assert!(Mp4Word::parse("A[[2,0],[0,1]]").is_err());
        assert!(Mp4Word::parse("S,T[[1,0],[0,0]").is_err());
        assert!(Mp4Word::parse("Q").is_err());
    }
}
