//! Even lattices, discriminant forms, Grassmannian frames, hyperbolic splittings
//! and Eichler transformations.

mod discriminant;
mod frame;
mod split;

pub use discriminant::{milgram_expected, DiscriminantGroup};
pub use frame::{FrameFile, GrassmannianFrame, DEGENERATE_TOLERANCE};
pub use split::{eichler_transform, HyperbolicSplit, Projections, SplitGeometry};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::{inertia, IntMatrix, Rat, RatMatrix};

/// An even lattice given by an integral symmetric Gram matrix with even diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvenLattice {
    name: String,
    gram: IntMatrix,
    bplus: usize,
    bminus: usize,
}

/// On-disk form of a lattice: `{"gram": [[int]], "name": string}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    pub gram: Vec<Vec<i64>>,
    #[serde(default)]
    pub name: String,
}

impl EvenLattice {
    /// Validate and wrap a Gram matrix.
    pub fn new(name: impl Into<String>, gram: IntMatrix) -> Result<Self> {
        if !gram.is_square() || gram.rows() == 0 {
            return Err(Error::InvalidLattice("Gram matrix must be square and nonempty".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::InvalidLattice("Gram matrix is not symmetric".into()));
        }
        if (0..gram.rows()).any(|i| gram[(i, i)].is_odd()) {
            return Err(Error::InvalidLattice("diagonal entries must be even".into()));
        }
        let (bplus, bminus, zero) = inertia(&gram.to_rat())?;
        if zero > 0 {
            return Err(Error::InvalidLattice("Gram matrix is degenerate".into()));
        }
        Ok(EvenLattice { name: name.into(), gram, bplus, bminus })
    }

    pub fn from_i64(name: impl Into<String>, rows: &[Vec<i64>]) -> Result<Self> {
        EvenLattice::new(name, IntMatrix::from_i64(rows)?)
    }

    pub fn from_file(file: &LatticeFile) -> Result<Self> {
        EvenLattice::from_i64(file.name.clone(), &file.gram)
    }

    pub fn to_file(&self) -> LatticeFile {
        LatticeFile { gram: self.gram_i64(), name: self.name.clone() }
    }

    /// Parse a lattice name such as `U+U+A1`, `U(2)+A1`, `E8+E8+<2>` or `A1(-1)`.
    ///
    /// Summands: `U`, `U(n)`, `A1`, `A2`, `E8` (optionally rescaled as `X(n)`, e.g.
    /// `A1(-1)`), and `<2d>` for the rank-one lattice with Gram `[[2d]]`.
    pub fn from_name(name: &str) -> Result<Self> {
        let mut acc: Option<IntMatrix> = None;
        for part in name.split('+').map(str::trim) {
            let block = named_block(part)?;
            acc = Some(match acc {
                None => block,
                Some(m) => block_sum(&m, &block),
            });
        }
        let gram = acc.ok_or_else(|| Error::Parse("empty lattice name".into()))?;
        EvenLattice::new(name, gram)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn gram_rat(&self) -> RatMatrix {
        self.gram.to_rat()
    }

    pub fn gram_i64(&self) -> Vec<Vec<i64>> {
        self.gram.to_i64().expect("Gram entries fit in i64")
    }

    pub fn gram_f64(&self) -> Vec<Vec<f64>> {
        self.gram.to_f64()
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    /// Signature `(b⁺, b⁻)`.
    pub fn signature(&self) -> (usize, usize) {
        (self.bplus, self.bminus)
    }

    pub fn bplus(&self) -> usize {
        self.bplus
    }

    pub fn bminus(&self) -> usize {
        self.bminus
    }

    pub fn det(&self) -> BigInt {
        self.gram.det().expect("square")
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &EvenLattice) -> EvenLattice {
        let gram = block_sum(&self.gram, &other.gram);
        EvenLattice::new(format!("{}+{}", self.name, other.name), gram).expect("direct sum of even lattices")
    }

    /// Integral quadratic value `q(v) = vᵗSv/2` of a lattice vector.
    pub fn q_int(&self, v: &[i64]) -> i64 {
        self.bilinear_int(v, v) / 2
    }

    pub fn bilinear_int(&self, a: &[i64], b: &[i64]) -> i64 {
        let g = self.gram_i64();
        let mut acc = 0i64;
        for i in 0..a.len() {
            for j in 0..b.len() {
                acc += a[i] * g[i][j] * b[j];
            }
        }
        acc
    }

    /// Exact bilinear form on rational coordinate vectors.
    pub fn bilinear_rat(&self, a: &[Rat], b: &[Rat]) -> Rat {
        crate::exactalg::bilinear(&self.gram_rat(), a, b)
    }

    /// Real bilinear form on coordinate vectors.
    pub fn bilinear_f64(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.rank();
        let mut acc = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let s = self.gram[(i, j)].to_f64().unwrap_or(0.0);
                if s != 0.0 {
                    acc += a[i] * s * b[j];
                }
            }
        }
        acc
    }

    pub fn q_f64(&self, v: &[f64]) -> f64 {
        0.5 * self.bilinear_f64(v, v)
    }

    /// Sublattice spanned by integral basis vectors, with its induced Gram matrix.
    pub fn sublattice(&self, name: impl Into<String>, basis: &[Vec<i64>]) -> Result<EvenLattice> {
        let gram = IntMatrix::from_fn(basis.len(), basis.len(), |i, j| BigInt::from(self.bilinear_int(&basis[i], &basis[j])));
        EvenLattice::new(name, gram)
    }

    pub fn discriminant_group(&self) -> DiscriminantGroup {
        DiscriminantGroup::new(self)
    }
}

fn block_sum(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let (n, m) = (a.rows(), b.rows());
    IntMatrix::from_fn(n + m, n + m, |i, j| {
        if i < n && j < n {
            a[(i, j)].clone()
        } else if i >= n && j >= n {
            b[(i - n, j - n)].clone()
        } else {
            BigInt::zero()
        }
    })
}

fn named_block(part: &str) -> Result<IntMatrix> {
    let bad = || Error::Parse(format!("unknown lattice summand '{part}'"));
    if let Some(inner) = part.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
        let n: i64 = inner.trim().parse().map_err(|_| bad())?;
        return IntMatrix::from_i64(&[vec![n]]);
    }
    let (base, scale) = match part.find('(') {
        Some(p) if part.ends_with(')') => {
            let s: i64 = part[p + 1..part.len() - 1].trim().parse().map_err(|_| bad())?;
            (&part[..p], s)
        }
        Some(_) => return Err(bad()),
        None => (part, 1),
    };
    let rows: Vec<Vec<i64>> = match base {
        "U" | "H" => vec![vec![0, 1], vec![1, 0]],
        "A1" => vec![vec![2]],
        "A2" => vec![vec![2, -1], vec![-1, 2]],
        "E8" => e8_gram(),
        _ => return Err(bad()),
    };
    if scale == 0 {
        return Err(bad());
    }
    IntMatrix::from_i64(&rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect::<Vec<_>>())
}

/// Gram matrix of the E8 root lattice (Cartan matrix of the T(2,3,5) diagram).
pub fn e8_gram() -> Vec<Vec<i64>> {
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];
    for (a, b) in edges {
        g[a][b] = -1;
        g[b][a] = -1;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_lattices() {
        let l = EvenLattice::from_name("U+U+A1").unwrap();
        assert_eq!(l.rank(), 5);
        assert_eq!(l.signature(), (3, 2));
        let e8 = EvenLattice::from_name("E8").unwrap();
        assert_eq!(e8.det(), BigInt::from(1));
        assert_eq!(e8.signature(), (8, 0));
        let a1m = EvenLattice::from_name("A1(-1)").unwrap();
        assert_eq!(a1m.signature(), (0, 1));
        let u2 = EvenLattice::from_name("U(2)+A1").unwrap();
        assert_eq!(u2.det(), BigInt::from(-8));
        let k3 = EvenLattice::from_name("<2>+E8+E8").unwrap();
        assert_eq!(k3.rank(), 17);
        assert!(EvenLattice::from_name("B7").is_err());
    }

    #[test]
    fn validation() {
        assert!(EvenLattice::from_i64("odd", &[vec![1]]).is_err());
        assert!(EvenLattice::from_i64("asym", &[vec![2, 1], vec![0, 2]]).is_err());
        assert!(EvenLattice::from_i64("degenerate", &[vec![2, 2], vec![2, 2]]).is_err());
    }
}
