use std::collections::BTreeMap;

use num_complex::Complex64;

use super::coeff::{Coeff, PiRat};
use super::poly::MatrixPolynomial;
use crate::error::{Error, Result};

/// Index tuple `α = (α₁, α₂, β₁, β₂)` with 1-based entries in `1..=b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTuple {
    pub a1: usize,
    pub a2: usize,
    pub b1: usize,
    pub b2: usize,
}

impl IndexTuple {
    pub fn new(a1: usize, a2: usize, b1: usize, b2: usize) -> Self {
        IndexTuple { a1, a2, b1, b2 }
    }

    /// Admissible for the Kudla–Millson expansion: `α₁ < β₁` and `α₂ < β₂`.
    pub fn is_admissible(&self, b: usize) -> bool {
        self.in_range(b) && self.a1 < self.b1 && self.a2 < self.b2
    }

    pub fn in_range(&self, b: usize) -> bool {
        [self.a1, self.a2, self.b1, self.b2].iter().all(|&k| (1..=b).contains(&k))
    }

    /// The flag `α₁ ≠ α₂` and `β₁ ≠ β₂` (harmonic case).
    pub fn is_distinct(&self) -> bool {
        self.a1 != self.a2 && self.b1 != self.b2
    }

    /// All admissible tuples for a given `b`.
    pub fn all_admissible(b: usize) -> Vec<IndexTuple> {
        let pairs: Vec<(usize, usize)> = (1..=b).flat_map(|a| (a + 1..=b).map(move |c| (a, c))).collect();
        let mut out = Vec::new();
        for &(a1, b1) in &pairs {
            for &(a2, b2) in &pairs {
                out.push(IndexTuple::new(a1, a2, b1, b2));
            }
        }
        out
    }
}

impl std::fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.a1, self.a2, self.b1, self.b2)
    }
}

/// `P_α = 4 Σ_{σ,σ′} sgn(σ)sgn(σ′) x_{σ(α₁),1} x_{σ′(α₂),1} x_{σ(β₁),2} x_{σ′(β₂),2}`
/// on the `(b+bminus) × 2` grid, where `σ` permutes `{α₁, β₁}` and `σ′` permutes `{α₂, β₂}`.
pub fn build_p_alpha<C: Coeff>(alpha: IndexTuple, b: usize, bminus: usize) -> Result<MatrixPolynomial<C>> {
    if !alpha.in_range(b) {
        return Err(Error::InvalidInput(format!("index tuple {alpha} out of range for b = {b}")));
    }
    let rows = b + bminus;
    let x = |i: usize, j: usize| MatrixPolynomial::<C>::var(rows, 2, 0, i - 1, j);
    let minor = |a: usize, c: usize| x(a, 0).mul(&x(c, 1)).sub(&x(c, 0).mul(&x(a, 1)));
    Ok(minor(alpha.a1, alpha.b1).mul(&minor(alpha.a2, alpha.b2)).scale(&C::from_i64(4)))
}

/// `Q_α = exp(−tr(Δ)/8π) P_α`, exact in `Q[1/π]`.
pub fn build_q_alpha(alpha: IndexTuple, b: usize, bminus: usize) -> Result<MatrixPolynomial<PiRat>> {
    let p = build_p_alpha::<PiRat>(alpha, b, bminus)?;
    Ok(p.exp_operator(&identity2()))
}

pub fn identity2<C: Coeff>() -> Vec<Vec<C>> {
    vec![vec![C::one(), C::zero()], vec![C::zero(), C::one()]]
}

/// Symbolic test of very homogeneity of degree `(m⁺, m⁻)`: with a symbolic
/// `N ∈ C^{2×2}`, checks `P(x⁺N, x⁻) = det(N)^{m⁺} P` and `P(x⁺, x⁻N) = det(N)^{m⁻} P`
/// as exact polynomial identities.  Requires a two-column grid.
pub fn very_homogeneous_check<C: Coeff>(p: &MatrixPolynomial<C>, bplus: usize, mplus: u32, mminus: u32) -> bool {
    assert_eq!(p.cols(), 2, "very homogeneity is defined on two-column grids");
    assert_eq!(p.extra(), 0, "polynomial must not contain auxiliary variables");
    let rows = p.rows();
    let base = p.with_extra(4);
    let n = |k: usize| MatrixPolynomial::<C>::extra_var(rows, 2, 4, k);
    let det = n(0).mul(&n(3)).sub(&n(1).mul(&n(2)));
    let twisted = |range: std::ops::Range<usize>| {
        let images: Vec<MatrixPolynomial<C>> = (0..rows * 2 + 4)
            .map(|v| {
                if v >= rows * 2 {
                    return n(v - rows * 2);
                }
                let (i, j) = (v / 2, v % 2);
                let x = |c: usize| MatrixPolynomial::<C>::var(rows, 2, 4, i, c);
                if range.contains(&i) {
                    // (xN)_{i,j} = x_{i,0} N_{0,j} + x_{i,1} N_{1,j}
                    x(0).mul(&n(j)).add(&x(1).mul(&n(2 + j)))
                } else {
                    x(j)
                }
            })
            .collect();
        base.substitute(&images)
    };
    twisted(0..bplus) == base.mul(&det.pow(mplus)) && twisted(bplus..rows) == base.mul(&det.pow(mminus))
}

/// Values `(Q_α·φ₀)(g(v))` of the Kudla–Millson Schwartz function coefficients, where
/// `x = g(v)` is given as ambient columns `(x₁, x₂)` and `φ₀(x) = exp(−π Σ x²)`.
pub fn km_schwartz_coefficients(x1: &[f64], x2: &[f64], b: usize) -> Result<BTreeMap<IndexTuple, f64>> {
    let rows = x1.len();
    if x2.len() != rows || rows < b {
        return Err(Error::DimensionMismatch("ambient columns".into()));
    }
    let point: Vec<f64> = (0..rows).flat_map(|i| [x1[i], x2[i]]).collect();
    let gauss = (-std::f64::consts::PI * point.iter().map(|t| t * t).sum::<f64>()).exp();
    let mut out = BTreeMap::new();
    for alpha in IndexTuple::all_admissible(b) {
        let q = build_q_alpha(alpha, b, rows - b)?;
        let v: Complex64 = q.eval_f64(&point);
        out.insert(alpha, v.re * gauss);
    }
    Ok(out)
}
