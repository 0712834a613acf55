use std::collections::BTreeMap;

use super::coeff::Coeff;
use super::km::{very_homogeneous_check, IndexTuple};
use super::poly::MatrixPolynomial;

/// Exponent pair `(h₁, h₂)` of `(v₁,u_{z⊥})^{h₁}(v₂,u_{z⊥})^{h₂}`.
pub type HPair = (u16, u16);

/// Components `P_{w,h₁,h₂}` of a polynomial on a two-column grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Components<C> {
    /// `n = g(u_{z⊥})` in ambient coordinates (only positive rows may be nonzero).
    pub n: Vec<C>,
    pub parts: BTreeMap<HPair, MatrixPolynomial<C>>,
    /// Whether the input polynomial was very homogeneous of degree `(m, 0)`.
    pub input_very_homogeneous: bool,
}

impl<C: Coeff> Components<C> {
    /// The component for `h`, or the zero polynomial.
    pub fn get(&self, h: HPair) -> MatrixPolynomial<C> {
        self.parts.get(&h).cloned().unwrap_or_else(|| MatrixPolynomial::zero(self.rows(), 2, 0))
    }

    pub fn rows(&self) -> usize {
        self.n.len()
    }

    /// `Σ (x₁·n)^{h₁}(x₂·n)^{h₂} P_{w,h}(Π x)` evaluated at an ambient point (row-major grid).
    pub fn reconstruct_f64(&self, x: &[f64]) -> num_complex::Complex64 {
        let rows = self.rows();
        let n: Vec<f64> = self.n.iter().map(|c| c.to_c64().re).collect();
        let n2: f64 = n.iter().map(|a| a * a).sum();
        let t = [0, 1].map(|j| (0..rows).map(|i| x[2 * i + j] * n[i]).sum::<f64>());
        let mut projected = x.to_vec();
        for j in 0..2 {
            for i in 0..rows {
                projected[2 * i + j] -= t[j] * n[i] / n2;
            }
        }
        self.parts.iter().map(|(&(h1, h2), p)| p.eval_f64(&projected) * t[0].powi(h1 as i32) * t[1].powi(h2 as i32)).sum()
    }
}

/// Images of the grid variables under `x ↦ Πx` (`Π = I − nnᵀ/n²`), optionally
/// adding `t_j·n/n²` to column `j` using auxiliary variables `t_1, …, t_cols`.
fn projection_images<C: Coeff>(n: &[C], cols: usize, extra: usize, with_t: bool) -> Vec<MatrixPolynomial<C>> {
    let rows = n.len();
    let n2 = n.iter().fold(C::zero(), |acc, a| acc.add(&a.mul(a)));
    let inv = n2.recip();
    let mut images = Vec::with_capacity(rows * cols + extra);
    for i in 0..rows {
        for j in 0..cols {
            let mut img = MatrixPolynomial::<C>::var(rows, cols, extra, i, j);
            for (k, nk) in n.iter().enumerate() {
                let c = n[i].mul(nk).mul(&inv);
                if !c.is_zero() {
                    img = img.sub(&MatrixPolynomial::var(rows, cols, extra, k, j).scale(&c));
                }
            }
            if with_t && !n[i].is_zero() {
                img = img.add(&MatrixPolynomial::extra_var(rows, cols, extra, j).scale(&n[i].mul(&inv)));
            }
            images.push(img);
        }
    }
    for k in 0..extra {
        images.push(MatrixPolynomial::extra_var(rows, cols, extra, k));
    }
    images
}

/// Decompose `P(g(v)) = Σ (v₁,u_{z⊥})^{h₁}(v₂,u_{z⊥})^{h₂} P_{w,h₁,h₂}(borw(v))`.
///
/// `n = g(u_{z⊥})` is given in ambient coordinates; `P` must only involve the
/// positive rows (degree `(m, 0)`).  Components are returned as polynomials in the
/// raw grid that depend on `x` only through `Πx = borw(v)`.
pub fn decompose_p_w<C: Coeff>(p: &MatrixPolynomial<C>, n: &[C], bplus: usize) -> Components<C> {
    assert_eq!(p.cols(), 2, "decomposition is defined on two-column grids");
    assert_eq!(p.rows(), n.len(), "direction must live in the ambient space");
    assert!(n[bplus..].iter().all(Coeff::is_zero), "g(u_{{z⊥}}) has no negative components");
    let deg = p.degree().unwrap_or(0);
    let input_very_homogeneous = deg % 2 == 0 && very_homogeneous_check(p, bplus, deg / 2, 0);
    let images = projection_images(n, 2, 2, true);
    let parts = p.with_extra(2).substitute(&images).split_extra().into_iter().map(|(k, poly)| ((k[0], k[1]), poly)).collect();
    Components { n: n.to_vec(), parts, input_very_homogeneous }
}

/// One-column analogue of [`decompose_p_w`]: `P(g(λ)) = Σ_h (λ,u_{z⊥})^h P_{w,h}(borw(λ))`.
pub fn decompose_one_column<C: Coeff>(p: &MatrixPolynomial<C>, n: &[C]) -> BTreeMap<u16, MatrixPolynomial<C>> {
    assert_eq!(p.cols(), 1, "expected a one-column polynomial");
    assert_eq!(p.rows(), n.len(), "direction must live in the ambient space");
    let images = projection_images(n, 1, 1, true);
    p.with_extra(1).substitute(&images).split_extra().into_iter().map(|(k, poly)| (k[0], poly)).collect()
}

/// The closed forms for the components of `P_α` (coefficients of the expansion in
/// `(v₁,u_{z⊥})`, `(v₂,u_{z⊥})`), as polynomials in the coordinates `X = borw(v₁)`,
/// `Y = borw(v₂)`.
pub fn closed_form_component<C: Coeff>(alpha: IndexTuple, h: HPair, n: &[C]) -> MatrixPolynomial<C> {
    let rows = n.len();
    let nn = |k: usize| n[k - 1].clone();
    let x = |k: usize| MatrixPolynomial::<C>::var(rows, 2, 0, k - 1, 0);
    let y = |k: usize| MatrixPolynomial::<C>::var(rows, 2, 0, k - 1, 1);
    let n2 = n.iter().fold(C::zero(), |acc, a| acc.add(&a.mul(a)));
    let inv2 = n2.recip();
    let inv4 = inv2.mul(&inv2);
    let mut out = MatrixPolynomial::zero(rows, 2, 0);
    for (s, (a1, b1)) in [(1i64, (alpha.a1, alpha.b1)), (-1, (alpha.b1, alpha.a1))] {
        for (s2, (a2, b2)) in [(1i64, (alpha.a2, alpha.b2)), (-1, (alpha.b2, alpha.a2))] {
            let sign = C::from_i64(4 * s * s2);
            let term = match h {
                (0, 0) => x(a1).mul(&x(a2)).mul(&y(b1)).mul(&y(b2)),
                (2, 0) => y(b1).mul(&y(b2)).scale(&nn(a1).mul(&nn(a2)).mul(&inv4)),
                (0, 2) => x(b1).mul(&x(b2)).scale(&nn(a1).mul(&nn(a2)).mul(&inv4)),
                (1, 1) => {
                    x(a2).mul(&y(b1)).scale(&nn(a1).mul(&nn(b2))).add(&x(a1).mul(&y(b2)).scale(&nn(b1).mul(&nn(a2)))).scale(&inv4)
                }
                (1, 0) => x(a2).scale(&nn(a1)).add(&x(a1).scale(&nn(a2))).mul(&y(b1)).mul(&y(b2)).scale(&inv2),
                (0, 1) => y(b2).scale(&nn(b1)).add(&y(b1).scale(&nn(b2))).mul(&x(a1)).mul(&x(a2)).scale(&inv2),
                _ => MatrixPolynomial::zero(rows, 2, 0),
            };
            out = out.add(&term.scale(&sign));
        }
    }
    out
}

/// A closed form composed with the projection, comparable with [`decompose_p_w`] output.
pub fn closed_form_on_grid<C: Coeff>(alpha: IndexTuple, h: HPair, n: &[C]) -> MatrixPolynomial<C> {
    closed_form_component(alpha, h, n).substitute(&projection_images(n, 2, 0, false))
}

/// `P_{w,h}(·, r) = Σ_{h₁=0..h} (−r)^{h₁} P_{w,h₁,h−h₁}`.
pub fn combine_p_w_h<C: Coeff>(components: &Components<C>, h: u16, r: &C) -> MatrixPolynomial<C> {
    let mut out = MatrixPolynomial::zero(components.rows(), 2, 0);
    let mut pow = C::one();
    for h1 in 0..=h {
        out = out.add(&components.get((h1, h - h1)).scale(&pow));
        pow = pow.mul(&r.neg());
    }
    out
}

/// Substitute `x₁ ↦ x₁ + r·x₂` (first grid column shifted by `r` times the second).
pub fn shear_columns<C: Coeff>(p: &MatrixPolynomial<C>, r: &C) -> MatrixPolynomial<C> {
    let rows = p.rows();
    let images: Vec<MatrixPolynomial<C>> = (0..rows * 2)
        .map(|v| {
            let (i, j) = (v / 2, v % 2);
            let xi = MatrixPolynomial::var(rows, 2, 0, i, j);
            if j == 0 {
                xi.add(&MatrixPolynomial::var(rows, 2, 0, i, 1).scale(r))
            } else {
                xi
            }
        })
        .collect();
    p.substitute(&images)
}

/// Outcome of the symbolic τ-transformation check: one entry per bullet, holding the
/// number of coefficients in which the two sides differ (0 means exact agreement).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauCheck {
    pub bullets: Vec<(HPair, usize)>,
}

impl TauCheck {
    pub fn holds(&self) -> bool {
        self.bullets.iter().all(|&(_, d)| d == 0)
    }

    pub fn max_deviation(&self) -> usize {
        self.bullets.iter().map(|&(_, d)| d).max().unwrap_or(0)
    }
}

/// Verify the five transformation rules of the components under `x ↦ xτ` with a
/// symbolic `τ = [[τ₁,τ₂],[τ₂,τ₃]]`, as exact polynomial identities.
///
/// `tau` optionally fixes `(τ₁, τ₂, τ₃)` to constants (used for specialisations).
pub fn tau_transform_check<C: Coeff>(components: &Components<C>, tau: Option<[C; 3]>) -> TauCheck {
    let rows = components.rows();
    let ex = 3;
    let t = |k: usize| match &tau {
        Some(v) => MatrixPolynomial::<C>::constant(rows, 2, ex, v[k].clone()),
        None => MatrixPolynomial::<C>::extra_var(rows, 2, ex, k),
    };
    let (t1, t2, t3) = (t(0), t(1), t(2));
    let det = t1.mul(&t3).sub(&t2.mul(&t2));
    let mut images = Vec::with_capacity(rows * 2 + ex);
    for i in 0..rows {
        let x0 = MatrixPolynomial::var(rows, 2, ex, i, 0);
        let x1 = MatrixPolynomial::var(rows, 2, ex, i, 1);
        images.push(x0.mul(&t1).add(&x1.mul(&t2)));
        images.push(x0.mul(&t2).add(&x1.mul(&t3)));
    }
    for k in 0..ex {
        images.push(MatrixPolynomial::extra_var(rows, 2, ex, k));
    }
    let p = |h: HPair| components.get(h).with_extra(ex);
    let lhs = |h: HPair| p(h).substitute(&images);
    let two = C::from_i64(2);
    let rules: Vec<(HPair, MatrixPolynomial<C>)> = vec![
        ((0, 2), t1.mul(&t1).mul(&p((0, 2))).add(&t2.mul(&t2).mul(&p((2, 0)))).sub(&t1.mul(&t2).mul(&p((1, 1))))),
        (
            (1, 1),
            t1.mul(&t2)
                .mul(&p((0, 2)))
                .scale(&two)
                .neg()
                .sub(&t2.mul(&t3).mul(&p((2, 0))).scale(&two))
                .add(&t1.mul(&t3).add(&t2.mul(&t2)).mul(&p((1, 1)))),
        ),
        ((2, 0), t2.mul(&t2).mul(&p((0, 2))).add(&t3.mul(&t3).mul(&p((2, 0)))).sub(&t2.mul(&t3).mul(&p((1, 1))))),
        ((0, 1), t1.mul(&det).mul(&p((0, 1))).sub(&t2.mul(&det).mul(&p((1, 0))))),
        ((1, 0), t3.mul(&det).mul(&p((1, 0))).sub(&t2.mul(&det).mul(&p((0, 1))))),
    ];
    TauCheck { bullets: rules.into_iter().map(|(h, rhs)| (h, lhs(h).sub(&rhs).len())).collect() }
}
