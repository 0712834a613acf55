use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::enumerate::enumerate_ellipsoid;
use crate::error::{Error, Result};
use crate::lattice::{DiscriminantGroup, EvenLattice, GrassmannianFrame, SplitGeometry};
use crate::numeric::NeumaierSum;

/// A lattice together with a real embedding into `R^{p, rows−p}` used to evaluate
/// theta functions: the frame `g` for `L` itself, or `borw` for the sublattice `K`.
#[derive(Clone, Debug)]
pub struct ThetaSpace {
    gram: DMatrix<f64>,
    embed: DMatrix<f64>,
    positive_rows: usize,
    disc: DiscriminantGroup,
    bplus: usize,
    bminus: usize,
}

impl ThetaSpace {
    /// `L` embedded by its frame.
    pub fn for_lattice(lattice: &EvenLattice, frame: &GrassmannianFrame) -> Result<Self> {
        if frame.rank() != lattice.rank() {
            return Err(Error::DimensionMismatch("frame and lattice ranks differ".into()));
        }
        Ok(ThetaSpace {
            gram: frame.gram().clone(),
            embed: frame.matrix().clone(),
            positive_rows: lattice.bplus(),
            disc: lattice.discriminant_group(),
            bplus: lattice.bplus(),
            bminus: lattice.bminus(),
        })
    }

    /// The sublattice `K` of a split, embedded by `borw` into the ambient space of `L`.
    pub fn for_sublattice(lattice: &EvenLattice, geometry: &SplitGeometry) -> Result<Self> {
        let k = geometry.split.k_lattice(lattice)?;
        let embed = geometry.borw_on_k();
        let gram = DMatrix::from_fn(k.rank(), k.rank(), |i, j| k.gram_f64()[i][j]);
        Ok(ThetaSpace {
            gram,
            embed,
            positive_rows: lattice.bplus(),
            disc: k.discriminant_group(),
            bplus: k.bplus(),
            bminus: k.bminus(),
        })
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    /// Number of ambient coordinates (rows of the polynomial grid).
    pub fn rows(&self) -> usize {
        self.embed.nrows()
    }

    pub fn positive_rows(&self) -> usize {
        self.positive_rows
    }

    pub fn disc(&self) -> &DiscriminantGroup {
        &self.disc
    }

    pub fn bplus(&self) -> usize {
        self.bplus
    }

    pub fn bminus(&self) -> usize {
        self.bminus
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn embedding(&self) -> &DMatrix<f64> {
        &self.embed
    }

    /// `EᵗE`, the majorant in lattice coordinates.
    pub fn majorant(&self) -> DMatrix<f64> {
        self.embed.transpose() * &self.embed
    }

    pub fn embed(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|i| (0..v.len()).map(|j| self.embed[(i, j)] * v[j]).sum()).collect()
    }

    /// `S·v`, so that `(v, w) = wᵗ(Sv)`.
    pub fn gram_times(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rank()).map(|i| (0..v.len()).map(|j| self.gram[(i, j)] * v[j]).sum()).collect()
    }

    /// Largest defect of `EᵗJE = S` (zero for an isometric embedding).
    pub fn isometry_defect(&self) -> f64 {
        let p = self.positive_rows;
        let j = DMatrix::from_fn(self.rows(), self.rows(), |a, b| match (a == b, a < p) {
            (false, _) => 0.0,
            (true, true) => 1.0,
            (true, false) => -1.0,
        });
        (self.embed.transpose() * j * &self.embed - &self.gram).amax()
    }
}

/// A truncated theta value: one component per coset, the truncation radius (in the
/// Gaussian form), the number of lattice terms summed, and an estimate of the
/// neglected tail.
#[derive(Clone, Debug, Serialize)]
pub struct TruncatedThetaValue {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub value: Vec<Complex64>,
    pub radius: f64,
    pub terms_used: usize,
    pub tail_estimate: f64,
}

fn serialize_complex_vec<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Largest radius² the truncation search will try before giving up.
const MAX_RADIUS2: f64 = 2500.0;

/// A choice of truncation radius for a Gaussian lattice sum.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Budget {
    pub r2: f64,
    pub heuristic: f64,
}

/// Shape data of a Gaussian lattice sum `Σ P(X) exp(−π Q(ℓ))`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SumShape {
    /// Dimension of the summation lattice.
    pub dim: usize,
    /// `√det G` of the Gaussian form.
    pub sqrt_det: f64,
    /// Bound for `|P|` on the unit ball times all constant prefactors.
    pub mass: f64,
    pub degree: u32,
    /// `Q ≥ c·|X|²`, used to bound the polynomial by the Gaussian norm.
    pub c: f64,
}

fn gamma_half_integer(twice: usize) -> f64 {
    // Γ(twice/2) for twice ≥ 1.
    let mut g = if twice % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut s = if twice % 2 == 0 { 1.0 } else { 0.5 };
    while 2.0 * s < twice as f64 - 0.5 {
        g *= s;
        s += 1.0;
    }
    g
}

impl SumShape {
    /// `mass/√det G · S_{d−1} ∫_R^∞ t^{d−1}(1 + t/√c)^deg e^{−πt²} dt`.
    pub fn tail(&self, r: f64) -> f64 {
        if self.mass == 0.0 {
            return 0.0;
        }
        let d = self.dim.max(1);
        let sphere = 2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d);
        let f = |t: f64| t.powi(d as i32 - 1) * (1.0 + t / self.c.sqrt()).powi(self.degree as i32) * (-PI * t * t).exp();
        let (a, b, n) = (r, r + 10.0, 2000);
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        self.mass / self.sqrt_det * sphere * acc * h / 3.0
    }

    /// Smallest radius² on a quarter-unit grid in `R` whose heuristic tail is below `target`.
    pub fn budget(&self, target: f64) -> Result<Budget> {
        if !(target > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {target}")));
        }
        let mut r: f64 = 0.5;
        loop {
            let t = self.tail(r);
            if t < target {
                return Ok(Budget { r2: r * r, heuristic: t });
            }
            r += 0.25;
            if r * r > MAX_RADIUS2 {
                return Err(Error::NonConvergent(format!("no truncation radius reaches tail {target:e}")));
            }
        }
    }
}

/// `√det G` through a Cholesky factorisation.
pub(crate) fn sqrt_det_pd(g: &DMatrix<f64>) -> Result<f64> {
    if g.nrows() == 0 {
        return Ok(1.0);
    }
    let chol = Cholesky::new(g.clone()).ok_or_else(|| Error::NonConvergent("Gaussian form is not positive definite".into()))?;
    Ok(chol.l().diagonal().iter().product())
}

/// Result of one Gaussian lattice sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ShellSum {
    pub value: Complex64,
    pub terms: usize,
    /// `Σ|term|` over the outermost unit shell `R² − 1 < Q ≤ R²`.
    pub shell: f64,
}

impl ShellSum {
    /// Geometric extrapolation of the outer shell to the rest of the tail.
    pub fn shell_tail(&self) -> f64 {
        let q = (-PI).exp();
        self.shell * q / (1.0 - q)
    }
}

/// `Σ term(ℓ, Q(ℓ))` over `Q(ℓ) = (ℓ − c)ᵗG(ℓ − c) ≤ r²` with compensated summation.
pub(crate) fn gaussian_sum(
    g: &DMatrix<f64>,
    center: &[f64],
    r2: f64,
    mut term: impl FnMut(&[i64], f64) -> Complex64,
) -> Result<ShellSum> {
    let mut acc = NeumaierSum::new();
    let mut out = ShellSum::default();
    enumerate_ellipsoid(g, center, r2, |x, q| {
        let t = term(x, q);
        acc.add(t);
        out.terms += 1;
        if q > r2 - 1.0 {
            out.shell += t.norm();
        }
    })?;
    out.value = acc.value();
    Ok(out)
}

/// `gaussian_sum` for `width` term families at once: `term` fills one value per family.
pub(crate) fn gaussian_sum_batch(
    g: &DMatrix<f64>,
    center: &[f64],
    r2: f64,
    width: usize,
    mut term: impl FnMut(&[i64], f64, &mut [Complex64]),
) -> Result<Vec<ShellSum>> {
    let mut acc = vec![NeumaierSum::new(); width];
    let mut out = vec![ShellSum::default(); width];
    let mut buf = vec![Complex64::new(0.0, 0.0); width];
    enumerate_ellipsoid(g, center, r2, |x, q| {
        term(x, q, &mut buf);
        let outer = q > r2 - 1.0;
        for ((a, o), t) in acc.iter_mut().zip(out.iter_mut()).zip(&buf) {
            a.add(*t);
            o.terms += 1;
            if outer {
                o.shell += t.norm();
            }
        }
    })?;
    for (o, a) in out.iter_mut().zip(&acc) {
        o.value = a.value();
    }
    Ok(out)
}

/// Assemble per-coset sums into a value with its tail estimate.
pub(crate) fn assemble(sums: Vec<ShellSum>, scale: Complex64, budget: Budget) -> TruncatedThetaValue {
    let shell = sums.iter().map(ShellSum::shell_tail).fold(0.0, f64::max) * scale.norm();
    TruncatedThetaValue {
        value: sums.iter().map(|s| s.value * scale).collect(),
        radius: budget.r2.sqrt(),
        terms_used: sums.iter().map(|s| s.terms).sum(),
        tail_estimate: budget.heuristic.max(shell),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma_half_integer(1) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_half_integer(2) - 1.0).abs() < 1e-14);
        assert!((gamma_half_integer(5) - 0.75 * PI.sqrt()).abs() < 1e-14);
        assert!((gamma_half_integer(8) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_tail_bounds_gaussian() {
        // Σ_{|n|>R} e^{−πn²} for the integers is below the heuristic at the same radius.
        let shape = SumShape { dim: 1, sqrt_det: 1.0, mass: 1.0, degree: 0, c: 1.0 };
        let b = shape.budget(1e-10).unwrap();
        let r = b.r2.sqrt();
        let actual: f64 = (1..100).map(|n| n as f64).filter(|&n| n > r).map(|n| 2.0 * (-PI * n * n).exp()).sum();
        assert!(actual <= 1e-10, "{actual}");
        assert!(shape.budget(0.0).is_err());
    }
}
