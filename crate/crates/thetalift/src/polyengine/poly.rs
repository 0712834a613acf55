use std::collections::BTreeMap;

use num_complex::Complex64;

use super::coeff::Coeff;

/// A monomial as a sorted list of `(variable, exponent)` pairs with positive exponents.
pub type Monomial = Vec<(u16, u16)>;

/// Sparse multivariate polynomial in the coordinate grid `x_{i,j}`
/// (`i < rows`, `j < cols`, variable index `i·cols + j`), optionally followed by
/// `extra` auxiliary variables used for symbolic parameters.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixPolynomial<C> {
    rows: usize,
    cols: usize,
    extra: usize,
    terms: BTreeMap<Monomial, C>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl<C: Coeff> MatrixPolynomial<C> {
    pub fn zero(rows: usize, cols: usize, extra: usize) -> Self {
        MatrixPolynomial { rows, cols, extra, terms: BTreeMap::new() }
    }

    pub fn constant(rows: usize, cols: usize, extra: usize, c: C) -> Self {
        let mut p = Self::zero(rows, cols, extra);
        p.add_term(Vec::new(), c);
        p
    }

    /// The coordinate `x_{i,j}` (0-based).
    pub fn var(rows: usize, cols: usize, extra: usize, i: usize, j: usize) -> Self {
        assert!(i < rows && j < cols, "grid index out of range");
        let mut p = Self::zero(rows, cols, extra);
        p.add_term(vec![((i * cols + j) as u16, 1)], C::one());
        p
    }

    /// The `k`-th auxiliary variable.
    pub fn extra_var(rows: usize, cols: usize, extra: usize, k: usize) -> Self {
        assert!(k < extra, "auxiliary variable out of range");
        let mut p = Self::zero(rows, cols, extra);
        p.add_term(vec![((rows * cols + k) as u16, 1)], C::one());
        p
    }

    pub fn from_terms(rows: usize, cols: usize, extra: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero(rows, cols, extra);
        for (m, c) in terms {
            let mut m: Monomial = m.into_iter().filter(|&(_, e)| e > 0).collect();
            m.sort_unstable();
            // Merge repeated variables.
            let mut merged: Monomial = Vec::with_capacity(m.len());
            for (v, e) in m {
                match merged.last_mut() {
                    Some(last) if last.0 == v => last.1 += e,
                    _ => merged.push((v, e)),
                }
            }
            p.add_term(merged, c);
        }
        p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn extra(&self) -> usize {
        self.extra
    }

    pub fn grid_vars(&self) -> usize {
        self.rows * self.cols
    }

    pub fn nvars(&self) -> usize {
        self.rows * self.cols + self.extra
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.extra == other.extra
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = existing.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_shape(other), "polynomial shapes differ");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.rows, self.cols, self.extra);
        }
        let mut out = Self::zero(self.rows, self.cols, self.extra);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul(s));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert!(self.same_shape(other), "polynomial shapes differ");
        let mut out = Self::zero(self.rows, self.cols, self.extra);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.rows, self.cols, self.extra, C::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MatrixPolynomial<D> {
        let mut out = MatrixPolynomial::zero(self.rows, self.cols, self.extra);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Reinterpret with a different number of auxiliary variables (which must not occur).
    pub fn with_extra(&self, extra: usize) -> Self {
        let limit = (self.rows * self.cols + extra) as u16;
        assert!(self.terms.keys().all(|m| m.iter().all(|&(v, _)| v < limit)), "auxiliary variable in use");
        MatrixPolynomial { extra, ..self.clone() }
    }

    /// Total degree (`None` for the zero polynomial).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().map(|&(_, e)| e as u32).sum()).max()
    }

    /// Whether every monomial has total degree `d`.
    pub fn is_homogeneous_of_degree(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.iter().map(|&(_, e)| e as u32).sum::<u32>() == d)
    }

    /// Partial derivative with respect to variable `v`.
    pub fn partial(&self, v: usize) -> Self {
        let v = v as u16;
        let mut out = Self::zero(self.rows, self.cols, self.extra);
        for (m, c) in &self.terms {
            if let Some(pos) = m.iter().position(|&(var, _)| var == v) {
                let e = m[pos].1;
                let mut nm = m.clone();
                if e == 1 {
                    nm.remove(pos);
                } else {
                    nm[pos].1 = e - 1;
                }
                out.add_term(nm, c.mul(&C::from_i64(e as i64)));
            }
        }
        out
    }

    /// `tr(Δ·yinv)(P) = Σ_i Σ_{η,ξ} yinv[ξ][η] ∂²P/∂x_{i,η}∂x_{i,ξ}` for a symmetric
    /// `cols × cols` matrix `yinv`.
    pub fn laplacian_trace(&self, yinv: &[Vec<C>]) -> Self {
        assert_eq!(yinv.len(), self.cols, "yinv must be cols x cols");
        let mut out = Self::zero(self.rows, self.cols, self.extra);
        for i in 0..self.rows {
            for eta in 0..self.cols {
                let d1 = self.partial(i * self.cols + eta);
                if d1.is_zero() {
                    continue;
                }
                for xi in 0..self.cols {
                    if yinv[xi][eta].is_zero() {
                        continue;
                    }
                    let d2 = d1.partial(i * self.cols + xi);
                    out = out.add(&d2.scale(&yinv[xi][eta]));
                }
            }
        }
        out
    }

    /// `exp(−tr(Δ·yinv)/8π)(P)`; the series terminates because the Laplacian lowers degree.
    pub fn exp_operator(&self, yinv: &[Vec<C>]) -> Self {
        let factor = C::from_rat(&crate::exactalg::rat(-1, 8)).mul(&C::inv_pi());
        let mut out = self.clone();
        let mut term = self.clone();
        let mut m = 1i64;
        loop {
            term = term.laplacian_trace(yinv).scale(&factor).scale(&C::from_rat(&crate::exactalg::rat(1, m)));
            if term.is_zero() {
                return out;
            }
            out = out.add(&term);
            m += 1;
        }
    }

    /// Substitute each variable by a polynomial (all images must share one shape).
    pub fn substitute(&self, images: &[MatrixPolynomial<C>]) -> MatrixPolynomial<C> {
        assert_eq!(images.len(), self.nvars(), "one image per variable");
        let shape = &images[0];
        let mut out = MatrixPolynomial::zero(shape.rows, shape.cols, shape.extra);
        let mut power_cache: BTreeMap<(u16, u16), MatrixPolynomial<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut acc = MatrixPolynomial::constant(shape.rows, shape.cols, shape.extra, c.clone());
            for &(v, e) in m {
                let p = power_cache.entry((v, e)).or_insert_with(|| images[v as usize].pow(e as u32));
                acc = acc.mul(p);
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        out
    }

    /// Split by powers of the auxiliary variables: `P = Σ_k t^k P_k`, with the
    /// `P_k` free of auxiliary variables.
    pub fn split_extra(&self) -> BTreeMap<Vec<u16>, MatrixPolynomial<C>> {
        let grid = self.grid_vars() as u16;
        let mut out: BTreeMap<Vec<u16>, MatrixPolynomial<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut key = vec![0u16; self.extra];
            let mut rest = Vec::new();
            for &(v, e) in m {
                if v >= grid {
                    key[(v - grid) as usize] = e;
                } else {
                    rest.push((v, e));
                }
            }
            out.entry(key).or_insert_with(|| MatrixPolynomial::zero(self.rows, self.cols, 0)).add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Evaluate at a point (one value per variable).
    pub fn eval(&self, x: &[C]) -> C {
        assert!(x.len() >= self.nvars(), "not enough values");
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m {
                for _ in 0..e {
                    t = t.mul(&x[v as usize]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Evaluate numerically at a real point.
    pub fn eval_f64(&self, x: &[f64]) -> Complex64 {
        self.compile().eval(x)
    }

    /// Substitute the constants `values` (indexed like the grid) for every column except
    /// `keep`, leaving a one-column polynomial in the remaining coordinates.
    pub fn restrict_to_column(&self, keep: usize, values: &[C]) -> MatrixPolynomial<C> {
        assert!(keep < self.cols && values.len() >= self.grid_vars() && self.extra == 0, "bad column restriction");
        let terms = self.terms.iter().map(|(m, c)| {
            let mut coeff = c.clone();
            let mut mono = Vec::new();
            for &(v, e) in m {
                let (i, j) = (v as usize / self.cols, v as usize % self.cols);
                if j == keep {
                    mono.push((i as u16, e));
                } else {
                    for _ in 0..e {
                        coeff = coeff.mul(&values[v as usize]);
                    }
                }
            }
            (mono, coeff)
        });
        MatrixPolynomial::from_terms(self.rows, 1, 0, terms.collect::<Vec<_>>())
    }

    /// Flatten into a form suited to repeated numerical evaluation.
    pub fn compile(&self) -> CompiledPoly {
        let mut out = CompiledPoly { nvars: self.nvars(), coeffs: Vec::new(), ends: Vec::new(), factors: Vec::new() };
        for (m, c) in &self.terms {
            out.coeffs.push(c.to_c64());
            out.factors.extend(m.iter().map(|&(v, e)| (u32::from(v), u32::from(e))));
            out.ends.push(out.factors.len() as u32);
        }
        out
    }
}

/// A polynomial flattened for fast evaluation at real points: the monomial of term `t`
/// is the run of `(variable, exponent)` factors ending at `ends[t]`.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    coeffs: Vec<Complex64>,
    ends: Vec<u32>,
    factors: Vec<(u32, u32)>,
}

impl CompiledPoly {
    fn monomials(&self) -> impl Iterator<Item = (&Complex64, &[(u32, u32)])> {
        let starts = std::iter::once(0).chain(self.ends.iter().map(|&e| e as usize));
        self.coeffs.iter().zip(starts.zip(&self.ends)).map(|(c, (s, &e))| (c, &self.factors[s..e as usize]))
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert!(x.len() >= self.nvars);
        let (mut re, mut im) = (0.0, 0.0);
        for (c, m) in self.monomials() {
            let mut t = 1.0;
            for &(v, e) in m {
                let xv = x[v as usize];
                t *= match e {
                    1 => xv,
                    2 => xv * xv,
                    _ => xv.powi(e as i32),
                };
            }
            re += c.re * t;
            im += c.im * t;
        }
        Complex64::new(re, im)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of coefficient moduli (a crude bound used by tail estimates).
    pub fn coefficient_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn degree(&self) -> u32 {
        self.monomials().map(|(_, m)| m.iter().map(|&(_, e)| e).sum()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::coeff::PiRat;
    use super::*;
    use crate::exactalg::rat;

    type P = MatrixPolynomial<PiRat>;

    #[test]
    fn laplacian_and_exp_examples() {
        let x11 = P::var(2, 2, 0, 0, 0);
        let sq = x11.mul(&x11);
        let id = vec![vec![PiRat::one(), PiRat::zero()], vec![PiRat::zero(), PiRat::one()]];
        assert_eq!(sq.laplacian_trace(&id), P::constant(2, 2, 0, PiRat::from_i64(2)));
        // x² − 1/(4π)
        let expected = sq.add(&P::constant(2, 2, 0, PiRat::from_parts(vec![rat(0, 1), rat(-1, 4)])));
        assert_eq!(sq.exp_operator(&id), expected);
        let c = P::constant(2, 2, 0, PiRat::from_i64(5));
        assert!(c.laplacian_trace(&id).is_zero());
        assert_eq!(c.exp_operator(&id), c);
    }

    #[test]
    fn substitution_and_split() {
        // P = x00 * x01, substitute x00 -> t0 + x10, x01 -> x11.
        let shape = (2, 2, 1);
        let p = P::var(2, 2, 1, 0, 0).mul(&P::var(2, 2, 1, 0, 1));
        let t = P::extra_var(shape.0, shape.1, shape.2, 0);
        let mut images: Vec<P> = (0..5).map(|v| if v < 4 { P::var(2, 2, 1, v / 2, v % 2) } else { t.clone() }).collect();
        images[0] = t.add(&P::var(2, 2, 1, 1, 0));
        images[1] = P::var(2, 2, 1, 1, 1);
        let s = p.substitute(&images);
        let parts = s.split_extra();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&vec![1u16]], P::var(2, 2, 0, 1, 1));
        assert_eq!(parts[&vec![0u16]], P::var(2, 2, 0, 1, 0).mul(&P::var(2, 2, 0, 1, 1)));
    }

    #[test]
    fn compiled_eval_matches() {
        let p = P::var(3, 2, 0, 2, 1).pow(3).add(&P::constant(3, 2, 0, PiRat::from_parts(vec![rat(1, 2), rat(1, 1)])));
        let x = [0.0, 0.0, 0.0, 0.0, 0.0, 2.0];
        let v = p.eval_f64(&x).re;
        assert!((v - (8.0 + 0.5 + std::f64::consts::FRAC_1_PI)).abs() < 1e-14);
    }
}
