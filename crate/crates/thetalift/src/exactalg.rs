//! Exact integer and rational linear algebra.
//!
//! Everything here works with arbitrary-precision integers and rationals; no
//! floating point is used.  The Smith normal form drives the enumeration of
//! discriminant groups, and the rational routines provide dual bases and Gram
//! matrices of sublattices.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Shorthand for a rational from two machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

/// Shorthand for an integral rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// Reduce a rational into the half-open interval `[0, 1)`.
pub fn frac(x: &Rat) -> Rat {
    x - Rat::from_integer(x.floor().to_integer())
}

/// Convert a rational to `f64` (finite for every value arising in practice).
pub fn rat_to_f64(x: &Rat) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down huge numerators/denominators before dividing.
            let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
            let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Dense matrix over a ring `T`, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Integer matrix with arbitrary-precision entries.
pub type IntMatrix = Matrix<Int>;
/// Rational matrix with entries kept in lowest terms.
pub type RatMatrix = Matrix<Rat>;

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from nested rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    pub fn map<U: Clone + Zero>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + for<'a> std::ops::Mul<&'a T, Output = T> + for<'a> std::ops::AddAssign<&'a T>,
{
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a.clone() * &other[(k, j)];
                    out[(i, j)] += &t;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch("matrix-vector product".into()));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    acc += &(a.clone() * x);
                }
                acc
            })
            .collect())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect())
    }

    pub fn to_rat(&self) -> RatMatrix {
        self.map(|x| Rat::from_integer(x.clone()))
    }

    /// Entries as `i64`, failing if any entry overflows.
    pub fn to_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.to_i64().ok_or_else(|| Error::InvalidInput("entry exceeds i64".into()))).collect())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.to_rows().iter().map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn det(&self) -> Result<Int> {
        Ok(self.to_rat().det()?.to_integer())
    }
}

impl RatMatrix {
    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Ok(IntMatrix::from_i64(rows)?.to_rat())
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.to_rows().iter().map(|r| r.iter().map(rat_to_f64).collect()).collect()
    }

    /// Determinant by fraction-exact Gaussian elimination.
    pub fn det(&self) -> Result<Rat> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rat::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[(r, c)].is_zero()) else {
                return Ok(Rat::zero());
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let pivot = a[(c, c)].clone();
            det *= &pivot;
            for r in c + 1..n {
                if a[(r, c)].is_zero() {
                    continue;
                }
                let f = &a[(r, c)] / &pivot;
                for j in c..n {
                    let t = &f * &a[(c, j)];
                    a[(r, j)] -= t;
                }
            }
        }
        Ok(det)
    }
}

/// Exact inverse of a square rational matrix (Gauss–Jordan elimination).
pub fn rat_inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = RatMatrix::identity(n);
    for c in 0..n {
        let p = (c..n).find(|&r| !a[(r, c)].is_zero()).ok_or(Error::Singular)?;
        a.swap_rows(p, c);
        inv.swap_rows(p, c);
        let pivot = a[(c, c)].clone();
        for j in 0..n {
            a[(c, j)] /= &pivot;
            inv[(c, j)] /= &pivot;
        }
        for r in 0..n {
            if r == c || a[(r, c)].is_zero() {
                continue;
            }
            let f = a[(r, c)].clone();
            for j in 0..n {
                let t = &f * &a[(c, j)];
                a[(r, j)] -= t;
                let t = &f * &inv[(c, j)];
                inv[(r, j)] -= t;
            }
        }
    }
    Ok(inv)
}

/// Gram matrix `result[i][j] = b_iᵗ · gram · b_j` of a list of rational vectors.
pub fn gram_of_sublist(gram: &RatMatrix, basis: &[Vec<Rat>]) -> Result<RatMatrix> {
    let n = gram.rows();
    if !gram.is_square() || basis.iter().any(|b| b.len() != n) {
        return Err(Error::DimensionMismatch("basis vectors must live in the ambient space of the Gram matrix".into()));
    }
    let images: Vec<Vec<Rat>> = basis.iter().map(|b| gram.mul_vec(b)).collect::<Result<_>>()?;
    Ok(RatMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        basis[i].iter().zip(&images[j]).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
    }))
}

/// Exact bilinear value `aᵗ · gram · b`.
pub fn bilinear(gram: &RatMatrix, a: &[Rat], b: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for i in 0..gram.rows() {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..gram.cols() {
            if !b[j].is_zero() && !gram[(i, j)].is_zero() {
                acc += &a[i] * &gram[(i, j)] * &b[j];
            }
        }
    }
    acc
}

/// Inertia `(positive, negative, zero)` of a symmetric rational matrix, computed by
/// exact symmetric elimination (a sequence of congruence transformations).
pub fn inertia(m: &RatMatrix) -> Result<(usize, usize, usize)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("inertia of a non-square matrix".into()));
    }
    let mut a = m.clone();
    let mut n = a.rows();
    let (mut pos, mut neg) = (0, 0);
    while n > 0 {
        // Choose a nonzero diagonal pivot, or manufacture one from an off-diagonal entry.
        let pivot = match (0..n).find(|&i| !a[(i, i)].is_zero()) {
            Some(i) => i,
            None => {
                let Some((i, j)) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !a[(i, j)].is_zero()) else {
                    break;
                };
                // e_i <- e_i + e_j turns a_ii into 2 a_ij != 0.
                for k in 0..n {
                    let t = a[(j, k)].clone();
                    a[(i, k)] += t;
                }
                for k in 0..n {
                    let t = a[(k, j)].clone();
                    a[(k, i)] += t;
                }
                i
            }
        };
        let p = a[(pivot, pivot)].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        // Schur complement with respect to the pivot.
        let keep: Vec<usize> = (0..n).filter(|&k| k != pivot).collect();
        let next = RatMatrix::from_fn(n - 1, n - 1, |r, c| {
            let (r, c) = (keep[r], keep[c]);
            &a[(r, c)] - &a[(r, pivot)] * &a[(pivot, c)] / &p
        });
        a = next;
        n -= 1;
    }
    Ok((pos, neg, n))
}

/// Result of [`smith_normal_form`]: `u · m · v = d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries of `d` (length `min(rows, cols)`).
    pub fn diagonal(&self) -> Vec<Int> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d[(i, i)].clone()).collect()
    }
}

/// Smith normal form with unimodular transforms.
///
/// Pivoting always selects the nonzero entry of smallest absolute value in the
/// remaining block, ties broken by row-major order, which makes `u` and `v`
/// reproducible.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    let row_op = |a: &mut IntMatrix, target: usize, source: usize, f: &Int| {
        for j in 0..a.cols() {
            let t = f * &a[(source, j)];
            a[(target, j)] -= t;
        }
    };
    let col_op = |a: &mut IntMatrix, target: usize, source: usize, f: &Int| {
        for i in 0..a.rows() {
            let t = f * &a[(i, source)];
            a[(i, target)] -= t;
        }
    };

    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero |entry| in the trailing block, row-major tie-break.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[(i, j)].is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return normalise_signs(u, d, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = d[(t, t)].clone();
            let mut dirty = false;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&pivot);
                row_op(&mut d, i, t, &q);
                row_op(&mut u, i, t, &q);
                dirty |= !d[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&pivot);
                col_op(&mut d, j, t, &q);
                col_op(&mut v, j, t, &q);
                dirty |= !d[(t, j)].is_zero();
            }
            if dirty {
                continue;
            }
            // Row and column are clear; enforce divisibility of the trailing block.
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !d[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    let minus_one = -Int::one();
                    row_op(&mut d, t, i, &minus_one);
                    row_op(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
    }
    normalise_signs(u, d, v)
}

fn normalise_signs(mut u: IntMatrix, mut d: IntMatrix, v: IntMatrix) -> SmithForm {
    for i in 0..d.rows().min(d.cols()) {
        if d[(i, i)].is_negative() {
            for j in 0..d.cols() {
                d[(i, j)] = -d[(i, j)].clone();
            }
            for j in 0..u.cols() {
                u[(i, j)] = -u[(i, j)].clone();
            }
        }
    }
    SmithForm { u, d, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows).unwrap()
    }

    fn check_snf(m: &IntMatrix) -> SmithForm {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).unwrap().mul(&s.v).unwrap(), s.d);
        assert_eq!(s.u.det().unwrap().abs(), Int::one());
        assert_eq!(s.v.det().unwrap().abs(), Int::one());
        let diag = s.diagonal();
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert!(s.d[(i, j)].is_zero());
                }
            }
        }
        for w in diag.windows(2) {
            if !w[0].is_zero() {
                assert!(w[1].is_multiple_of(&w[0]), "{:?}", diag);
            } else {
                assert!(w[1].is_zero());
            }
        }
        s
    }

    #[test]
    fn snf_examples() {
        assert_eq!(check_snf(&im(&[vec![2]])).d, im(&[vec![2]]));
        assert_eq!(check_snf(&im(&[vec![0, 1], vec![1, 0]])).d, im(&[vec![1, 0], vec![0, 1]]));
        assert_eq!(check_snf(&im(&[vec![2, 0], vec![0, 6]])).d, im(&[vec![2, 0], vec![0, 6]]));
        assert_eq!(check_snf(&im(&[vec![6, 0], vec![0, 4]])).diagonal(), vec![Int::from(2), Int::from(12)]);
        assert_eq!(check_snf(&im(&[vec![2, 1], vec![1, 2]])).diagonal(), vec![Int::from(1), Int::from(3)]);
        check_snf(&im(&[vec![0, 0, 0], vec![0, 0, 0]]));
        check_snf(&im(&[vec![4, 6, 8], vec![10, 12, 14]]));
    }

    #[test]
    fn inverse_examples() {
        let id = RatMatrix::identity(3);
        assert_eq!(rat_inverse(&id).unwrap(), id);
        assert_eq!(rat_inverse(&RatMatrix::from_i64(&[vec![2]]).unwrap()).unwrap()[(0, 0)], rat(1, 2));
        let h = RatMatrix::from_i64(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(rat_inverse(&h).unwrap(), h);
        assert_eq!(rat_inverse(&RatMatrix::from_i64(&[vec![1, 2], vec![2, 4]]).unwrap()), Err(Error::Singular));
    }

    #[test]
    fn gram_examples() {
        let g = RatMatrix::from_i64(&[vec![0, 1], vec![1, 0]]).unwrap();
        let std = vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]];
        assert_eq!(gram_of_sublist(&g, &std).unwrap(), g);
        // u = e1 is isotropic in U.
        assert!(gram_of_sublist(&g, &[vec![rat_int(1), rat_int(0)]]).unwrap()[(0, 0)].is_zero());
        let a1 = RatMatrix::from_i64(&[vec![2]]).unwrap();
        assert_eq!(gram_of_sublist(&a1, &[vec![rat_int(1)]]).unwrap(), a1);
        assert!(gram_of_sublist(&a1, &[vec![rat_int(1), rat_int(1)]]).is_err());
    }

    #[test]
    fn inertia_examples() {
        let u = RatMatrix::from_i64(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(inertia(&u).unwrap(), (1, 1, 0));
        let m = RatMatrix::from_i64(&[vec![2, 1, 0], vec![1, 2, 0], vec![0, 0, -2]]).unwrap();
        assert_eq!(inertia(&m).unwrap(), (2, 1, 0));
        let z = RatMatrix::from_i64(&[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(inertia(&z).unwrap(), (0, 0, 2));
    }

    #[test]
    fn frac_reduces() {
        assert_eq!(frac(&rat(-1, 4)), rat(3, 4));
        assert_eq!(frac(&rat(9, 4)), rat(1, 4));
        assert_eq!(frac(&rat_int(3)), rat_int(0));
    }
}
