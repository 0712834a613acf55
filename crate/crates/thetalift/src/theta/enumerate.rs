use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};

/// Enumerate every integer vector `x` with `(x − c)ᵗ G (x − c) ≤ r²` (Fincke–Pohst).
///
/// `visit` receives the vector and its norm.  Vectors are produced in a fixed
/// lexicographic order (last coordinate outermost, each coordinate ascending), so two
/// runs with the same input visit the same sequence.
pub fn enumerate_ellipsoid(gram: &DMatrix<f64>, center: &[f64], r2: f64, mut visit: impl FnMut(&[i64], f64)) -> Result<()> {
    let d = gram.nrows();
    if gram.ncols() != d || center.len() != d {
        return Err(Error::DimensionMismatch("ellipsoid Gram and center".into()));
    }
    if !(r2 >= 0.0) || !r2.is_finite() {
        return Err(Error::NonConvergent(format!("radius² {r2}")));
    }
    if d == 0 {
        visit(&[], 0.0);
        return Ok(());
    }
    let chol =
        Cholesky::new(gram.clone()).ok_or_else(|| Error::NonConvergent("quadratic form is not positive definite".into()))?;
    let r = chol.l().transpose();
    let state = Fp { r: &r, center, r2, slack: 1e-12 * (1.0 + r2) };
    let mut x = vec![0i64; d];
    state.level(d - 1, 0.0, &mut x, &mut visit);
    Ok(())
}

struct Fp<'a> {
    r: &'a DMatrix<f64>,
    center: &'a [f64],
    r2: f64,
    slack: f64,
}

impl Fp<'_> {
    fn level(&self, i: usize, partial: f64, x: &mut [i64], visit: &mut impl FnMut(&[i64], f64)) {
        let rem = self.r2 + self.slack - partial;
        if rem < 0.0 {
            return;
        }
        let rii = self.r[(i, i)];
        let mut m = self.center[i];
        for j in i + 1..x.len() {
            m -= self.r[(i, j)] / rii * (x[j] as f64 - self.center[j]);
        }
        let half = rem.sqrt() / rii;
        let (lo, hi) = ((m - half).ceil() as i64, (m + half).floor() as i64);
        for xi in lo..=hi {
            let t = rii * (xi as f64 - m);
            let p = partial + t * t;
            if p > self.r2 + self.slack {
                continue;
            }
            x[i] = xi;
            if i == 0 {
                visit(x, p);
            } else {
                self.level(i - 1, p, x, visit);
            }
        }
    }
}

/// Integer vectors `λ` with majorant `|g(λ + β)|² ≤ r²` (lattice coordinates of `λ`).
pub fn enumerate_majorant(frame_matrix: &DMatrix<f64>, beta: &[f64], radius: f64) -> Result<Vec<Vec<i64>>> {
    let m = frame_matrix.transpose() * frame_matrix;
    let center: Vec<f64> = beta.iter().map(|b| -b).collect();
    let mut out = Vec::new();
    enumerate_ellipsoid(&m, &center, radius * radius, |x, _| out.push(x.to_vec()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{EvenLattice, GrassmannianFrame};
    use rand::SeedableRng;

    fn box_scan(gram: &DMatrix<f64>, center: &[f64], r2: f64, bound: i64) -> Vec<Vec<i64>> {
        let d = center.len();
        let mut out = Vec::new();
        let mut x = vec![-bound; d];
        loop {
            let v: Vec<f64> = x.iter().zip(center).map(|(&a, c)| a as f64 - c).collect();
            let q: f64 = (0..d).map(|i| (0..d).map(|j| v[i] * gram[(i, j)] * v[j]).sum::<f64>()).sum();
            if q <= r2 + 1e-12 * (1.0 + r2) {
                out.push(x.clone());
            }
            let mut i = 0;
            loop {
                if i == d {
                    out.sort();
                    return out;
                }
                if x[i] < bound {
                    x[i] += 1;
                    break;
                }
                x[i] = -bound;
                i += 1;
            }
        }
    }

    #[test]
    fn a1_and_zero_radius() {
        let l = EvenLattice::from_name("A1").unwrap();
        let f = GrassmannianFrame::base(&l).unwrap();
        let mut v = enumerate_majorant(f.matrix(), &[0.0], 2.0).unwrap();
        v.sort();
        assert_eq!(v, vec![vec![-1], vec![0], vec![1]]);
        assert_eq!(enumerate_majorant(f.matrix(), &[0.0], 0.0).unwrap(), vec![vec![0]]);
    }

    #[test]
    fn matches_box_scan_on_random_frames() {
        let l = EvenLattice::from_name("U+U").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for k in 0..5 {
            let f = GrassmannianFrame::random_near_base(&l, &mut rng, 0.4).unwrap();
            let m = f.matrix().transpose() * f.matrix();
            let center = [0.3 * k as f64, -0.25, 0.1, 0.7];
            let mut fp = Vec::new();
            enumerate_ellipsoid(&m, &center, 6.0, |x, _| fp.push(x.to_vec())).unwrap();
            fp.sort();
            assert_eq!(fp, box_scan(&m, &center, 6.0, 8));
        }
    }

    #[test]
    fn order_is_deterministic_and_norms_are_exact() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        enumerate_ellipsoid(&g, &[0.2, 0.1], 9.0, |x, q| a.push((x.to_vec(), q))).unwrap();
        enumerate_ellipsoid(&g, &[0.2, 0.1], 9.0, |x, q| b.push((x.to_vec(), q))).unwrap();
        assert_eq!(a, b);
        for (x, q) in a {
            let v = [x[0] as f64 - 0.2, x[1] as f64 - 0.1];
            let direct = 2.0 * v[0] * v[0] + v[0] * v[1] + v[1] * v[1];
            assert!((direct - q).abs() < 1e-12);
        }
    }
}
