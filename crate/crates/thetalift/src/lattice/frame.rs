use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvenLattice;
use crate::error::{Error, Result};

/// Frames with `u_{z⊥}² ` below this are rejected: the splitting formulas divide by it.
pub const DEGENERATE_TOLERANCE: f64 = 1e-10;

/// Tolerance for accepting a user-supplied frame as an isometry.
const ISOMETRY_TOLERANCE: f64 = 1e-9;

/// An isometry `g: L⊗R → R^{b⁺,b⁻}` (coordinates: positive rows first).
///
/// The negative definite subspace `z` of `L⊗R` is the preimage of the last `b⁻`
/// coordinate axes.  Column `j` of `g` is the image of the `j`-th lattice basis vector.
#[derive(Clone, Debug)]
pub struct GrassmannianFrame {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    gram: DMatrix<f64>,
    bplus: usize,
    bminus: usize,
}

/// On-disk form of a frame: `{"g": [[float]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameFile {
    pub g: Vec<Vec<f64>>,
}

impl GrassmannianFrame {
    /// Wrap a matrix after checking `gᵗ·diag(I, −I)·g = S`.
    pub fn from_matrix(lattice: &EvenLattice, g: DMatrix<f64>) -> Result<Self> {
        let n = lattice.rank();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch(format!("frame must be {n}x{n}")));
        }
        let gram = gram_matrix(lattice);
        let (bplus, bminus) = lattice.signature();
        let j = signature_matrix(bplus, bminus);
        let defect = (g.transpose() * &j * &g - &gram).amax();
        let scale = 1.0 + g.amax() * g.amax();
        if !(defect <= ISOMETRY_TOLERANCE * scale) {
            return Err(Error::InvalidInput(format!("frame is not an isometry (defect {defect:e})")));
        }
        let g_inv = g.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(GrassmannianFrame { g, g_inv, gram, bplus, bminus })
    }

    pub fn from_file(lattice: &EvenLattice, file: &FrameFile) -> Result<Self> {
        let n = file.g.len();
        if file.g.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("frame rows must all have the same length".into()));
        }
        let g = DMatrix::from_fn(n, n, |i, j| file.g[i][j]);
        GrassmannianFrame::from_matrix(lattice, g)
    }

    pub fn to_file(&self) -> FrameFile {
        FrameFile { g: (0..self.g.nrows()).map(|i| self.g.row(i).iter().copied().collect()).collect() }
    }

    /// Frame mapping the negative definite subspace spanned by `z_basis` (lattice
    /// coordinates) onto the last `b⁻` axes.
    ///
    /// Gram–Schmidt orthonormalises `z` under `−(·,·)` in the given order, then
    /// extends by the projections of the standard basis vectors to `z⊥`.
    pub fn from_plane(lattice: &EvenLattice, z_basis: &[Vec<f64>]) -> Result<Self> {
        let n = lattice.rank();
        let (bplus, bminus) = lattice.signature();
        if z_basis.len() != bminus || z_basis.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!("need {bminus} vectors of length {n}")));
        }
        let gram = gram_matrix(lattice);
        let form = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&gram * b));
        let mut zs: Vec<DVector<f64>> = Vec::new();
        for v in z_basis {
            let mut w = DVector::from_column_slice(v);
            for zk in &zs {
                let c = -form(&w, zk);
                w -= zk * c;
            }
            let nn = -form(&w, &w);
            let scale = w.norm_squared().max(1e-300);
            if !(nn > 1e-12 * scale) {
                return Err(Error::InvalidInput("plane is not negative definite".into()));
            }
            zs.push(w / nn.sqrt());
        }
        let mut ps: Vec<DVector<f64>> = Vec::new();
        let mut candidates: Vec<DVector<f64>> =
            (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
        // Two passes so that nearly dependent candidates still lead to a full basis.
        candidates.extend(candidates.clone());
        for c in candidates {
            if ps.len() == bplus {
                break;
            }
            let mut w = c;
            for _ in 0..2 {
                for zk in &zs {
                    let coef = -form(&w, zk);
                    w -= zk * coef;
                }
                for pk in &ps {
                    let coef = form(&w, pk);
                    w -= pk * coef;
                }
            }
            let nn = form(&w, &w);
            if nn > 1e-6 {
                ps.push(w / nn.sqrt());
            }
        }
        if ps.len() != bplus {
            return Err(Error::InvalidInput("could not complete the frame".into()));
        }
        let mut g = DMatrix::zeros(n, n);
        for (i, p) in ps.iter().enumerate() {
            g.set_row(i, &(&gram * p).transpose());
        }
        for (k, z) in zs.iter().enumerate() {
            g.set_row(bplus + k, &(-(&gram * z)).transpose());
        }
        GrassmannianFrame::from_matrix(lattice, g)
    }

    /// Canonical base frame: `z` spanned by the eigenvectors of the Gram matrix with
    /// negative eigenvalues, in increasing eigenvalue order.
    pub fn base(lattice: &EvenLattice) -> Result<Self> {
        let z = negative_eigenvectors(lattice);
        GrassmannianFrame::from_plane(lattice, &z)
    }

    /// Frame for a random negative definite subspace near the base plane.
    pub fn random_near_base<R: Rng>(lattice: &EvenLattice, rng: &mut R, size: f64) -> Result<Self> {
        let mut z = negative_eigenvectors(lattice);
        for v in z.iter_mut() {
            for x in v.iter_mut() {
                *x += size * (rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        GrassmannianFrame::from_plane(lattice, &z)
    }

    /// The coordinate-transposition isometry composed after this frame.
    pub fn frame_swap(&self, i: usize, j: usize) -> Result<Self> {
        let n = self.g.nrows();
        if i >= n || j >= n || ((i < self.bplus) != (j < self.bplus)) {
            return Err(Error::InvalidInput("can only swap coordinates of the same sign".into()));
        }
        let mut g = self.g.clone();
        g.swap_rows(i, j);
        let mut g_inv = self.g_inv.clone();
        g_inv.swap_columns(i, j);
        Ok(GrassmannianFrame { g, g_inv, ..self.clone() })
    }

    /// The frame `g ∘ e` for an isometry `e` of `L⊗R` given in lattice coordinates.
    pub fn compose(&self, e: &DMatrix<f64>) -> Result<Self> {
        let g = &self.g * e;
        let g_inv = g.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(GrassmannianFrame { g, g_inv, ..self.clone() })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.g_inv
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.bplus, self.bminus)
    }

    pub fn rank(&self) -> usize {
        self.g.nrows()
    }

    /// `g(v)` in ambient coordinates.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.g * DVector::from_column_slice(v)).iter().copied().collect()
    }

    /// Lattice coordinates of an ambient vector.
    pub fn unapply(&self, x: &[f64]) -> Vec<f64> {
        (&self.g_inv * DVector::from_column_slice(x)).iter().copied().collect()
    }

    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        DVector::from_column_slice(a).dot(&(&self.gram * DVector::from_column_slice(b)))
    }

    /// Projection `v_z` onto the negative definite subspace.
    pub fn proj_z(&self, v: &[f64]) -> Vec<f64> {
        let mut x = self.apply(v);
        x.iter_mut().take(self.bplus).for_each(|t| *t = 0.0);
        self.unapply(&x)
    }

    /// Projection `v_{z⊥}` onto the positive definite complement.
    pub fn proj_zperp(&self, v: &[f64]) -> Vec<f64> {
        let mut x = self.apply(v);
        x.iter_mut().skip(self.bplus).for_each(|t| *t = 0.0);
        self.unapply(&x)
    }

    /// Majorant `(v,v)_z = (v_{z⊥},v_{z⊥}) − (v_z,v_z)`: the Euclidean norm² of `g(v)`.
    pub fn majorant(&self, v: &[f64]) -> f64 {
        self.apply(v).iter().map(|t| t * t).sum()
    }

    /// Basis of `z` in lattice coordinates (preimages of the negative axes).
    pub fn z_basis(&self) -> Vec<Vec<f64>> {
        (self.bplus..self.bplus + self.bminus).map(|k| self.g_inv.column(k).iter().copied().collect()).collect()
    }
}

fn gram_matrix(lattice: &EvenLattice) -> DMatrix<f64> {
    let g = lattice.gram_f64();
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| g[i][j])
}

fn signature_matrix(bplus: usize, bminus: usize) -> DMatrix<f64> {
    DMatrix::from_fn(bplus + bminus, bplus + bminus, |i, j| {
        if i != j {
            0.0
        } else if i < bplus {
            1.0
        } else {
            -1.0
        }
    })
}

fn negative_eigenvectors(lattice: &EvenLattice) -> Vec<Vec<f64>> {
    let eig = SymmetricEigen::new(gram_matrix(lattice));
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] < 0.0).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    idx.iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            // Fix the sign: first entry of largest modulus positive.
            let k = (0..v.len()).fold(0, |best, j| if v[j].abs() > v[best].abs() + 1e-12 { j } else { best });
            if v[k] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn base_frame_is_isometry() {
        for name in ["U+U", "U+U+A1", "U+A1", "U(2)+A1", "A1", "U+U+A2"] {
            let l = EvenLattice::from_name(name).unwrap();
            let f = GrassmannianFrame::base(&l).unwrap();
            let j = signature_matrix(l.bplus(), l.bminus());
            let defect = (f.matrix().transpose() * j * f.matrix() - gram_matrix(&l)).amax();
            assert!(defect < 1e-12, "{name}: {defect}");
        }
    }

    #[test]
    fn random_frames_and_projections() {
        let l = EvenLattice::from_name("U+U").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let f = GrassmannianFrame::random_near_base(&l, &mut rng, 0.4).unwrap();
            let j = signature_matrix(2, 2);
            assert!((f.matrix().transpose() * j * f.matrix() - gram_matrix(&l)).amax() < 1e-12);
            let v = [0.3, -1.2, 0.7, 2.0];
            let (vz, vp) = (f.proj_z(&v), f.proj_zperp(&v));
            let q = |x: &[f64]| 0.5 * f.bilinear(x, x);
            assert!((q(&v) - q(&vz) - q(&vp)).abs() < 1e-10);
            assert!(f.bilinear(&vz, &vp).abs() < 1e-10);
            for z in f.z_basis() {
                let pz = f.proj_z(&z);
                assert!(pz.iter().zip(&z).all(|(a, b)| (a - b).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn swaps_are_involutive() {
        let l = EvenLattice::from_name("U+U+A1").unwrap();
        let f = GrassmannianFrame::base(&l).unwrap();
        let twice = f.frame_swap(0, 2).unwrap().frame_swap(0, 2).unwrap();
        assert_eq!(twice.matrix(), f.matrix());
        assert!(f.frame_swap(0, 4).is_err());
        assert!(GrassmannianFrame::from_plane(&l, &[vec![1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, -1.0, 0.0]]).is_err());
    }
}
