use nalgebra::DMatrix;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{EvenLattice, GrassmannianFrame, DEGENERATE_TOLERANCE};
use crate::error::{Error, Result};
use crate::exactalg::{rat_inverse, rat_to_f64, smith_normal_form, Int, IntMatrix, Rat};

/// An isotropic primitive `u ∈ L` of level `N_u`, a partner `u′ ∈ L′` with
/// `(u, u′) = 1`, and a basis of `K = (u, u′)⊥ ∩ L`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicSplit {
    pub u: Vec<i64>,
    pub u_prime: Vec<Rat>,
    pub k_basis: Vec<Vec<i64>>,
    pub level: u64,
}

impl HyperbolicSplit {
    /// Search short primitive isotropic vectors (max-norm ≤ `bound`) for `u`, then
    /// the shortest `u′ ∈ L′` with `(u, u′) = 1`, preferring isotropic `u′`.
    pub fn find(lattice: &EvenLattice, bound: i64) -> Result<Self> {
        let n = lattice.rank();
        let mut candidates: Vec<Vec<i64>> = box_vectors(n, bound)
            .into_iter()
            .filter(|v| {
                let first = v.iter().find(|&&x| x != 0);
                first.is_some_and(|&x| x > 0) && lattice.q_int(v) == 0 && gcd_vec(v) == 1
            })
            .collect();
        candidates.sort_by_key(|v| (v.iter().map(|x| x.abs()).sum::<i64>(), v.iter().map(|x| -x).collect::<Vec<_>>()));
        for u in candidates {
            if let Ok(split) = Self::with_u(lattice, &u, bound) {
                return Ok(split);
            }
        }
        Err(Error::NotFound(format!(
            "no hyperbolic pair with coordinates bounded by {bound}; increase the bound or the lattice may not split U"
        )))
    }

    fn with_u(lattice: &EvenLattice, u: &[i64], bound: i64) -> Result<Self> {
        let n = lattice.rank();
        let gram = lattice.gram_rat();
        let inv = rat_inverse(&gram)?;
        // u′ = S⁻¹x with uᵗx = 1.
        let mut best: Option<(bool, i64, Vec<Rat>)> = None;
        for x in box_vectors(n, bound) {
            if x.iter().zip(u).map(|(a, b)| a * b).sum::<i64>() != 1 {
                continue;
            }
            let xr: Vec<Rat> = x.iter().map(|&t| Rat::from_integer(t.into())).collect();
            let v = inv.mul_vec(&xr)?;
            let isotropic = lattice.bilinear_rat(&v, &v).is_zero();
            let size: i64 = x.iter().map(|t| t.abs()).sum();
            let better = match &best {
                None => true,
                Some((iso, s, _)) => (isotropic && !iso) || (isotropic == *iso && size < *s),
            };
            if better {
                best = Some((isotropic, size, v));
            }
        }
        let (_, _, u_prime) = best.ok_or_else(|| Error::NotFound("no partner u′ found".into()))?;
        Self::from_vectors(lattice, u.to_vec(), u_prime)
    }

    /// Build a split from caller-supplied `u` and `u′`.
    pub fn from_vectors(lattice: &EvenLattice, u: Vec<i64>, u_prime: Vec<Rat>) -> Result<Self> {
        let n = lattice.rank();
        if u.len() != n || u_prime.len() != n {
            return Err(Error::DimensionMismatch("split vectors".into()));
        }
        if lattice.q_int(&u) != 0 {
            return Err(Error::Precondition("u must be isotropic".into()));
        }
        let ur: Vec<Rat> = u.iter().map(|&t| Rat::from_integer(t.into())).collect();
        if lattice.bilinear_rat(&ur, &u_prime) != Rat::from_integer(1.into()) {
            return Err(Error::Precondition("(u, u′) must equal 1".into()));
        }
        let su = lattice.gram_rat().mul_vec(&ur)?;
        if su.iter().chain(lattice.gram_rat().mul_vec(&u_prime)?.iter()).any(|x| !x.is_integer()) {
            return Err(Error::Precondition("u′ must lie in the dual lattice".into()));
        }
        let level = su.iter().fold(Int::zero(), |g, x| g.gcd(&x.to_integer())).to_u64().unwrap_or(0);
        // K = kernel of x ↦ ((x,u), (x,u′)) on Z^n.
        let su_prime = lattice.gram_rat().mul_vec(&u_prime)?;
        let rows = vec![su.iter().map(|x| x.to_integer()).collect::<Vec<_>>(), su_prime.iter().map(|x| x.to_integer()).collect()];
        let a = IntMatrix::from_rows(rows)?;
        let snf = smith_normal_form(&a);
        let rank = snf.diagonal().iter().filter(|d| !d.is_zero()).count();
        let k_basis = (rank..n).map(|j| (0..n).map(|i| snf.v[(i, j)].to_i64().expect("small kernel basis")).collect()).collect();
        Ok(HyperbolicSplit { u, u_prime, k_basis, level })
    }

    /// The lattice `K` with Gram matrix induced on `k_basis`.
    pub fn k_lattice(&self, lattice: &EvenLattice) -> Result<EvenLattice> {
        lattice.sublattice(format!("K({})", lattice.name()), &self.k_basis)
    }

    pub fn u_f64(&self) -> Vec<f64> {
        self.u.iter().map(|&x| x as f64).collect()
    }

    pub fn u_prime_f64(&self) -> Vec<f64> {
        self.u_prime.iter().map(rat_to_f64).collect()
    }

    /// Embedding of `K` coordinates into `L` coordinates.
    pub fn k_to_l(&self, k: &[f64]) -> Vec<f64> {
        let n = self.u.len();
        let mut v = vec![0.0; n];
        for (c, b) in k.iter().zip(&self.k_basis) {
            for i in 0..n {
                v[i] += c * b[i] as f64;
            }
        }
        v
    }

    pub fn k_to_l_rat(&self, k: &[Rat]) -> Vec<Rat> {
        let n = self.u.len();
        let mut v = vec![Rat::zero(); n];
        for (c, b) in k.iter().zip(&self.k_basis) {
            for i in 0..n {
                v[i] += c * Rat::from_integer(b[i].into());
            }
        }
        v
    }
}

fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

fn box_vectors(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let side = (2 * bound + 1) as usize;
    let total = side.checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > 20_000_000 {
        // Fall back to a smaller box; large boxes are never needed for desk-scale lattices.
        return box_vectors(n, (bound - 1).max(1));
    }
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![-bound; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < bound {
                cur[i] += 1;
                break;
            }
            cur[i] = -bound;
        }
    }
}

/// The four projections of a vector relative to a frame and a split.
#[derive(Clone, Debug)]
pub struct Projections {
    pub vz: Vec<f64>,
    pub vzperp: Vec<f64>,
    pub vw: Vec<f64>,
    pub vwperp: Vec<f64>,
}

/// Geometry attached to a frame and a hyperbolic split: `u_z`, `u_{z⊥}`, the
/// spaces `w`, `w⊥`, the map `borw`, and the vector `μ`.
#[derive(Clone, Debug)]
pub struct SplitGeometry {
    pub frame: GrassmannianFrame,
    pub split: HyperbolicSplit,
    pub u: Vec<f64>,
    pub u_z: Vec<f64>,
    pub u_zperp: Vec<f64>,
    /// `(u_z, u_z)` (negative).
    pub uz2: f64,
    /// `(u_{z⊥}, u_{z⊥})` (positive).
    pub uzperp2: f64,
}

impl SplitGeometry {
    pub fn new(frame: &GrassmannianFrame, split: &HyperbolicSplit) -> Result<Self> {
        let u = split.u_f64();
        let u_z = frame.proj_z(&u);
        let u_zperp = frame.proj_zperp(&u);
        let uz2 = frame.bilinear(&u_z, &u_z);
        let uzperp2 = frame.bilinear(&u_zperp, &u_zperp);
        if !(uzperp2 >= DEGENERATE_TOLERANCE) {
            return Err(Error::DegenerateFrame(format!("u_{{z⊥}}² = {uzperp2:e}")));
        }
        Ok(SplitGeometry { frame: frame.clone(), split: split.clone(), u, u_z, u_zperp, uz2, uzperp2 })
    }

    pub fn projections(&self, v: &[f64]) -> Projections {
        let f = &self.frame;
        let vz = f.proj_z(v);
        let vzperp = f.proj_zperp(v);
        let cz = f.bilinear(v, &self.u_z) / self.uz2;
        let cp = f.bilinear(v, &self.u_zperp) / self.uzperp2;
        let vw = vz.iter().zip(&self.u_z).map(|(a, b)| a - cz * b).collect();
        let vwperp = vzperp.iter().zip(&self.u_zperp).map(|(a, b)| a - cp * b).collect();
        Projections { vz, vzperp, vw, vwperp }
    }

    /// `borw(v) = g(v_{w⊥} + v_w)` in ambient coordinates.
    pub fn borw(&self, v: &[f64]) -> Vec<f64> {
        let p = self.projections(v);
        let s: Vec<f64> = p.vw.iter().zip(&p.vwperp).map(|(a, b)| a + b).collect();
        self.frame.apply(&s)
    }

    /// Ambient matrix of `borw` restricted to `K` (columns: images of the `K` basis).
    pub fn borw_on_k(&self) -> DMatrix<f64> {
        let n = self.frame.rank();
        let kb = &self.split.k_basis;
        let mut m = DMatrix::zeros(n, kb.len());
        for (j, b) in kb.iter().enumerate() {
            let v: Vec<f64> = b.iter().map(|&x| x as f64).collect();
            for (i, x) in self.borw(&v).into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    /// `g(u_{z⊥})` in ambient coordinates (supported on the positive rows).
    pub fn u_zperp_ambient(&self) -> Vec<f64> {
        self.frame.apply(&self.u_zperp)
    }

    /// `μ = −u′ + u_{z⊥}/2u_{z⊥}² + u_z/2u_z²` in lattice coordinates.
    pub fn mu(&self) -> Vec<f64> {
        let up = self.split.u_prime_f64();
        (0..up.len()).map(|i| -up[i] + self.u_zperp[i] / (2.0 * self.uzperp2) + self.u_z[i] / (2.0 * self.uz2)).collect()
    }

    /// Orthogonal projection of an `L⊗R` vector to `K⊗R`, in `K` coordinates.
    ///
    /// Uses `v_K = v − (v,u′)u − (v,u)u′ + 2q(u′)(v,u)u`.
    pub fn project_to_k(&self, v: &[f64]) -> Vec<f64> {
        let f = &self.frame;
        let up = self.split.u_prime_f64();
        let (vu, vup) = (f.bilinear(v, &self.u), f.bilinear(v, &up));
        let qup = 0.5 * f.bilinear(&up, &up);
        let vk: Vec<f64> = (0..v.len()).map(|i| v[i] - vup * self.u[i] - vu * up[i] + 2.0 * qup * vu * self.u[i]).collect();
        k_coordinates(&self.split, f, &vk)
    }
}

/// Coordinates of `v ∈ K⊗R` with respect to the `K` basis (least squares on the Gram).
fn k_coordinates(split: &HyperbolicSplit, frame: &GrassmannianFrame, v: &[f64]) -> Vec<f64> {
    let kb: Vec<Vec<f64>> = split.k_basis.iter().map(|b| b.iter().map(|&x| x as f64).collect()).collect();
    let m = kb.len();
    let gk = DMatrix::from_fn(m, m, |i, j| frame.bilinear(&kb[i], &kb[j]));
    let rhs = nalgebra::DVector::from_fn(m, |i, _| frame.bilinear(&kb[i], v));
    match gk.try_inverse() {
        Some(inv) => (inv * rhs).iter().copied().collect(),
        None => vec![0.0; m],
    }
}

/// The Eichler transformation `E(u, λ)(v) = v − (v,u)λ + (v,λ)u − q(λ)(v,u)u` as a
/// matrix in lattice coordinates (columns are images of basis vectors).
pub fn eichler_transform(lattice: &EvenLattice, u: &[f64], lambda: &[f64]) -> Result<DMatrix<f64>> {
    let n = lattice.rank();
    if u.len() != n || lambda.len() != n {
        return Err(Error::DimensionMismatch("Eichler transformation vectors".into()));
    }
    let scale = 1.0 + u.iter().chain(lambda).map(|x| x.abs()).fold(0.0, f64::max).powi(2);
    if lattice.q_f64(u).abs() > 1e-12 * scale || lattice.bilinear_f64(u, lambda).abs() > 1e-12 * scale {
        return Err(Error::Precondition("need q(u) = 0 and (u, λ) = 0".into()));
    }
    let q_lambda = lattice.q_f64(lambda);
    let mut e = DMatrix::identity(n, n);
    for j in 0..n {
        let ej: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        let (vu, vl) = (lattice.bilinear_f64(&ej, u), lattice.bilinear_f64(&ej, lambda));
        for i in 0..n {
            e[(i, j)] += -vu * lambda[i] + vl * u[i] - q_lambda * vu * u[i];
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn split_examples() {
        let u = EvenLattice::from_name("U").unwrap();
        let s = HyperbolicSplit::find(&u, 10).unwrap();
        assert_eq!(s.u, vec![1, 0]);
        assert_eq!(s.u_prime, vec![rat(0, 1), rat(1, 1)]);
        assert!(s.k_basis.is_empty());
        assert_eq!(s.level, 1);

        let ua1 = EvenLattice::from_name("U+A1").unwrap();
        let s = HyperbolicSplit::find(&ua1, 10).unwrap();
        assert_eq!(s.u, vec![1, 0, 0]);
        assert_eq!(s.k_lattice(&ua1).unwrap().gram_i64(), vec![vec![2]]);

        let u2 = EvenLattice::from_name("U(2)").unwrap();
        let s = HyperbolicSplit::find(&u2, 10).unwrap();
        assert_eq!(s.level, 2);
        assert_eq!(s.u_prime, vec![rat(0, 1), rat(1, 2)]);
    }

    #[test]
    fn mu_and_projections() {
        let l = EvenLattice::from_name("U+U+A1").unwrap();
        let split = HyperbolicSplit::find(&l, 10).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        for _ in 0..5 {
            let f = GrassmannianFrame::random_near_base(&l, &mut rng, 0.3).unwrap();
            let geo = SplitGeometry::new(&f, &split).unwrap();
            assert!((geo.uz2 + geo.uzperp2).abs() < 1e-12);
            let mu = geo.mu();
            assert!(f.bilinear(&mu, &geo.u).abs() < 1e-12);
            let v = [0.4, -1.0, 0.25, 0.5, 1.5];
            let p = geo.projections(&v);
            let q = |x: &[f64]| 0.5 * f.bilinear(x, x);
            assert!((q(&v) - q(&p.vz) - q(&p.vzperp)).abs() < 1e-10);
            assert!(f.bilinear(&p.vw, &geo.u).abs() < 1e-12);
            assert!(f.bilinear(&p.vwperp, &geo.u).abs() < 1e-12);
            let pu = geo.projections(&geo.u);
            assert!(pu.vw.iter().chain(&pu.vwperp).all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn eichler_basics() {
        let l = EvenLattice::from_name("U+A1").unwrap();
        let u = [1.0, 0.0, 0.0];
        let lam = [0.0, 0.0, 0.7];
        let e = eichler_transform(&l, &u, &lam).unwrap();
        let up = nalgebra::DVector::from_column_slice(&[0.0, 1.0, 0.0]);
        let img = &e * up;
        let expected = [-l.q_f64(&lam), 1.0, -0.7];
        assert!(img.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-14));
        let gram = DMatrix::from_fn(3, 3, |i, j| l.gram_f64()[i][j]);
        assert!((e.transpose() * &gram * &e - gram).amax() < 1e-14);
        assert!((eichler_transform(&l, &u, &[0.0; 3]).unwrap() - DMatrix::identity(3, 3)).amax() == 0.0);
        assert!(eichler_transform(&l, &[1.0, 1.0, 0.0], &lam).is_err());
    }
}
