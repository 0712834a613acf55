use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::EvenLattice;
use crate::error::{Error, Result};
use crate::exactalg::{frac, rat_inverse, rat_to_f64, smith_normal_form, Int, IntMatrix, Rat, RatMatrix};

/// The discriminant group `D_L = L′/L` with its `Q/Z`-valued quadratic form.
///
/// Elements are indexed by `0..order()` via mixed-radix residues with respect to
/// the invariant factors `d_i > 1` of the Gram matrix.
#[derive(Clone, Debug)]
pub struct DiscriminantGroup {
    orders: Vec<u64>,
    /// Generators as vectors of `L′` in lattice coordinates.
    generators: Vec<Vec<Rat>>,
    /// Rows of the SNF transform `U` belonging to nontrivial invariant factors.
    residue_rows: Vec<Vec<Int>>,
    gram: RatMatrix,
    /// Exact generator Gram values `(g_i, g_j)`.
    gen_bilinear: Vec<Vec<Rat>>,
    /// `q` of each element, reduced into `[0, 1)`.
    q_values: Vec<Rat>,
    /// Small-coordinate lift of each element.
    lifts: Vec<Vec<Rat>>,
}

impl DiscriminantGroup {
    pub fn new(lattice: &EvenLattice) -> Self {
        let gram = lattice.gram_rat();
        let snf = smith_normal_form(lattice.gram());
        let n = lattice.rank();
        let mut orders = Vec::new();
        let mut generators = Vec::new();
        let mut residue_rows = Vec::new();
        for i in 0..n {
            let d = snf.d[(i, i)].clone();
            if d.is_one() {
                continue;
            }
            orders.push(d.to_u64().expect("discriminant order fits in u64"));
            // Generator S⁻¹U⁻¹e_i = V e_i / d_i.
            generators.push((0..n).map(|r| Rat::new(snf.v[(r, i)].clone(), d.clone())).collect::<Vec<_>>());
            residue_rows.push(snf.u.row(i).to_vec());
        }
        let gen_bilinear =
            generators.iter().map(|a| generators.iter().map(|b| crate::exactalg::bilinear(&gram, a, b)).collect()).collect();
        let mut group =
            DiscriminantGroup { orders, generators, residue_rows, gram, gen_bilinear, q_values: Vec::new(), lifts: Vec::new() };
        let size = group.order();
        group.lifts = (0..size).map(|idx| group.reduced_lift(&group.residues(idx))).collect();
        group.q_values = group
            .lifts
            .iter()
            .map(|v| frac(&(crate::exactalg::bilinear(&group.gram, v, v) / Rat::from_integer(2.into()))))
            .collect();
        group
    }

    /// Invariant factors `> 1`.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// `|D_L|`.
    pub fn order(&self) -> usize {
        self.orders.iter().product::<u64>() as usize
    }

    pub fn generators(&self) -> &[Vec<Rat>] {
        &self.generators
    }

    pub fn residues(&self, mut idx: usize) -> Vec<u64> {
        let mut r = vec![0; self.orders.len()];
        for (i, &o) in self.orders.iter().enumerate().rev() {
            r[i] = idx as u64 % o;
            idx /= o as usize;
        }
        r
    }

    pub fn index(&self, residues: &[u64]) -> usize {
        residues.iter().zip(&self.orders).fold(0usize, |acc, (&r, &o)| acc * o as usize + (r % o) as usize)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.residues(a), self.residues(b));
        self.index(&ra.iter().zip(&rb).map(|(x, y)| x + y).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: usize) -> usize {
        let r = self.residues(a);
        self.index(&r.iter().zip(&self.orders).map(|(&x, &o)| (o - x) % o).collect::<Vec<_>>())
    }

    /// `k·a` for any integer `k`.
    pub fn scale(&self, k: i64, a: usize) -> usize {
        let r = self.residues(a);
        self.index(&r.iter().zip(&self.orders).map(|(&x, &o)| (k.rem_euclid(o as i64) as u64 * x) % o).collect::<Vec<_>>())
    }

    /// `q(γ) ∈ [0, 1)`.
    pub fn q(&self, a: usize) -> &Rat {
        &self.q_values[a]
    }

    /// `(γ, δ) ∈ [0, 1)`.
    pub fn bilinear(&self, a: usize, b: usize) -> Rat {
        let (ra, rb) = (self.residues(a), self.residues(b));
        let mut acc = Rat::zero();
        for (i, &x) in ra.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in rb.iter().enumerate() {
                if y != 0 {
                    acc += &self.gen_bilinear[i][j] * Rat::from_integer(Int::from(x * y));
                }
            }
        }
        frac(&acc)
    }

    pub fn q_f64(&self, a: usize) -> f64 {
        rat_to_f64(&self.q_values[a])
    }

    pub fn bilinear_f64(&self, a: usize, b: usize) -> f64 {
        rat_to_f64(&self.bilinear(a, b))
    }

    /// A lift of the element to `L′` with small coordinates.
    pub fn lift(&self, a: usize) -> &[Rat] {
        &self.lifts[a]
    }

    pub fn lift_f64(&self, a: usize) -> Vec<f64> {
        self.lifts[a].iter().map(rat_to_f64).collect()
    }

    fn reduced_lift(&self, residues: &[u64]) -> Vec<Rat> {
        let n = self.gram.rows();
        let mut v = vec![Rat::zero(); n];
        for (g, &r) in self.generators.iter().zip(residues) {
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi += gi * Rat::from_integer(Int::from(r));
            }
        }
        // Reduce each coordinate into (-1/2, 1/2] modulo the standard lattice Z^n.
        for vi in v.iter_mut() {
            let shifted = frac(&(vi.clone() + Rat::new(1.into(), 2.into())));
            *vi = shifted - Rat::new(1.into(), 2.into());
        }
        v
    }

    /// Class of a vector of `L′` given in lattice coordinates.
    pub fn index_of(&self, v: &[Rat]) -> Result<usize> {
        let sv = self.gram.mul_vec(v)?;
        if sv.iter().any(|x| !x.is_integer()) {
            return Err(Error::Precondition("vector is not in the dual lattice".into()));
        }
        let x: Vec<Int> = sv.into_iter().map(|r| r.to_integer()).collect();
        let residues: Vec<u64> = self
            .residue_rows
            .iter()
            .zip(&self.orders)
            .map(|(row, &o)| {
                let s: Int = row.iter().zip(&x).map(|(a, b)| a * b).sum();
                s.mod_floor(&Int::from(o)).to_u64().expect("residue")
            })
            .collect();
        Ok(self.index(&residues))
    }

    /// Class of an integral combination of `L′`-vectors given in dual coordinates
    /// `S⁻¹x` (convenience for callers holding integer data).
    pub fn index_of_dual_coords(&self, x: &[i64]) -> Result<usize> {
        let inv = rat_inverse(&self.gram)?;
        let xr: Vec<Rat> = x.iter().map(|&t| Rat::from_integer(t.into())).collect();
        self.index_of(&inv.mul_vec(&xr)?)
    }

    /// Gauss sum `Σ_γ e(q(γ))`.
    pub fn milgram_sum(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..self.order() {
            acc += crate::numeric::e(self.q_f64(a));
        }
        acc
    }

    /// The matrix of the Smith transform rows used for residues (for diagnostics).
    pub fn residue_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(self.residue_rows.clone()).unwrap_or_else(|_| IntMatrix::zeros(0, 0))
    }
}

/// Milgram's value `√|D|·√i^{b⁺−b⁻}`.
pub fn milgram_expected(order: usize, bplus: usize, bminus: usize) -> Complex64 {
    let sig = bplus as f64 - bminus as f64;
    Complex64::from_polar((order as f64).sqrt(), std::f64::consts::PI * sig / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn disc(name: &str) -> DiscriminantGroup {
        EvenLattice::from_name(name).unwrap().discriminant_group()
    }

    #[test]
    fn examples() {
        assert_eq!(disc("U").order(), 1);
        let a1 = disc("A1");
        assert_eq!(a1.orders(), &[2]);
        assert_eq!(a1.q(1), &rat(1, 4));
        let a2 = disc("A2");
        assert_eq!(a2.orders(), &[3]);
        for g in 1..3 {
            assert!(a2.q(g) == &rat(1, 3) || a2.q(g) == &rat(2, 3));
        }
        let u2 = disc("U(2)+A1");
        assert_eq!(u2.order(), 8);
    }

    #[test]
    fn quadratic_and_bilinear_are_compatible() {
        for name in ["A1", "A2", "U(2)+A1", "U+U+A2", "A1+A1(-1)", "<6>+A2", "U(3)"] {
            let d = disc(name);
            for a in 0..d.order() {
                for b in 0..d.order() {
                    let lhs = frac(&(d.q(d.add(a, b)) - d.q(a) - d.q(b)));
                    assert_eq!(lhs, d.bilinear(a, b), "{name}");
                }
                assert_eq!(d.index_of(d.lift(a)).unwrap(), a);
            }
        }
    }

    #[test]
    fn milgram_corpus() {
        for name in ["U", "A1", "A1(-1)", "A2", "U+A1", "U+U+A1", "U(2)+A1", "U+U+A2", "E8", "<4>", "<10>+A1(-1)"] {
            let l = EvenLattice::from_name(name).unwrap();
            let d = l.discriminant_group();
            let err = (d.milgram_sum() - milgram_expected(d.order(), l.bplus(), l.bminus())).norm();
            assert!(err < 1e-12, "{name}: {err}");
        }
        let a1 = disc("A1").milgram_sum();
        assert!((a1 - Complex64::new(1.0, 1.0)).norm() < 1e-14);
        let a1m = disc("A1(-1)").milgram_sum();
        assert!((a1m - Complex64::new(1.0, -1.0)).norm() < 1e-14);
    }
}
