use std::fmt::Debug;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::exactalg::{rat_to_f64, Rat};

/// Coefficient field of a [`super::MatrixPolynomial`].
///
/// Exact coefficients live in `Q[1/π]` ([`PiRat`]) so that the heat operator
/// `exp(−tr(Δy⁻¹)/8π)` stays exact; floating coefficients are `f64` or `Complex64`.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rat(r: &Rat) -> Self;
    /// The constant `1/π`.
    fn inv_pi() -> Self;
    /// Multiplicative inverse; exact coefficients must be plain nonzero rationals.
    fn recip(&self) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Whether arithmetic is exact (deviations are then reported as 0 or 1).
    const EXACT: bool;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn from_i64(n: i64) -> Self {
        Self::from_rat(&Rat::from_integer(n.into()))
    }
}

/// An element `c₀ + c₁/π + c₂/π² + …` of `Q[1/π]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct PiRat(Vec<Rat>);

impl PiRat {
    pub fn from_parts(mut parts: Vec<Rat>) -> Self {
        while parts.last().is_some_and(Zero::is_zero) {
            parts.pop();
        }
        PiRat(parts)
    }

    pub fn rational(r: Rat) -> Self {
        PiRat::from_parts(vec![r])
    }

    /// Coefficients of increasing powers of `1/π`.
    pub fn parts(&self) -> &[Rat] {
        &self.0
    }

    /// The rational value if no `1/π` terms are present.
    pub fn as_rational(&self) -> Option<Rat> {
        match self.0.len() {
            0 => Some(Rat::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }
}

impl Coeff for PiRat {
    const EXACT: bool = true;

    fn zero() -> Self {
        PiRat(Vec::new())
    }

    fn one() -> Self {
        PiRat(vec![Rat::one()])
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        PiRat::from_parts(
            (0..n)
                .map(|k| match (self.0.get(k), other.0.get(k)) {
                    (Some(a), Some(b)) => a + b,
                    (Some(a), None) | (None, Some(a)) => a.clone(),
                    (None, None) => Rat::zero(),
                })
                .collect(),
        )
    }

    fn mul(&self, other: &Self) -> Self {
        if self.0.is_empty() || other.0.is_empty() {
            return PiRat::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PiRat::from_parts(out)
    }

    fn neg(&self) -> Self {
        PiRat(self.0.iter().map(|x| -x).collect())
    }

    fn from_rat(r: &Rat) -> Self {
        PiRat::rational(r.clone())
    }

    fn inv_pi() -> Self {
        PiRat(vec![Rat::zero(), Rat::one()])
    }

    fn recip(&self) -> Self {
        let r = self.as_rational().expect("only rational coefficients can be inverted exactly");
        PiRat::rational(r.recip())
    }

    fn to_c64(&self) -> Complex64 {
        let mut acc = 0.0;
        let mut p = 1.0;
        for c in &self.0 {
            acc += rat_to_f64(c) * p;
            p /= std::f64::consts::PI;
        }
        Complex64::new(acc, 0.0)
    }
}

impl Coeff for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
    fn inv_pi() -> Self {
        std::f64::consts::FRAC_1_PI
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl Coeff for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_rat(r: &Rat) -> Self {
        Complex64::new(rat_to_f64(r), 0.0)
    }
    fn inv_pi() -> Self {
        Complex64::new(std::f64::consts::FRAC_1_PI, 0.0)
    }
    fn recip(&self) -> Self {
        self.inv()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn pirat_arithmetic() {
        let a = PiRat::from_parts(vec![rat(1, 2), rat(-1, 8)]);
        let b = PiRat::inv_pi();
        let prod = a.mul(&b);
        assert_eq!(prod.parts(), &[rat(0, 1), rat(1, 2), rat(-1, 8)]);
        assert!(a.add(&a.neg()).is_zero());
        let v = a.to_c64().re;
        assert!((v - (0.5 - 0.125 / std::f64::consts::PI)).abs() < 1e-15);
        assert_eq!(PiRat::from_i64(3).recip(), PiRat::rational(rat(1, 3)));
    }
}
