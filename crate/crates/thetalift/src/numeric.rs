//! Small floating-point helpers shared by the analytic modules.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `e(x) = exp(2πi x)` for real `x`; the argument is reduced mod 1 first for accuracy.
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    let a = 2.0 * PI * r;
    Complex64::new(a.cos(), a.sin())
}

/// `e(z) = exp(2πi z)` for complex `z`.
pub fn e_c(z: Complex64) -> Complex64 {
    let r = z.re - z.re.round();
    (Complex64::new(0.0, 2.0 * PI) * Complex64::new(r, z.im)).exp()
}

/// Compensated (Neumaier) summation of complex values.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: Complex64,
    comp: Complex64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier_step(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier_step(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn neumaier_step(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

/// Maximum entrywise deviation between two complex vectors.
pub fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "vector lengths differ");
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Maximum modulus of a complex vector.
pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Principal power `z^s` for real `s` (branch cut on the negative real axis).
pub fn cpow_principal(z: Complex64, s: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    (z.ln() * s).exp()
}

/// Determinant of a 2×2 complex matrix `[[a, b], [c, d]]`.
pub fn det2(m: &[[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_is_periodic() {
        assert!((e(0.25) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((e(1e6 + 0.5) - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        assert!((e_c(Complex64::new(0.0, 1.0)) - Complex64::new((-2.0 * PI).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(Complex64::new(x, 0.0));
        }
        assert_eq!(s.value().re, 2.0);
    }
}
