//! The radial bump `psi(x) = e^{-1/(1-|x|^2)}` on the unit ball, normalized to
//! unit integral, with its gradient and radial Fourier transform (`d <= 3`).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::quadrature::integrate;

/// Unnormalized bump as a function of `|x|^2`.
#[inline]
pub fn bump_sq(r2: f64) -> f64 {
    if r2 < 1.0 {
        libm::exp(-1.0 / (1.0 - r2))
    } else {
        0.0
    }
}

fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Normalized mollifier in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    d: usize,
    norm: f64,
}

impl Mollifier {
    pub fn new(d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(invalid("mollifier supports d = 1, 2, 3"));
        }
        let q = integrate(
            |r| libm::pow(r, (d - 1) as f64) * bump_sq(r * r),
            0.0,
            1.0,
            1e-16,
            1e-14,
            8,
            2000,
        );
        Ok(Self { d, norm: sphere_area(d) * q.value })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Integral of the unnormalized bump.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    #[inline]
    pub fn value_sq(&self, r2: f64) -> f64 {
        bump_sq(r2) / self.norm
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_sq(x.iter().map(|v| v * v).sum())
    }

    /// Maximum value, attained at the origin.
    pub fn max_value(&self) -> f64 {
        libm::exp(-1.0) / self.norm
    }

    /// Gradient `-2x psi(x) / (1-|x|^2)^2`, written into `out`.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let f = if r2 < 1.0 {
            let q = 1.0 - r2;
            -2.0 * self.value_sq(r2) / (q * q)
        } else {
            0.0
        };
        for (o, &v) in out.iter_mut().zip(x) {
            *o = f * v;
        }
    }

    /// Fourier transform `∫ psi(x) e^{-2πi ξ·x} dx` at `|ξ| = xi`, by quadrature.
    pub fn transform(&self, xi: f64) -> f64 {
        let w = 2.0 * PI * xi;
        let pieces = 4 + libm::ceil(4.0 * xi) as usize;
        let d = self.d;
        let f = |r: f64| {
            let b = bump_sq(r * r);
            match d {
                1 => 2.0 * b * libm::cos(w * r),
                2 => 2.0 * PI * r * b * libm::j0(w * r),
                _ => {
                    let wr = w * r;
                    let sinc = if wr.abs() < 1e-8 { 1.0 - wr * wr / 6.0 } else { libm::sin(wr) / wr };
                    4.0 * PI * r * r * b * sinc
                }
            }
        };
        integrate(f, 0.0, 1.0, 1e-15, 1e-13, pieces, 20_000).value / self.norm
    }
}

/// Tabulated radial transform with four-point Lagrange interpolation on a
/// uniform mesh; direct quadrature beyond the table.
#[derive(Debug, Clone)]
pub struct TransformTable {
    mollifier: Mollifier,
    h: f64,
    values: Vec<f64>,
}

impl TransformTable {
    /// Table on `[0, xi_max]` with `per_unit` nodes per unit of `|ξ|`.
    pub fn new(mollifier: Mollifier, xi_max: f64, per_unit: usize) -> Self {
        let h = 1.0 / per_unit as f64;
        let count = libm::ceil(xi_max / h) as usize + 3;
        let values = (0..count).map(|i| mollifier.transform(i as f64 * h)).collect();
        Self { mollifier, h, values }
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let xi = xi.abs();
        let t = xi / self.h;
        let i = libm::floor(t) as usize;
        if i + 2 >= self.values.len() {
            return self.mollifier.transform(xi);
        }
        // nodes i-1 .. i+2, reflected through 0 by evenness
        let node = |j: isize| self.values[j.unsigned_abs()];
        let u = t - i as f64;
        let i = i as isize;
        let (f0, f1, f2, f3) = (node(i - 1), node(i), node(i + 1), node(i + 2));
        let (um, u1, u2) = (u + 1.0, u - 1.0, u - 2.0);
        -f0 * u * u1 * u2 / 6.0 + f1 * um * u1 * u2 / 2.0 - f2 * um * u * u2 / 2.0 + f3 * um * u * u1 / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_constants() {
        assert!((Mollifier::new(1).unwrap().normalization() - 0.443_993_816_168_078_76).abs() < 1e-14);
        assert!((Mollifier::new(2).unwrap().normalization() - 0.466_512_393_178_327_6).abs() < 1e-14);
        assert!(Mollifier::new(4).is_err());
    }

    #[test]
    fn transform_at_zero_is_one() {
        for d in 1..=3 {
            let m = Mollifier::new(d).unwrap();
            assert!((m.transform(0.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn transform_matches_direct_cosine_sum_1d() {
        let m = Mollifier::new(1).unwrap();
        for xi in [0.3, 1.0, 2.7] {
            let n = 200_000;
            let h = 2.0 / n as f64;
            let direct: f64 = (0..n)
                .map(|j| {
                    let x = -1.0 + (j as f64 + 0.5) * h;
                    m.value(&[x]) * libm::cos(2.0 * PI * xi * x) * h
                })
                .sum();
            assert!((m.transform(xi) - direct).abs() < 1e-9, "xi={xi}");
        }
    }

    #[test]
    fn transform_2d_matches_cartesian_sum() {
        let m = Mollifier::new(2).unwrap();
        let xi = 0.8;
        let n = 800;
        let h = 2.0 / n as f64;
        let mut direct = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = -1.0 + (i as f64 + 0.5) * h;
                let y = -1.0 + (j as f64 + 0.5) * h;
                direct += m.value(&[x, y]) * libm::cos(2.0 * PI * xi * x) * h * h;
            }
        }
        assert!((m.transform(xi) - direct).abs() < 1e-8);
    }

    #[test]
    fn table_interpolates() {
        let m = Mollifier::new(2).unwrap();
        let t = TransformTable::new(m, 4.0, 512);
        for xi in [0.0, 0.013, 0.5, 1.234, 3.99, 6.0] {
            assert!((t.eval(xi) - m.transform(xi)).abs() < 1e-10, "xi={xi}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = Mollifier::new(2).unwrap();
        let x = [0.3, -0.4];
        let mut g = [0.0; 2];
        m.grad(&x, &mut g);
        let h = 1e-6;
        for a in 0..2 {
            let mut p = x;
            let mut q = x;
            p[a] += h;
            q[a] -= h;
            assert!((g[a] - (m.value(&p) - m.value(&q)) / (2.0 * h)).abs() < 1e-8);
        }
    }
}
