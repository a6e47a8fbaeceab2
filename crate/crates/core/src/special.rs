//! The tail integral `E(nu, a) = ∫_1^∞ e^{-a t} t^{nu-1} dt = a^{-nu} Γ(nu, a)`
//! by two independent routes: adaptive quadrature and incomplete-gamma
//! series / continued fraction.

use crate::quadrature::integrate;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// Gamma function.
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Exponential integral `E_1(a)` for `a > 0`.
pub fn e1(a: f64) -> f64 {
    if a > 1.0 {
        libm::exp(-a) * tail_cf(0.0, a)
    } else {
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 1..200 {
            term *= -a / n as f64;
            let add = term / n as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - libm::log(a) - sum
    }
}

/// Continued fraction for `e^a E(nu, a)`, convergent for `a > 0`, fast for `a >~ 1`.
fn tail_cf(nu: f64, a: f64) -> f64 {
    // modified Lentz on 1/(a+1-nu- 1(1-nu)/(a+3-nu- 2(2-nu)/(a+5-nu- ...)))
    let tiny = 1e-300;
    let mut b = a + 1.0 - nu;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - nu);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `E(nu, a)` for `nu` in `(0, 1]` or larger and small `a`, from the lower-gamma series.
fn tail_series_positive(nu: f64, a: f64) -> f64 {
    let mut term = 1.0 / nu;
    let mut sum = term;
    for n in 1..500 {
        term *= a / (nu + n as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    libm::pow(a, -nu) * gamma(nu) - libm::exp(-a) * sum
}

/// `E(nu, a)` through special functions. Infinite where the integral diverges
/// (`a = 0`, `nu >= 0`).
pub fn tail_integral(nu: f64, a: f64) -> f64 {
    if a < 0.0 || a.is_nan() {
        return f64::NAN;
    }
    if a == 0.0 {
        return if nu < 0.0 { -1.0 / nu } else { f64::INFINITY };
    }
    if a > 1.0 {
        return libm::exp(-a) * tail_cf(nu, a);
    }
    if nu > 0.0 {
        return tail_series_positive(nu, a);
    }
    // Integrate by parts upward: E(nu) = (a E(nu+1) - e^{-a}) / nu.
    let base_nu = nu + libm::ceil(-nu);
    let mut value = if base_nu == 0.0 { e1(a) } else { tail_series_positive(base_nu, a) };
    let ea = libm::exp(-a);
    let mut cur = base_nu;
    while cur > nu + 0.5 {
        cur -= 1.0;
        value = (a * value - ea) / cur;
    }
    value
}

/// `E(nu, a)` by adaptive Gauss–Kronrod quadrature to relative tolerance `tol`.
pub fn tail_integral_quadrature(nu: f64, a: f64, tol: f64) -> f64 {
    if a < 0.0 || a.is_nan() {
        return f64::NAN;
    }
    if a == 0.0 && nu >= 0.0 {
        return f64::INFINITY;
    }
    if a >= 1.0 {
        // t = 1 + u/a
        let scale = libm::exp(-a) / a;
        let q = integrate(
            |u| libm::exp(-u) * libm::pow(1.0 + u / a, nu - 1.0),
            0.0,
            60.0,
            tol * 1e-3,
            tol,
            4,
            4000,
        );
        return scale * q.value;
    }
    // t = e^y: integrand exp(nu y - a e^y); cut where it has fallen by e^-46 past its peak.
    let g = |y: f64| nu * y - a * libm::exp(y);
    let mut y = 0.0;
    let mut peak = g(0.0);
    loop {
        y += 0.5;
        let v = g(y);
        peak = peak.max(v);
        if v < peak - 46.0 || y > 1e5 {
            break;
        }
    }
    let pieces = (libm::ceil(y) as usize).clamp(4, 256);
    let q = integrate(|t| libm::exp(g(t)), 0.0, y, tol * 1e-3 * libm::exp(peak), tol, pieces, 20_000);
    q.value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        // E(1, a) = e^{-a}/a
        for a in [0.01, 0.5, 1.0, 3.0, 30.0] {
            let e = libm::exp(-a) / a;
            assert!((tail_integral(1.0, a) / e - 1.0).abs() < 1e-13, "a={a}");
            assert!((tail_integral_quadrature(1.0, a, 1e-13) / e - 1.0).abs() < 1e-12);
        }
        // E(1/2, a) = sqrt(pi/a) erfc(sqrt a)
        for a in [1e-4, 0.3, 2.0, 12.0] {
            let e = libm::sqrt(core::f64::consts::PI / a) * libm::erfc(libm::sqrt(a));
            assert!((tail_integral(0.5, a) / e - 1.0).abs() < 1e-13, "a={a}");
        }
        assert_eq!(tail_integral(-0.5, 0.0), 2.0);
        assert!(tail_integral(0.5, 0.0).is_infinite());
        assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((e1(0.1) - 1.822_923_958_419_390_7).abs() < 1e-14);
    }

    #[test]
    fn routes_agree() {
        let nus = [-2.5, -2.0, -1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.75];
        let as_ = [1e-6, 1e-3, 0.05, 0.4, 0.99, 1.0, 1.01, 2.5, 8.0, 25.0, 60.0];
        for &nu in &nus {
            for &a in &as_ {
                let s = tail_integral(nu, a);
                let q = tail_integral_quadrature(nu, a, 1e-13);
                assert!((s - q).abs() <= 1e-11 * s.abs(), "nu={nu} a={a}: {s} vs {q}");
            }
        }
    }

    #[test]
    fn negative_order_at_zero_is_limit() {
        for nu in [-0.25, -1.5] {
            let lim = -1.0 / nu;
            assert!((tail_integral(nu, 1e-30) - lim).abs() < 1e-6);
            assert!((tail_integral_quadrature(nu, 0.0, 1e-12) - lim).abs() < 1e-10);
        }
    }
}
