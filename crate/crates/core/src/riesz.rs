//! Periodized Riesz potentials `W_s` with Fourier coefficients `|k|^{s-d}`
//! (`k != 0`) and zero mean.
//!
//! Pointwise values use the Ewald split
//! `c W_s(x) + C0 = Σ_j E(s/2, |x-j|^2) + Σ_{k≠0} π^{d/2} E((d-s)/2, π^2|k|^2) cos(2πk·x)`
//! where `E(ν, a) = ∫_1^∞ e^{-at} t^{ν-1} dt`, `c = π^{s-d/2} Γ((d-s)/2)` and
//! `C0 = 2π^{d/2}/(d-s)`. Both sums converge like `e^{-|j|^2}` and `e^{-π^2|k|^2}`
//! for every `s < d`.
//!
//! Grid potentials are spectral: `V̂(k) = |k|^{s-d} ρ̂(k)` for `0 < |k|_∞ <= K`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::{fft_nd, frequency, Direction};
use crate::measures::{check_cutoff, separable_dft, GridDensity, SpectralCoeffs};
use crate::mollifier::{Mollifier, TransformTable};
use crate::special::{gamma, tail_integral, tail_integral_quadrature};
use crate::torus::{check_dim, reduce, Grid, TorusPoint};

/// Default quadrature tolerance.
pub const DEFAULT_TAU: f64 = 1e-12;

/// Parameters of `W_s` on `T^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszSpec {
    pub d: usize,
    pub s: f64,
    /// Real-space images `|j|_∞ <= J`.
    pub lattice: usize,
    /// Grid spectral cutoff `|k|_∞ <= K`.
    pub cutoff: usize,
    pub tau: f64,
}

/// Smallest `J >= 2` whose neglected images sit beyond `e^{-(J+1/2)^2} < τ`
/// with a margin for the number of images.
pub fn lattice_for(d: usize, tau: f64) -> usize {
    let target = libm::log(1.0 / tau) + d as f64;
    (libm::ceil(libm::sqrt(target) - 0.5) as usize).max(2)
}

impl RieszSpec {
    /// `J` chosen from the default tolerance, `K = 8`.
    pub fn new(d: usize, s: f64) -> Result<Self> {
        let spec = Self { d, s, lattice: lattice_for(d, DEFAULT_TAU), cutoff: 8, tau: DEFAULT_TAU };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cutoff(mut self, k: usize) -> Result<Self> {
        self.cutoff = k;
        self.validate()?;
        Ok(self)
    }

    /// Sets `τ` and the matching `J`.
    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.tau = tau;
        self.lattice = lattice_for(self.d, tau);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(invalid("dimension must be 1, 2 or 3"));
        }
        if !(self.s < self.d as f64) || !self.s.is_finite() {
            return Err(invalid("s must be finite and below d"));
        }
        if self.lattice < 2 {
            return Err(invalid("lattice truncation J must be at least 2"));
        }
        if self.cutoff < 8 {
            return Err(invalid("spectral cutoff K must be at least 8"));
        }
        if !(self.tau > 0.0 && self.tau <= 1e-8) {
            return Err(invalid("tolerance must lie in (0, 1e-8]"));
        }
        Ok(())
    }
}

/// Normalization of the Ewald split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwaldConstants {
    pub c: f64,
    pub c0: f64,
}

impl EwaldConstants {
    pub fn new(d: usize, s: f64) -> Self {
        let h = 0.5 * (d as f64 - s);
        let pd = libm::pow(PI, 0.5 * d as f64);
        Self { c: libm::pow(PI, s - 0.5 * d as f64) * gamma(h), c0: 2.0 * pd / (d as f64 - s) }
    }
}

/// `|k|^{s-d}` for `k != 0`, zero at `k = 0`.
pub fn riesz_coefficient(d: usize, s: f64, k: &[i64]) -> f64 {
    let k2: i64 = k.iter().map(|v| v * v).sum();
    if k2 == 0 {
        0.0
    } else {
        libm::pow(k2 as f64, 0.5 * (s - d as f64))
    }
}

/// Route used for the tail integrals `E(ν, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMethod {
    /// Adaptive Gauss–Kronrod quadrature to `τ`.
    #[default]
    Quadrature,
    /// Incomplete-gamma series and continued fraction.
    SpecialFunctions,
}

/// Ewald evaluator for one `(d, s)`, with Fourier terms precomputed.
#[derive(Debug, Clone)]
pub struct Ewald {
    spec: RieszSpec,
    consts: EwaldConstants,
    method: TailMethod,
    /// `(k, π^{d/2} E((d-s)/2, π^2|k|^2))` over one half of `|k|_∞ <= L`.
    fourier: Vec<(Vec<f64>, f64)>,
    images: Vec<Vec<f64>>,
}

fn cube(d: usize, radius: i64) -> Vec<Vec<i64>> {
    let side = (2 * radius + 1) as usize;
    (0..side.pow(d as u32))
        .map(|mut idx| {
            let mut v = vec![0; d];
            for a in (0..d).rev() {
                v[a] = (idx % side) as i64 - radius;
                idx /= side;
            }
            v
        })
        .collect()
}

impl Ewald {
    pub fn new(spec: RieszSpec) -> Result<Self> {
        Self::with_method(spec, TailMethod::default())
    }

    pub fn with_method(spec: RieszSpec, method: TailMethod) -> Result<Self> {
        spec.validate()?;
        let d = spec.d;
        let consts = EwaldConstants::new(d, spec.s);
        let nu = 0.5 * (d as f64 - spec.s);
        // terms decay like e^{-π^2|k|^2}; L from τ
        let l = (libm::ceil(libm::sqrt(libm::log(1.0 / spec.tau) + 3.0 * d as f64) / PI) as i64).max(1);
        let pd = libm::pow(PI, 0.5 * d as f64);
        let mut fourier = Vec::new();
        for k in cube(d, l) {
            // keep one of each ±k pair; the cosine sum doubles it
            if k.iter().find(|&&v| v != 0).is_none_or(|&v| v < 0) {
                continue;
            }
            let k2: i64 = k.iter().map(|v| v * v).sum();
            let a = PI * PI * k2 as f64;
            let e = match method {
                TailMethod::Quadrature => tail_integral_quadrature(nu, a, spec.tau),
                TailMethod::SpecialFunctions => tail_integral(nu, a),
            };
            fourier.push((k.iter().map(|&v| v as f64).collect(), 2.0 * pd * e));
        }
        let images = cube(d, spec.lattice as i64).into_iter().map(|j| j.into_iter().map(|v| v as f64).collect()).collect();
        Ok(Self { spec, consts, method, fourier, images })
    }

    pub fn spec(&self) -> &RieszSpec {
        &self.spec
    }

    pub fn constants(&self) -> EwaldConstants {
        self.consts
    }

    fn tail(&self, nu: f64, a: f64) -> f64 {
        match self.method {
            TailMethod::Quadrature => tail_integral_quadrature(nu, a, self.spec.tau),
            TailMethod::SpecialFunctions => tail_integral(nu, a),
        }
    }

    fn reduced(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.spec.d, x.len())?;
        Ok(x.iter().map(|&v| reduce(v)).collect())
    }

    /// `W_s(x)`; errors at `x = 0` when `s >= 0`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let x = self.reduced(x)?;
        let nu = 0.5 * self.spec.s;
        if self.spec.s >= 0.0 && x.iter().all(|&v| v == 0.0) {
            return Err(Error::SingularPoint);
        }
        let mut w1 = 0.0;
        for j in &self.images {
            let a: f64 = x.iter().zip(j).map(|(a, b)| (a - b) * (a - b)).sum();
            w1 += self.tail(nu, a);
        }
        let mut w2 = 0.0;
        for (k, coef) in &self.fourier {
            let ph: f64 = k.iter().zip(&x).map(|(a, b)| a * b).sum();
            w2 += coef * libm::cos(2.0 * PI * ph);
        }
        Ok((w1 + w2 - self.consts.c0) / self.consts.c)
    }

    /// `∇W_s(x)`; errors at `x = 0`.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.reduced(x)?;
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::SingularPoint);
        }
        let d = self.spec.d;
        let nu = 0.5 * self.spec.s + 1.0;
        let mut g = vec![0.0; d];
        for j in &self.images {
            let diff: Vec<f64> = x.iter().zip(j).map(|(a, b)| a - b).collect();
            let a: f64 = diff.iter().map(|v| v * v).sum();
            let e = self.tail(nu, a);
            for (gi, di) in g.iter_mut().zip(&diff) {
                *gi -= 2.0 * di * e;
            }
        }
        for (k, coef) in &self.fourier {
            let ph: f64 = k.iter().zip(&x).map(|(a, b)| a * b).sum();
            let sn = libm::sin(2.0 * PI * ph);
            for (gi, ki) in g.iter_mut().zip(k) {
                *gi -= 2.0 * PI * ki * coef * sn;
            }
        }
        for gi in &mut g {
            *gi /= self.consts.c;
        }
        Ok(g)
    }

    /// Leading behavior at the origin as a function of `r = |x|`:
    /// `Γ(s/2) r^{-s} / c`, or `(-1)^{m+1} r^{2m} log(r^2) / (m! c)` when `s = -2m`.
    pub fn singular_part(&self, r: f64) -> f64 {
        singular_part(self.spec.d, self.spec.s, r)
    }

    /// Derivative of [`Self::singular_part`] in `r`.
    pub fn singular_part_derivative(&self, r: f64) -> f64 {
        singular_part_derivative(self.spec.d, self.spec.s, r)
    }
}

/// Leading term of `W_s` at the origin with its constants precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPart {
    s: f64,
    /// `Some(m)` when `s = -2m` and the leading term carries a logarithm.
    log_order: Option<u32>,
    coef: f64,
}

impl SingularPart {
    pub fn new(d: usize, s: f64) -> Self {
        let c = EwaldConstants::new(d, s).c;
        let m = -0.5 * s;
        let log_order = (m >= 0.0 && m == libm::floor(m) && m < 64.0).then_some(m as u32);
        let coef = match log_order {
            Some(m) => {
                let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
                sign * 2.0 / ((1..=m).map(|v| v as f64).product::<f64>() * c)
            }
            None => gamma(0.5 * s) / c,
        };
        Self { s, log_order, coef }
    }

    /// Value at `r = |x|`.
    pub fn value(&self, r: f64) -> f64 {
        match self.log_order {
            Some(0) => self.coef * libm::log(r),
            Some(m) => {
                if r == 0.0 {
                    return 0.0;
                }
                self.coef * libm::pow(r, 2.0 * m as f64) * libm::log(r)
            }
            None => self.coef * libm::pow(r, -self.s),
        }
    }

    /// Radial derivative at `r > 0`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self.log_order {
            Some(0) => self.coef / r,
            Some(m) => {
                let mf = m as f64;
                self.coef * libm::pow(r, 2.0 * mf - 1.0) * (2.0 * mf * libm::log(r) + 1.0)
            }
            None => -self.s * self.coef * libm::pow(r, -self.s - 1.0),
        }
    }
}

/// See [`Ewald::singular_part`].
pub fn singular_part(d: usize, s: f64, r: f64) -> f64 {
    SingularPart::new(d, s).value(r)
}

/// See [`Ewald::singular_part_derivative`].
pub fn singular_part_derivative(d: usize, s: f64, r: f64) -> f64 {
    SingularPart::new(d, s).derivative(r)
}

/// `W_s(x)` with the default quadrature route.
pub fn eval_ws(spec: &RieszSpec, x: &TorusPoint) -> Result<f64> {
    Ewald::new(*spec)?.eval(x.coords())
}

/// `∇W_s(x)` with the default quadrature route.
pub fn grad_ws(spec: &RieszSpec, x: &TorusPoint) -> Result<Vec<f64>> {
    Ewald::new(*spec)?.grad(x.coords())
}

/// `-log|2 sin πx|` on `T^1`. Equals `W_0 / 2` in the normalization above.
pub fn eval_wlog(x: &TorusPoint) -> Result<f64> {
    check_dim(1, x.dim())?;
    let v = reduce(x.coords()[0]);
    if v == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(-libm::log((2.0 * libm::sin(PI * v)).abs()))
}

/// Real values on the cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    grid: Grid,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::DimensionMismatch { expected: grid.cells(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        crate::stats::compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// `(1/N^d) Σ_cells V e^{-2πi k·x}` for `|k|_∞ <= K` by direct summation.
    pub fn fourier_coeffs(&self, k_max: usize) -> Result<SpectralCoeffs> {
        let (d, n) = (self.grid.dim(), self.grid.n());
        check_cutoff(k_max, n)?;
        let scale = 1.0 / self.values.len() as f64;
        let vals: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        SpectralCoeffs::new(d, k_max, separable_dft(&vals, d, n, k_max))
    }
}

/// Multiplies the spectrum of `values` by `multiplier(k)` for `|k|_∞ <= K`,
/// zeroes everything else, and returns the real synthesis.
pub(crate) fn spectral_filter(grid: Grid, values: &[f64], k_max: usize, multiplier: impl Fn(&[i64]) -> f64) -> Vec<f64> {
    let (d, n) = (grid.dim(), grid.n());
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, d, n, Direction::Forward);
    let mut k = vec![0i64; d];
    for (idx, c) in data.iter_mut().enumerate() {
        let mut rem = idx;
        for a in (0..d).rev() {
            k[a] = frequency(rem % n, n);
            rem /= n;
        }
        let inside = k.iter().all(|v| v.unsigned_abs() as usize <= k_max);
        *c = if inside { *c * multiplier(&k) } else { Complex64::new(0.0, 0.0) };
    }
    fft_nd(&mut data, d, n, Direction::Inverse);
    data.iter().map(|c| c.re).collect()
}

/// `V = W_s * ρ` on the grid of `ρ`, band-limited to the cutoff of `spec`.
pub fn potential_field(spec: &RieszSpec, rho: &GridDensity) -> Result<PotentialField> {
    spec.validate()?;
    let grid = rho.grid();
    check_dim(spec.d, grid.dim())?;
    check_cutoff(spec.cutoff, grid.n())?;
    let (d, s) = (spec.d, spec.s);
    let values = spectral_filter(grid, rho.mass(), spec.cutoff, |k| riesz_coefficient(d, s, k));
    PotentialField::new(grid, values)
}

/// `(mean |V|^p)^{1/p}`, or `max |V|` for `p = ∞`.
pub fn lp_norm(field: &PotentialField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p must be at least 1"));
    }
    let v = field.values();
    if p.is_infinite() {
        return Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    let sum = crate::stats::compensated_sum(v.iter().map(|x| libm::pow(x.abs(), p)));
    Ok(libm::pow(sum / v.len() as f64, 1.0 / p))
}

/// Beyond this `|ξ|` the mollifier transform is below `1e-12` and is dropped.
pub const TRANSFORM_CUTOFF: f64 = 96.0;

/// Transform table covering every `|ξ| <= TRANSFORM_CUTOFF`.
pub fn transform_table(d: usize) -> Result<TransformTable> {
    Ok(TransformTable::new(Mollifier::new(d)?, TRANSFORM_CUTOFF, 256))
}

/// Field with coefficients `ψ̂(ε|k|) |k|^β` (`k != 0`, all resolved frequencies)
/// and its `L^q` norm.
pub fn u_eps_field(d: usize, beta: f64, eps: f64, q: f64, n: usize) -> Result<(PotentialField, f64)> {
    u_eps_field_with(&transform_table(d)?, beta, eps, q, n)
}

/// [`u_eps_field`] with a prebuilt transform table.
pub fn u_eps_field_with(table: &TransformTable, beta: f64, eps: f64, q: f64, n: usize) -> Result<(PotentialField, f64)> {
    let d = table.mollifier().dim();
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("epsilon must lie in (0, 1/2)"));
    }
    if beta < 0.0 && !(d == 1 && beta > -1.0) {
        return Err(invalid("negative beta is only allowed in d = 1 with beta > -1"));
    }
    let grid = Grid::new(d, n)?;
    let k_max = (n - 1) / 2;
    // unit mass at the origin cell: its spectrum is identically one
    let mut delta = vec![0.0; grid.cells()];
    delta[0] = 1.0;
    let values = spectral_filter(grid, &delta, k_max, |k| {
        let k2: i64 = k.iter().map(|v| v * v).sum();
        let r = libm::sqrt(k2 as f64);
        if k2 == 0 || eps * r > TRANSFORM_CUTOFF {
            return 0.0;
        }
        table.eval(eps * r) * libm::pow(r, beta)
    });
    let field = PotentialField::new(grid, values)?;
    let norm = lp_norm(&field, q)?;
    Ok((field, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{cosine_family, fourier_coeffs, uniform_density};

    fn spec(d: usize, s: f64) -> RieszSpec {
        RieszSpec::new(d, s).unwrap()
    }

    /// `Σ_{0<|k|<=K} |k|^{s-1} e^{2πikx}` in 1D.
    fn synthesis_1d(s: f64, x: f64, k_max: usize) -> f64 {
        (1..=k_max).map(|k| 2.0 * libm::pow(k as f64, s - 1.0) * libm::cos(2.0 * PI * k as f64 * x)).sum()
    }

    #[test]
    fn parameter_validation() {
        assert!(RieszSpec::new(2, 2.0).is_err());
        assert!(RieszSpec::new(4, 0.0).is_err());
        assert!(spec(1, 0.5).with_cutoff(4).is_err());
        assert!(spec(1, 0.5).with_tau(1e-6).is_err());
        assert_eq!(lattice_for(1, 1e-12), 5);
        assert_eq!(lattice_for(3, 1e-12), 6);
    }

    #[test]
    fn constants() {
        let c = EwaldConstants::new(1, 0.0);
        assert!((c.c - 1.0).abs() < 1e-15);
        assert!((c.c0 - 2.0 * libm::sqrt(PI)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_and_periodic() {
        let e = Ewald::new(spec(2, 1.0)).unwrap();
        let a = e.eval(&[0.13, -0.31]).unwrap();
        assert!((a - e.eval(&[-0.13, 0.31]).unwrap()).abs() < 1e-13);
        assert!((a - e.eval(&[1.13, -0.31]).unwrap()).abs() < 1e-13);
        assert_eq!(e.eval(&[0.0, 0.0]), Err(Error::SingularPoint));
        assert!(Ewald::new(spec(2, -1.0)).unwrap().eval(&[0.0, 0.0]).is_ok());
    }

    #[test]
    fn one_dimensional_spectral_sum() {
        // s < 0: the synthesis converges absolutely
        let e = Ewald::new(spec(1, -0.5)).unwrap();
        for x in [0.1, 0.25, 0.4] {
            let oracle = synthesis_1d(-0.5, x, 200_000);
            assert!((e.eval(&[x]).unwrap() - oracle).abs() < 1e-5, "x={x}");
        }
    }

    #[test]
    fn logarithmic_case() {
        let e = Ewald::new(spec(1, 0.0)).unwrap();
        for x in [0.05, 0.25, 0.5, -0.37] {
            let w = eval_wlog(&TorusPoint::new(vec![x])).unwrap();
            assert!((e.eval(&[x]).unwrap() - 2.0 * w).abs() < 1e-10, "x={x}");
            let g = e.grad(&[x]).unwrap()[0];
            let exact = -2.0 * PI / libm::tan(PI * x);
            assert!((g - exact).abs() < 1e-9 * exact.abs().max(1.0), "x={x}");
        }
        let quarter = eval_wlog(&TorusPoint::new(vec![0.25])).unwrap();
        assert!((quarter + 0.5 * libm::log(2.0)).abs() < 1e-15);
    }

    #[test]
    fn routes_agree() {
        for (d, s) in [(1, 0.5), (2, -1.0), (3, 1.5)] {
            let q = Ewald::new(spec(d, s)).unwrap();
            let f = Ewald::with_method(spec(d, s), TailMethod::SpecialFunctions).unwrap();
            let x = [0.21, -0.17, 0.33];
            let (a, b) = (q.eval(&x[..d]).unwrap(), f.eval(&x[..d]).unwrap());
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "d={d} s={s}: {a} {b}");
        }
    }

    #[test]
    fn gradient_is_odd_and_matches_differences() {
        let e = Ewald::with_method(spec(2, -1.0), TailMethod::SpecialFunctions).unwrap();
        let x = [0.17, -0.29];
        let g = e.grad(&x).unwrap();
        let gm = e.grad(&[-0.17, 0.29]).unwrap();
        assert!((g[0] + gm[0]).abs() < 1e-12 && (g[1] + gm[1]).abs() < 1e-12);
        let h = 1e-5;
        for a in 0..2 {
            let mut p = x;
            let mut m = x;
            p[a] += h;
            m[a] -= h;
            let fd = (e.eval(&p).unwrap() - e.eval(&m).unwrap()) / (2.0 * h);
            assert!((fd - g[a]).abs() < 1e-6, "axis {a}: {fd} {}", g[a]);
        }
    }

    #[test]
    fn remainder_stays_bounded() {
        let e = Ewald::with_method(spec(2, 1.0), TailMethod::SpecialFunctions).unwrap();
        let rem: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&r| e.eval(&[r * 0.6, r * 0.8]).unwrap() - e.singular_part(r))
            .collect();
        for w in rem.windows(2) {
            assert!((w[0] - w[1]).abs() < 0.05, "{rem:?}");
        }
        let e = Ewald::with_method(spec(1, -2.0), TailMethod::SpecialFunctions).unwrap();
        let r0 = e.eval(&[0.0]).unwrap();
        let rem = e.eval(&[1e-4]).unwrap() - e.singular_part(1e-4);
        assert!((rem - r0).abs() < 1e-6);
    }

    #[test]
    fn singular_derivative_matches_difference() {
        for (d, s) in [(2, 1.0), (1, 0.0), (2, -2.0), (2, -1.0)] {
            let r = 0.3;
            let h = 1e-6;
            let fd = (singular_part(d, s, r + h) - singular_part(d, s, r - h)) / (2.0 * h);
            let an = singular_part_derivative(d, s, r);
            assert!((fd - an).abs() < 1e-7 * an.abs().max(1.0), "d={d} s={s}");
        }
    }

    #[test]
    fn uniform_and_cosine_fields() {
        let sp = spec(1, 0.3).with_cutoff(10).unwrap();
        let v = potential_field(&sp, &uniform_density(1, 32).unwrap()).unwrap();
        assert!(lp_norm(&v, 2.0).unwrap() < 1e-15);
        let rho = cosine_family(1, 1.0, 32).unwrap();
        let v = potential_field(&sp, &rho).unwrap();
        for (j, val) in v.values().iter().enumerate() {
            let x = v.grid().point(j).coords()[0];
            assert!((val - libm::cos(2.0 * PI * x)).abs() < 1e-13);
        }
        assert!((lp_norm(&v, 2.0).unwrap() - libm::sqrt(0.5)).abs() < 1e-12);
        assert!(potential_field(&sp, &uniform_density(1, 20).unwrap()).is_err());
    }

    #[test]
    fn field_spectrum() {
        let grid = Grid::new(2, 20).unwrap();
        let mass: Vec<f64> = (0..grid.cells()).map(|i| 1.0 + libm::sin(i as f64 * 0.37)).collect();
        let (rho, _) = GridDensity::renormalized(grid, mass).unwrap();
        let sp = spec(2, 0.5).with_cutoff(8).unwrap();
        let v = potential_field(&sp, &rho).unwrap();
        assert!(v.mean().abs() < 1e-15);
        let vh = v.fourier_coeffs(8).unwrap();
        let rh = fourier_coeffs(&rho, 8).unwrap();
        for (k, c) in vh.iter() {
            let expect = rh.get(&k).unwrap() * riesz_coefficient(2, 0.5, &k);
            assert!((c - expect).norm() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn norms() {
        let grid = Grid::new(1, 8).unwrap();
        let f = PotentialField::new(grid, vec![-2.0; 8]).unwrap();
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((lp_norm(&f, p).unwrap() - 2.0).abs() < 1e-15);
        }
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn mollifier_field_mass() {
        let (field, l1) = u_eps_field(1, 0.0, 0.05, 1.0, 512).unwrap();
        assert!(field.mean().abs() < 1e-12);
        assert!(l1 <= 2.0 + 1e-9, "{l1}");
        assert!(u_eps_field(2, -0.5, 0.05, 1.0, 64).is_err());
    }
}
