//! Interaction energies `E_W[ρ] = ½ Σ_k Ŵ(k) |ρ̂(k)|^2`, the discrete particle
//! energy, and the mollifier-perturbed potential `W̃ = W_s - c0 ε^{-s} ψ(·/ε)`.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::kernel::PairKernel;
use crate::measures::{fourier_coeffs, GridDensity};
use crate::mollifier::Mollifier;
use crate::riesz::{riesz_coefficient, Ewald, RieszSpec, TailMethod};
use crate::stats::compensated_sum;
use crate::torus::reduce;

/// `½ Σ_{0<|k|_∞<=K} Ŵ(k) |ρ̂(k)|^2` with coefficients from direct summation.
pub fn energy_spectral(rho: &GridDensity, coefficient: impl Fn(&[i64]) -> f64, k_max: usize) -> Result<f64> {
    let rh = fourier_coeffs(rho, k_max)?;
    let terms = rh.iter().filter(|(k, _)| k.iter().any(|&v| v != 0)).map(|(k, c)| coefficient(&k) * c.norm_sqr());
    Ok(0.5 * compensated_sum(terms))
}

/// `E_s[ρ]` truncated at the cutoff of `spec`.
pub fn energy_riesz(spec: &RieszSpec, rho: &GridDensity) -> Result<f64> {
    let (d, s) = (spec.d, spec.s);
    energy_spectral(rho, |k| riesz_coefficient(d, s, k), spec.cutoff)
}

/// Flips `x` so its first nonzero reduced coordinate is positive; evaluating
/// an even kernel there makes pair values independent of the pair order.
fn canonical(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = reduce(*v);
    }
    if x.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0) {
        for v in x.iter_mut() {
            *v = reduce(-*v);
        }
    }
}

/// `(1 / 2N^2) Σ_{i≠j} W(x_i - x_j)` for `N` particles stored as flat coordinates.
/// Pair terms are summed in sorted order, so relabeling leaves the result unchanged.
pub fn energy_discrete(d: usize, positions: &[f64], kernel: &impl PairKernel) -> Result<f64> {
    let n = positions.len() / d;
    let mut terms = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut diff = [0.0; 3];
    for i in 0..n {
        for j in i + 1..n {
            for a in 0..d {
                diff[a] = positions[i * d + a] - positions[j * d + a];
            }
            canonical(&mut diff[..d]);
            terms.push(kernel.value(&diff[..d])?);
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(compensated_sum(terms) / (n * n) as f64)
}

/// `W̃_ε = W_s - c0 ε^{-s} ψ(·/ε)` with `ψ` the normalized mollifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedPotential {
    pub base: RieszSpec,
    pub eps: f64,
    pub c0: f64,
    pub mollifier: Mollifier,
}

impl PerturbedPotential {
    pub fn new(base: RieszSpec, eps: f64, c0: f64) -> Result<Self> {
        base.validate()?;
        if !(eps > 0.0 && eps < 0.5) {
            return Err(invalid("epsilon must lie in (0, 1/2)"));
        }
        if !(c0 > 0.0) {
            return Err(invalid("c0 must be positive"));
        }
        Ok(Self { base, eps, c0, mollifier: Mollifier::new(base.d)? })
    }

    /// `|k|^{s-d} - c0 ε^{d-s} ψ̂(εk)`, with `ψ̂` by quadrature.
    pub fn coefficient(&self, k: &[i64]) -> f64 {
        let (d, s) = (self.base.d, self.base.s);
        let k2: i64 = k.iter().map(|v| v * v).sum();
        if k2 == 0 {
            return 0.0;
        }
        let r = libm::sqrt(k2 as f64);
        riesz_coefficient(d, s, k) - self.c0 * libm::pow(self.eps, d as f64 - s) * self.mollifier.transform(self.eps * r)
    }

    /// Pointwise value through the Ewald split of the base kernel.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let w = Ewald::with_method(self.base, TailMethod::SpecialFunctions)?.eval(x)?;
        let y: Vec<f64> = x.iter().map(|&v| reduce(v) / self.eps).collect();
        Ok(w - self.c0 * libm::pow(self.eps, -self.base.s) * self.mollifier.value(&y))
    }

    /// `‖W - W̃‖_∞ = c0 ε^{-s} ψ(0)`.
    pub fn sup_difference(&self) -> f64 {
        self.c0 * libm::pow(self.eps, -self.base.s) * self.mollifier.max_value()
    }

    /// `max |W - W̃|` over an `m^d` mesh, cross-checking [`Self::sup_difference`].
    pub fn sup_difference_on_mesh(&self, m: usize) -> f64 {
        let d = self.base.d;
        let scale = self.c0 * libm::pow(self.eps, -self.base.s);
        let mut best: f64 = 0.0;
        let mut y = [0.0; 3];
        for idx in 0..m.pow(d as u32) {
            let mut rem = idx;
            for a in (0..d).rev() {
                y[a] = reduce((rem % m) as f64 / m as f64) / self.eps;
                rem /= m;
            }
            best = best.max(scale * self.mollifier.value(&y[..d]));
        }
        best
    }

    /// `E_W̃[ρ]` truncated at the cutoff of the base spec.
    pub fn energy(&self, rho: &GridDensity) -> Result<f64> {
        energy_spectral(rho, |k| self.coefficient(k), self.base.cutoff)
    }
}

/// Largest `R` with `ψ̂ >= ½` on `B(0; R)`, by bisection on the radial transform.
pub fn half_transform_radius(mollifier: &Mollifier) -> f64 {
    let (mut lo, mut hi) = (0.0, 2.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mollifier.transform(mid) >= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Result of scanning `Ŵ̃(k)` over `0 < |k|_∞ <= K`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativityScan {
    pub negative_count: usize,
    pub min_coefficient: f64,
    pub argmin: Vec<i64>,
    /// Predicted band `[R/(2ε), R/ε]` and the sufficient `c0` threshold
    /// `2 (R/2)^{s-d}`.
    pub band: (f64, f64),
    pub c0_threshold: f64,
}

/// Scans the perturbed coefficients; radial symmetry lets the scan visit
/// each `|k|^2` once.
pub fn negativity_scan(pp: &PerturbedPotential, k_max: usize) -> NegativityScan {
    let d = pp.base.d;
    let mut seen = alloc::collections::BTreeMap::new();
    let side = 2 * k_max + 1;
    let mut count = 0;
    let mut best = (f64::INFINITY, Vec::new());
    for idx in 0..side.pow(d as u32) {
        let mut rem = idx;
        let mut k = [0i64; 3];
        for a in (0..d).rev() {
            k[a] = (rem % side) as i64 - k_max as i64;
            rem /= side;
        }
        let k = &k[..d];
        let k2: i64 = k.iter().map(|v| v * v).sum();
        if k2 == 0 {
            continue;
        }
        let c = *seen.entry(k2).or_insert_with(|| pp.coefficient(k));
        if c < 0.0 {
            count += 1;
        }
        if c < best.0 {
            best = (c, k.to_vec());
        }
    }
    let r = half_transform_radius(&pp.mollifier);
    NegativityScan {
        negative_count: count,
        min_coefficient: best.0,
        argmin: best.1,
        band: (r / (2.0 * pp.eps), r / pp.eps),
        c0_threshold: 2.0 * libm::pow(0.5 * r, pp.base.s - d as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::EwaldKernel;
    use crate::measures::{cosine_family, uniform_density};
    use crate::riesz::{lp_norm, potential_field};
    use crate::torus::Grid;

    #[test]
    fn spectral_examples() {
        let spec = RieszSpec::new(1, 0.3).unwrap().with_cutoff(10).unwrap();
        assert!(energy_riesz(&spec, &uniform_density(1, 32).unwrap()).unwrap() < 1e-30);
        let e = energy_riesz(&spec, &cosine_family(1, 1.0, 32).unwrap()).unwrap();
        assert!((e - 0.25).abs() < 1e-14);
    }

    #[test]
    fn half_order_identity() {
        let grid = Grid::new(2, 24).unwrap();
        let mass: Vec<f64> = (0..grid.cells()).map(|i| 1.0 + 0.5 * libm::cos(i as f64 * 0.71)).collect();
        let (rho, _) = GridDensity::renormalized(grid, mass).unwrap();
        let (d, s) = (2, -1.0);
        let spec = RieszSpec::new(d, s).unwrap().with_cutoff(11).unwrap();
        let half = RieszSpec::new(d, 0.5 * (d as f64 + s)).unwrap().with_cutoff(11).unwrap();
        let e = energy_riesz(&spec, &rho).unwrap();
        let v = lp_norm(&potential_field(&half, &rho).unwrap(), 2.0).unwrap();
        assert!((e - 0.5 * v * v).abs() < 1e-12 * e.max(1e-3));
    }

    #[test]
    fn two_particles() {
        let spec = RieszSpec::new(1, -0.5).unwrap();
        let k = EwaldKernel::new(spec).unwrap();
        let e = energy_discrete(1, &[0.1, -0.2], &k).unwrap();
        assert!((e - k.value(&[0.3]).unwrap() / 4.0).abs() < 1e-15);
        let e2 = energy_discrete(1, &[-0.2, 0.1], &k).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn perturbed_coefficients() {
        let base = RieszSpec::new(2, -1.0).unwrap();
        let pp = PerturbedPotential::new(base, 1e-4, 1.0).unwrap();
        assert!((pp.coefficient(&[1, 2]) - riesz_coefficient(2, -1.0, &[1, 2])).abs() < 1e-11);
        let pp = PerturbedPotential::new(base, 0.1, 50.0).unwrap();
        let scan = negativity_scan(&pp, 40);
        assert!(scan.negative_count > 0);
        assert!(scan.min_coefficient < 0.0);
        assert!((pp.sup_difference() - pp.sup_difference_on_mesh(200)).abs() < 1e-12);
        assert!(PerturbedPotential::new(base, 0.5, 1.0).is_err());
    }

    #[test]
    fn predicted_band_is_negative() {
        let base = RieszSpec::new(2, -1.0).unwrap();
        let eps = 0.05;
        let m = Mollifier::new(2).unwrap();
        let r = half_transform_radius(&m);
        let c0 = 2.0 * libm::pow(0.5 * r, -3.0) * 1.01;
        let pp = PerturbedPotential::new(base, eps, c0).unwrap();
        let lo = libm::ceil(r / (2.0 * eps)) as i64;
        let hi = libm::floor(r / eps) as i64;
        for k in lo..=hi {
            assert!(pp.coefficient(&[k, 0]) < 0.0, "k={k}");
        }
    }
}
