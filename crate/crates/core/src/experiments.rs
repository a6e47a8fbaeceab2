//! Parameter sweeps: potential norms and transport bounds of the Laplacian
//! family, norms of mollified kernels, and energy-versus-distance tables.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dinfty::{ball_witness_lower_bound, dinfty_atomic, dinfty_to_uniform, Enclosure, MeasureRef};
use crate::energy::energy_riesz;
use crate::error::{invalid, Result};
use crate::measures::{bump_family, cosine_family, laplacian_family, GridDensity, WeightedAtoms};
use crate::riesz::{lp_norm, potential_field, transform_table, u_eps_field_with, RieszSpec};
use crate::stats::loglog_slope;

/// Ball radii `a = ε R` tried by the witness lower bound.
pub const WITNESS_FRACTIONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// One member of a Laplacian-family sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub eps: f64,
    pub n: usize,
    /// `‖W_s * ρ‖_{L^p}`.
    pub norm: f64,
    /// Ball-witness lower bound on `d∞(ρ, 1)` and its ball radius.
    pub lower: f64,
    pub witness_radius: f64,
    /// Upper bound from transport restricted to the patch.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub d: usize,
    pub p: f64,
    pub s: f64,
    pub m: u32,
    pub rows: Vec<ScalingRow>,
    /// Slope of `log ‖W_s * ρ‖_p` against `log ε`; `None` for fewer than two members.
    pub norm_slope: Option<f64>,
    /// `d + d/p - s`.
    pub target: f64,
    /// Slope of the lower bound against `log ε` (expected 1).
    pub lower_slope: Option<f64>,
}

/// Upper bound on `d∞(ρ, 1)` for a density equal to one outside the patch
/// `[-P, P)^d` cells around the origin: mass outside stays put, so the patch
/// measures (each normalized) are compared directly, plus the cell-point error.
pub fn patch_upper_bound(rho: &GridDensity, half_width: usize) -> Result<f64> {
    let grid = rho.grid();
    let (d, n) = (grid.dim(), grid.n());
    let side = 2 * half_width;
    let mut coords = Vec::new();
    let mut w_rho = Vec::new();
    let mut w_uni = Vec::new();
    let cell = 1.0 / n as f64;
    for t in 0..side.pow(d as u32) {
        let mut rem = t;
        let mut multi = [0usize; 3];
        for a in (0..d).rev() {
            let off = (rem % side) as i64 - half_width as i64;
            multi[a] = off.rem_euclid(n as i64) as usize;
            rem /= side;
        }
        let idx = grid.flat_index(&multi[..d]);
        coords.extend_from_slice(grid.point(idx).coords());
        w_rho.push(rho.mass()[idx]);
        w_uni.push(libm::pow(cell, d as f64));
    }
    let keep: Vec<usize> = (0..w_rho.len()).filter(|&i| w_rho[i] > 0.0).collect();
    let c_rho: Vec<f64> = keep.iter().flat_map(|&i| coords[i * d..(i + 1) * d].to_vec()).collect();
    let w_keep: Vec<f64> = keep.iter().map(|&i| w_rho[i]).collect();
    let a = WeightedAtoms::normalized(d, c_rho, w_keep)?;
    let b = WeightedAtoms::normalized(d, coords, w_uni)?;
    let r = dinfty_atomic(&a, &b)?.r_star;
    Ok(r + 2.0 * libm::sqrt(d as f64) * cell)
}

/// Laplacian family over `eps_list` on grids with `cells_per_eps / ε` cells per axis.
pub fn laplacian_scaling(d: usize, p: f64, s: f64, m: u32, eps_list: &[f64], cells_per_eps: f64) -> Result<ScalingReport> {
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let n = libm::round(cells_per_eps / eps) as usize;
        let fam = laplacian_family(d, eps, m, n, 8)?;
        let spec = RieszSpec::new(d, s)?.with_cutoff((n - 1) / 2)?;
        let norm = lp_norm(&potential_field(&spec, &fam.density)?, p)?;
        let radii: Vec<f64> = WITNESS_FRACTIONS.iter().map(|f| f * eps).collect();
        let (lower, witness_radius) = ball_witness_lower_bound(d, &radii, |a| fam.profile.ball_excess(a));
        let upper = patch_upper_bound(&fam.density, fam.patch_half_width)?;
        rows.push(ScalingRow { eps, n, norm, lower, witness_radius, upper });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.norm).collect();
    let lowers: Vec<f64> = rows.iter().map(|r| r.lower).collect();
    Ok(ScalingReport {
        d,
        p,
        s,
        m,
        norm_slope: loglog_slope(&eps, &norms),
        target: d as f64 + if p.is_infinite() { 0.0 } else { d as f64 / p } - s,
        lower_slope: loglog_slope(&eps, &lowers),
        rows,
    })
}

/// Conjugate exponent `p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelNormReport {
    pub d: usize,
    pub beta: f64,
    pub p: f64,
    /// `(ε, N, ‖u_ε‖_{L^q})` with `q` conjugate to `p`.
    pub rows: Vec<(f64, usize, f64)>,
    pub slope: Option<f64>,
    /// `-β - d/p`.
    pub target: f64,
    /// `‖u_ε‖ / (1 + |log ε|)^{1/q}` per member.
    pub log_ratios: Vec<f64>,
}

/// Norms of `u_ε` on grids with `cells_per_eps / ε` cells per axis.
pub fn u_eps_scaling(d: usize, beta: f64, p: f64, eps_list: &[f64], cells_per_eps: f64) -> Result<KernelNormReport> {
    if !(p >= 1.0) {
        return Err(invalid("p must be at least 1"));
    }
    let q = conjugate(p);
    let table = transform_table(d)?;
    let mut rows = Vec::new();
    for &eps in eps_list {
        let n = libm::round(cells_per_eps / eps) as usize;
        let (_, norm) = u_eps_field_with(&table, beta, eps, q, n)?;
        rows.push((eps, n, norm));
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let log_ratios = rows
        .iter()
        .map(|&(e, _, v)| v / libm::pow(1.0 + libm::log(e).abs(), 1.0 / q))
        .collect();
    Ok(KernelNormReport {
        d,
        beta,
        p,
        slope: loglog_slope(&eps, &norms),
        target: -beta - if p.is_infinite() { 0.0 } else { d as f64 / p },
        rows,
        log_ratios,
    })
}

/// Density families of the energy-versus-distance tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityFamily {
    /// `1 + a cos 2πx_1`, swept over the amplitude `a`.
    Cosine,
    /// Bump of radius `1/3` and width `ε`, swept over `ε`.
    Bump,
    /// Laplacian family with `M = 2`, swept over `ε`.
    Laplacian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub param: f64,
    pub energy: f64,
    pub enclosure: Enclosure,
    /// `enclosure.hi / E^γ`, the smallest admissible constant for this member.
    pub ratio: f64,
    /// Set when the enclosure does not separate the distance from zero.
    pub inconclusive: Option<String>,
}

/// For each member: `E_s`, an enclosure of `d∞(ρ, 1)` and the ratio to
/// `E^γ` with `γ = 1 / (2d - s)`.
pub fn stability_sweep(family: StabilityFamily, d: usize, s: f64, n: usize, dinfty_n: usize, params: &[f64]) -> Result<Vec<StabilityRow>> {
    let gamma = 1.0 / (2.0 * d as f64 - s);
    let spec = RieszSpec::new(d, s)?.with_cutoff((n - 1) / 2)?;
    let mut rows = Vec::new();
    for &param in params {
        let rho = match family {
            StabilityFamily::Cosine => cosine_family(d, param, n)?,
            StabilityFamily::Bump => bump_family(d, param, 1.0 / 3.0, n)?,
            StabilityFamily::Laplacian => laplacian_family(d, param, 2, n, 8)?.density,
        };
        let energy = energy_riesz(&spec, &rho)?;
        let enclosure = dinfty_to_uniform(MeasureRef::Density(&rho), dinfty_n)?;
        let ratio = if energy > 0.0 { enclosure.hi / libm::pow(energy, gamma) } else { f64::NAN };
        let inconclusive = (enclosure.lo == 0.0).then(|| {
            // width 2·(2√d/N + √d/n) must drop below the estimate
            let needed = libm::ceil(4.0 * libm::sqrt(d as f64) / enclosure.estimate.max(1e-12)) as usize;
            format!("enclosure reaches zero; needs N >= {needed}")
        });
        rows.push(StabilityRow { param, energy, enclosure, ratio, inconclusive });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        assert_eq!(conjugate(f64::INFINITY), 1.0);
        assert_eq!(conjugate(2.0), 2.0);
        assert!(conjugate(1.0).is_infinite());
    }

    #[test]
    fn small_laplacian_sweep() {
        let rep = laplacian_scaling(1, 2.0, 0.5, 2, &[1.0 / 16.0, 1.0 / 32.0], 64.0).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!((rep.target - 1.0).abs() < 1e-15);
        for r in &rep.rows {
            assert!(r.lower > 0.0 && r.lower <= r.upper, "{r:?}");
        }
        let single = laplacian_scaling(1, 2.0, 0.5, 2, &[1.0 / 16.0], 64.0).unwrap();
        assert!(single.norm_slope.is_none());
    }

    #[test]
    fn cosine_stability_rows() {
        let rows = stability_sweep(StabilityFamily::Cosine, 1, 0.0, 64, 64, &[0.0, 0.5]).unwrap();
        assert!(rows[0].energy < 1e-30);
        assert!(rows[0].enclosure.contains(0.0));
        assert!(rows[0].inconclusive.is_some());
        // one mode: E = a^2 / 4
        assert!((rows[1].energy - 0.0625).abs() < 1e-14);
        // d∞ = a/(2π) for 1 + a cos 2πx in one dimension
        assert!(rows[1].enclosure.contains(0.5 / (2.0 * core::f64::consts::PI)));
    }
}
