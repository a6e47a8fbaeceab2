//! Invariant suites. Each suite draws seeded random cases, compares against an
//! oracle or an identity, and reports its case count, failures and worst margin.
//! The `verify` command runs them all; the acceptance target reuses them with
//! its own sample sizes and tolerances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use toruspot_core::dinfty::{dinfty_atomic, dinfty_to_uniform, discrepancy_1d, set_formulation_check, MeasureRef, FLOW_TOL};
use toruspot_core::energy::energy_riesz;
use toruspot_core::measures::{fourier_coeffs, laplacian_family, GridDensity};
use toruspot_core::riesz::{lp_norm, potential_field, riesz_coefficient, Ewald, RieszSpec, TailMethod};
use toruspot_core::torus::{dist_sq, Grid};

use crate::calibration::{set_geometry_suite, SetConstants};
use crate::error::AppResult;
use crate::oracle::{
    bottleneck_bruteforce, central_difference, random_equal_instance, random_points, random_weighted_instance,
    SpectralOracle,
};

/// `(d, s)` pairs of the kernel suites.
pub const KERNEL_MATRIX: [(usize, f64); 5] = [(1, 0.5), (1, -0.5), (2, 1.0), (2, -1.0), (3, 1.5)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest error (or smallest margin, for margin suites) observed.
    pub worst: f64,
    pub tolerance: f64,
    pub note: String,
}

impl SuiteOutcome {
    fn new(name: &str, tolerance: f64, worst_init: f64) -> Self {
        Self { name: name.into(), cases: 0, failures: 0, worst: worst_init, tolerance, note: String::new() }
    }

    /// Records an error that must not exceed the tolerance.
    fn error(&mut self, err: f64) {
        self.cases += 1;
        self.worst = self.worst.max(err);
        if !(err <= self.tolerance) {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cell values drawn from `U(0.1, 2)`, renormalized.
pub fn random_density(rng: &mut impl Rng, d: usize, n: usize) -> AppResult<GridDensity> {
    let grid = Grid::new(d, n)?;
    let values: Vec<f64> = (0..grid.cells()).map(|_| rng.random_range(0.1..2.0)).collect();
    Ok(GridDensity::from_cell_values(grid, &values)?.0)
}

/// Uniform point at torus norm at least `r_min`.
fn point_away_from_origin(rng: &mut impl Rng, d: usize, r_min: f64) -> Vec<f64> {
    loop {
        let x = random_points(rng, d, 1);
        if x.iter().map(|v| v * v).sum::<f64>() >= r_min * r_min {
            return x;
        }
    }
}

/// Symmetry and triangle inequality of the torus metric on random triples.
pub fn torus_metric_suite(cases: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("torus metric axioms", 1e-15, 0.0);
    let mut r = rng(seed);
    for k in 0..cases {
        let d = 1 + k % 3;
        let p = random_points(&mut r, d, 3);
        let (x, y, z) = (&p[..d], &p[d..2 * d], &p[2 * d..]);
        let dist = |a: &[f64], b: &[f64]| dist_sq(a, b).sqrt();
        let asym = (dist(x, y) - dist(y, x)).abs();
        let tri = (dist(x, z) - dist(x, y) - dist(y, z)).max(0.0);
        out.error(asym.max(tri));
    }
    out
}

/// `dinfty_atomic` against exhaustive bottleneck matching; equality is exact.
pub fn dinfty_oracle_suite(cases: usize, n_max: usize, seed: u64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("d∞ equals exhaustive bottleneck", 0.0, 0.0);
    let mut r = rng(seed);
    for k in 0..cases {
        let d = 1 + k % 2;
        let n = r.random_range(1..=n_max);
        let (a, b) = random_equal_instance(&mut r, d, n);
        let got = dinfty_atomic(&a, &b)?.r_star;
        out.error((got - bottleneck_bruteforce(d, a.coords(), b.coords())).abs());
    }
    Ok(out)
}

/// Weighted Hall duality: the witness below `r*` violates by more than
/// `min_margin` (neighborhood recomputed geometrically) and the flow at `r*`
/// is complete to `FLOW_TOL`. Instances whose `r*` is the smallest candidate
/// have no predecessor and are counted in the note.
pub fn hall_duality_suite(cases: usize, size_max: usize, min_margin: f64, seed: u64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("weighted Hall duality", min_margin, f64::INFINITY);
    let mut r = rng(seed);
    let (mut no_predecessor, mut worst_deficit) = (0, 0.0f64);
    for k in 0..cases {
        let d = 1 + k % 2;
        let n = r.random_range(1..=size_max);
        let m = r.random_range(1..=size_max);
        let (a, b) = random_weighted_instance(&mut r, d, n, m);
        let rep = set_formulation_check(&a, &b)?;
        out.cases += 1;
        worst_deficit = worst_deficit.max(rep.deficit);
        let mut ok = rep.deficit < FLOW_TOL && rep.exhaustive_max_margin.is_none_or(|v| v <= 1e-12);
        match rep.witness_margin {
            Some(margin) => {
                out.worst = out.worst.min(margin);
                ok &= margin > min_margin;
            }
            None => no_predecessor += 1,
        }
        if !ok {
            out.failures += 1;
        }
    }
    out.note = format!("worst deficit {worst_deficit:.3e}; {no_predecessor} instance(s) with r* at the smallest candidate");
    Ok(out)
}

/// `|D/2 - midpoint| <= half-width + 2/N` on random 1D densities.
pub fn discrepancy_suite(cases: usize, n: usize, seed: u64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("1D discrepancy identity", 0.0, f64::NEG_INFINITY);
    let mut r = rng(seed);
    for _ in 0..cases {
        let rho = random_density(&mut r, 1, n)?;
        let half_d = 0.5 * discrepancy_1d(&rho)?;
        let enc = dinfty_to_uniform(MeasureRef::Density(&rho), n)?;
        // excess over the allowance; must stay <= 0
        out.error((half_d - enc.midpoint()).abs() - enc.half_width() - 2.0 / n as f64);
    }
    Ok(out)
}

/// Ewald evaluation against the tapered spectral oracle at points with
/// torus norm `>= 0.2`, `points` per `(d, s)` pair.
pub fn ewald_spectral_suite(points: usize, tolerance: f64, seed: u64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("Ewald vs spectral synthesis", tolerance, 0.0);
    let mut r = rng(seed);
    for (d, s) in KERNEL_MATRIX {
        let ewald = Ewald::new(RieszSpec::new(d, s)?)?;
        let oracle = SpectralOracle::new(d, s, SpectralOracle::default_cutoff(d));
        for _ in 0..points {
            let x = point_away_from_origin(&mut r, d, 0.2);
            out.error((ewald.eval(&x)? - oracle.eval(&x)).abs());
        }
    }
    Ok(out)
}

/// The quadrature and special-function routes of the Ewald tail agree.
pub fn tail_route_suite(points: usize, tolerance: f64, seed: u64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("Ewald tail routes agree", tolerance, 0.0);
    let mut r = rng(seed);
    for (d, s) in KERNEL_MATRIX {
        let spec = RieszSpec::new(d, s)?;
        let quad = Ewald::with_method(spec, TailMethod::Quadrature)?;
        let special = Ewald::with_method(spec, TailMethod::SpecialFunctions)?;
        for _ in 0..points {
            let x = point_away_from_origin(&mut r, d, 0.02);
            out.error((quad.eval(&x)? - special.eval(&x)?).abs());
        }
    }
    Ok(out)
}

/// Gradient against central differences of `eval` with step `h`; error is
/// `|g - g_fd| / max(|g|, 1e-3)` at points with torus norm `>= 0.05`.
pub fn gradient_suite(
    points: usize,
    h: f64,
    tolerance: f64,
    seed: u64,
    grad: impl Fn(&Ewald, &[f64]) -> toruspot_core::Result<Vec<f64>>,
) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("gradient vs central differences", tolerance, 0.0);
    let mut r = rng(seed);
    for (d, s) in KERNEL_MATRIX {
        let ewald = Ewald::with_method(RieszSpec::new(d, s)?, TailMethod::SpecialFunctions)?;
        for _ in 0..points {
            let x = point_away_from_origin(&mut r, d, 0.05);
            let g = grad(&ewald, &x)?;
            let fd = central_difference(&x, h, |y| ewald.eval(y).expect("away from the origin"));
            let diff = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
            out.error(diff / norm.max(1e-3));
        }
    }
    Ok(out)
}

/// Coefficients of `W_s * ρ` equal `|k|^{s-d} ρ̂(k)` for `|k|_∞ <= k_max`.
pub fn spectral_identity_suite(cases: usize, k_max: usize, tolerance: f64, seed: u64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("potential spectrum identity", tolerance, 0.0);
    let mut r = rng(seed);
    for k in 0..cases {
        let (d, n) = if k % 2 == 0 { (1, 64) } else { (2, 32) };
        let s = [0.5, -1.0, 0.0][k % 3];
        let rho = random_density(&mut r, d, n)?;
        let spec = RieszSpec::new(d, s)?.with_cutoff((n - 1) / 2)?;
        let field = potential_field(&spec, &rho)?.fourier_coeffs(k_max)?;
        let rh = fourier_coeffs(&rho, k_max)?;
        let mut worst = 0.0f64;
        for ((kv, v), (_, c)) in field.iter().zip(rh.iter()) {
            let expected = if kv.iter().all(|&t| t == 0) { c * 0.0 } else { c * riesz_coefficient(d, s, &kv) };
            worst = worst.max((v - expected).norm());
        }
        out.error(worst);
    }
    Ok(out)
}

/// `E_s[ρ] = ½ ‖W_{s'} * ρ‖²` with `s' = (d + s)/2`, on `cases` random
/// densities for every `s` in `{-1, 0, 1/2}` and `d` in `{1, 2}`.
pub fn energy_identity_suite(cases: usize, tolerance: f64, seed: u64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("energy half-order identity", tolerance, 0.0);
    let mut r = rng(seed);
    for d in [1usize, 2] {
        let n = if d == 1 { 128 } else { 32 };
        for s in [-1.0, 0.0, 0.5] {
            let spec = RieszSpec::new(d, s)?.with_cutoff((n - 1) / 2)?;
            let half = RieszSpec::new(d, 0.5 * (d as f64 + s))?.with_cutoff((n - 1) / 2)?;
            for _ in 0..cases {
                let rho = random_density(&mut r, d, n)?;
                let e = energy_riesz(&spec, &rho)?;
                let v = lp_norm(&potential_field(&half, &rho)?, 2.0)?;
                out.error((e - 0.5 * v * v).abs() / e.abs().max(1.0));
            }
        }
    }
    Ok(out)
}

/// Quadrature moments of the Laplacian profile of order `< 2M` vanish.
pub fn moment_suite(tolerance: f64) -> AppResult<SuiteOutcome> {
    let mut out = SuiteOutcome::new("Laplacian family moments", tolerance, 0.0);
    for d in [1usize, 2] {
        for m in 1..=3u32 {
            let (eps, n) = if d == 1 { (0.0625, 512) } else { (0.125, 64) };
            let fam = laplacian_family(d, eps, m, n, 8)?;
            for total in 0..2 * m {
                for a in 0..=total {
                    let alpha: Vec<u32> = if d == 1 { vec![total] } else { vec![a, total - a] };
                    if d == 1 && a > 0 {
                        continue;
                    }
                    out.error(fam.profile.moment(&alpha).0.abs());
                }
            }
        }
    }
    Ok(out)
}

/// Runs every suite with `samples` cases each (fewer for the costly ones).
pub fn run_all(samples: usize, seed: u64, constants: &SetConstants) -> AppResult<Vec<SuiteOutcome>> {
    let few = samples.div_ceil(10).max(2);
    let mut out = vec![
        torus_metric_suite(samples, seed),
        dinfty_oracle_suite(samples, 6, seed + 1)?,
        hall_duality_suite(samples, 10, 1e-9, seed + 2)?,
        discrepancy_suite(few, 200, seed + 3)?,
        ewald_spectral_suite(few, 1e-6, seed + 4)?,
        tail_route_suite(few, 1e-10, seed + 5)?,
        gradient_suite(few, 1e-5, 1e-4, seed + 6, |e, x| e.grad(x))?,
        spectral_identity_suite(few, 8, 1e-10, seed + 7)?,
        energy_identity_suite(few.min(5), 1e-8, seed + 8)?,
        moment_suite(1e-7)?,
    ];
    let geo = set_geometry_suite(samples, seed + 9, constants)?;
    out.push(SuiteOutcome {
        name: "set regularization and diagnostics".into(),
        cases: geo.samples,
        failures: geo.containment_failures
            + geo.expansion_failures
            + geo.idempotence_failures
            + geo.layer_violations
            + geo.iso_violations,
        worst: geo.max_layer_ratio,
        tolerance: constants.layer_bound,
        note: format!("min iso ratio {:.4} (bound {:.4}); {} degenerate", geo.min_iso_ratio, constants.iso_bound, geo.degenerate),
    });
    Ok(out)
}
