//! Random grid sets, the empirical layer and isoperimetric constants, and the
//! set-geometry invariant suite checked against them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use toruspot_core::torus::{
    expand, isoperimetric_diagnostic, layer_diagnostic, regularize, Grid, GridSet, TorusPoint,
};

use crate::error::AppResult;

/// Calibration grid.
pub const CALIBRATION_DIM: usize = 2;
pub const CALIBRATION_N: usize = 64;
/// Safety factors applied to the observed extremes.
pub const LAYER_FACTOR: f64 = 1.25;
pub const ISO_FACTOR: f64 = 0.8;

/// Union of one to four random balls plus sparse random cells.
pub fn random_set(rng: &mut impl Rng, grid: Grid) -> AppResult<GridSet> {
    let d = grid.dim();
    let mut s = GridSet::empty(grid);
    for _ in 0..rng.random_range(1..=4) {
        let center = TorusPoint::new((0..d).map(|_| rng.random::<f64>() - 0.5).collect());
        let radius = rng.random_range(0.02..0.2);
        s = s.union(&GridSet::ball(grid, &center, radius)?)?;
    }
    let noise = rng.random_range(0.0..0.02);
    for c in 0..grid.cells() {
        if rng.random::<f64>() < noise {
            s.insert(c);
        }
    }
    Ok(s)
}

/// Radius between one and five cell widths.
pub fn random_radius(rng: &mut impl Rng, grid: Grid) -> f64 {
    rng.random_range(1.0..5.0) * grid.cell_width()
}

/// Empirical set constants shipped with the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetConstants {
    pub seed: u64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub sets: usize,
    /// Samples skipped because a diagnostic was undefined.
    pub degenerate: usize,
    pub max_layer_ratio: f64,
    pub min_iso_ratio: f64,
    /// `max_layer_ratio · 1.25`
    pub layer_bound: f64,
    /// `min_iso_ratio · 0.8`
    pub iso_bound: f64,
}

/// Layer and isoperimetric ratios of `Reg_r(S)` at radius `r`, when defined.
fn diagnostics(s: &GridSet, r: f64) -> Option<(f64, f64)> {
    let reg = regularize(s, r);
    let layer = layer_diagnostic(&reg, r).ok()?;
    let iso = isoperimetric_diagnostic(&reg, r).ok()?;
    Some((layer.ratio, iso.ratio))
}

/// Extremes of both ratios over `sets` random regular sets.
pub fn calibrate(sets: usize, seed: u64) -> AppResult<SetConstants> {
    let grid = Grid::new(CALIBRATION_DIM, CALIBRATION_N)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_layer, mut min_iso, mut degenerate) = (0.0f64, f64::INFINITY, 0);
    for _ in 0..sets {
        let s = random_set(&mut rng, grid)?;
        let r = random_radius(&mut rng, grid);
        match diagnostics(&s, r) {
            Some((layer, iso)) => {
                max_layer = max_layer.max(layer);
                min_iso = min_iso.min(iso);
            }
            None => degenerate += 1,
        }
    }
    Ok(SetConstants {
        seed,
        d: CALIBRATION_DIM,
        n: CALIBRATION_N,
        sets,
        degenerate,
        max_layer_ratio: max_layer,
        min_iso_ratio: min_iso,
        layer_bound: max_layer * LAYER_FACTOR,
        iso_bound: min_iso * ISO_FACTOR,
    })
}

/// Outcome of the set-geometry suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetGeometryReport {
    pub samples: usize,
    /// `S ⊄ Reg_r(S)`
    pub containment_failures: usize,
    /// `expand(Reg_r(S), r) ≠ expand(S, r)`
    pub expansion_failures: usize,
    /// `Reg_r(Reg_r(S)) ≠ Reg_r(S)`
    pub idempotence_failures: usize,
    pub diagnosed: usize,
    pub degenerate: usize,
    pub max_layer_ratio: f64,
    pub min_iso_ratio: f64,
    pub layer_violations: usize,
    pub iso_violations: usize,
}

impl SetGeometryReport {
    pub fn passed(&self) -> bool {
        self.containment_failures == 0
            && self.expansion_failures == 0
            && self.idempotence_failures == 0
            && self.layer_violations == 0
            && self.iso_violations == 0
    }
}

/// Exact regularization identities on `samples` random `(S, r)` on the
/// calibration grid, plus both diagnostics of `Reg_r(S)` against `constants`.
pub fn set_geometry_suite(samples: usize, seed: u64, constants: &SetConstants) -> AppResult<SetGeometryReport> {
    let grid = Grid::new(constants.d, constants.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SetGeometryReport {
        samples,
        containment_failures: 0,
        expansion_failures: 0,
        idempotence_failures: 0,
        diagnosed: 0,
        degenerate: 0,
        max_layer_ratio: 0.0,
        min_iso_ratio: f64::INFINITY,
        layer_violations: 0,
        iso_violations: 0,
    };
    for _ in 0..samples {
        let s = random_set(&mut rng, grid)?;
        let r = random_radius(&mut rng, grid);
        let reg = regularize(&s, r);
        rep.containment_failures += usize::from(!s.is_subset(&reg));
        rep.expansion_failures += usize::from(expand(&reg, r) != expand(&s, r));
        rep.idempotence_failures += usize::from(regularize(&reg, r) != reg);
        match (layer_diagnostic(&reg, r), isoperimetric_diagnostic(&reg, r)) {
            (Ok(layer), Ok(iso)) => {
                rep.diagnosed += 1;
                rep.max_layer_ratio = rep.max_layer_ratio.max(layer.ratio);
                rep.min_iso_ratio = rep.min_iso_ratio.min(iso.ratio);
                rep.layer_violations += usize::from(layer.ratio > constants.layer_bound);
                rep.iso_violations += usize::from(iso.ratio < constants.iso_bound);
            }
            _ => rep.degenerate += 1,
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_is_deterministic() {
        let a = calibrate(20, 0).unwrap();
        let b = calibrate(20, 0).unwrap();
        assert_eq!(a, b);
        assert!(a.max_layer_ratio > 0.0 && a.min_iso_ratio > 0.0);
        assert!(a.layer_bound > a.max_layer_ratio && a.iso_bound < a.min_iso_ratio);
    }

    #[test]
    fn suite_passes_against_own_calibration() {
        let c = calibrate(30, 1).unwrap();
        let rep = set_geometry_suite(30, 1, &c).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.diagnosed + rep.degenerate, 30);
    }
}
