//! JSON file formats and their conversion to core types.

use serde::{Deserialize, Serialize};
use toruspot_core::dinfty::{DinftyResult, Enclosure, HallWitness, PlanEdge};
use toruspot_core::measures::{
    bump_family, cosine_family, laplacian_family, uniform_density, GridDensity, WeightedAtoms,
};
use toruspot_core::torus::{Grid, GridSet};

use crate::error::{AppError, AppResult};

/// Atomic measure: one coordinate row per atom. Weights default to equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomsFile {
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl AtomsFile {
    pub fn from_atoms(a: &WeightedAtoms) -> Self {
        Self {
            points: (0..a.len()).map(|i| a.point(i).to_vec()).collect(),
            weights: Some(a.weights().to_vec()),
        }
    }

    /// Validates without renormalizing; unit mass is part of the contract.
    pub fn to_atoms(&self, d: usize) -> AppResult<WeightedAtoms> {
        if let Some(p) = self.points.iter().find(|p| p.len() != d) {
            return Err(AppError::Infeasible(format!("point {p:?} does not have {d} coordinates")));
        }
        let coords = self.points.concat();
        let n = self.points.len();
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
        Ok(WeightedAtoms::new(d, coords, weights)?)
    }
}

/// A pair of atomic measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub d: usize,
    pub a: AtomsFile,
    pub b: AtomsFile,
    /// Reference distance, present in oracle fixtures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_r_star: Option<f64>,
}

/// Run-length encoded grid set envelope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSetFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub runs: Vec<usize>,
}

impl GridSetFile {
    pub fn from_set(s: &GridSet) -> Self {
        Self { d: s.grid().dim(), n: s.grid().n(), runs: s.runs() }
    }

    pub fn to_set(&self) -> AppResult<GridSet> {
        Ok(GridSet::from_runs(Grid::new(self.d, self.n)?, &self.runs)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub radius: f64,
    pub set: Vec<usize>,
    pub neighborhood: Vec<usize>,
    pub margin: f64,
}

impl From<&HallWitness> for WitnessReport {
    fn from(w: &HallWitness) -> Self {
        Self { radius: w.radius, set: w.set.clone(), neighborhood: w.neighborhood.clone(), margin: w.margin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinftyReport {
    pub r_star: f64,
    /// `(from, to, mass)` triples.
    pub plan: Vec<(usize, usize, f64)>,
    pub witness: Option<WitnessReport>,
    pub deficit: f64,
    pub feasibility_tests: usize,
}

impl From<&DinftyResult> for DinftyReport {
    fn from(r: &DinftyResult) -> Self {
        Self {
            r_star: r.r_star,
            plan: r.plan.iter().map(|&PlanEdge { from, to, mass }| (from, to, mass)).collect(),
            witness: r.witness.as_ref().map(WitnessReport::from),
            deficit: r.deficit,
            feasibility_tests: r.feasibility_tests,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosureReport {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl From<Enclosure> for EnclosureReport {
    fn from(e: Enclosure) -> Self {
        Self { lo: e.lo, hi: e.hi, estimate: e.estimate, n: e.n }
    }
}

/// Grid density source: a named family or explicit cell values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensitySpec {
    Uniform { d: usize, n: usize },
    Cosine { d: usize, amplitude: f64, n: usize },
    Bump { d: usize, eps: f64, radius: f64, n: usize },
    Laplacian { d: usize, eps: f64, m: u32, n: usize },
    /// Density values per cell in flat order; renormalized on load.
    Values { d: usize, n: usize, values: Vec<f64> },
}

/// Fine cells per target cell for Laplacian profiles loaded from configs.
pub const LAPLACIAN_REFINE: usize = 8;

impl DensitySpec {
    pub fn dim(&self) -> usize {
        match *self {
            DensitySpec::Uniform { d, .. }
            | DensitySpec::Cosine { d, .. }
            | DensitySpec::Bump { d, .. }
            | DensitySpec::Laplacian { d, .. }
            | DensitySpec::Values { d, .. } => d,
        }
    }

    pub fn build(&self) -> AppResult<GridDensity> {
        Ok(match self {
            DensitySpec::Uniform { d, n } => uniform_density(*d, *n)?,
            DensitySpec::Cosine { d, amplitude, n } => cosine_family(*d, *amplitude, *n)?,
            DensitySpec::Bump { d, eps, radius, n } => bump_family(*d, *eps, *radius, *n)?,
            DensitySpec::Laplacian { d, eps, m, n } => laplacian_family(*d, *eps, *m, *n, LAPLACIAN_REFINE)?.density,
            DensitySpec::Values { d, n, values } => GridDensity::from_cell_values(Grid::new(*d, *n)?, values)?.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_roundtrip() {
        let f = AtomsFile { points: vec![vec![0.1, 0.2], vec![-0.3, 0.4]], weights: Some(vec![0.25, 0.75]) };
        let a = f.to_atoms(2).unwrap();
        let back = AtomsFile::from_atoms(&a);
        assert_eq!(back, f);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<AtomsFile>(&json).unwrap(), f);
    }

    #[test]
    fn equal_weights_default() {
        let f: AtomsFile = serde_json::from_str(r#"{"points": [[0.1], [0.2], [0.3], [0.4]]}"#).unwrap();
        assert_eq!(f.to_atoms(1).unwrap().weights(), &[0.25; 4]);
    }

    #[test]
    fn unnormalized_atoms_are_infeasible() {
        let f = AtomsFile { points: vec![vec![0.0]], weights: Some(vec![0.5]) };
        assert!(matches!(f.to_atoms(1), Err(AppError::Infeasible(_))));
        let f = AtomsFile { points: vec![vec![0.0, 0.1]], weights: None };
        assert!(matches!(f.to_atoms(1), Err(AppError::Infeasible(_))));
    }

    #[test]
    fn grid_set_envelope() {
        let grid = Grid::new(2, 8).unwrap();
        let s = GridSet::from_cells(grid, &[0, 1, 9, 63]).unwrap();
        let f = GridSetFile::from_set(&s);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"N\":8"));
        assert_eq!(serde_json::from_str::<GridSetFile>(&json).unwrap().to_set().unwrap(), s);
    }

    #[test]
    fn density_specs() {
        let spec: DensitySpec = serde_json::from_str(r#"{"family": "cosine", "d": 1, "amplitude": 0.5, "n": 16}"#).unwrap();
        assert_eq!(spec.dim(), 1);
        assert!((spec.build().unwrap().total() - 1.0).abs() < 1e-14);
        let spec = DensitySpec::Values { d: 1, n: 4, values: vec![1.0, 3.0, 0.0, 0.0] };
        assert_eq!(spec.build().unwrap().mass(), &[0.25, 0.75, 0.0, 0.0]);
    }
}
