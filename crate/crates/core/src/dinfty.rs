//! Wasserstein-infinity distance between atomic measures through the weighted
//! Hall criterion: transport at radius `r` is feasible iff the bipartite network
//! with edges `dist(x_i, y_j) <= r` carries the full unit flow. The distance is
//! the smallest pairwise distance at which this happens.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::maxflow::{bipartite_max_flow, FlowSolution};
use crate::measures::{ball_volume, density_to_atoms, grid_project, GridDensity, WeightedAtoms};
use crate::stats::compensated_sum;
use crate::torus::{check_dim, dist_sq, within_closed, Grid, RADIUS_RTOL};

/// Unit flow is reached when the deficit is below this.
pub const FLOW_TOL: f64 = 1e-10;
/// Largest supported `|atoms_1| · |atoms_2|`.
pub const MAX_PAIRS: usize = 4_000_000;

/// One edge of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEdge {
    pub from: usize,
    pub to: usize,
    pub mass: f64,
}

/// Supply atoms violating the Hall condition and their neighborhood.
#[derive(Debug, Clone, PartialEq)]
pub struct HallWitness {
    pub radius: f64,
    /// Indices into the first measure.
    pub set: Vec<usize>,
    /// Indices into the second measure within distance `radius` of `set`.
    pub neighborhood: Vec<usize>,
    /// `Σ_set a_i - Σ_neighborhood b_j`, recomputed from the sets.
    pub margin: f64,
}

/// Outcome of a feasibility test at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportFeasibility {
    pub radius: f64,
    pub feasible: bool,
    pub flow: f64,
    /// Plan edges with positive mass, in lexicographic `(from, to)` order.
    pub plan: Vec<PlanEdge>,
    /// Present iff infeasible.
    pub witness: Option<HallWitness>,
}

/// Distance, an optimal plan, and the certificate at the preceding candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct DinftyResult {
    pub r_star: f64,
    pub plan: Vec<PlanEdge>,
    /// Hall violation at the largest candidate radius below `r_star`;
    /// `None` when `r_star` is the smallest candidate.
    pub witness: Option<HallWitness>,
    /// `1 - flow` at `r_star`.
    pub deficit: f64,
    pub feasibility_tests: usize,
}

/// Pairs `(i, j)` sorted by torus distance, and the deduplicated distances.
struct Candidates {
    pairs: Vec<(usize, usize)>,
    dists: Vec<f64>,
    /// `levels[k]`: distinct distance value `k`; `ends[k]`: pairs with distance <= `levels[k]`.
    levels: Vec<f64>,
    ends: Vec<usize>,
}

impl Candidates {
    fn new(a: &WeightedAtoms, b: &WeightedAtoms) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        let total = a.len().saturating_mul(b.len());
        if total > MAX_PAIRS {
            return Err(invalid("instance exceeds the supported number of atom pairs"));
        }
        let mut pd: Vec<(f64, usize, usize)> = Vec::with_capacity(total);
        for i in 0..a.len() {
            for j in 0..b.len() {
                pd.push((libm::sqrt(dist_sq(a.point(i), b.point(j))), i, j));
            }
        }
        pd.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut levels: Vec<f64> = Vec::new();
        let mut ends = Vec::new();
        for (k, &(dist, _, _)) in pd.iter().enumerate() {
            match levels.last() {
                Some(&l) if within_closed(dist, l) => {
                    *ends.last_mut().expect("paired with levels") = k + 1;
                }
                _ => {
                    levels.push(dist);
                    ends.push(k + 1);
                }
            }
        }
        Ok(Self {
            pairs: pd.iter().map(|p| (p.1, p.2)).collect(),
            dists: pd.iter().map(|p| p.0).collect(),
            levels,
            ends,
        })
    }

    /// Number of pairs admissible at radius `r`.
    fn admissible(&self, r: f64) -> usize {
        self.dists.partition_point(|&d| within_closed(d, r))
    }
}

fn solve(a: &WeightedAtoms, b: &WeightedAtoms, cand: &Candidates, count: usize, warm: Option<&[f64]>) -> FlowSolution {
    let edges = &cand.pairs[..count];
    let warm = warm.map(|w| {
        let mut v = w.to_vec();
        v.resize(count, 0.0);
        v
    });
    bipartite_max_flow(a.weights(), b.weights(), edges, warm.as_deref())
}

fn plan_of(edges: &[(usize, usize)], sol: &FlowSolution) -> Vec<PlanEdge> {
    let mut plan: Vec<PlanEdge> = edges
        .iter()
        .zip(&sol.edge_flows)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&(i, j), &f)| PlanEdge { from: i, to: j, mass: f })
        .collect();
    plan.sort_by(|x, y| x.from.cmp(&y.from).then(x.to.cmp(&y.to)));
    plan
}

fn witness_of(a: &WeightedAtoms, b: &WeightedAtoms, edges: &[(usize, usize)], sol: &FlowSolution, r: f64) -> HallWitness {
    let set: Vec<usize> = (0..a.len()).filter(|&i| sol.reachable_supply[i]).collect();
    let mut hit = vec![false; b.len()];
    for &(i, j) in edges {
        if sol.reachable_supply[i] {
            hit[j] = true;
        }
    }
    let neighborhood: Vec<usize> = (0..b.len()).filter(|&j| hit[j]).collect();
    let margin = hall_margin(a, b, &set, &neighborhood);
    HallWitness { radius: r, set, neighborhood, margin }
}

/// `Σ_set a_i - Σ_neighborhood b_j` with compensated sums.
pub fn hall_margin(a: &WeightedAtoms, b: &WeightedAtoms, set: &[usize], neighborhood: &[usize]) -> f64 {
    compensated_sum(set.iter().map(|&i| a.weight(i)).chain(neighborhood.iter().map(|&j| -b.weight(j))))
}

/// Indices of `b` within closed distance `r` of some atom of `a` indexed by `set`.
pub fn neighborhood(a: &WeightedAtoms, b: &WeightedAtoms, set: &[usize], r: f64) -> Vec<usize> {
    (0..b.len())
        .filter(|&j| set.iter().any(|&i| within_closed(libm::sqrt(dist_sq(a.point(i), b.point(j))), r)))
        .collect()
}

/// Tests transport feasibility with edges `dist(x_i, y_j) <= r`.
pub fn feasible_at(a: &WeightedAtoms, b: &WeightedAtoms, r: f64) -> Result<TransportFeasibility> {
    let cand = Candidates::new(a, b)?;
    let count = cand.admissible(r);
    let sol = solve(a, b, &cand, count, None);
    Ok(feasibility_from(a, b, &cand.pairs[..count], &sol, r))
}

fn feasibility_from(a: &WeightedAtoms, b: &WeightedAtoms, edges: &[(usize, usize)], sol: &FlowSolution, r: f64) -> TransportFeasibility {
    let feasible = 1.0 - sol.value < FLOW_TOL;
    TransportFeasibility {
        radius: r,
        feasible,
        flow: sol.value,
        plan: if feasible { plan_of(edges, sol) } else { Vec::new() },
        witness: if feasible { None } else { Some(witness_of(a, b, edges, sol, r)) },
    }
}

/// Exact `d∞` between atomic measures by bisection over the sorted pairwise
/// distances, warm-starting each test from the flow at the largest radius
/// known to be infeasible.
pub fn dinfty_atomic(a: &WeightedAtoms, b: &WeightedAtoms) -> Result<DinftyResult> {
    let cand = Candidates::new(a, b)?;
    let levels = cand.levels.len();
    // invariant: level `lo` infeasible (or lo = None), level `hi` feasible
    let mut lo: Option<usize> = None;
    let mut lo_state: Option<(FlowSolution, usize)> = None;
    let mut hi = levels - 1;
    let mut hi_state = None;
    let mut tests = 0;
    let mut probe = |k: usize, warm: Option<&(FlowSolution, usize)>| {
        tests += 1;
        let count = cand.ends[k];
        let sol = solve(a, b, &cand, count, warm.map(|w| &w.0.edge_flows[..]));
        (1.0 - sol.value < FLOW_TOL, sol, count)
    };
    loop {
        let first = lo.map_or(0, |l| l + 1);
        if first >= hi {
            break;
        }
        let mid = first + (hi - first) / 2;
        let (ok, sol, count) = probe(mid, lo_state.as_ref());
        if ok {
            hi = mid;
            hi_state = Some((sol, count));
        } else {
            lo = Some(mid);
            lo_state = Some((sol, count));
        }
    }
    let (sol, count) = match hi_state {
        Some(s) => s,
        None => {
            let (_, sol, count) = probe(hi, lo_state.as_ref());
            (sol, count)
        }
    };
    let r_star = cand.levels[hi];
    let witness = match (lo, &lo_state) {
        (Some(l), Some((s, c))) => Some(witness_of(a, b, &cand.pairs[..*c], s, cand.levels[l])),
        _ => None,
    };
    Ok(DinftyResult {
        r_star,
        plan: plan_of(&cand.pairs[..count], &sol),
        witness,
        deficit: 1.0 - sol.value,
        feasibility_tests: tests,
    })
}

/// Consistency of the distance with the set formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFormulationReport {
    pub r_star: f64,
    /// Witness margin at the preceding candidate radius (positive when it violates).
    pub witness_margin: Option<f64>,
    /// `1 - flow` at `r_star`.
    pub deficit: f64,
    /// Exhaustive subset scan (`|a| <= 16`): largest `a(S) - b(N_r(S))` at `r_star`.
    pub exhaustive_max_margin: Option<f64>,
    pub passed: bool,
}

/// Verifies that the witness below `r*` violates the Hall condition, that the
/// flow at `r*` is complete and, for small instances, that no subset violates at `r*`.
pub fn set_formulation_check(a: &WeightedAtoms, b: &WeightedAtoms) -> Result<SetFormulationReport> {
    let res = dinfty_atomic(a, b)?;
    let witness_margin = res.witness.as_ref().map(|w| {
        // recompute the neighborhood geometrically, independent of the flow graph
        let nb = neighborhood(a, b, &w.set, w.radius);
        hall_margin(a, b, &w.set, &nb)
    });
    let exhaustive_max_margin = (a.len() <= 16).then(|| {
        let mut best = f64::NEG_INFINITY;
        for mask in 1u32..(1 << a.len()) {
            let set: Vec<usize> = (0..a.len()).filter(|i| mask >> i & 1 == 1).collect();
            let nb = neighborhood(a, b, &set, res.r_star);
            best = best.max(hall_margin(a, b, &set, &nb));
        }
        best
    });
    let passed = witness_margin.is_none_or(|m| m > 0.0)
        && res.deficit < FLOW_TOL
        && exhaustive_max_margin.is_none_or(|m| m <= 1e-12);
    Ok(SetFormulationReport { r_star: res.r_star, witness_margin, deficit: res.deficit, exhaustive_max_margin, passed })
}

/// Rigorous enclosure `[lo, hi]` of a distance to the uniform measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
    /// Distance between the two grid approximations.
    pub estimate: f64,
    pub n: usize,
}

impl Enclosure {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - RADIUS_RTOL && x <= self.hi + RADIUS_RTOL
    }
}

/// Default grid resolution of [`dinfty_to_uniform`] per dimension.
pub fn default_resolution(d: usize) -> usize {
    match d {
        1 => 64,
        2 => 24,
        _ => 8,
    }
}

/// Uniform atoms at every grid point.
pub fn uniform_atoms(d: usize, n: usize) -> Result<WeightedAtoms> {
    let grid = Grid::new(d, n)?;
    let coords = (0..grid.cells()).flat_map(|c| grid.point(c).coords().to_vec()).collect();
    WeightedAtoms::equal_weights(d, coords)
}

/// Input measure of [`dinfty_to_uniform`].
#[derive(Debug, Clone, Copy)]
pub enum MeasureRef<'a> {
    Atoms(&'a WeightedAtoms),
    /// Cell masses spread uniformly over their cells.
    Density(&'a GridDensity),
}

/// Encloses `d∞(ρ, 1)` by projecting `ρ` onto an `N^d` grid and comparing with
/// uniform atoms at the grid points; widens by the projection errors.
pub fn dinfty_to_uniform(rho: MeasureRef<'_>, n: usize) -> Result<Enclosure> {
    let (atoms, d, extra) = match rho {
        MeasureRef::Atoms(a) => (a.clone(), a.dim(), 0.0),
        MeasureRef::Density(g) => {
            let d = g.grid().dim();
            // atoms at cell points sit within one cell diameter of the spread mass
            (density_to_atoms(g), d, libm::sqrt(d as f64) / g.grid().n() as f64)
        }
    };
    let grid_cells = n.checked_pow(d as u32).unwrap_or(usize::MAX);
    if grid_cells.saturating_mul(grid_cells) > MAX_PAIRS {
        let suggested = libm::floor(libm::pow(MAX_PAIRS as f64, 0.5 / d as f64)) as usize;
        return Err(Error::InstanceTooLarge { nodes: grid_cells * 2, suggested_n: suggested });
    }
    let projected = density_to_atoms(&grid_project(&atoms, n)?);
    let uniform = uniform_atoms(d, n)?;
    let est = dinfty_atomic(&projected, &uniform)?.r_star;
    let slack = 2.0 * libm::sqrt(d as f64) / n as f64 + extra;
    Ok(Enclosure { lo: (est - slack).max(0.0), hi: est + slack, estimate: est, n })
}

/// Discrepancy `sup_I ∫_I (ρ - 1)` over circular intervals of cells.
pub fn discrepancy_1d(rho: &GridDensity) -> Result<f64> {
    let grid = rho.grid();
    if grid.dim() != 1 {
        return Err(invalid("discrepancy is defined for d = 1"));
    }
    let u = 1.0 / grid.n() as f64;
    let v: Vec<f64> = rho.mass().iter().map(|m| m - u).collect();
    // Kadane with empty intervals allowed; circular wrap via total - min
    let (mut best_max, mut cur_max) = (0.0f64, 0.0f64);
    let (mut best_min, mut cur_min) = (0.0f64, 0.0f64);
    for &x in &v {
        cur_max = (cur_max + x).max(0.0);
        best_max = best_max.max(cur_max);
        cur_min = (cur_min + x).min(0.0);
        best_min = best_min.min(cur_min);
    }
    let total = compensated_sum(v.iter().copied());
    Ok(best_max.max(total - best_min))
}

/// Lower bound on `d∞(ρ, 1)` from balls `B(0; a)` and their complements,
/// given `excess(a) = ∫_{B(0;a)} (ρ - 1)`. Returns `(bound, best a)`.
pub fn ball_witness_lower_bound(d: usize, radii: &[f64], excess: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (0.0, f64::NAN);
    for &a in radii {
        let vol = ball_volume(d, a);
        let mass = vol + excess(a);
        if mass < 0.0 {
            continue;
        }
        // radius of the ball with the same volume as ρ(B_a)
        let equal = a * libm::pow(mass / vol, 1.0 / d as f64);
        let r = (equal - a).abs();
        if r > best.0 {
            best = (r, a);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::uniform_density;
    use crate::torus::TorusPoint;

    fn atoms(d: usize, coords: &[f64], w: &[f64]) -> WeightedAtoms {
        WeightedAtoms::new(d, coords.to_vec(), w.to_vec()).unwrap()
    }

    #[test]
    fn antipodal_deltas() {
        let a = atoms(1, &[0.0], &[1.0]);
        let b = atoms(1, &[0.5], &[1.0]);
        let f = feasible_at(&a, &b, 0.3).unwrap();
        assert!(!f.feasible);
        assert_eq!(f.witness.as_ref().unwrap().set, vec![0]);
        assert!((f.witness.unwrap().margin - 1.0).abs() < 1e-15);
        assert!(feasible_at(&a, &b, 0.5).unwrap().feasible);
        assert_eq!(dinfty_atomic(&a, &b).unwrap().r_star, 0.5);
    }

    #[test]
    fn identity_and_diagonal() {
        let a = atoms(2, &[0.1, 0.2, -0.3, 0.4], &[0.25, 0.75]);
        let f = feasible_at(&a, &a, 0.0).unwrap();
        assert!(f.feasible);
        assert_eq!(f.plan.len(), 2);
        assert_eq!(dinfty_atomic(&a, &a).unwrap().r_star, 0.0);
        let o = WeightedAtoms::dirac(&TorusPoint::origin(2));
        let c = WeightedAtoms::dirac(&TorusPoint::new(vec![0.5, 0.5]));
        assert!((dinfty_atomic(&o, &c).unwrap().r_star - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn two_pairings() {
        let a = atoms(1, &[0.0, 0.4], &[0.5, 0.5]);
        let b = atoms(1, &[0.1, 0.5], &[0.5, 0.5]);
        let r = dinfty_atomic(&a, &b).unwrap();
        assert!((r.r_star - 0.1).abs() < 1e-15);
        // smallest candidate: nothing below to certify
        assert!(r.witness.is_none());
        let b = atoms(1, &[0.15, 0.5], &[0.5, 0.5]);
        let r = dinfty_atomic(&a, &b).unwrap();
        assert!((r.r_star - 0.15).abs() < 1e-15);
        let w = r.witness.unwrap();
        assert!((w.radius - 0.1).abs() < 1e-15);
        assert!((w.margin - 0.5).abs() < 1e-15);
    }

    #[test]
    fn irrational_weights() {
        let w = core::f64::consts::FRAC_1_SQRT_2;
        let a = atoms(1, &[0.0, 0.5], &[w, 1.0 - w]);
        let b = atoms(1, &[0.0, 0.5], &[0.5, 0.5]);
        let r = dinfty_atomic(&a, &b).unwrap();
        assert_eq!(r.r_star, 0.5);
        let rep = set_formulation_check(&a, &b).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn discrepancy_examples() {
        let u = uniform_density(1, 50).unwrap();
        assert!(discrepancy_1d(&u).unwrap().abs() < 1e-15);
        let delta = grid_project(&WeightedAtoms::dirac(&TorusPoint::origin(1)), 20).unwrap();
        assert!((discrepancy_1d(&delta).unwrap() - (1.0 - 1.0 / 20.0)).abs() < 1e-15);
        assert!(discrepancy_1d(&uniform_density(2, 4).unwrap()).is_err());
    }

    #[test]
    fn uniform_enclosures() {
        let u = uniform_density(2, 6).unwrap();
        let e = dinfty_to_uniform(MeasureRef::Density(&u), 6).unwrap();
        assert!(e.contains(0.0));
        assert!(e.hi <= 2.0 * libm::sqrt(2.0) / 6.0 + libm::sqrt(2.0) / 6.0 + 1e-15);
        let delta = WeightedAtoms::dirac(&TorusPoint::origin(1));
        let e = dinfty_to_uniform(MeasureRef::Atoms(&delta), 64).unwrap();
        assert!(e.contains(0.5), "{e:?}");
        assert!(matches!(
            dinfty_to_uniform(MeasureRef::Atoms(&WeightedAtoms::dirac(&TorusPoint::origin(3))), 40),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn ball_witness_for_excess() {
        // uniform plus mass 0.01 concentrated inside B(0; 0.1) in 1D
        let (r, _) = ball_witness_lower_bound(1, &[0.1], |_| 0.01);
        assert!((r - 0.005).abs() < 1e-15);
        let (r, _) = ball_witness_lower_bound(1, &[0.1], |_| -0.01);
        assert!((r - 0.005).abs() < 1e-15);
    }
}
