//! Probability measures on the torus: weighted atoms, grid densities (cell
//! masses), the constructed families, and Fourier coefficients.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::mollifier::bump_sq;
use crate::stats::compensated_sum;
use crate::torus::{check_dim, reduce, Grid, TorusPoint};

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-12;
/// Largest negative mass that renormalization may clip away.
pub const CLIP_TOL: f64 = 1e-8;

/// Atomic probability measure `Σ a_i δ_{x_i}` with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAtoms {
    d: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedAtoms {
    /// Validates positivity and unit total mass. Coordinates are `n·d` values,
    /// atom-major, and are reduced to the fundamental domain.
    pub fn new(d: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("a measure needs at least one atom"));
        }
        check_dim(weights.len() * d, coords.len())?;
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure("atom weights must be positive and finite"));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { d, coords: coords.into_iter().map(reduce).collect(), weights })
    }

    /// Rescales positive weights to unit mass before validating.
    pub fn normalized(d: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total = compensated_sum(weights.iter().copied());
        if !(total > 0.0) {
            return Err(Error::InvalidMeasure("total weight must be positive"));
        }
        Self::new(d, coords, weights.into_iter().map(|w| w / total).collect())
    }

    /// `n` atoms of weight `1/n`.
    pub fn equal_weights(d: usize, coords: Vec<f64>) -> Result<Self> {
        let n = coords.len() / d.max(1);
        Self::normalized(d, coords, vec![1.0; n])
    }

    pub fn dirac(point: &TorusPoint) -> Self {
        Self { d: point.dim(), coords: point.coords().to_vec(), weights: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Cell masses on a uniform grid; cell `j` owns `[j/N, (j+1)/N)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Grid,
    mass: Vec<f64>,
}

/// Outcome of renormalizing sampled masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Renormalization {
    /// Total negative mass removed before rescaling.
    pub clipped: f64,
    /// Total mass before rescaling.
    pub raw_total: f64,
}

impl GridDensity {
    /// Validates nonnegativity and unit total mass.
    pub fn new(grid: Grid, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != grid.cells() {
            return Err(Error::InvalidMeasure("mass length must equal N^d"));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidMeasure("cell masses must be nonnegative and finite"));
        }
        let total = compensated_sum(mass.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { grid, mass })
    }

    /// Clips negative masses (failing above [`CLIP_TOL`]) and rescales to unit mass.
    pub fn renormalized(grid: Grid, mut mass: Vec<f64>) -> Result<(Self, Renormalization)> {
        if mass.len() != grid.cells() {
            return Err(Error::InvalidMeasure("mass length must equal N^d"));
        }
        let mut clipped = 0.0;
        for m in mass.iter_mut() {
            if *m < 0.0 {
                clipped -= *m;
                *m = 0.0;
            }
        }
        if clipped > CLIP_TOL {
            return Err(Error::NegativeDensity(clipped));
        }
        let raw_total = compensated_sum(mass.iter().copied());
        if !(raw_total > 0.0) {
            return Err(Error::InvalidMeasure("total mass must be positive"));
        }
        for m in mass.iter_mut() {
            *m /= raw_total;
        }
        Ok((Self::new(grid, mass)?, Renormalization { clipped, raw_total }))
    }

    /// Density values per cell (mass times `N^d`), renormalized.
    pub fn from_cell_values(grid: Grid, values: &[f64]) -> Result<(Self, Renormalization)> {
        let vol = 1.0 / grid.cells() as f64;
        Self::renormalized(grid, values.iter().map(|v| v * vol).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Density value `mass · N^d` of every cell.
    pub fn cell_values(&self) -> Vec<f64> {
        let c = self.grid.cells() as f64;
        self.mass.iter().map(|m| m * c).collect()
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.mass.iter().copied())
    }
}

/// Assigns each atom's full weight to the half-open cell containing it.
pub fn grid_project(rho: &WeightedAtoms, n: usize) -> Result<GridDensity> {
    let grid = Grid::new(rho.dim(), n)?;
    let mut mass = vec![0.0; grid.cells()];
    for i in 0..rho.len() {
        let idx = rho.point(i).iter().fold(0, |acc, &x| acc * n + grid.axis_cell(x));
        mass[idx] += rho.weight(i);
    }
    let total = compensated_sum(mass.iter().copied());
    for m in mass.iter_mut() {
        *m /= total;
    }
    GridDensity::new(grid, mass)
}

/// Atoms at the representative points of the cells with positive mass.
pub fn density_to_atoms(rho: &GridDensity) -> WeightedAtoms {
    let grid = rho.grid();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (c, &m) in rho.mass().iter().enumerate() {
        if m > 0.0 {
            coords.extend_from_slice(grid.point(c).coords());
            weights.push(m);
        }
    }
    WeightedAtoms { d: grid.dim(), coords, weights }
}

/// Uniform masses `N^{-d}`.
pub fn uniform_density(d: usize, n: usize) -> Result<GridDensity> {
    let grid = Grid::new(d, n)?;
    let m = 1.0 / grid.cells() as f64;
    Ok(GridDensity { grid, mass: vec![m; grid.cells()] })
}

/// Volume of the Euclidean ball of radius `r` in dimension `d <= 3`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    match d {
        1 => 2.0 * r,
        2 => PI * r * r,
        3 => 4.0 / 3.0 * PI * r * r * r,
        _ => f64::NAN,
    }
}

fn sample(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..grid.cells()).map(|c| f(grid.point(c).coords())).collect()
}

/// Samples `1 - ε|B| + ε χ_B` at the cell points, `B = B(0; radius)`.
pub fn bump_family(d: usize, eps: f64, radius: f64, n: usize) -> Result<GridDensity> {
    if !(eps >= 0.0) || !(radius > 0.0 && radius < 0.5) {
        return Err(invalid("bump family needs eps >= 0 and 0 < radius < 1/2"));
    }
    let grid = Grid::new(d, n)?;
    let vol = ball_volume(d, radius);
    let values = sample(grid, |x| {
        let inside = x.iter().map(|v| v * v).sum::<f64>() < radius * radius;
        1.0 - eps * vol + if inside { eps } else { 0.0 }
    });
    Ok(GridDensity::from_cell_values(grid, &values)?.0)
}

/// Samples `1 + a cos(2π x_1)` at the cell points; `|a| <= 1`.
pub fn cosine_family(d: usize, amplitude: f64, n: usize) -> Result<GridDensity> {
    if amplitude.abs() > 1.0 {
        return Err(invalid("cosine amplitude must lie in [-1, 1]"));
    }
    let grid = Grid::new(d, n)?;
    let values = sample(grid, |x| 1.0 + amplitude * libm::cos(2.0 * PI * x[0]));
    Ok(GridDensity::from_cell_values(grid, &values)?.0)
}

/// The profile `ρ - 1 = Ψ_M(x/ε) / ‖Ψ_M‖_∞` on the fine patch around the origin.
#[derive(Debug, Clone)]
pub struct LaplacianProfile {
    d: usize,
    /// fine cells per axis
    nf: usize,
    /// fine spacing
    hf: f64,
    /// coordinate of the lower edge of the patch
    lo: f64,
    values: Vec<f64>,
    /// `1 / max |(-Δ_h)^M ψ(·/ε)|`
    pub c0: f64,
}

impl LaplacianProfile {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn fine_cells(&self) -> usize {
        self.nf
    }

    pub fn spacing(&self) -> f64 {
        self.hf
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Center of fine cell `i` along one axis.
    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.hf
    }

    fn for_each(&self, mut f: impl FnMut(&[f64], f64)) {
        let mut idx = vec![0usize; self.d];
        let mut x = vec![0.0; self.d];
        for &v in &self.values {
            for (xa, &ia) in x.iter_mut().zip(&idx) {
                *xa = self.center(ia);
            }
            f(&x, v);
            for a in (0..self.d).rev() {
                idx[a] += 1;
                if idx[a] < self.nf {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Quadrature moment `Σ x^α (ρ - 1) h^d` and the matching absolute sum
    /// `Σ |x^α (ρ - 1)| h^d`.
    pub fn moment(&self, alpha: &[u32]) -> (f64, f64) {
        let vol = libm::pow(self.hf, self.d as f64);
        let mut terms = Vec::with_capacity(self.values.len());
        self.for_each(|x, v| {
            let mono: f64 = x.iter().zip(alpha).map(|(xa, &p)| libm::pow(*xa, p as f64)).product();
            terms.push(mono * v * vol);
        });
        let abs = terms.iter().map(|t| t.abs()).sum();
        (compensated_sum(terms), abs)
    }

    /// `∫_{B(0;a)} (ρ - 1)` by fine-cell-center inclusion.
    pub fn ball_excess(&self, a: f64) -> f64 {
        let vol = libm::pow(self.hf, self.d as f64);
        let mut terms = Vec::new();
        self.for_each(|x, v| {
            if x.iter().map(|t| t * t).sum::<f64>() < a * a {
                terms.push(v * vol);
            }
        });
        compensated_sum(terms)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest distance from the origin to a fine center with nonzero value.
    pub fn support_radius(&self) -> f64 {
        let mut r2: f64 = 0.0;
        self.for_each(|x, v| {
            if v != 0.0 {
                r2 = r2.max(x.iter().map(|t| t * t).sum());
            }
        });
        libm::sqrt(r2)
    }
}

/// Grid density `1 + Ψ_M(x/ε)/‖Ψ_M‖_∞` and its fine-patch profile.
#[derive(Debug, Clone)]
pub struct LaplacianFamily {
    pub density: GridDensity,
    pub profile: LaplacianProfile,
    /// Target cells per axis on each side of the origin covered by the patch.
    pub patch_half_width: usize,
    pub renormalization: Renormalization,
}

/// Applies `-Δ_h` with zero extension outside the array.
fn neg_laplacian(f: &[f64], d: usize, n: usize, h: f64) -> Vec<f64> {
    let mut g = vec![0.0; f.len()];
    let inv = 1.0 / (h * h);
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        for (i, gi) in g.iter_mut().enumerate() {
            let j = (i / stride) % n;
            let prev = if j > 0 { f[i - stride] } else { 0.0 };
            let next = if j + 1 < n { f[i + stride] } else { 0.0 };
            *gi -= (next - 2.0 * f[i] + prev) * inv;
        }
    }
    g
}

/// Builds the Laplacian family on an `N^d` grid. The profile is computed on a
/// fine patch with `refine` fine cells per target cell and averaged into the
/// target cells.
pub fn laplacian_family(d: usize, eps: f64, m: u32, n: usize, refine: usize) -> Result<LaplacianFamily> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(invalid("laplacian family needs 0 < eps < 1/4"));
    }
    if m == 0 {
        return Err(invalid("laplacian family needs M >= 1"));
    }
    if refine < 8 {
        return Err(invalid("fine patch needs at least 8 fine cells per target cell"));
    }
    let grid = Grid::new(d, n)?;
    let h = grid.cell_width();
    if eps / h < 8.0 - 1e-9 {
        return Err(Error::UnderResolved(format!("eps = {eps} spans {:.2} < 8 cells at N = {n}", eps / h)));
    }
    let p = libm::ceil(eps / h - 1e-9) as usize + 2;
    if 2 * p > n {
        return Err(Error::UnderResolved(format!("patch of {} cells exceeds the grid", 2 * p)));
    }
    let nf = 2 * p * refine;
    let hf = h / refine as f64;
    let lo = -(p as f64) * h;
    let total = nf.pow(d as u32);
    let mut f = vec![0.0; total];
    for (i, fi) in f.iter_mut().enumerate() {
        let mut rem = i;
        let mut r2 = 0.0;
        for _ in 0..d {
            let x = lo + ((rem % nf) as f64 + 0.5) * hf;
            r2 += x * x;
            rem /= nf;
        }
        *fi = bump_sq(r2 / (eps * eps));
    }
    for _ in 0..m {
        f = neg_laplacian(&f, d, nf, hf);
    }
    let peak = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c0 = 1.0 / peak;
    for v in f.iter_mut() {
        *v *= c0;
    }

    let mut values = vec![1.0; grid.cells()];
    let mut agg = vec![0.0; (2 * p).pow(d as u32)];
    for (i, &v) in f.iter().enumerate() {
        let mut rem = i;
        let mut t = 0;
        let mut stride = 1;
        for _ in 0..d {
            t += ((rem % nf) / refine) * stride;
            stride *= 2 * p;
            rem /= nf;
        }
        agg[t] += v;
    }
    let per = libm::pow(refine as f64, d as f64);
    for (t, a) in agg.iter().enumerate() {
        let mut rem = t;
        let mut idx = 0;
        let mut digits = vec![0usize; d];
        for digit in digits.iter_mut() {
            *digit = rem % (2 * p);
            rem /= 2 * p;
        }
        // digits are stored fastest-axis first; grid flat index is axis 0 slowest
        for &dg in digits.iter().rev() {
            let j = (dg as i64 - p as i64).rem_euclid(n as i64) as usize;
            idx = idx * n + j;
        }
        values[idx] += a / per;
    }
    let (density, renormalization) = GridDensity::from_cell_values(grid, &values)?;
    Ok(LaplacianFamily {
        density,
        profile: LaplacianProfile { d, nf, hf, lo, values: f, c0 },
        patch_half_width: p,
        renormalization,
    })
}

/// Fourier coefficients on the cube `|k|_∞ <= K`, stored with `k_0` slowest,
/// each axis running from `-K` to `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    d: usize,
    k_max: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn new(d: usize, k_max: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != (2 * k_max + 1).pow(d as u32) {
            return Err(invalid("coefficient count must be (2K+1)^d"));
        }
        Ok(Self { d, k_max, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn index(&self, k: &[i64]) -> Option<usize> {
        let km = self.k_max as i64;
        let mut idx = 0;
        for &ka in k {
            if ka.abs() > km {
                return None;
            }
            idx = idx * (2 * self.k_max + 1) + (ka + km) as usize;
        }
        Some(idx)
    }

    /// Coefficient at `k`, `None` outside the cube.
    pub fn get(&self, k: &[i64]) -> Option<Complex64> {
        if k.len() != self.d {
            return None;
        }
        self.index(k).map(|i| self.coeffs[i])
    }

    /// Wave vector of storage slot `i`.
    pub fn wave_vector(&self, mut i: usize) -> Vec<i64> {
        let side = 2 * self.k_max + 1;
        let mut k = vec![0i64; self.d];
        for a in (0..self.d).rev() {
            k[a] = (i % side) as i64 - self.k_max as i64;
            i /= side;
        }
        k
    }

    /// Iterates `(k, coefficient)` over the cube.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.wave_vector(i), *c))
    }
}

/// `Σ_j values_j e^{-2πi k·j/N}` for all `|k|_∞ <= K`, one axis at a time.
pub(crate) fn separable_dft(values: &[Complex64], d: usize, n: usize, k_max: usize) -> Vec<Complex64> {
    let side = 2 * k_max + 1;
    // phase[(k + K) * n + j] = e^{-2πi k j / N}, reduced modulo N for accuracy
    let phase: Vec<Complex64> = (0..side)
        .flat_map(|kk| {
            let k = kk as i64 - k_max as i64;
            (0..n).map(move |j| {
                let r = (k * j as i64).rem_euclid(n as i64) as f64 / n as f64;
                Complex64::new(libm::cos(2.0 * PI * r), -libm::sin(2.0 * PI * r))
            })
        })
        .collect();
    let mut data = values.to_vec();
    // dims[a]: current extent of axis a
    let mut dims = vec![n; d];
    for axis in 0..d {
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let mut next = vec![Complex64::new(0.0, 0.0); outer * side * inner];
        for o in 0..outer {
            for kk in 0..side {
                let ph = &phase[kk * n..(kk + 1) * n];
                for (j, &w) in ph.iter().enumerate() {
                    let src = &data[(o * n + j) * inner..(o * n + j + 1) * inner];
                    let dst = &mut next[(o * side + kk) * inner..(o * side + kk + 1) * inner];
                    for (t, s) in dst.iter_mut().zip(src) {
                        *t += s * w;
                    }
                }
            }
        }
        data = next;
        dims[axis] = side;
    }
    data
}

/// `ρ̂(k) = Σ_cells mass e^{-2πi k·x}` for `|k|_∞ <= K`; requires `K < N/2`.
pub fn fourier_coeffs(rho: &GridDensity, k_max: usize) -> Result<SpectralCoeffs> {
    let grid = rho.grid();
    check_cutoff(k_max, grid.n())?;
    let vals: Vec<Complex64> = rho.mass().iter().map(|&m| Complex64::new(m, 0.0)).collect();
    SpectralCoeffs::new(grid.dim(), k_max, separable_dft(&vals, grid.dim(), grid.n(), k_max))
}

pub(crate) fn check_cutoff(k_max: usize, n: usize) -> Result<()> {
    if 2 * k_max >= n {
        Err(Error::CutoffTooLarge { k: k_max, half: n as f64 / 2.0 })
    } else {
        Ok(())
    }
}

/// `Σ_i a_i e^{-2πi k·x_i}` for `|k|_∞ <= K`.
pub fn atom_fourier_coeffs(rho: &WeightedAtoms, k_max: usize) -> SpectralCoeffs {
    let d = rho.dim();
    let side = 2 * k_max + 1;
    let count = side.pow(d as u32);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); count];
    for i in 0..rho.len() {
        let x = rho.point(i);
        for (slot, c) in coeffs.iter_mut().enumerate() {
            let mut rem = slot;
            let mut phase = 0.0;
            for a in (0..d).rev() {
                let k = (rem % side) as f64 - k_max as f64;
                phase += k * x[a];
                rem /= side;
            }
            *c += Complex64::from_polar(rho.weight(i), -2.0 * PI * phase);
        }
    }
    SpectralCoeffs { d, k_max, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn atoms_validation() {
        assert!(WeightedAtoms::new(1, vec![0.1, 0.2], vec![0.5, 0.5]).is_ok());
        assert!(matches!(WeightedAtoms::new(1, vec![0.1, 0.2], vec![0.5, 0.6]), Err(Error::NotNormalized(_))));
        assert!(WeightedAtoms::new(1, vec![0.1, 0.2], vec![1.0, 0.0]).is_err());
        assert!(WeightedAtoms::new(2, vec![0.1, 0.2], vec![0.5, 0.5]).is_err());
        let a = WeightedAtoms::new(1, vec![0.75], vec![1.0]).unwrap();
        assert_eq!(a.point(0), &[-0.25]);
    }

    #[test]
    fn projection_examples() {
        let delta = WeightedAtoms::dirac(&TorusPoint::origin(2));
        let g = grid_project(&delta, 5).unwrap();
        assert_eq!(g.mass()[0], 1.0);
        let two = WeightedAtoms::new(1, vec![0.1, 0.6], vec![0.5, 0.5]).unwrap();
        assert_eq!(grid_project(&two, 4).unwrap().mass(), &[0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn atoms_round_trip() {
        let u = uniform_density(1, 3).unwrap();
        let a = density_to_atoms(&u);
        assert_eq!(a.len(), 3);
        assert!(a.weights().iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-16));
        let back = grid_project(&a, 3).unwrap();
        assert!((back.total() - 1.0).abs() < 1e-15);
        assert_eq!(back.mass(), u.mass());
    }

    #[test]
    fn uniform_masses() {
        let u = uniform_density(2, 2).unwrap();
        assert_eq!(u.mass(), &[0.25; 4]);
    }

    #[test]
    fn bump_excess_mass_1d() {
        let eps = 0.3;
        let n = 3000;
        let rho = bump_family(1, eps, 1.0 / 3.0, n).unwrap();
        let g = rho.grid();
        let excess: f64 = (0..n)
            .filter(|&c| g.point(c).coords()[0].abs() < 1.0 / 3.0)
            .map(|c| rho.mass()[c] - 1.0 / n as f64)
            .sum();
        assert!((excess - 2.0 * eps / 9.0).abs() < 4.0 / n as f64, "{excess}");
        assert_eq!(bump_family(1, 0.0, 1.0 / 3.0, 10).unwrap(), uniform_density(1, 10).unwrap());
    }

    #[test]
    fn fourier_examples() {
        let u = uniform_density(2, 8).unwrap();
        let c = fourier_coeffs(&u, 3).unwrap();
        for (k, v) in c.iter() {
            let expect = if k.iter().all(|&x| x == 0) { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-15);
        }
        let delta = grid_project(&WeightedAtoms::dirac(&TorusPoint::origin(1)), 16).unwrap();
        assert!(fourier_coeffs(&delta, 7).unwrap().coeffs().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let cosine = cosine_family(2, 1.0, 16).unwrap();
        let c = fourier_coeffs(&cosine, 4).unwrap();
        assert!((c.get(&[1, 0]).unwrap() - 0.5).norm() < 1e-12);
        assert!((c.get(&[-1, 0]).unwrap() - 0.5).norm() < 1e-12);
        assert!(c.get(&[0, 1]).unwrap().norm() < 1e-12);
        assert!(fourier_coeffs(&cosine, 8).is_err());
    }

    #[test]
    fn grid_and_atom_coefficients_agree() {
        let rho = cosine_family(2, 0.4, 12).unwrap();
        let a = density_to_atoms(&rho);
        let g = fourier_coeffs(&rho, 5).unwrap();
        let b = atom_fourier_coeffs(&a, 5);
        for (x, y) in g.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn laplacian_family_shape() {
        let fam = laplacian_family(1, 0.1, 1, 160, 8).unwrap();
        assert!((fam.profile.sup_norm() - 1.0).abs() < 1e-15);
        assert!(fam.density.cell_values().iter().all(|v| *v >= -1e-12 && *v <= 2.0 + 1e-9));
        assert!(fam.profile.support_radius() < 0.1 + 2.0 * fam.profile.spacing());
        // first-order check of the sign pattern against the analytic -ψ''
        let p = &fam.profile;
        let eps = 0.1;
        let mut agree = 0;
        let mut total = 0;
        for i in 0..p.fine_cells() {
            let x = p.center(i) / eps;
            if x.abs() >= 0.999 {
                continue;
            }
            let q = 1.0 - x * x;
            // ψ'' of e^{-1/(1-x²)}
            let psi = libm::exp(-1.0 / q);
            let d2 = psi * ((2.0 * x / (q * q)).powi(2) - (2.0 + 6.0 * x * x) / (q * q * q));
            let analytic = -d2 * p.c0 / (eps * eps);
            if analytic.abs() > 1e-3 {
                total += 1;
                if analytic.signum() == p.values()[i].signum() && (analytic - p.values()[i]).abs() < 1e-2 {
                    agree += 1;
                }
            }
        }
        assert_eq!(agree, total);
        // positive core, negative shoulders
        assert!(p.values()[p.fine_cells() / 2] > 0.0);
        assert!(p.ball_excess(0.1) - p.ball_excess(0.05) < 0.0);
        assert!(matches!(laplacian_family(1, 0.1, 1, 40, 8), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn laplacian_moments_vanish() {
        for m in 1..=3u32 {
            let fam = laplacian_family(2, 0.125, m, 64, 8).unwrap();
            for a in 0..=(2 * m) {
                for b in 0..=(2 * m - a) {
                    let (mom, abs) = fam.profile.moment(&[a, b]);
                    if a + b < 2 * m {
                        assert!(mom.abs() <= 1e-12 * abs.max(1e-300) + 1e-18, "M={m} alpha=({a},{b}) {mom} {abs}");
                    }
                }
            }
            let (top, abs) = fam.profile.moment(&[2 * m, 0]);
            assert!(top.abs() > 1e-6 * abs, "order 2M must not vanish: M={m} {top} {abs}");
        }
    }

    proptest! {
        #[test]
        fn projection_preserves_mass(seed in any::<u64>(), n in 2usize..40) {
            let mut st = seed | 1;
            let mut next = || { st ^= st << 13; st ^= st >> 7; st ^= st << 17; (st >> 11) as f64 / (1u64 << 53) as f64 };
            let coords: Vec<f64> = (0..200).map(|_| next() - 0.5).collect();
            let w: Vec<f64> = (0..100).map(|_| next() + 0.01).collect();
            let a = WeightedAtoms::normalized(2, coords, w).unwrap();
            let g = grid_project(&a, n).unwrap();
            prop_assert!((g.total() - 1.0).abs() < 1e-14);
        }
    }
}
