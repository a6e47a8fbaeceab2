//! Particle gradient flow `ẋ_i = -(1/N) Σ_{j≠i} ∇W(x_i - x_j)` on `T^d` and
//! cluster statistics of its states.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::energy_discrete;
use crate::error::{invalid, Error, Result};
use crate::kernel::{PairKernel, PerturbedKernel, TabulatedKernel};
use crate::riesz::RieszSpec;
use crate::stats::mean_std;
use crate::torus::{dist_sq, reduce};

/// Particle positions in the fundamental domain, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    d: usize,
    positions: Vec<f64>,
    pub time: f64,
    pub steps: u64,
}

impl ParticleState {
    pub fn new(d: usize, positions: Vec<f64>) -> Result<Self> {
        if d == 0 || positions.len() % d != 0 {
            return Err(invalid("coordinate count must be a multiple of d"));
        }
        if positions.len() / d < 2 {
            return Err(invalid("at least two particles are required"));
        }
        if positions.iter().any(|v| !v.is_finite()) {
            return Err(invalid("positions must be finite"));
        }
        Ok(Self { d, positions: positions.into_iter().map(reduce).collect(), time: 0.0, steps: 0 })
    }

    /// `n` i.i.d. uniform particles from a seeded ChaCha8 stream.
    pub fn random(d: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect();
        Self::new(d, coords)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.positions[i * self.d..(i + 1) * self.d]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Rk4,
}

/// Interaction used by the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSelector {
    Pure,
    Perturbed { c0: f64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub d: usize,
    pub s: f64,
    pub particles: usize,
    pub h: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub seed: u64,
    pub kernel: KernelSelector,
    /// Steps between snapshots and energy checks.
    pub snapshot_every: u64,
    /// Allowed energy increase between checks, relative to `max(1, |E|)`.
    pub energy_tol: f64,
    /// Mesh size of the tabulated kernel.
    pub table: usize,
}

impl FlowConfig {
    /// RK4 with `h = 5e-3`, 256 particles in `d = 2`, `s = -1`.
    pub fn standard(kernel: KernelSelector, t_end: f64, seed: u64) -> Self {
        Self {
            d: 2,
            s: -1.0,
            particles: 256,
            h: 5e-3,
            t_end,
            integrator: Integrator::Rk4,
            seed,
            kernel,
            snapshot_every: 200,
            energy_tol: 1e-6,
            table: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.t_end >= self.h) {
            return Err(invalid("need h > 0 and T >= h"));
        }
        if self.particles < 2 || self.snapshot_every == 0 {
            return Err(invalid("need at least two particles and a positive snapshot interval"));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> u64 {
        libm::round(self.t_end / self.h) as u64
    }
}

/// Tabulated kernel of a flow configuration.
#[derive(Debug, Clone)]
pub enum FlowKernel {
    Pure(TabulatedKernel),
    Perturbed(PerturbedKernel<TabulatedKernel>),
}

impl FlowKernel {
    pub fn new(cfg: &FlowConfig) -> Result<Self> {
        let spec = RieszSpec::new(cfg.d, cfg.s)?;
        let base = TabulatedKernel::new(spec, cfg.table)?;
        Ok(match cfg.kernel {
            KernelSelector::Pure => Self::Pure(base),
            KernelSelector::Perturbed { c0, eps } => Self::Perturbed(PerturbedKernel::new(base, cfg.s, eps, c0)?),
        })
    }
}

impl PairKernel for FlowKernel {
    fn dim(&self) -> usize {
        match self {
            Self::Pure(k) => k.dim(),
            Self::Perturbed(k) => k.dim(),
        }
    }

    fn singular_at_origin(&self) -> bool {
        match self {
            Self::Pure(k) => k.singular_at_origin(),
            Self::Perturbed(k) => k.singular_at_origin(),
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Pure(k) => k.value(x),
            Self::Perturbed(k) => k.value(x),
        }
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            Self::Pure(k) => k.grad(x, out),
            Self::Perturbed(k) => k.grad(x, out),
        }
    }
}

/// Velocities `-(1/N) Σ_{j≠i} ∇W(x_i - x_j)`, accumulated over `i < j` with
/// `∇W(x_j - x_i) = -∇W(x_i - x_j)`.
pub fn velocities(d: usize, positions: &[f64], kernel: &impl PairKernel) -> Result<Vec<f64>> {
    let n = positions.len() / d;
    let inv = 1.0 / n as f64;
    let mut v = vec![0.0; positions.len()];
    let mut diff = [0.0; 3];
    let mut g = [0.0; 3];
    let singular = kernel.singular_at_origin();
    for i in 0..n {
        for j in i + 1..n {
            for a in 0..d {
                diff[a] = reduce(positions[i * d + a] - positions[j * d + a]);
            }
            if singular && diff[..d].iter().map(|x| x * x).sum::<f64>() < 1e-24 {
                return Err(Error::Collision);
            }
            kernel.grad(&diff[..d], &mut g[..d])?;
            for a in 0..d {
                v[i * d + a] -= g[a] * inv;
                v[j * d + a] += g[a] * inv;
            }
        }
    }
    Ok(v)
}

fn advance(x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| reduce(a + h * b)).collect()
}

/// One Euler or classical Runge–Kutta step.
pub fn flow_step(state: &ParticleState, integrator: Integrator, h: f64, kernel: &impl PairKernel) -> Result<ParticleState> {
    let d = state.d;
    let x = &state.positions;
    let next = match integrator {
        Integrator::Euler => advance(x, &velocities(d, x, kernel)?, h),
        Integrator::Rk4 => {
            let k1 = velocities(d, x, kernel)?;
            let k2 = velocities(d, &advance(x, &k1, 0.5 * h), kernel)?;
            let k3 = velocities(d, &advance(x, &k2, 0.5 * h), kernel)?;
            let k4 = velocities(d, &advance(x, &k3, h), kernel)?;
            let v: Vec<f64> =
                (0..x.len()).map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect();
            advance(x, &v, h)
        }
    };
    Ok(ParticleState { d, positions: next, time: state.time + h, steps: state.steps + 1 })
}

/// Nearest-neighbor distance of each particle.
pub fn nearest_neighbor_distances(state: &ParticleState) -> Vec<f64> {
    let n = state.len();
    let mut best = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in i + 1..n {
            let r = libm::sqrt(dist_sq(state.point(i), state.point(j)));
            best[i] = best[i].min(r);
            best[j] = best[j].min(r);
        }
    }
    best
}

/// Summary of the nearest-neighbor distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborStats {
    pub mean: f64,
    pub std: f64,
    /// Coefficient of variation `std / mean`.
    pub cv: f64,
    pub min: f64,
    pub max: f64,
}

pub fn neighbor_stats(state: &ParticleState) -> NeighborStats {
    let nn = nearest_neighbor_distances(state);
    let (mean, std) = mean_std(&nn);
    NeighborStats {
        mean,
        std,
        cv: std / mean,
        min: nn.iter().copied().fold(f64::INFINITY, f64::min),
        max: nn.iter().copied().fold(0.0, f64::max),
    }
}

/// Single-linkage clusters at a distance threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub threshold: f64,
    pub count: usize,
    /// Cluster sizes, descending.
    pub sizes: Vec<usize>,
    /// Mean over clusters with at least two members of the largest distance
    /// to the cluster centroid; zero when every cluster is a singleton.
    pub mean_radius: f64,
    pub max_radius: f64,
}

/// Clusters linking particles at distance `<= threshold`. Members are
/// unwrapped along linkage edges, so clusters must not wrap around the torus.
pub fn single_linkage(state: &ParticleState, threshold: f64) -> ClusterStats {
    let (n, d) = (state.len(), state.d);
    let t2 = threshold * threshold;
    let mut label = vec![usize::MAX; n];
    let mut unwrapped = vec![0.0; n * d];
    let mut radii = Vec::new();
    let mut sizes = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        label[root] = id;
        unwrapped[root * d..(root + 1) * d].copy_from_slice(state.point(root));
        let mut members = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if label[w] == usize::MAX && dist_sq(state.point(u), state.point(w)) <= t2 {
                    label[w] = id;
                    for a in 0..d {
                        let delta = reduce(state.point(w)[a] - state.point(u)[a]);
                        unwrapped[w * d + a] = unwrapped[u * d + a] + delta;
                    }
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        if members.len() > 1 {
            let mut centroid = vec![0.0; d];
            for &m in &members {
                for a in 0..d {
                    centroid[a] += unwrapped[m * d + a] / members.len() as f64;
                }
            }
            let radius = members
                .iter()
                .map(|&m| libm::sqrt((0..d).map(|a| { let t = unwrapped[m * d + a] - centroid[a]; t * t }).sum::<f64>()))
                .fold(0.0, f64::max);
            radii.push(radius);
        }
        sizes.push(members.len());
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mean_radius = if radii.is_empty() { 0.0 } else { radii.iter().sum::<f64>() / radii.len() as f64 };
    ClusterStats { threshold, count: sizes.len(), sizes, mean_radius, max_radius: radii.iter().copied().fold(0.0, f64::max) }
}

/// Trajectory summary of [`run_flow`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSummary {
    pub initial: ParticleState,
    pub final_state: ParticleState,
    pub snapshots: Vec<ParticleState>,
    /// `(t, E)` at every snapshot.
    pub energies: Vec<(f64, f64)>,
    pub neighbors: NeighborStats,
    /// Single-linkage at `2ε` for perturbed runs.
    pub clusters: Option<ClusterStats>,
}

/// Integrates to `T`, checking the discrete energy at every snapshot.
pub fn run_flow(cfg: &FlowConfig, initial: Option<ParticleState>, kernel: &impl PairKernel) -> Result<FlowSummary> {
    cfg.validate()?;
    let initial = match initial {
        Some(s) => s,
        None => ParticleState::random(cfg.d, cfg.particles, cfg.seed)?,
    };
    let d = initial.d;
    let mut state = initial.clone();
    let mut energy = energy_discrete(d, &state.positions, kernel)?;
    let mut energies = vec![(state.time, energy)];
    let mut snapshots = vec![state.clone()];
    let steps = cfg.total_steps();
    for step in 1..=steps {
        state = flow_step(&state, cfg.integrator, cfg.h, kernel)?;
        if step % cfg.snapshot_every == 0 || step == steps {
            let e = energy_discrete(d, &state.positions, kernel)?;
            if e - energy > cfg.energy_tol * energy.abs().max(1.0) {
                return Err(Error::Unstable(format!("energy rose from {energy:e} to {e:e} at t = {}", state.time)));
            }
            energy = e;
            energies.push((state.time, e));
            snapshots.push(state.clone());
        }
    }
    let clusters = match cfg.kernel {
        KernelSelector::Perturbed { eps, .. } => Some(single_linkage(&state, 2.0 * eps)),
        KernelSelector::Pure => None,
    };
    Ok(FlowSummary { initial, neighbors: neighbor_stats(&state), final_state: state, snapshots, energies, clusters })
}
