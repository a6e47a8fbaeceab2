//! Independent reference computations: exhaustive bottleneck matching,
//! smoothed spectral synthesis of `W_s`, central differences, and random
//! instance generators shared by the fixture writer and the test suites.

use rand::Rng;
use toruspot_core::measures::WeightedAtoms;
use toruspot_core::torus::dist_sq;

use crate::formats::{AtomsFile, Instance};

/// `min over permutations σ of max_i |x_i - y_σ(i)|` by visiting all `n!`
/// permutations (Heap's algorithm). Equal-weight, equal-size measures only.
pub fn bottleneck_bruteforce(d: usize, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() / d;
    assert_eq!(y.len(), n * d, "bottleneck needs equally many points");
    let dist: Vec<f64> = (0..n * n)
        .map(|k| dist_sq(&x[(k / n) * d..(k / n + 1) * d], &y[(k % n) * d..(k % n + 1) * d]).sqrt())
        .collect();
    let cost = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| dist[i * n + j]).fold(0.0, f64::max);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Uniform points in the fundamental domain.
pub fn random_points(rng: &mut impl Rng, d: usize, n: usize) -> Vec<f64> {
    (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect()
}

/// Weights drawn from `U(0.05, 1)` and normalized.
pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Equal-weight instance with `n` atoms on both sides.
pub fn random_equal_instance(rng: &mut impl Rng, d: usize, n: usize) -> (WeightedAtoms, WeightedAtoms) {
    let a = WeightedAtoms::equal_weights(d, random_points(rng, d, n)).expect("valid atoms");
    let b = WeightedAtoms::equal_weights(d, random_points(rng, d, n)).expect("valid atoms");
    (a, b)
}

/// Instance with continuous random weights and `n`, `m` atoms.
pub fn random_weighted_instance(rng: &mut impl Rng, d: usize, n: usize, m: usize) -> (WeightedAtoms, WeightedAtoms) {
    let a = WeightedAtoms::normalized(d, random_points(rng, d, n), random_weights(rng, n)).expect("valid atoms");
    let b = WeightedAtoms::normalized(d, random_points(rng, d, m), random_weights(rng, m)).expect("valid atoms");
    (a, b)
}

/// Equal-weight fixtures annotated with the exhaustive bottleneck value.
pub fn permutation_fixtures(rng: &mut impl Rng, count: usize, n_max: usize, dims: &[usize]) -> Vec<Instance> {
    (0..count)
        .map(|k| {
            let d = dims[k % dims.len()];
            let n = rng.random_range(1..=n_max);
            let (a, b) = random_equal_instance(rng, d, n);
            let r = bottleneck_bruteforce(d, a.coords(), b.coords());
            Instance { d, a: AtomsFile::from_atoms(&a), b: AtomsFile::from_atoms(&b), expected_r_star: Some(r) }
        })
        .collect()
}

/// Width of the erfc taper, as a fraction of the cutoff.
pub const TAPER_WIDTH: f64 = 0.12;

/// Smoothed spectral synthesis `Σ_{k≠0} |k|^{s-d} φ(|k|/K) cos(2π k·x)` with
/// `φ(t) = erfc((t - 1/2)/σ)/2`. The taper makes the implied convolution
/// kernel decay like `exp(-(πσK|y|)^2)`, so away from the origin the sum
/// matches `W_s` far beyond what plain truncation gives.
pub struct SpectralOracle {
    d: usize,
    k: i64,
    /// Tapered coefficient per `|k|^2`.
    coef: Vec<f64>,
}

impl SpectralOracle {
    pub fn new(d: usize, s: f64, k: usize) -> Self {
        let kf = k as f64;
        let coef = (0..=d * k * k)
            .map(|k2| {
                if k2 == 0 {
                    return 0.0;
                }
                let r = (k2 as f64).sqrt();
                0.5 * libm::erfc((r / kf - 0.5) / TAPER_WIDTH) * r.powf(s - d as f64)
            })
            .collect();
        Self { d, k: k as i64, coef }
    }

    /// Cutoff giving agreement to about `1e-9` at distance `>= 0.2` from the origin.
    pub fn default_cutoff(d: usize) -> usize {
        match d {
            1 => 8192,
            2 => 256,
            _ => 96,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d);
        let k = self.k;
        let side = (2 * k + 1) as usize;
        // per-axis phases e^{2πi k x_a}, k = -K..=K
        let phases: Vec<Vec<(f64, f64)>> = x
            .iter()
            .map(|&xa| {
                (-k..=k)
                    .map(|kk| {
                        let t = 2.0 * std::f64::consts::PI * kk as f64 * xa;
                        (t.cos(), t.sin())
                    })
                    .collect()
            })
            .collect();
        let mut total = 0.0;
        match self.d {
            1 => {
                for i in 0..side {
                    let k1 = i as i64 - k;
                    total += self.coef[(k1 * k1) as usize] * phases[0][i].0;
                }
            }
            2 => {
                for i in 0..side {
                    let k1 = i as i64 - k;
                    let (c1, s1) = phases[0][i];
                    let mut row = 0.0;
                    for j in 0..side {
                        let k2 = j as i64 - k;
                        let (c2, s2) = phases[1][j];
                        row += self.coef[(k1 * k1 + k2 * k2) as usize] * (c1 * c2 - s1 * s2);
                    }
                    total += row;
                }
            }
            _ => {
                for i in 0..side {
                    let k1 = i as i64 - k;
                    let (c1, s1) = phases[0][i];
                    for j in 0..side {
                        let k2 = j as i64 - k;
                        let (c2, s2) = phases[1][j];
                        let (cr, sr) = (c1 * c2 - s1 * s2, c1 * s2 + s1 * c2);
                        let base = (k1 * k1 + k2 * k2) as usize;
                        let mut row = 0.0;
                        for l in 0..side {
                            let k3 = l as i64 - k;
                            let (c3, s3) = phases[2][l];
                            row += self.coef[base + (k3 * k3) as usize] * (cr * c3 - sr * s3);
                        }
                        total += row;
                    }
                }
            }
        }
        total
    }
}

/// Central-difference gradient with step `h`.
pub fn central_difference(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|a| {
            y[a] = x[a] + h;
            let up = f(&y);
            y[a] = x[a] - h;
            let down = f(&y);
            y[a] = x[a];
            (up - down) / (2.0 * h)
        })
        .collect()
}
