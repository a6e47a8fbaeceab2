use proptest::prelude::*;
use toruspot_core::dinfty::{dinfty_atomic, feasible_at, hall_margin, neighborhood};
use toruspot_core::energy::energy_riesz;
use toruspot_core::flow::velocities;
use toruspot_core::kernel::{EwaldKernel, PairKernel};
use toruspot_core::measures::{GridDensity, WeightedAtoms};
use toruspot_core::riesz::{Ewald, RieszSpec, TailMethod};
use toruspot_core::torus::{dist_sq, Grid};

fn coords(d: usize, n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5f64..0.5, n * d)
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n)
}

fn atoms(d: usize, n: usize) -> impl Strategy<Value = WeightedAtoms> {
    (coords(d, n), weights(n)).prop_map(move |(c, w)| WeightedAtoms::normalized(d, c, w).unwrap())
}

/// Exhaustive bottleneck over permutations, written independently of the crate.
fn bottleneck(d: usize, x: &[f64], y: &[f64]) -> f64 {
    fn go(i: usize, used: &mut Vec<bool>, cur: f64, best: &mut f64, cost: &dyn Fn(usize, usize) -> f64, n: usize) {
        if cur >= *best {
            return;
        }
        if i == n {
            *best = cur;
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                go(i + 1, used, cur.max(cost(i, j)), best, cost, n);
                used[j] = false;
            }
        }
    }
    let n = x.len() / d;
    let cost = |i: usize, j: usize| dist_sq(&x[i * d..(i + 1) * d], &y[j * d..(j + 1) * d]).sqrt();
    let mut best = f64::INFINITY;
    go(0, &mut vec![false; n], 0.0, &mut best, &cost, n);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equal_weights_match_bottleneck(d in 1usize..=2, n in 1usize..=6, seed in any::<u64>()) {
        let mut s = seed | 1;
        let mut next = || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5 };
        let x: Vec<f64> = (0..n * d).map(|_| next()).collect();
        let y: Vec<f64> = (0..n * d).map(|_| next()).collect();
        let a = WeightedAtoms::equal_weights(d, x.clone()).unwrap();
        let b = WeightedAtoms::equal_weights(d, y.clone()).unwrap();
        prop_assert_eq!(dinfty_atomic(&a, &b).unwrap().r_star, bottleneck(d, &x, &y));
    }

    #[test]
    fn distance_is_symmetric(a in atoms(2, 5), b in atoms(2, 4)) {
        prop_assert_eq!(dinfty_atomic(&a, &b).unwrap().r_star, dinfty_atomic(&b, &a).unwrap().r_star);
    }

    #[test]
    fn triangle_inequality(a in atoms(1, 4), b in atoms(1, 5), c in atoms(1, 3)) {
        let ab = dinfty_atomic(&a, &b).unwrap().r_star;
        let bc = dinfty_atomic(&b, &c).unwrap().r_star;
        let ac = dinfty_atomic(&a, &c).unwrap().r_star;
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn plan_has_the_right_marginals_and_reach(a in atoms(2, 6), b in atoms(2, 7)) {
        let res = dinfty_atomic(&a, &b).unwrap();
        let mut out = vec![0.0; a.len()];
        let mut inn = vec![0.0; b.len()];
        for e in &res.plan {
            out[e.from] += e.mass;
            inn[e.to] += e.mass;
            prop_assert!(dist_sq(a.point(e.from), b.point(e.to)).sqrt() <= res.r_star * (1.0 + 1e-12));
        }
        for (o, w) in out.iter().zip(a.weights()) { prop_assert!((o - w).abs() < 1e-9); }
        for (i, w) in inn.iter().zip(b.weights()) { prop_assert!((i - w).abs() < 1e-9); }
    }

    #[test]
    fn witness_blocks_every_smaller_radius(a in atoms(2, 6), b in atoms(2, 6)) {
        let res = dinfty_atomic(&a, &b).unwrap();
        if let Some(w) = res.witness {
            let nb = neighborhood(&a, &b, &w.set, w.radius);
            prop_assert!(hall_margin(&a, &b, &w.set, &nb) > 0.0);
            prop_assert!(!feasible_at(&a, &b, w.radius).unwrap().feasible);
        }
        prop_assert!(feasible_at(&a, &b, res.r_star).unwrap().feasible);
    }

    #[test]
    fn kernel_is_even_and_periodic(x in -0.5f64..0.5, y in -0.5f64..0.5, shift in -3i32..3) {
        prop_assume!(x * x + y * y > 1e-4);
        let w = Ewald::with_method(RieszSpec::new(2, 0.5).unwrap(), TailMethod::SpecialFunctions).unwrap();
        let v = w.eval(&[x, y]).unwrap();
        prop_assert!((v - w.eval(&[-x, -y]).unwrap()).abs() < 1e-12);
        prop_assert!((v - w.eval(&[x + shift as f64, y]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn riesz_energy_is_nonnegative(values in prop::collection::vec(0.0f64..2.0, 64), s in -1.5f64..0.9) {
        prop_assume!(values.iter().sum::<f64>() > 1.0);
        let (rho, _) = GridDensity::from_cell_values(Grid::new(1, 64).unwrap(), &values).unwrap();
        let spec = RieszSpec::new(1, s).unwrap().with_cutoff(31).unwrap();
        prop_assert!(energy_riesz(&spec, &rho).unwrap() >= 0.0);
    }

    #[test]
    fn flow_velocities_sum_to_zero(pos in coords(2, 8)) {
        let k = EwaldKernel::new(RieszSpec::new(2, -1.0).unwrap()).unwrap();
        let v = velocities(2, &pos, &k).unwrap();
        for a in 0..2 {
            let total: f64 = (0..8).map(|i| v[i * 2 + a]).sum();
            prop_assert!(total.abs() < 1e-12);
        }
        prop_assert_eq!(k.dim(), 2);
    }
}
