use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use sntail::analytic::{criterion, criterion_max};
use sntail::bounds::curvature_functionals;
use sntail::montecarlo::{statistic, StatisticKind, StatisticSpec};
use sntail::oracles::{region_tail_integral, sphere_tail_exact};
use sntail::special::betainc;
use sntail::{DensityModel, RegionIntegrand};

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn point_in_unit_ball(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d).map(|_| 2.0 * unit(rng) - 1.0).collect();
        let r2: f64 = u.iter().map(|x| x * x).sum();
        if r2 <= 1.0 && r2 > 1e-12 {
            return u;
        }
    }
}

#[test]
fn quadratic_envelopes_hold_on_random_points() {
    for n in [2, 3, 4, 6] {
        for beta in [1.5, 2.0, 3.0] {
            let c = curvature_functionals(n, beta).unwrap();
            let top = criterion_max::<f64>(n, beta);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 31 + beta as u64);
            for _ in 0..10_000 {
                let u = point_in_unit_ball(&mut rng, n - 1);
                let r2: f64 = u.iter().map(|x| x * x).sum();
                let v: Vec<f64> = u.iter().map(|x| 1.0 + x).collect();
                let drop = top - criterion(&v, beta);
                assert!(drop >= c.lambda * r2 - 1e-9, "minorant n={n} beta={beta} v={v:?}");
                assert!(drop <= c.mu * r2 + 1e-9, "majorant n={n} beta={beta} v={v:?}");
            }
        }
    }
}

#[test]
fn region_integral_matches_sphere_oracle() {
    for n in [2, 3, 4] {
        let m = DensityModel::standard_normal(n).unwrap();
        for eps in [0.01, 0.05, 0.1] {
            let r = region_tail_integral(&m, n, eps, 2.0, RegionIntegrand::Weighted).unwrap();
            let s = sphere_tail_exact(n, (n as f64).sqrt() - eps).unwrap();
            assert!(((r.value - s.value) / s.value).abs() < 1e-5, "n={n} eps={eps}: {} vs {}", r.value, s.value);
        }
    }
}

#[test]
fn holder_bound_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for beta in [1.5, 2.0, 3.0] {
        let spec = StatisticSpec::sum(beta).unwrap();
        for i in 0..1_000_000u32 {
            let n = 2 + (i % 7) as usize;
            let x: Vec<f64> = (0..n).map(|_| 4.0 * unit(&mut rng) - 2.0).collect();
            let cap = criterion_max::<f64>(n, beta);
            assert!(statistic(&x, &spec).unwrap() <= cap * (1.0 + 1e-15));
        }
    }
}

proptest! {
    #[test]
    fn statistic_is_scale_invariant(
        x in prop::collection::vec(-1e3f64..1e3, 2..10),
        c in 1e-3f64..1e3,
        beta in 1.1f64..4.0,
    ) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
        for kind in [StatisticKind::Sum, StatisticKind::MaxOverZn, StatisticKind::MaxOverZk] {
            let spec = StatisticSpec::new(beta, kind).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
            let a = statistic(&x, &spec).unwrap();
            let b = statistic(&scaled, &spec).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn max_statistic_dominates_sum(x in prop::collection::vec(-10f64..10.0, 2..12)) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-9));
        let s = statistic(&x, &StatisticSpec::sum(2.0).unwrap()).unwrap();
        let m = statistic(&x, &StatisticSpec::new(2.0, StatisticKind::MaxOverZn).unwrap()).unwrap();
        prop_assert!(m >= s);
    }

    #[test]
    fn betainc_reflection(a in 0.05f64..30.0, b in 0.05f64..30.0, x in 0.0f64..=1.0) {
        let lhs = betainc(a, b, x).unwrap() + betainc(b, a, 1.0 - x).unwrap();
        prop_assert!((lhs - 1.0).abs() < 1e-13);
    }
}
