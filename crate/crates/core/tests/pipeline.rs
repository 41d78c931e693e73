//! Cross-module checks through the public API.

use equilab_core::bergman::{self, MetricModel};
use equilab_core::dyncore::{HomogeneousMap, ProjPointQ};
use equilab_core::equid::{discrepancy, reference_integral};
use equilab_core::heights::Heights;
use equilab_core::measure::{integrate, EquilibriumSampler};
use equilab_core::periodic::{galois_orbits, per_n};
use equilab_core::testfn::SmoothTestFn;
use equilab_core::Complex64;
use proptest::prelude::*;

fn basilica() -> HomogeneousMap {
    HomogeneousMap::binary(&[1, 0, -1], &[0, 0, 1]).unwrap()
}

#[test]
fn preperiodic_rational_points_have_height_zero() {
    let m = basilica();
    let hs = Heights::new(&m).unwrap();
    // 0 <-> -1 is a 2-cycle, 1 lands on it, and infinity is fixed
    for p in [[0, 1], [-1, 1], [1, 1], [1, 0]] {
        let h = hs.canonical_height(&ProjPointQ::from_i64(&p).unwrap(), 1e-9).unwrap();
        assert!(h.value.abs() <= h.error_radius.max(1e-9), "{p:?}: {h:?}");
    }
}

#[test]
fn height_is_sum_over_places() {
    let m = HomogeneousMap::binary(&[1, 0, 1], &[0, 2, 0]).unwrap();
    let hs = Heights::new(&m).unwrap();
    let h = hs.canonical_height(&ProjPointQ::from_i64(&[5, 12]).unwrap(), 1e-8).unwrap();
    let sum: f64 = h.per_place.values().map(|g| g.value).sum();
    assert!((sum - h.value).abs() < 1e-12);
    assert!(h.per_place.len() >= 2, "bad prime 2 should appear: {:?}", h.per_place.keys());
}

#[test]
fn periodic_points_return_under_iteration() {
    let m = HomogeneousMap::binary(&[1, 0, 1], &[0, 0, 1]).unwrap();
    let s = per_n(&m, 4).unwrap();
    assert_eq!(s.len(), 17);
    for p in &s.points.points {
        let q = m.iterate(p, 4).unwrap();
        assert!(p.chordal_distance(&q) < 1e-8);
    }
    let orbits = galois_orbits(&m, 4).unwrap();
    assert_eq!(orbits.iter().map(|o| o.len()).sum::<usize>(), 17);
}

#[test]
fn monte_carlo_integrals_agree_across_seeds() {
    let m = basilica();
    let f = SmoothTestFn::bump(0, Complex64::new(1.0, 0.0), 0.3, 0.6).unwrap();
    let a = integrate(&f, &EquilibriumSampler::new(&m, 1).unwrap(), 40_000).unwrap();
    let b = reference_integral(&m, &f, &EquilibriumSampler::new(&m, 2).unwrap(), 40_000).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.value - b.value).abs() < 5.0 * se, "{a:?} {b:?}");
}

#[test]
fn sampled_cloud_has_small_discrepancy() {
    let m = basilica();
    let f = SmoothTestFn::bump(0, Complex64::new(1.0, 0.0), 0.3, 0.6).unwrap();
    let integral = reference_integral(&m, &f, &EquilibriumSampler::new(&m, 5).unwrap(), 100_000).unwrap();
    let cloud = EquilibriumSampler::new(&m, 6).unwrap().sample(20_000).unwrap();
    let d = discrepancy(&cloud, &f, &integral).unwrap();
    assert!(d.discrepancy < 0.02, "{d:?}");
}

#[test]
fn canonical_metric_kernel_sum_rule() {
    // the canonical weight is only Lipschitz, so the rule needs a fine grid
    let metric = MetricModel::canonical(&basilica(), 6).unwrap();
    let s = bergman::gram_unchecked(&metric, 384, 768).unwrap();
    let i = bergman::kernel_integral(&s).unwrap();
    assert!((i - 7.0).abs() < 1e-3, "{i}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn height_scales_along_orbits(a in -500i64..500, b in 1i64..500) {
        let m = HomogeneousMap::binary(&[1, 0, 2], &[0, 0, 1]).unwrap();
        let hs = Heights::new(&m).unwrap();
        let x = ProjPointQ::from_i64(&[a, b]).unwrap();
        let fx = m.apply(&m.apply(&x).unwrap()).unwrap();
        let h = hs.canonical_height(&x, 1e-9).unwrap();
        let h2 = hs.canonical_height(&fx, 1e-9).unwrap();
        prop_assert!((h2.value - 4.0 * h.value).abs() <= h2.error_radius + 4.0 * h.error_radius + 1e-9);
    }
}
