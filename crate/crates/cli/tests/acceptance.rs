//! End-to-end acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line
//! (visible with `--nocapture`) and then asserts.

use equilab_core::bergman::{self, ExponentConvention, MetricModel};
use equilab_core::canbasis::{chi_lower_bound, extract_basis, spanning_set};
use equilab_core::dyncore::{HomogeneousMap, ProjPointQ};
use equilab_core::equid::rate_fit;
use equilab_core::heights::Heights;
use equilab_core::measure::{estimate_kappa, EquilibriumSampler};
use equilab_core::periodic::{galois_degrees, min_poly_degrees, per_n, DegreeMode};
use equilab_core::seeds::stream_rng;
use equilab_core::stats::fit_line;
use equilab_core::testfn::disjoint_cubes;
use equilab_core::testfn::SmoothTestFn;
use equilab_core::Complex64;
use num_bigint::BigInt;
use num_integer::Integer;
use rand::Rng;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

fn report(k: u32, what: &str, ok: bool, detail: String, start: Instant) {
    println!(
        "[{}] criterion {k}: {what} ({detail}; {:.1} s)",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    assert!(ok, "criterion {k} failed: {detail}");
}

fn z2() -> HomogeneousMap {
    HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1]).unwrap()
}

fn basilica() -> HomogeneousMap {
    HomogeneousMap::binary(&[1, 0, -1], &[0, 0, 1]).unwrap()
}

fn random_primitive(seed: u64, idx: u64, bound: i64) -> (i64, i64) {
    let mut rng = stream_rng(seed, idx);
    loop {
        let a = rng.random_range(-bound..=bound);
        let b = rng.random_range(-bound..=bound);
        if (a, b) != (0, 0) && a.gcd(&b) == 1 {
            return (a, b);
        }
    }
}

#[test]
fn criterion_01_monomial_height_oracle() {
    let t = Instant::now();
    let hs = Heights::new(&z2()).unwrap();
    let mut worst = 0f64;
    for i in 0..25 {
        let (a, b) = random_primitive(101, i, 1_000_000);
        let h = hs.canonical_height(&ProjPointQ::from_i64(&[a, b]).unwrap(), 1e-8).unwrap();
        let oracle = (a.abs().max(b.abs()) as f64).ln();
        worst = worst.max((h.value - oracle).abs());
    }
    let ok = worst <= 1e-8 && t.elapsed().as_secs_f64() < 5.0;
    report(1, "h(z^2) = log max(|a|,|b|) on 25 points", ok, format!("max error {worst:.2e}"), t);
}

#[test]
fn criterion_02_functional_equation() {
    let t = Instant::now();
    let maps = [
        ("z^2 - 1", basilica()),
        ("(z^2 + 1)/(2z)", HomogeneousMap::binary(&[1, 0, 1], &[0, 2, 0]).unwrap()),
    ];
    let mut ok = true;
    let mut worst_gap = 0f64;
    let mut worst_radius = 0f64;
    for (k, (_, m)) in maps.iter().enumerate() {
        let hs = Heights::new(m).unwrap();
        for i in 0..50 {
            let (a, b) = random_primitive(202 + k as u64, i, 1000);
            let x = ProjPointQ::from_i64(&[a, b]).unwrap();
            let hx = hs.canonical_height(&x, 1e-8).unwrap();
            let hfx = hs.canonical_height(&m.apply(&x).unwrap(), 1e-8).unwrap();
            let gap = (hfx.value - 2.0 * hx.value).abs();
            let radius = hfx.error_radius + 2.0 * hx.error_radius;
            ok &= gap <= radius && radius <= 1e-6;
            worst_gap = worst_gap.max(gap);
            worst_radius = worst_radius.max(radius);
        }
    }
    ok &= t.elapsed().as_secs_f64() < 30.0;
    report(
        2,
        "|h(phi x) - 2 h(x)| within error radii, two lifts, 50 points each",
        ok,
        format!("max gap {worst_gap:.2e}, max radius {worst_radius:.2e}"),
        t,
    );
}

#[test]
fn criterion_03_periodic_counts() {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 1..=8u32 {
        let s = per_n(&z2(), n).unwrap();
        let on_circle = s
            .points
            .points
            .iter()
            .filter(|p| p.z().is_some_and(|z| (z.norm() - 1.0).abs() <= 1e-8))
            .count();
        let want = 1usize << n;
        ok &= s.len() == want + 1 && on_circle == want - 1;
        detail.push(format!("n={n}: {}/{on_circle}", s.len()));
    }
    // z(z + 1)(z^2 - z - 1) together with infinity
    let s = per_n(&basilica(), 2).unwrap();
    let prof = galois_degrees(&basilica(), 2, DegreeMode::Certified).unwrap();
    let degs = min_poly_degrees(&s, prof.factors.as_ref().unwrap());
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let expected = [
        (Some(Complex64::new(0.0, 0.0)), 1),
        (Some(Complex64::new(-1.0, 0.0)), 1),
        (Some(Complex64::new(phi, 0.0)), 2),
        (Some(Complex64::new(1.0 - phi, 0.0)), 2),
        (None, 1),
    ];
    ok &= s.len() == 5;
    for (z, d) in expected {
        let hit = s.points.points.iter().zip(&degs).any(|(p, &dp)| {
            dp == d
                && match (p.z(), z) {
                    (Some(a), Some(b)) => (a - b).norm() < 1e-10,
                    (None, None) => true,
                    _ => false,
                }
        });
        ok &= hit;
    }
    ok &= t.elapsed().as_secs_f64() < 10.0;
    report(3, "Per_n counts for z^2 and the basilica Per_2 profile", ok, detail.join(" "), t);
}

#[test]
fn criterion_04_galois_growth() {
    let t = Instant::now();
    let m = HomogeneousMap::binary(&[1, 0, 1], &[0, 0, 1]).unwrap();
    let mut maxes = Vec::new();
    let mut certified = true;
    for n in 1..=6u32 {
        let p = galois_degrees(&m, n, DegreeMode::Certified).unwrap();
        certified &= p.certified;
        maxes.push(p.max_degree());
    }
    let xs: Vec<f64> = (1..=6).map(f64::from).collect();
    let ys: Vec<f64> = maxes.iter().map(|&d| (d as f64).ln()).collect();
    let fit = fit_line(&xs, &ys);
    let c_hat = fit.slope.exp();
    let ok = certified
        && maxes.windows(2).all(|w| w[0] <= w[1])
        && c_hat > 1.0
        && fit.r_squared >= 0.6
        && t.elapsed().as_secs_f64() < 60.0;
    report(
        4,
        "max Galois degree of Per_n(z^2 + 1) grows geometrically",
        ok,
        format!("degrees {maxes:?}, c_hat {c_hat:.3}, r2 {:.3}", fit.r_squared),
        t,
    );
}

#[test]
fn criterion_05_equidistribution_rate() {
    let t = Instant::now();
    let f = SmoothTestFn::bump(0, Complex64::new(1.0, 0.0), 0.2, 0.4).unwrap();
    let fit = rate_fit(&z2(), &f, 1..=8, &EquilibriumSampler::new(&z2(), 0).unwrap()).unwrap();
    let g = SmoothTestFn::bump(0, Complex64::new(1.0, 0.0), 0.3, 0.6).unwrap();
    let fit2 = rate_fit(&basilica(), &g, 1..=9, &EquilibriumSampler::new(&basilica(), 0).unwrap()).unwrap();
    let ok = fit.lambda_hat >= 1.5
        && fit.r_squared >= 0.9
        && fit2.lambda_hat > 1.0
        && fit2.r_squared >= 0.7
        && t.elapsed().as_secs_f64() < 120.0;
    report(
        5,
        "discrepancy decays geometrically for z^2 and z^2 - 1",
        ok,
        format!(
            "z^2: lambda {:.3}, r2 {:.3}; z^2-1: lambda {:.3}, r2 {:.3}",
            fit.lambda_hat, fit.r_squared, fit2.lambda_hat, fit2.r_squared
        ),
        t,
    );
}

#[test]
fn criterion_06_bergman_constancy() {
    let t = Instant::now();
    let grid = bergman::sphere_grid(256);
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [8u32, 32] {
        let s = bergman::gram_auto(&MetricModel::fubini_study(n)).unwrap();
        let st = bergman::kernel_stats(&s, &grid).unwrap();
        let integral = bergman::kernel_integral(&s).unwrap();
        let spread = (st.max - st.min) / st.max;
        ok &= spread <= 1e-8 && (integral - (n as f64 + 1.0)).abs() <= 1e-6;
        detail.push(format!("n={n}: spread {spread:.1e}, integral {integral:.9}"));
    }
    let f = SmoothTestFn::bump(0, Complex64::new(0.0, 0.0), 0.3, 0.7).unwrap();
    let mut ratios = Vec::new();
    for n in [16u32, 32, 64] {
        let s = bergman::gram_auto(&MetricModel::perturbed(n, f.clone(), 0.05)).unwrap();
        ratios.push(bergman::kernel_stats(&s, &grid).unwrap().ratio);
    }
    ok &= ratios.windows(2).all(|w| w[1] < w[0]);
    ok &= t.elapsed().as_secs_f64() < 60.0;
    detail.push(format!("perturbed sup/inf {ratios:.6?}"));
    report(6, "FS kernel constant with mass n + 1; perturbed ratio decreasing", ok, detail.join("; "), t);
}

#[test]
fn criterion_07_volume_linearization() {
    let t = Instant::now();
    let f = SmoothTestFn::annulus(0, [0.3, 0.6, 1.4, 1.8], 0, vec![(0, -1.0, 0.0)]).unwrap();
    let lin = bergman::linearize(&f, 12, 0.1, ExponentConvention::Unit).unwrap();
    let ok = lin.eps == [0.1, 0.05, 0.025] && lin.relative_error < 0.1 && t.elapsed().as_secs_f64() < 60.0;
    report(
        7,
        "Richardson slope of volume_diff matches the predicted coefficient",
        ok,
        format!("richardson {:.6}, predicted {:.6}, rel error {:.2e}", lin.richardson, lin.predicted, lin.relative_error),
        t,
    );
}

#[test]
fn criterion_08_gromov_exponent() {
    let t = Instant::now();
    let fit = bergman::gromov_exponent(&[8, 16, 32, 64], 200, 8, MetricModel::fubini_study).unwrap();
    let ok = fit.exponent <= 1.3 && t.elapsed().as_secs_f64() < 60.0;
    report(
        8,
        "growth exponent of sup/L2 ratios at most 1.3",
        ok,
        format!("exponent {:.3}, r2 {:.3}", fit.exponent, fit.r_squared),
        t,
    );
}

#[test]
fn criterion_09_canonical_basis() {
    let t = Instant::now();
    let m = basilica();
    let lattice = extract_basis(&spanning_set(&m, 4, 2).unwrap()).unwrap();
    let mut ok = lattice.chosen.len() == 17 && lattice.dimension == 17 && lattice.determinant != BigInt::from(0);
    let mut detail = vec![format!("rank {}", lattice.dimension)];
    let mut scaled = Vec::new();
    for n in [2u32, 4, 6] {
        let r = chi_lower_bound(&m, n, n / 2, 1024).unwrap();
        ok &= r.sup_within_budget;
        scaled.push(r.chi_lower / 2f64.powi(n as i32));
    }
    ok &= scaled.windows(2).all(|w| w[1].abs() < w[0].abs());
    ok &= t.elapsed().as_secs_f64() < 180.0;
    detail.push(format!("chi_lower/d^n at n=2,4,6: {scaled:.4?}"));
    report(9, "canonical basis rank, sup budgets and chi scaling", ok, detail.join("; "), t);
}

#[test]
fn criterion_10_cube_family() {
    let t = Instant::now();
    let s = EquilibriumSampler::new(&z2(), 10).unwrap();
    let k = estimate_kappa(&s, 50_000, 5).unwrap();
    let fam = disjoint_cubes(&s, 8, 2, &k).unwrap();
    let ok = fam.indices.len() == 8
        && fam.dilated_disjoint()
        && fam.masses.iter().all(|&m| m >= 0.5 * fam.equal_share)
        && t.elapsed().as_secs_f64() < 30.0;
    let min_mass = fam.masses.iter().cloned().fold(f64::INFINITY, f64::min);
    report(
        10,
        "eight disjoint dilated cubes with at least half the equal share",
        ok,
        format!("kappa {:.3}, side {:.4}, min mass {min_mass:.4}, half share {:.4}", k.kappa_hat, fam.side, 0.5 * fam.equal_share),
        t,
    );
}

fn run_cli(args: &[&str], threads: &str, out: &PathBuf) -> Vec<u8> {
    let st = Command::new(env!("CARGO_BIN_EXE_equilab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("EQUILAB_THREADS", threads)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .status()
        .unwrap();
    assert!(st.success(), "equilab {args:?} failed");
    std::fs::read(out).unwrap()
}

#[test]
fn criterion_11_determinism() {
    let t = Instant::now();
    let dir = std::env::temp_dir().join(format!("equilab-acceptance-{}", std::process::id()));
    let bump = "bump:chart=0,cx=1.0,cy=0.0,inner=0.3,outer=0.6";
    let runs: Vec<Vec<&str>> = vec![
        vec!["measure", "--map", "../../maps/z2m1.map", "--samples", "3000", "--seed", "7"],
        vec!["per", "--map", "../../maps/z2p1.map", "--n", "4"],
        vec!["rate", "--map", "../../maps/z2m1.map", "--fn", bump, "--nmax", "6", "--samples", "50000", "--seed", "3"],
        vec!["scan", "--map", "../../maps/z2m1.map", "--fn", bump, "--nmax", "4", "--samples", "20000", "--seed", "3"],
        vec!["height", "--map", "../../maps/joukowski.map", "--point", "3,7"],
        vec!["bergman", "--n", "16", "--fn", "bump:chart=0,cx=0.0,cy=0.0,inner=0.3,outer=0.7", "--grid", "64"],
        vec!["chi", "--map", "../../maps/z2m1.map", "--n", "4", "--grid", "256"],
    ];
    let mut ok = true;
    let mut bad = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let a = run_cli(args, "1", &dir.join(format!("{i}-a.csv")));
        let b = run_cli(args, "4", &dir.join(format!("{i}-b.csv")));
        if a != b || a.is_empty() {
            ok = false;
            bad.push(args[0]);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    let detail = if bad.is_empty() { format!("{} commands identical", runs.len()) } else { format!("differs: {bad:?}") };
    report(11, "CSV output identical across EQUILAB_THREADS=1 and 4", ok, detail, t);
}
