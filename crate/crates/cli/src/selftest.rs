//! Small known-answer checks, one or two per module.

use equilab_core::bergman::{self, MetricModel};
use equilab_core::canbasis::chi_lower_bound;
use equilab_core::dyncore::{HomogeneousMap, ProjPointC, ProjPointQ};
use equilab_core::equid::{discrepancy, reference_integral};
use equilab_core::heights::Heights;
use equilab_core::lattice::IntegralLattice;
use equilab_core::measure::EquilibriumSampler;
use equilab_core::periodic::per_n;
use equilab_core::testfn::SmoothTestFn;
use equilab_core::{Complex64, Result};

fn z2() -> Result<HomogeneousMap> {
    HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1])
}

fn check(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> bool {
    let (ok, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("{}: {e}", e.name())),
    };
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

pub fn run() -> bool {
    let mut ok = true;
    ok &= check("dyncore: z^2 sends [2:1] to [4:1]", || {
        let y = z2()?.apply(&ProjPointQ::from_i64(&[2, 1])?)?;
        let s: Vec<String> = y.coords().iter().map(|c| c.to_string()).collect();
        Ok((s == ["4", "1"], format!("[{}]", s.join(":"))))
    });
    ok &= check("heights: h_z^2([2:1]) = log 2", || {
        let h = Heights::new(&z2()?)?.canonical_height(&ProjPointQ::from_i64(&[2, 1])?, 1e-8)?;
        let err = (h.value - 2f64.ln()).abs();
        Ok((err <= 1e-8, format!("value {:.12}, error {err:.1e}", h.value)))
    });
    ok &= check("measure: z^2 samples lie on the unit circle", || {
        let c = EquilibriumSampler::new(&z2()?, 0)?.sample(2000)?;
        let worst = c
            .points
            .iter()
            .map(|p| p.z().map_or(f64::INFINITY, |z| (z.norm() - 1.0).abs()))
            .fold(0.0, f64::max);
        Ok((worst < 1e-9, format!("max ||z| - 1| = {worst:.1e}")))
    });
    ok &= check("periodic: Per_2(z^2 - 1) has 5 points", || {
        let m = HomogeneousMap::binary(&[1, 0, -1], &[0, 0, 1])?;
        let s = per_n(&m, 2)?;
        Ok((s.len() == 5, format!("{} points", s.len())))
    });
    ok &= check("testfn: bump is 1 on its plateau and 0 outside", || {
        let f = SmoothTestFn::parse("bump:chart=0,cx=0.5,cy=0.0,inner=0.1,outer=0.2")?;
        let (a, b) = (f.eval_z(Complex64::new(0.55, 0.0)), f.eval_z(Complex64::new(0.0, 0.0)));
        Ok(((a - 1.0).abs() < 1e-15 && b == 0.0, format!("f(0.55) = {a}, f(0) = {b}")))
    });
    ok &= check("equid: roots of unity vs the circle measure", || {
        let m = z2()?;
        let f = SmoothTestFn::parse("bump:chart=0,cx=1.0,cy=0.0,inner=0.2,outer=0.4")?;
        let integral = reference_integral(&m, &f, &EquilibriumSampler::new(&m, 0)?, 1000)?;
        let pts = (0..1024)
            .map(|k| ProjPointC::affine(Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 1024.0)))
            .collect();
        let d = discrepancy(&equilab_core::dyncore::PointCloud::new(pts), &f, &integral)?.discrepancy;
        Ok((d < 1e-10, format!("discrepancy {d:.1e}")))
    });
    ok &= check("bergman: Fubini-Study kernel integrates to n + 1", || {
        let s = bergman::gram_auto(&MetricModel::fubini_study(8))?;
        let i = bergman::kernel_integral(&s)?;
        Ok(((i - 9.0).abs() < 1e-8, format!("integral {i:.10}")))
    });
    ok &= check("lattice: standard lattice has covolume 1", || {
        let l = IntegralLattice::standard(4);
        Ok((l.log_covolume() == 0.0, format!("log covolume {}", l.log_covolume())))
    });
    ok &= check("canbasis: z^2 at (n, m) = (2, 1) gives chi_lower = -log 5", || {
        let r = chi_lower_bound(&z2()?, 2, 1, 256)?;
        Ok(((r.chi_lower + 5f64.ln()).abs() < 1e-9, format!("chi_lower {:.12}", r.chi_lower)))
    });
    ok
}
