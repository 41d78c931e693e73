//! Discrepancy experiments: Galois-stable averages against equilibrium
//! integrals, exponential rate fits over periods, and small-point scans.

use crate::dyncore::{HomogeneousMap, PointCloud};
use crate::error::{Error, Result};
use crate::measure::{closed_form_measure, integrate, EquilibriumSampler, MeasureEstimate};
use crate::periodic::per_n;
use crate::stats::{fit_line, pairwise_sum};
use crate::testfn::{ck_norm, home_chart, SmoothTestFn};
use rayon::prelude::*;

/// Samples used for Monte Carlo integrals when no closed form exists.
pub const DEFAULT_INTEGRAL_SAMPLES: usize = 400_000;
/// Discrepancies below `NOISE_MULTIPLIER * std_error` (or `NOISE_ABSOLUTE`) are not fitted.
pub const NOISE_MULTIPLIER: f64 = 10.0;
pub const NOISE_ABSOLUTE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DiscrepancyRecord {
    pub label: String,
    pub set_size: usize,
    pub average: f64,
    pub integral: MeasureEstimate,
    pub discrepancy: f64,
    /// Max canonical height over the set, when known.
    pub height_bound: Option<f64>,
}

/// Mean of f over the cloud. Values are sorted before the pairwise sum, so the
/// result does not depend on the order of the cloud.
pub fn cloud_average(cloud: &PointCloud, f: &SmoothTestFn) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("discrepancy needs a nonempty cloud".into()));
    }
    let mut vals = Vec::with_capacity(cloud.len());
    for p in &cloud.points {
        home_chart(p)?;
        vals.push(f.eval(p));
    }
    vals.sort_by(f64::total_cmp);
    Ok(pairwise_sum(&vals) / vals.len() as f64)
}

pub fn discrepancy(cloud: &PointCloud, f: &SmoothTestFn, integral: &MeasureEstimate) -> Result<DiscrepancyRecord> {
    let average = cloud_average(cloud, f)?;
    Ok(DiscrepancyRecord {
        label: cloud.label.clone(),
        set_size: cloud.len(),
        average,
        integral: *integral,
        discrepancy: (average - integral.value).abs(),
        height_bound: None,
    })
}

/// The integral of f: exact quadrature for unit monomial maps, Monte Carlo otherwise.
pub fn reference_integral(
    map: &HomogeneousMap,
    f: &SmoothTestFn,
    sampler: &EquilibriumSampler,
    samples: usize,
) -> Result<MeasureEstimate> {
    match closed_form_measure(map) {
        Some(circle) => Ok(circle.integrate(f)),
        None => integrate(f, sampler, samples),
    }
}

pub fn noise_floor(integral: &MeasureEstimate) -> f64 {
    (NOISE_MULTIPLIER * integral.std_error).max(NOISE_ABSOLUTE)
}

#[derive(Clone, Debug)]
pub struct RateRow {
    pub n: u32,
    pub set_size: usize,
    pub discrepancy: f64,
    pub noise_floor: f64,
    pub used_in_fit: bool,
}

#[derive(Clone, Debug)]
pub struct RateFit {
    pub rows: Vec<RateRow>,
    pub integral: MeasureEstimate,
    /// `exp(-slope)` of log discrepancy against n over the usable rows.
    pub lambda_hat: f64,
    pub r_squared: f64,
}

impl RateFit {
    pub fn periods(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn discrepancies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.discrepancy).collect()
    }
}

pub fn rate_fit(
    map: &HomogeneousMap,
    f: &SmoothTestFn,
    n_range: std::ops::RangeInclusive<u32>,
    sampler: &EquilibriumSampler,
) -> Result<RateFit> {
    rate_fit_with(map, f, n_range, sampler, DEFAULT_INTEGRAL_SAMPLES)
}

pub fn rate_fit_with(
    map: &HomogeneousMap,
    f: &SmoothTestFn,
    n_range: std::ops::RangeInclusive<u32>,
    sampler: &EquilibriumSampler,
    integral_samples: usize,
) -> Result<RateFit> {
    let integral = reference_integral(map, f, sampler, integral_samples)?;
    let floor = noise_floor(&integral);
    let ns: Vec<u32> = n_range.collect();
    let rows: Vec<RateRow> = ns
        .par_iter()
        .map(|&n| {
            let set = per_n(map, n)?;
            let rec = discrepancy(&set.points, f, &integral)?;
            Ok(RateRow {
                n,
                set_size: set.len(),
                discrepancy: rec.discrepancy,
                noise_floor: floor,
                used_in_fit: rec.discrepancy >= floor,
            })
        })
        .collect::<Result<_>>()?;
    let used: Vec<&RateRow> = rows.iter().filter(|r| r.used_in_fit).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} of {} periods lie above the noise floor {floor:e}",
            used.len(),
            rows.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.discrepancy.ln()).collect();
    let fit = fit_line(&xs, &ys);
    Ok(RateFit { rows, integral, lambda_hat: (-fit.slope).exp(), r_squared: fit.r_squared })
}

/// A cloud with a known bound on the canonical heights of its points.
#[derive(Clone, Debug)]
pub struct HeightCloud {
    pub cloud: PointCloud,
    pub height_bound: f64,
}

#[derive(Clone, Debug)]
pub struct ScanRecord {
    pub record: DiscrepancyRecord,
    /// `height_bound / epsilon + c3 * epsilon`.
    pub budget: f64,
    /// Raw scan: `disc(f) > budget`.
    pub violates_raw: bool,
    /// Normalized scan: `disc(f / c_{f,3}) > budget`, with the C^3 norm divided out.
    pub violates_normalized: bool,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub records: Vec<ScanRecord>,
    pub c_f3: f64,
    pub violators_raw: usize,
    pub violators_normalized: usize,
}

/// Flag clouds violating `disc <= h / epsilon + c3 * epsilon`, both for f as
/// given and for `f / c_{f,3}`.
pub fn small_point_scan(
    f: &SmoothTestFn,
    clouds: &[HeightCloud],
    integral: &MeasureEstimate,
    epsilon: f64,
    c3: f64,
) -> Result<ScanReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let c_f3 = ck_norm(f, 3)?.value;
    let mut records = Vec::new();
    for hc in clouds {
        let mut rec = discrepancy(&hc.cloud, f, integral)?;
        rec.height_bound = Some(hc.height_bound);
        let budget = hc.height_bound / epsilon + c3 * epsilon;
        records.push(ScanRecord {
            violates_raw: rec.discrepancy > budget,
            violates_normalized: rec.discrepancy / c_f3 > budget,
            budget,
            record: rec,
        });
    }
    Ok(ScanReport {
        violators_raw: records.iter().filter(|r| r.violates_raw).count(),
        violators_normalized: records.iter().filter(|r| r.violates_normalized).count(),
        records,
        c_f3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyncore::ProjPointC;
    use crate::periodic::galois_orbits;
    use num_complex::Complex64;

    fn sq() -> HomogeneousMap {
        HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1]).unwrap()
    }

    fn circle_fn() -> SmoothTestFn {
        SmoothTestFn::annulus(0, [0.5, 0.8, 1.25, 1.6], 0, vec![(0, 0.5, 0.0), (1, 0.5, 0.0)]).unwrap()
    }

    #[test]
    fn constant_has_zero_discrepancy() {
        let cloud = PointCloud::new(vec![ProjPointC::affine(Complex64::new(0.3, 0.1)), ProjPointC::infinity()]);
        let est = MeasureEstimate { value: 2.0, std_error: 0.0, n_samples: 10 };
        let r = discrepancy(&cloud, &SmoothTestFn::constant(2.0), &est).unwrap();
        assert_eq!(r.discrepancy, 0.0);
    }

    #[test]
    fn seventh_roots_cancel() {
        let pts = (0..7)
            .map(|k| ProjPointC::affine(Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 7.0)))
            .collect();
        let f = SmoothTestFn::annulus(0, [0.25, 0.5, 1.5, 1.9], 1, vec![(1, 1.0, 0.0)]).unwrap();
        let est = crate::measure::CircleMeasure.integrate(&f);
        let r = discrepancy(&PointCloud::new(pts), &f, &est).unwrap();
        assert!(r.discrepancy <= 1e-12, "{r:?}");
    }

    #[test]
    fn five_term_average() {
        let f = HomogeneousMap::polynomial(&[-1, 0, 1]).unwrap();
        let set = per_n(&f, 2).unwrap();
        let g = SmoothTestFn::bump(0, Complex64::new(0.0, 0.0), 0.5, 1.2).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let hand: f64 = [0.0, -1.0, phi, 1.0 - phi].iter().map(|&x| g.eval_z(Complex64::new(x, 0.0))).sum::<f64>() / 5.0;
        let est = MeasureEstimate { value: 0.0, std_error: 0.0, n_samples: 2 };
        let r = discrepancy(&set.points, &g, &est).unwrap();
        assert!((r.average - hand).abs() < 1e-14);
        let mut rev = set.points.clone();
        rev.points.reverse();
        assert_eq!(discrepancy(&rev, &g, &est).unwrap().discrepancy, r.discrepancy);
    }

    #[test]
    fn roots_of_unity_vanishing() {
        // f with zero mean and Fourier content up to mode 2 on the circle; f(0) = f(inf) = 0
        let f = SmoothTestFn::annulus(0, [0.5, 0.8, 1.25, 1.6], 0, vec![(1, 0.7, 0.2), (2, -0.3, 0.5)]).unwrap();
        let est = crate::measure::CircleMeasure.integrate(&f);
        assert!(est.value.abs() < 1e-13);
        for n in 2..7 {
            let r = discrepancy(&per_n(&sq(), n).unwrap().points, &f, &est).unwrap();
            assert!(r.discrepancy < 1e-12, "n = {n}: {}", r.discrepancy);
        }
    }

    #[test]
    fn z_squared_rate() {
        let s = EquilibriumSampler::new(&sq(), 1).unwrap();
        let fit = rate_fit(&sq(), &circle_fn(), 1..=8, &s).unwrap();
        assert!(fit.lambda_hat >= 1.5 && fit.r_squared >= 0.9, "{fit:?}");
        // oracle: Per_1 = {0, 1, inf} gives 1/2 - 1/3; for n >= 2 the cosine mode
        // cancels over the (2^n - 1)-th roots of unity and disc = 1 / (2^n + 1)
        for r in &fit.rows {
            let want = if r.n == 1 { 1.0 / 6.0 } else { 1.0 / (2f64.powi(r.n as i32) + 1.0) };
            assert!((r.discrepancy - want).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn constant_rate_is_insufficient() {
        let s = EquilibriumSampler::new(&sq(), 1).unwrap();
        let r = rate_fit(&sq(), &SmoothTestFn::constant(1.0), 1..=5, &s);
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn scan_of_periodic_orbits() {
        let f = HomogeneousMap::polynomial(&[1, 0, 1]).unwrap();
        let s = EquilibriumSampler::new(&f, 4).unwrap();
        let g = SmoothTestFn::bump(0, Complex64::new(0.0, 0.8), 0.3, 0.6).unwrap();
        let est = integrate(&g, &s, 20_000).unwrap();
        let mut counts = Vec::new();
        for n in 3..=5 {
            let clouds: Vec<HeightCloud> = galois_orbits(&f, n)
                .unwrap()
                .into_iter()
                .map(|cloud| HeightCloud { cloud, height_bound: 0.0 })
                .collect();
            let rep = small_point_scan(&g, &clouds, &est, 0.1, 10.0).unwrap();
            counts.push(rep.violators_normalized);
        }
        assert!(counts.iter().all(|&c| c <= counts[0].max(1)), "{counts:?}");
        // a single high point: flagged or not, only recorded
        let lone = HeightCloud { cloud: PointCloud::new(vec![ProjPointC::affine(Complex64::new(0.0, 0.8))]), height_bound: 0.01 };
        let rep = small_point_scan(&g, &[lone], &est, 0.1, 0.0).unwrap();
        assert_eq!(rep.records.len(), 1);
    }

    #[test]
    fn basilica_rate() {
        let f = HomogeneousMap::polynomial(&[-1, 0, 1]).unwrap();
        let s = EquilibriumSampler::new(&f, 7).unwrap();
        let g = SmoothTestFn::bump(0, Complex64::new(1.0, 0.0), 0.3, 0.6).unwrap();
        let fit = rate_fit(&f, &g, 1..=7, &s).unwrap();
        assert!(fit.lambda_hat > 1.0 && fit.r_squared >= 0.7, "{fit:?}");
    }
}
