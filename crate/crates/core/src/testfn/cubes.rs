//! Disjoint heavy cubes for the exclusion argument: D boxes of side
//! `c' D^(-2/kappa)` whose `dilate`-fold enlargements are pairwise disjoint.

use crate::error::{Error, Result};
use crate::measure::{support_chart, EquilibriumSampler, RegularityEstimate};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct CubeConfig {
    /// The constant c' in the side length.
    pub c_prime: f64,
    /// Samples used for the box masses.
    pub n_samples: usize,
}

impl Default for CubeConfig {
    fn default() -> Self {
        CubeConfig { c_prime: 1.0, n_samples: 100_000 }
    }
}

#[derive(Clone, Debug)]
pub struct CubeFamily {
    pub chart: usize,
    pub side: f64,
    pub dilate: u32,
    /// Box indices on the grid of side `side` anchored at (-2, -2).
    pub indices: Vec<(i64, i64)>,
    pub centers: Vec<Complex64>,
    pub masses: Vec<f64>,
    pub threshold: f64,
    /// Total mass in boxes divided by the number of boxes with positive mass.
    pub equal_share: f64,
}

impl CubeFamily {
    /// Dilated boxes `dilate * R_i` have pairwise disjoint interiors. On a common
    /// grid this is exactly a Chebyshev index distance of at least `dilate`.
    pub fn dilated_disjoint(&self) -> bool {
        let n = self.dilate as i64;
        self.indices.iter().enumerate().all(|(i, a)| {
            self.indices[i + 1..]
                .iter()
                .all(|b| (a.0 - b.0).abs().max((a.1 - b.1).abs()) >= n)
        })
    }
}

pub fn disjoint_cubes(
    sampler: &EquilibriumSampler,
    count: usize,
    dilate: u32,
    regularity: &RegularityEstimate,
) -> Result<CubeFamily> {
    disjoint_cubes_with(sampler, count, dilate, regularity, CubeConfig::default())
}

/// Greedy selection of the heaviest admissible boxes.
pub fn disjoint_cubes_with(
    sampler: &EquilibriumSampler,
    count: usize,
    dilate: u32,
    regularity: &RegularityEstimate,
    cfg: CubeConfig,
) -> Result<CubeFamily> {
    if count == 0 || dilate == 0 {
        return Err(Error::InvalidArgument("need D >= 1 and dilate >= 1".into()));
    }
    let raw = cfg.c_prime * (count as f64).powf(-2.0 / regularity.kappa_hat);
    // snap to a grid that tiles [-2, 2]
    let cells = (4.0 / raw).ceil().max(1.0);
    if cells > 1e7 {
        return Err(Error::ConstructionFailed(format!("side {raw:e} is below the sampling resolution")));
    }
    let side = 4.0 / cells;
    let cloud = sampler.sample(cfg.n_samples)?;
    let (chart, pts) = support_chart(&cloud);
    let counts = box_counts_side(&pts, side);
    let total = cloud.len() as f64;
    let positive = counts.len().max(1) as f64;
    let in_boxes: usize = counts.iter().map(|(_, c)| c).sum();
    let equal_share = in_boxes as f64 / total / positive;
    let threshold = 0.5 * equal_share;
    let mut order = counts;
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let n = dilate as i64;
    let mut chosen: Vec<((i64, i64), usize)> = Vec::new();
    for (idx, c) in order {
        if chosen.len() == count {
            break;
        }
        if (c as f64 / total) < threshold {
            break;
        }
        if chosen.iter().all(|(b, _)| (idx.0 - b.0).abs().max((idx.1 - b.1).abs()) >= n) {
            chosen.push((idx, c));
        }
    }
    if chosen.len() < count {
        return Err(Error::ConstructionFailed(format!(
            "found {} of {count} admissible boxes of side {side}",
            chosen.len()
        )));
    }
    let centers = chosen
        .iter()
        .map(|((i, j), _)| Complex64::new(-2.0 + (*i as f64 + 0.5) * side, -2.0 + (*j as f64 + 0.5) * side))
        .collect();
    Ok(CubeFamily {
        chart,
        side,
        dilate,
        indices: chosen.iter().map(|c| c.0).collect(),
        centers,
        masses: chosen.iter().map(|c| c.1 as f64 / total).collect(),
        threshold,
        equal_share,
    })
}

fn box_counts_side(pts: &[Complex64], side: f64) -> Vec<((i64, i64), usize)> {
    let mut m = std::collections::HashMap::new();
    for w in pts {
        let i = ((w.re + 2.0) / side).floor() as i64;
        let j = ((w.im + 2.0) / side).floor() as i64;
        *m.entry((i, j)).or_insert(0usize) += 1;
    }
    m.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyncore::HomogeneousMap;
    use crate::measure::estimate_kappa;

    fn setup() -> (EquilibriumSampler, RegularityEstimate) {
        let f = HomogeneousMap::binary(&[1, 0, 0], &[0, 0, 1]).unwrap();
        let s = EquilibriumSampler::new(&f, 21).unwrap();
        let k = estimate_kappa(&s, 50_000, 5).unwrap();
        (s, k)
    }

    #[test]
    fn single_cube_is_heaviest() {
        let (s, k) = setup();
        let fam = disjoint_cubes(&s, 1, 2, &k).unwrap();
        assert_eq!(fam.indices.len(), 1);
        assert!(fam.dilated_disjoint());
        assert!(fam.masses[0] >= fam.equal_share);
    }

    #[test]
    fn eight_cubes_on_the_circle() {
        let (s, k) = setup();
        for dilate in [2u32, 3] {
            let fam = disjoint_cubes(&s, 8, dilate, &k).unwrap();
            assert_eq!(fam.centers.len(), 8);
            assert!(fam.dilated_disjoint());
            for (c, m) in fam.centers.iter().zip(&fam.masses) {
                assert!((c.norm() - 1.0).abs() <= fam.side * std::f64::consts::SQRT_2);
                assert!(*m >= 0.5 * fam.equal_share);
            }
            for (i, a) in fam.centers.iter().enumerate() {
                for b in &fam.centers[i + 1..] {
                    let dist = (a.re - b.re).abs().max((a.im - b.im).abs());
                    assert!(dist >= (dilate as f64 - 1e-9) * fam.side);
                }
            }
        }
    }

    #[test]
    fn too_many_cubes_fails() {
        let (s, k) = setup();
        let cfg = CubeConfig { c_prime: 1.0, n_samples: 2_000 };
        assert!(matches!(
            disjoint_cubes_with(&s, 64, 5000, &k, cfg),
            Err(Error::ConstructionFailed(_))
        ));
    }
}
