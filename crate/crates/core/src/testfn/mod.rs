//! Smooth test functions on P^1 in the two-chart atlas, their order-3 jets and
//! chart-wise C^k norms, plus the disjoint-cube construction.
//!
//! Chart 0 is the affine coordinate `z = x / y`, chart 1 is `w = y / x = 1 / z`.
//! Each chart is a biholomorphism onto the radius-3 disc; the unit discs cover
//! P^1. A test function is a finite sum of profiles, each living in one chart;
//! evaluating it in the other chart composes with `w -> 1/w` in jet arithmetic.

mod cubes;
pub mod jet;

pub use cubes::{disjoint_cubes, disjoint_cubes_with, CubeConfig, CubeFamily};
pub use jet::{Jet, Scalar};

use crate::dyncore::ProjPointC;
use crate::error::{Error, Result};
use jet::smooth_step;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt;

/// Radius of each chart's polydisc.
pub const CHART_RADIUS: f64 = 3.0;
/// Radius of the disc over which C^k norms take their sup.
pub const NORM_RADIUS: f64 = 2.0;
/// Default grid resolution per axis for chart sup norms.
pub const DEFAULT_NORM_GRID: usize = 201;

/// The fixed two-chart atlas of P^1.
#[derive(Clone, Copy, Debug, Default)]
pub struct GoodChartAtlas;

impl GoodChartAtlas {
    pub fn p1() -> Self {
        GoodChartAtlas
    }

    pub fn chart_count(&self) -> usize {
        2
    }

    /// Chart coordinate of p, `None` if p is the point the chart misses.
    pub fn to_chart(&self, p: &ProjPointC, chart: usize) -> Option<Complex64> {
        chart_coord(p, chart)
    }

    pub fn from_chart(&self, chart: usize, w: Complex64) -> ProjPointC {
        let one = Complex64::new(1.0, 0.0);
        let coords = if chart == 0 { vec![w, one] } else { vec![one, w] };
        ProjPointC::new(coords).expect("chart points are finite")
    }

    /// Check on a latitude/longitude grid of the sphere that every point lies in
    /// the unit disc of some chart.
    pub fn covering_certificate(&self, grid: usize) -> bool {
        (0..=grid).all(|i| {
            let theta = std::f64::consts::PI * i as f64 / grid as f64;
            (0..grid).all(|j| {
                let phi = std::f64::consts::TAU * j as f64 / grid as f64;
                // stereographic preimage: z = cot(theta/2) e^{i phi}
                let (s, c) = (theta / 2.0).sin_cos();
                let p = ProjPointC::new(vec![Complex64::from_polar(c, phi), Complex64::new(s, 0.0)]).unwrap();
                (0..2).any(|k| chart_coord(&p, k).is_some_and(|w| w.norm() <= 1.0 + 1e-12))
            })
        })
    }
}

/// Coordinate of p in chart 0 (`x/y`) or chart 1 (`y/x`).
pub fn chart_coord(p: &ProjPointC, chart: usize) -> Option<Complex64> {
    let (num, den) = if chart == 0 { (p.coords[0], p.coords[1]) } else { (p.coords[1], p.coords[0]) };
    if den == Complex64::new(0.0, 0.0) {
        None
    } else {
        Some(num / den)
    }
}

/// The chart in which p has coordinate of modulus at most 1.
pub fn home_chart(p: &ProjPointC) -> Result<(usize, Complex64)> {
    if p.coords.len() != 2 || p.coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::ChartMiss);
    }
    let chart = if p.coords[1].norm() >= p.coords[0].norm() { 0 } else { 1 };
    let w = chart_coord(p, chart).ok_or(Error::ChartMiss)?;
    if w.norm() > NORM_RADIUS {
        return Err(Error::ChartMiss);
    }
    Ok((chart, w))
}

/// A single localized shape in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// 1 on the square of half-side `inner` around the center, 0 outside half-side `outer`.
    Bump { cx: f64, cy: f64, inner: f64, outer: f64 },
    /// `A(r) r^power sum_k (a_k cos k theta + b_k sin k theta)` with `A` a smooth
    /// plateau equal to 1 on `[r1, r2]` and vanishing outside `(r0, r3)`.
    Annulus { radii: [f64; 4], power: u32, modes: Vec<(u32, f64, f64)> },
}

impl Profile {
    fn eval<S: Scalar>(&self, u: S, v: S) -> S {
        match self {
            Profile::Constant(c) => S::cst(*c),
            Profile::Bump { cx, cy, inner, outer } => {
                let w = outer - inner;
                let tx = (S::cst(*outer) - (u - S::cst(*cx)).abs()) / S::cst(w);
                let sx = smooth_step(tx);
                if sx.val() == 0.0 {
                    return S::cst(0.0);
                }
                let ty = (S::cst(*outer) - (v - S::cst(*cy)).abs()) / S::cst(w);
                sx * smooth_step(ty)
            }
            Profile::Annulus { radii: [r0, r1, r2, r3], power, modes } => {
                let r2sq = u * u + v * v;
                let rv = r2sq.val().sqrt();
                if rv <= *r0 || rv >= *r3 {
                    return S::cst(0.0);
                }
                let r = r2sq.sqrt();
                let inner = smooth_step((r - S::cst(*r0)) / S::cst(r1 - r0));
                let outer = smooth_step((S::cst(*r3) - r) / S::cst(r3 - r2));
                let plateau = inner * outer;
                if plateau.val() == 0.0 {
                    return S::cst(0.0);
                }
                let kmax = modes.iter().map(|m| m.0).max().unwrap_or(0);
                // powers of (u + iv) / r give cos k theta + i sin k theta
                let (cu, cv) = (u / r, v / r);
                let mut re = S::cst(1.0);
                let mut im = S::cst(0.0);
                let mut angular = S::cst(0.0);
                for k in 0..=kmax {
                    for &(mk, a, b) in modes {
                        if mk == k {
                            angular = angular + re * S::cst(a) + im * S::cst(b);
                        }
                    }
                    let nre = re * cu - im * cv;
                    let nim = re * cv + im * cu;
                    re = nre;
                    im = nim;
                }
                let mut radial = S::cst(1.0);
                for _ in 0..*power {
                    radial = radial * r;
                }
                plateau * radial * angular
            }
        }
    }

    /// Closed box `[x0, x1] x [y0, y1]` in chart coordinates containing the support.
    pub fn support_box(&self) -> Option<[f64; 4]> {
        match self {
            Profile::Constant(_) => None,
            Profile::Bump { cx, cy, outer, .. } => Some([cx - outer, cx + outer, cy - outer, cy + outer]),
            Profile::Annulus { radii, .. } => Some([-radii[3], radii[3], -radii[3], radii[3]]),
        }
    }
}

/// One chart-local summand `coeff * profile`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub chart: usize,
    pub coeff: f64,
    pub profile: Profile,
}

/// A smooth function on P^1 given as a sum of chart-local profiles.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothTestFn {
    pub terms: Vec<Term>,
}

fn check_chart(chart: usize) -> Result<()> {
    if chart > 1 {
        return Err(Error::InvalidArgument(format!("chart index {chart} out of range (0 or 1)")));
    }
    Ok(())
}

impl SmoothTestFn {
    pub fn zero() -> Self {
        SmoothTestFn { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        SmoothTestFn { terms: vec![Term { chart: 0, coeff: 1.0, profile: Profile::Constant(c) }] }
    }

    /// Box bump around `center` in the given chart.
    pub fn bump(chart: usize, center: Complex64, inner: f64, outer: f64) -> Result<Self> {
        check_chart(chart)?;
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::InvalidArgument(format!("bump needs 0 < inner < outer, got {inner}, {outer}")));
        }
        if center.norm() + outer * std::f64::consts::SQRT_2 > NORM_RADIUS {
            return Err(Error::InvalidGeometry(format!(
                "outer box around {center} of half-side {outer} leaves the radius-2 disc"
            )));
        }
        Ok(SmoothTestFn {
            terms: vec![Term {
                chart,
                coeff: 1.0,
                profile: Profile::Bump { cx: center.re, cy: center.im, inner, outer },
            }],
        })
    }

    /// Localized Fourier profile on an annulus of the given chart.
    pub fn annulus(chart: usize, radii: [f64; 4], power: u32, modes: Vec<(u32, f64, f64)>) -> Result<Self> {
        check_chart(chart)?;
        let [r0, r1, r2, r3] = radii;
        if !(0.0 <= r0 && r0 < r1 && r1 <= r2 && r2 < r3) {
            return Err(Error::InvalidArgument(format!("annulus radii must satisfy 0 <= r0 < r1 <= r2 < r3: {radii:?}")));
        }
        if r3 > NORM_RADIUS {
            return Err(Error::InvalidGeometry(format!("annulus outer radius {r3} leaves the radius-2 disc")));
        }
        Ok(SmoothTestFn { terms: vec![Term { chart, coeff: 1.0, profile: Profile::Annulus { radii, power, modes } }] })
    }

    pub fn plus(mut self, other: SmoothTestFn) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.coeff *= s);
        self
    }

    /// Constant value if every term is constant.
    pub fn as_constant(&self) -> Option<f64> {
        self.terms
            .iter()
            .map(|t| match t.profile {
                Profile::Constant(c) => Some(t.coeff * c),
                _ => None,
            })
            .sum()
    }

    fn term_value(t: &Term, p: &ProjPointC) -> f64 {
        match &t.profile {
            Profile::Constant(c) => t.coeff * c,
            prof => match chart_coord(p, t.chart) {
                None => 0.0,
                Some(w) if !w.re.is_finite() || !w.im.is_finite() => 0.0,
                Some(w) => t.coeff * prof.eval(w.re, w.im),
            },
        }
    }

    /// Value at a projective point.
    pub fn eval(&self, p: &ProjPointC) -> f64 {
        self.terms.iter().map(|t| Self::term_value(t, p)).sum()
    }

    /// Value at the affine point z of chart 0.
    pub fn eval_z(&self, z: Complex64) -> f64 {
        self.eval(&ProjPointC::affine(z))
    }

    /// Value at chart coordinate w of the given chart.
    pub fn eval_in_chart(&self, chart: usize, w: Complex64) -> f64 {
        self.jet_generic::<f64>(chart, w.re, w.im)
    }

    /// Order-3 jet in the real coordinates of the given chart at w.
    pub fn jet(&self, chart: usize, w: Complex64) -> Jet {
        self.jet_generic::<Jet>(chart, w.re, w.im)
    }

    fn jet_generic<S: Scalar>(&self, chart: usize, u0: f64, v0: f64) -> S
    where
        S: VarSeed,
    {
        let (u, v) = S::vars(u0, v0);
        let mut acc = S::cst(0.0);
        for t in &self.terms {
            let val = if let Profile::Constant(c) = t.profile {
                S::cst(c)
            } else if t.chart == chart {
                t.profile.eval(u, v)
            } else if u0 == 0.0 && v0 == 0.0 {
                S::cst(0.0)
            } else {
                let den = u * u + v * v;
                t.profile.eval(u / den, -v / den)
            };
            acc = acc + val * S::cst(t.coeff);
        }
        acc
    }

    /// Parse a `+`-separated list of terms such as
    /// `bump:chart=0,cx=1.0,cy=0.0,inner=0.2,outer=0.4`, `const:c=5` or
    /// `annulus:chart=0,r0=0.5,r1=0.8,r2=1.25,r3=1.6,power=0,modes=0/0.5/0;1/0.5/0`.
    /// Each term accepts an optional `coef=` multiplier.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut cur = String::new();
        let chars: Vec<char> = spec.chars().collect();
        for (i, &ch) in chars.iter().enumerate() {
            if ch == '+' && chars.get(i + 1).is_some_and(|c| c.is_ascii_alphabetic()) {
                pieces.push(std::mem::take(&mut cur));
            } else {
                cur.push(ch);
            }
        }
        pieces.push(cur);
        let mut out = SmoothTestFn::zero();
        for piece in pieces {
            out = out.plus(parse_term(piece.trim())?);
        }
        Ok(out)
    }
}

/// Seeds the coordinate variables for plain values and jets.
pub trait VarSeed: Scalar {
    fn vars(u0: f64, v0: f64) -> (Self, Self);
}

impl VarSeed for f64 {
    fn vars(u0: f64, v0: f64) -> (Self, Self) {
        (u0, v0)
    }
}

impl VarSeed for Jet {
    fn vars(u0: f64, v0: f64) -> (Self, Self) {
        Jet::variables(u0, v0)
    }
}

fn bad_spec(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(format!("test function spec: {}", msg.into()))
}

fn parse_term(s: &str) -> Result<SmoothTestFn> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut kv = std::collections::BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| bad_spec(format!("expected key=value, got '{part}'")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let num = |key: &str, default: Option<f64>| -> Result<f64> {
        match kv.get(key) {
            Some(v) => v.parse::<f64>().map_err(|_| bad_spec(format!("bad number for {key}: '{v}'"))),
            None => default.ok_or_else(|| bad_spec(format!("missing key {key}"))),
        }
    };
    let chart = num("chart", Some(0.0))? as usize;
    let coef = num("coef", Some(1.0))?;
    let allowed: &[&str] = match kind.trim() {
        "const" => &["c", "coef", "chart"],
        "bump" => &["chart", "cx", "cy", "inner", "outer", "coef"],
        "annulus" => &["chart", "r0", "r1", "r2", "r3", "power", "modes", "coef"],
        other => return Err(bad_spec(format!("unknown kind '{other}'"))),
    };
    if let Some(k) = kv.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(bad_spec(format!("unknown key '{k}' for {kind}")));
    }
    let f = match kind.trim() {
        "const" => SmoothTestFn::constant(num("c", None)?),
        "bump" => SmoothTestFn::bump(
            chart,
            Complex64::new(num("cx", Some(0.0))?, num("cy", Some(0.0))?),
            num("inner", None)?,
            num("outer", None)?,
        )?,
        _ => {
            let radii = [num("r0", None)?, num("r1", None)?, num("r2", None)?, num("r3", None)?];
            let power = num("power", Some(0.0))? as u32;
            let mut modes = Vec::new();
            if let Some(m) = kv.get("modes") {
                for mode in m.split(';').filter(|x| !x.is_empty()) {
                    let f: Vec<&str> = mode.split('/').collect();
                    if f.len() != 3 {
                        return Err(bad_spec(format!("mode '{mode}' must be k/a/b")));
                    }
                    let k = f[0].parse::<u32>().map_err(|_| bad_spec(format!("bad mode index '{}'", f[0])))?;
                    let a = f[1].parse::<f64>().map_err(|_| bad_spec(format!("bad cos coefficient '{}'", f[1])))?;
                    let b = f[2].parse::<f64>().map_err(|_| bad_spec(format!("bad sin coefficient '{}'", f[2])))?;
                    modes.push((k, a, b));
                }
            } else {
                modes.push((0, 1.0, 0.0));
            }
            SmoothTestFn::annulus(chart, radii, power, modes)?
        }
    };
    Ok(f.scaled(coef))
}

impl fmt::Display for SmoothTestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "const:c=0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            match &t.profile {
                Profile::Constant(c) => write!(f, "const:c={c}")?,
                Profile::Bump { cx, cy, inner, outer } => {
                    write!(f, "bump:chart={},cx={cx},cy={cy},inner={inner},outer={outer}", t.chart)?
                }
                Profile::Annulus { radii, power, modes } => {
                    let ms: Vec<String> = modes.iter().map(|(k, a, b)| format!("{k}/{a}/{b}")).collect();
                    write!(
                        f,
                        "annulus:chart={},r0={},r1={},r2={},r3={},power={power},modes={}",
                        t.chart,
                        radii[0],
                        radii[1],
                        radii[2],
                        radii[3],
                        ms.join(";")
                    )?
                }
            }
            if t.coeff != 1.0 {
                write!(f, ",coef={}", t.coeff)?;
            }
        }
        Ok(())
    }
}

/// `c_{f,k}`: one plus the sum over charts and multi-indices of order at most k
/// of the grid sup of `|d^alpha f|` on `|w| <= 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CkNorm {
    pub k: usize,
    pub value: f64,
}

pub fn ck_norm(f: &SmoothTestFn, k: usize) -> Result<CkNorm> {
    ck_norm_with_grid(f, k, DEFAULT_NORM_GRID)
}

pub fn ck_norm_with_grid(f: &SmoothTestFn, k: usize, grid: usize) -> Result<CkNorm> {
    if k > 3 {
        return Err(Error::InvalidArgument(format!("C^k norms need k <= 3, got {k}")));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("norm grid needs at least 2 points per axis".into()));
    }
    let h = 2.0 * NORM_RADIUS / (grid - 1) as f64;
    let nidx = jet::INDICES.iter().filter(|(i, j)| i + j <= k).count();
    let mut total = 1.0;
    for chart in 0..2 {
        let sups = (0..grid)
            .into_par_iter()
            .map(|i| {
                let u = -NORM_RADIUS + i as f64 * h;
                let mut row = [0.0f64; 10];
                for j in 0..grid {
                    let v = -NORM_RADIUS + j as f64 * h;
                    if u * u + v * v > NORM_RADIUS * NORM_RADIUS * (1.0 + 1e-12) {
                        continue;
                    }
                    let p = f.jet(chart, Complex64::new(u, v)).partials();
                    for (r, x) in row.iter_mut().zip(p).take(nidx) {
                        *r = r.max(x.abs());
                    }
                }
                row
            })
            .reduce(
                || [0.0; 10],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x = x.max(y));
                    a
                },
            );
        total += sups[..nidx].iter().sum::<f64>();
    }
    Ok(CkNorm { k, value: total })
}
