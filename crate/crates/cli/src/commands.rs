use crate::out::{emit, Header, F};
use crate::{BergmanArgs, ChiArgs, Convention, Degrees, GreenArgs, HeightArgs, MeasureArgs, PerArgs, RateArgs, ScanArgs};
use equilab_core::bergman::{self, ExponentConvention, MetricModel};
use equilab_core::canbasis::chi_lower_bound;
use equilab_core::dyncore::{HomogeneousMap, ProjPointQ};
use equilab_core::equid::{rate_fit_with, reference_integral, small_point_scan, HeightCloud};
use equilab_core::heights::{BadPrime, Heights};
use equilab_core::measure::EquilibriumSampler;
use equilab_core::periodic::{galois_degrees, galois_orbits, min_poly_degrees, per_n, DegreeMode};
use equilab_core::testfn::{home_chart, SmoothTestFn};
use equilab_core::Error;
use num_bigint::{BigInt, BigUint};
use std::fmt::Write as _;
use std::path::Path;

pub enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

type Res = Result<(), CliError>;

fn load_map(path: &Path) -> Result<HomogeneousMap, CliError> {
    HomogeneousMap::from_file(path).map_err(|e| CliError::Usage(format!("cannot load map {}: {e}", path.display())))
}

fn parse_fn(spec: &str) -> Result<SmoothTestFn, CliError> {
    SmoothTestFn::parse(spec).map_err(|e| CliError::Usage(format!("bad test function `{spec}`: {e}")))
}

fn parse_point(s: &str) -> Result<ProjPointQ, CliError> {
    let coords: Vec<BigInt> = s
        .split(',')
        .map(|t| t.trim().parse::<BigInt>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bad point `{s}`; expected integers `a,b[,c]`")))?;
    ProjPointQ::new(coords).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_bad_primes(s: &str) -> Result<Vec<BadPrime>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (p, e) = t.split_once(':').unwrap_or((t, "1"));
            let p: BigUint = p.trim().parse().map_err(|_| CliError::Usage(format!("bad prime `{t}`")))?;
            let e: u32 = e.trim().parse().map_err(|_| CliError::Usage(format!("bad exponent in `{t}`")))?;
            Ok(BadPrime { p, max_drop: e })
        })
        .collect()
}

fn map_header(h: &mut Header, path: &Path, map: &HomogeneousMap) {
    h.push("map", path.display());
    h.push("map_spec", map.to_spec().trim_end());
}

pub fn height(a: &HeightArgs) -> Res {
    let map = load_map(&a.map)?;
    let x = parse_point(&a.point)?;
    let hs = match &a.bad_primes {
        Some(s) => Heights::with_bad_primes(&map, parse_bad_primes(s)?)?,
        None => Heights::new(&map)?,
    };
    let v = hs.canonical_height(&x, a.error)?;
    let mut h = Header::new("height");
    map_header(&mut h, &a.map, &map);
    h.push("point", &a.point).push("target_error", F(a.error));
    if let Some(c) = &v.cross_check {
        h.push("cross_check_n", c.n)
            .push("cross_check_value", F(c.value))
            .push("cross_check_bound", F(c.bound))
            .push("cross_check_agrees", c.agrees);
    }
    let mut body = String::from("place,value,error_radius,iterations,certified\n");
    for (place, g) in &v.per_place {
        let _ = writeln!(body, "{place},{},{},{},{}", F(g.value), F(g.error_radius), g.iterations, g.certified);
    }
    let _ = writeln!(body, "total,{},{},,", F(v.value), F(v.error_radius));
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}

pub fn green(a: &GreenArgs) -> Res {
    let map = load_map(&a.map)?;
    let x = parse_point(&a.point)?;
    let hs = if map.dim() == 1 { Heights::new(&map)? } else { Heights::with_bad_primes(&map, Vec::new())? };
    let g = if a.place == "inf" {
        let mut g = hs.green_arch(&x.to_complex(), a.m)?;
        // value for the integer lift rather than the unit-normalized one
        g.value += x.log_max_abs();
        g
    } else {
        let p: BigUint = a.place.parse().map_err(|_| CliError::Usage(format!("bad place `{}`", a.place)))?;
        hs.green_padic(&x, &p, a.m)?
    };
    let mut h = Header::new("green");
    map_header(&mut h, &a.map, &map);
    h.push("point", &a.point).push("place", &a.place).push("m", a.m);
    let body = format!(
        "place,value,error_radius,iterations,certified\n{},{},{},{},{}\n",
        g.place, F(g.value), F(g.error_radius), g.iterations, g.certified
    );
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}

pub fn measure(a: &MeasureArgs) -> Res {
    let map = load_map(&a.map)?;
    let s = EquilibriumSampler::new(&map, a.seed)?.with_burn_in(a.burn_in).with_walk_len(a.walk_len);
    let rep = s.sample_with_report(a.samples)?;
    let mut h = Header::new("measure");
    map_header(&mut h, &a.map, &map);
    h.push("samples", a.samples)
        .push("seed", a.seed)
        .push("burn_in", a.burn_in)
        .push("walk_len", a.walk_len)
        .push("retries", rep.retries);
    let mut body = String::from("re,im,chart\n");
    for p in &rep.cloud.points {
        let (c, w) = home_chart(p)?;
        let _ = writeln!(body, "{},{},{c}", F(w.re), F(w.im));
    }
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}

pub fn per(a: &PerArgs) -> Res {
    let map = load_map(&a.map)?;
    let set = per_n(&map, a.n)?;
    let mode = match a.degrees {
        Degrees::Certified => DegreeMode::Certified,
        Degrees::Fast => DegreeMode::Fast,
    };
    let prof = galois_degrees(&map, a.n, mode)?;
    let degs = prof.factors.as_ref().map(|f| min_poly_degrees(&set, f));
    let mut h = Header::new("per");
    map_header(&mut h, &a.map, &map);
    let multiset: Vec<String> = prof.degree_multiset.iter().map(|(d, m)| format!("{d}^{m}")).collect();
    h.push("n", a.n)
        .push("degrees", if prof.certified { "certified" } else { "fast" })
        .push("points", set.len())
        .push("factor_degrees", multiset.join(" "))
        .push("multiplicity_free", set.multiplicity_free);
    let mut body = String::from("re,im,is_infinity,min_poly_degree\n");
    for (i, p) in set.points.points.iter().enumerate() {
        let d = degs.as_ref().map_or("NA".to_string(), |v| v[i].to_string());
        match p.z() {
            Some(z) => {
                let _ = writeln!(body, "{},{},0,{d}", F(z.re), F(z.im));
            }
            None => {
                let _ = writeln!(body, "0,0,1,{d}");
            }
        }
    }
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}

pub fn rate(a: &RateArgs) -> Res {
    let map = load_map(&a.map)?;
    let f = parse_fn(&a.func)?;
    if a.nmin == 0 || a.nmin > a.nmax {
        return Err(CliError::Usage("need 1 <= nmin <= nmax".into()));
    }
    let s = EquilibriumSampler::new(&map, a.seed)?;
    let fit = rate_fit_with(&map, &f, a.nmin..=a.nmax, &s, a.samples)?;
    let mut h = Header::new("rate");
    map_header(&mut h, &a.map, &map);
    h.push("fn", &f)
        .push("nmin", a.nmin)
        .push("nmax", a.nmax)
        .push("seed", a.seed)
        .push("samples", a.samples)
        .push("integral", F(fit.integral.value))
        .push("integral_std_error", F(fit.integral.std_error));
    let mut body = String::from("n,set_size,discrepancy,noise_floor,used_in_fit\n");
    for r in &fit.rows {
        let _ = writeln!(body, "{},{},{},{},{}", r.n, r.set_size, F(r.discrepancy), F(r.noise_floor), r.used_in_fit);
    }
    let _ = writeln!(body, "lambda_hat,r2\n{},{}", F(fit.lambda_hat), F(fit.r_squared));
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}

pub fn scan(a: &ScanArgs) -> Res {
    let map = load_map(&a.map)?;
    let f = parse_fn(&a.func)?;
    if a.nmin == 0 || a.nmin > a.nmax {
        return Err(CliError::Usage("need 1 <= nmin <= nmax".into()));
    }
    let s = EquilibriumSampler::new(&map, a.seed)?;
    let integral = reference_integral(&map, &f, &s, a.samples)?;
    let mut clouds = Vec::new();
    for n in a.nmin..=a.nmax {
        for cloud in galois_orbits(&map, n)? {
            // periodic points have canonical height 0
            clouds.push(HeightCloud { cloud, height_bound: 0.0 });
        }
    }
    let rep = small_point_scan(&f, &clouds, &integral, a.eps, a.c3)?;
    let mut h = Header::new("scan");
    map_header(&mut h, &a.map, &map);
    h.push("fn", &f)
        .push("nmin", a.nmin)
        .push("nmax", a.nmax)
        .push("eps", F(a.eps))
        .push("c3", F(a.c3))
        .push("seed", a.seed)
        .push("samples", a.samples)
        .push("integral", F(integral.value))
        .push("integral_std_error", F(integral.std_error))
        .push("c_f3", F(rep.c_f3))
        .push("violators_raw", rep.violators_raw)
        .push("violators_normalized", rep.violators_normalized);
    let mut body =
        String::from("label,set_size,average,discrepancy,height_bound,budget,violates_raw,violates_normalized\n");
    for r in &rep.records {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{}",
            r.record.label,
            r.record.set_size,
            F(r.record.average),
            F(r.record.discrepancy),
            F(r.record.height_bound.unwrap_or(f64::NAN)),
            F(r.budget),
            r.violates_raw,
            r.violates_normalized
        );
    }
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}

pub fn bergman(a: &BergmanArgs) -> Res {
    let metric = match &a.func {
        None => MetricModel::fubini_study(a.n),
        Some(spec) => {
            let conv = match a.convention {
                Convention::Unit => ExponentConvention::Unit,
                Convention::Tensor => ExponentConvention::TensorPower,
            };
            MetricModel::perturbed_with(a.n, parse_fn(spec)?, a.eps, conv)
        }
    };
    if a.grid == 0 {
        return Err(CliError::Usage("grid must be positive".into()));
    }
    let space = bergman::gram_auto(&metric)?;
    let pts = bergman::sphere_grid(a.grid);
    let k = bergman::bergman_kernel(&space, &pts)?;
    let integral = bergman::kernel_integral(&space)?;
    let kmin = k.iter().cloned().fold(f64::INFINITY, f64::min);
    let kmax = k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut h = Header::new("bergman");
    h.push("n", a.n)
        .push("fn", a.func.as_deref().unwrap_or("none (Fubini-Study)"))
        .push("eps", F(a.eps))
        .push("convention", match a.convention {
            Convention::Unit => "unit",
            Convention::Tensor => "tensor",
        })
        .push("grid", a.grid)
        .push("quadrature", format!("{}x{}", space.quadrature.0, space.quadrature.1))
        .push("kernel_integral", F(integral))
        .push("kernel_min", F(kmin))
        .push("kernel_max", F(kmax))
        .push("sup_inf_ratio", F(kmax / kmin));
    let mut body = String::from("re,im,kernel\n");
    for (p, v) in pts.iter().zip(&k) {
        let z = p.z().expect("grid avoids infinity");
        let _ = writeln!(body, "{},{},{}", F(z.re), F(z.im), F(*v));
    }
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}

pub fn chi(a: &ChiArgs) -> Res {
    let map = load_map(&a.map)?;
    let m = a.m.unwrap_or(a.n / 2);
    let r = chi_lower_bound(&map, a.n, m, a.grid)?;
    let mut h = Header::new("chi");
    map_header(&mut h, &a.map, &map);
    h.push("n", a.n).push("m", m).push("grid", a.grid);
    let mut body = String::new();
    let opt = |o: Option<(f64, f64)>| o.map_or("NA".to_string(), |(lo, hi)| format!("{},{}", F(lo), F(hi)));
    let _ = writeln!(body, "dimension: {}", r.dimension);
    let _ = writeln!(body, "spanning_size: {}", r.spanning_size);
    let _ = writeln!(body, "chosen: {:?}", r.lattice.chosen);
    let _ = writeln!(body, "determinant: {}", r.lattice.determinant);
    let _ = writeln!(body, "log_covolume: {}", F(r.log_covolume));
    let _ = writeln!(body, "max_log_sup_arch: {}", F(r.max_log_sup_arch));
    let _ = writeln!(body, "padic_total: {}", F(r.padic_total));
    let _ = writeln!(body, "budget: {}", F(r.budget));
    let _ = writeln!(body, "grid_slack: {}", F(r.grid_slack));
    let _ = writeln!(body, "sup_within_budget: {}", r.sup_within_budget);
    let _ = writeln!(body, "c_empirical: {}", F(r.c_empirical));
    let _ = writeln!(body, "c_empirical_note: measured for this lift; rescaling the lift changes it");
    let _ = writeln!(body, "chi_lower: {}", F(r.chi_lower));
    let _ = writeln!(body, "log_vol_sup_ball_bounds: {}", opt(r.log_vol_sup_ball_bounds));
    let _ = writeln!(body, "chi_direct: {}", opt(r.chi_direct));
    let _ = writeln!(body, "\nindex,eta_x,eta_y,a,b,log_sup_arch,budget_arch,log_sup_padic");
    for e in &r.decomposition {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{}",
            e.index, e.eta.0, e.eta.1, e.g.0, e.g.1, F(e.log_sup_arch), F(e.budget_arch), F(e.log_sup_padic)
        );
    }
    emit(a.out.as_deref(), &h, &body)?;
    Ok(())
}
