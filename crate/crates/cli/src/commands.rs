use anyhow::{anyhow, bail, Result};
use hypergeo::cfunc::{c_normalized, c_upper, c_yang, CFunctionValue, SpectralPoint};
use hypergeo::linalg::{parse_rational, rat, Rat};
use hypergeo::plancherel::{norm_formula_check, plancherel_verify, PlancherelConfig, Smoothness, TestFunction};
use hypergeo::quadrature::{volume_check, QuadratureConfig};
use hypergeo::residual::{
    cuspidal_families, cuspidal_points, eigenvalue_ref, eigenvalues_separated, enumerate_residual, growth_classify, CuspidalFamily,
    ResidualSubspace,
};
use hypergeo::series::verify_simultaneous_eigen;
use hypergeo::weights::{check_integrability, rho, rho_f};
use hypergeo::{Error, Multiplicity, RootSystem};
use num::complex::Complex64;
use serde_json::{json, Value};

use crate::cache::SeriesCache;
use crate::config::{parse_complex, parse_multiplicity, RunConfig};
use crate::output::{flag, num, Report};

fn rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(|q| q.to_string()).collect()
}

fn joined(v: &[Rat]) -> String {
    rats(v).join(" ")
}

fn k_label(k: &Multiplicity) -> String {
    joined(k.values())
}

fn quad_config(cfg: &RunConfig, tol: f64) -> QuadratureConfig {
    let mut q = QuadratureConfig { tol, t_max: cfg.t_max, ..Default::default() };
    if let Some(n) = cfg.nodes {
        q.nodes = n;
    }
    q
}

fn require_regime(rs: &RootSystem, k: &Multiplicity) -> Result<()> {
    if !check_integrability(rs, k).condition_1_6 {
        bail!(Error::Contract(format!("k = ({}) violates the integrability condition on {}{}", k_label(k), rs.family, rs.rank)));
    }
    Ok(())
}

pub fn roots(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let mut r = Report::new("roots", vec!["index", "simple_coords", "positive", "orbit", "length2_reference"]);
    let orbits = rs.orbit_data().orbits;
    for i in 0..rs.num_roots() {
        let orbit = orbits.iter().position(|o| o.contains(&i)).unwrap_or(0);
        let rr = rs.root_rat(i);
        r.rows.push(vec![
            i.to_string(),
            rs.root(i).iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            flag(i < rs.num_roots() / 2),
            orbit.to_string(),
            rs.inner_ref(&rr, &rr).to_string(),
        ]);
    }
    if let Value::Object(m) = rs.to_json() {
        r.summary = m;
    }
    r.set("num_roots", rs.num_roots());
    Ok(r)
}

pub fn volume(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let k = cfg.multiplicity(&rs)?;
    let tol = cfg.tol.unwrap_or(if rs.rank == 1 { 1e-6 } else { 1e-3 });
    let q = volume_check(&rs, &k, &quad_config(cfg, (tol * 1e-2).clamp(1e-10, 1e-6)))?;
    let mut r = Report::new(
        "volume",
        vec!["family", "rank", "k", "closed_form", "quadrature", "rel_err", "error_estimate", "tolerance", "pass"],
    );
    let ok = r.check(q.rel_err <= tol, || format!("relative error {:e} exceeds {tol:e}", q.rel_err));
    r.rows.push(vec![
        rs.family.to_string(),
        rs.rank.to_string(),
        k_label(&k),
        num(q.formula),
        num(q.quadrature),
        num(q.rel_err),
        num(q.error_estimate),
        num(tol),
        flag(ok),
    ]);
    r.set("closed_form", q.formula);
    r.set("quadrature", q.quadrature);
    r.set("rel_err", q.rel_err);
    r.set("mismatch", q.rel_err);
    r.set("error_estimate", q.error_estimate);
    r.set("tolerance", tol);
    Ok(r)
}

fn parse_lambda(rs: &RootSystem, s: &[String]) -> Result<SpectralPoint> {
    let coords: Vec<Complex64> = s.iter().map(|t| parse_complex(t)).collect::<Result<_>>()?;
    if coords.len() != rs.rank {
        bail!(Error::Parse(format!("--lambda needs {} coordinates, got {}", rs.rank, coords.len())));
    }
    Ok(SpectralPoint::new(rs, coords))
}

fn cvalue(v: &CFunctionValue) -> Value {
    json!({ "re": v.value.re, "im": v.value.im, "flag": v.flag, "order": v.order })
}

pub fn eval_c(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let k = cfg.multiplicity(&rs)?;
    let l = parse_lambda(&rs, &cfg.lambda)?;
    let c = c_normalized(&rs, &l, &k)?;
    let y = c_yang(&rs, &l, &k);
    let u = c_upper(&rs, &l, &k)?;
    let tol = cfg.tol.unwrap_or(1e-12);
    let mut r = Report::new(
        "eval-c",
        vec!["lambda", "c_re", "c_im", "c_flag", "c_y_re", "c_y_im", "c_upper_re", "c_upper_im", "factorization_err", "tolerance", "pass"],
    );
    let err = if c.is_finite() && y.is_finite() && u.is_finite() { ((c.value - y.value * u.value) / c.value).norm() } else { 0.0 };
    let ok = r.check(err <= tol, || format!("c differs from c_Y c_upper by {err:e}"));
    r.rows.push(vec![
        cfg.lambda.join(" "),
        num(c.value.re),
        num(c.value.im),
        format!("{:?}", c.flag).to_lowercase(),
        num(y.value.re),
        num(y.value.im),
        num(u.value.re),
        num(u.value.im),
        num(err),
        num(tol),
        flag(ok),
    ]);
    r.set("lambda", &cfg.lambda);
    r.set("c", cvalue(&c));
    r.set("c_Y", cvalue(&y));
    r.set("c_upper", cvalue(&u));
    r.set("flags", json!({ "c": c.flag, "c_Y": y.flag, "c_upper": u.flag }));
    r.set("factorization_err", err);
    Ok(r)
}

pub fn eval_f(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let k = cfg.multiplicity(&rs)?;
    let l = parse_lambda(&rs, &cfg.lambda)?;
    if cfg.x.len() != rs.rank {
        bail!(Error::Parse(format!("--x needs {} coordinates, got {}", rs.rank, cfg.x.len())));
    }
    let tol = cfg.tol.unwrap_or(1e-12);
    let xc = hypergeo::series::to_negative_chamber(&rs, &cfg.x)?;
    let cache = SeriesCache::from_env();
    let max_cutoff = if rs.rank == 1 { 4096 } else if rs.rank == 2 { 256 } else { 64 };
    let mut cutoff = 16;
    let v = loop {
        let f = cache.hypergeometric(&rs, &k, &l, cutoff)?;
        match f.eval_chamber(&rs, &xc, tol) {
            Err(Error::WeylTerm { source, .. }) if matches!(*source, Error::IncreaseCutoff { .. }) && cutoff < max_cutoff => cutoff *= 2,
            other => break other?,
        }
    };
    let mut r = Report::new("eval-f", vec!["lambda", "x", "value_re", "value_im", "tail_estimate", "shells_used", "cutoff", "tolerance", "pass"]);
    let ok = r.check(v.tail_estimate <= tol * v.value.norm().max(1.0), || format!("tail estimate {:e} above tolerance", v.tail_estimate));
    r.rows.push(vec![
        cfg.lambda.join(" "),
        cfg.x.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "),
        num(v.value.re),
        num(v.value.im),
        num(v.tail_estimate),
        v.shells_used.to_string(),
        cutoff.to_string(),
        num(tol),
        flag(ok),
    ]);
    r.set("value", json!({ "re": v.value.re, "im": v.value.im }));
    r.set("tail_estimate", v.tail_estimate);
    r.set("shells_used", v.shells_used);
    r.set("cutoff", cutoff);
    Ok(r)
}

fn subspace_record(rs: &RootSystem, k: &Multiplicity, l: &ResidualSubspace) -> Value {
    json!({
        "dim": l.dim,
        "defining": l.defining(rs, k).iter().map(|(i, v)| json!({ "root": rs.root(*i), "value": v.to_string() })).collect::<Vec<_>>(),
        "center": rats(&l.center),
        "directions": l.directions.iter().map(|d| rats(d)).collect::<Vec<_>>(),
        "flags": {
            "residual": l.residual,
            "distinguished": l.distinguished,
            "cuspidal": l.cuspidal,
            "center_in_hull": l.center_in_hull,
            "center_bounded": l.center_bounded,
        },
        "gamma": l.gamma,
    })
}

pub fn residual_enumerate(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let k = cfg.multiplicity(&rs)?;
    let list = enumerate_residual(&rs, &k)?;
    let mut r = Report::new("residual-enumerate", vec!["index", "dim", "center", "defining", "gamma", "cuspidal", "center_in_hull", "pass"]);
    for (i, l) in list.iter().enumerate() {
        let ok = r.check(l.center_in_hull, || format!("center of subspace {i} outside the hull of W rho(k)"));
        let defining: Vec<String> = l.defining(&rs, &k).iter().map(|(j, v)| format!("{:?}={v}", rs.root(*j))).collect();
        r.rows.push(vec![
            i.to_string(),
            l.dim.to_string(),
            joined(&l.center),
            defining.join(" "),
            serde_json::to_value(&l.gamma)?.as_str().unwrap_or_default().to_string(),
            serde_json::to_value(&l.cuspidal)?.as_str().unwrap_or_default().to_string(),
            flag(l.center_in_hull),
            flag(ok),
        ]);
    }
    r.set("subspaces", list.iter().map(|l| subspace_record(&rs, &k, l)).collect::<Vec<_>>());
    r.set("count", list.len());
    Ok(r)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let fams = cuspidal_families(&rs)?;
    let mut r = Report::new("spectrum", vec!["index", "defining", "map", "r_z", "r_p", "sigma_lower", "sigma_upper", "sigma_witness"]);
    for (i, f) in fams.iter().enumerate() {
        let (lo, hi) = f.sigma_interval.clone().map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
        r.rows.push(vec![
            i.to_string(),
            f.defining.iter().map(|&j| format!("{:?}", rs.root(j))).collect::<Vec<_>>().join(" "),
            f.map.iter().map(|row| joined(row)).collect::<Vec<_>>().join("; "),
            f.r_z.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" "),
            f.r_p.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" "),
            lo,
            hi,
            f.sigma_witness.as_deref().map(joined).unwrap_or_default(),
        ]);
    }
    r.set("families", &fams);
    if !cfg.k.is_empty() {
        let k = cfg.multiplicity(&rs)?;
        let list = enumerate_residual(&rs, &k)?;
        let pts = cuspidal_points(&rs, &list);
        let mut at_k = Vec::new();
        for p in &pts {
            let g = growth_classify(&rs, &k, &SpectralPoint::from_rat(&rs, p));
            r.check(g.square_integrable, || format!("cuspidal point ({}) is not square-integrable", joined(p)));
            at_k.push(json!({ "point": rats(p), "eigenvalue_reference": eigenvalue_ref(&rs, &k, p).to_string(), "square_integrable": g.square_integrable }));
        }
        r.check(eigenvalues_separated(&rs, &k, &pts), || "cuspidal eigenvalues are not separated".into());
        r.set("points_at_k", at_k);
    }
    Ok(r)
}

pub fn plancherel_check(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let k = cfg.multiplicity(&rs)?;
    let f = TestFunction::new(cfg.center.unwrap_or(1.0), cfg.half_width.unwrap_or(0.5), Smoothness::Infinite)?;
    let tol = cfg.tol.unwrap_or(1e-3);
    let pc = PlancherelConfig { tol, ..Default::default() };
    let rep = plancherel_verify(&rs, &k, &f, &pc)?;
    let mut r = Report::new("plancherel-check", vec!["abs_lambda", "transform_sq", "density", "weighted_integrand", "pass"]);
    for &(l, t, d) in &rep.trace {
        r.rows.push(vec![num(l), num(t), num(d), num(t * d), flag(d >= 0.0)]);
    }
    r.check(rep.pass, || format!("mismatch {:e} exceeds {tol:e}", rep.mismatch));
    r.check((rep.consistency - 1.0).abs() <= 1e-6, || format!("discrete weight consistency {:e}", rep.consistency - 1.0));
    r.set("mismatch", rep.mismatch);
    r.set("tolerance", tol);
    r.set("test_function", f);
    r.set("report", &rep);
    Ok(r)
}

fn parse_grid(rs: &RootSystem, grid: &[String]) -> Result<Vec<Multiplicity>> {
    grid.iter().map(|g| parse_multiplicity(rs, &g.split(':').map(str::to_string).collect::<Vec<_>>())).collect()
}

fn rho_family<'a>(rs: &RootSystem, fams: &'a [CuspidalFamily]) -> Option<&'a CuspidalFamily> {
    let sample = Multiplicity::new(rs, (0..rs.num_orbits()).map(|o| rat(-1, 100 + o as i64)).collect()).ok()?;
    let r = rs.dominant(&rho(rs, &sample));
    fams.iter().find(|f| rs.dominant(&f.at(sample.values())) == r)
}

pub fn norm(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let grid = parse_grid(&rs, &cfg.grid)?;
    if grid.is_empty() {
        bail!(Error::Parse("--grid is empty".into()));
    }
    let fams = cuspidal_families(&rs)?;
    let fam = match cfg.family_index {
        Some(i) => fams.get(i).ok_or_else(|| anyhow!(Error::Parse(format!("no cuspidal family {i}"))))?,
        None => rho_family(&rs, &fams).ok_or_else(|| anyhow!("no rho(k) family"))?,
    };
    let tol = cfg.tol.unwrap_or(1e-4);
    let rep = norm_formula_check(&rs, fam, &grid, tol, &quad_config(cfg, 1e-6))?;
    let mut r = Report::new("norm", vec!["k", "lhs", "lhs_error", "rhs", "ratio", "tolerance", "pass"]);
    for p in &rep.points {
        let ok = (p.ratio.abs() - rep.constant).abs() <= tol * rep.constant;
        r.rows.push(vec![joined(&p.k), num(p.lhs), num(p.lhs_error), num(p.rhs), num(p.ratio), num(tol), flag(ok)]);
    }
    r.check(rep.pass, || format!("ratio spread {:e} or constant {} vs expected {:?}", rep.spread, rep.constant, rep.expected));
    r.set("mismatch", rep.spread);
    r.set("tolerance", tol);
    r.set("family", fam);
    r.set("report", &rep);
    Ok(r)
}

struct Check {
    name: &'static str,
    status: &'static str,
    value: f64,
    tolerance: f64,
    detail: String,
}

fn run_check(name: &'static str, tol: f64, f: impl FnOnce() -> Result<(f64, String)>) -> Check {
    match f() {
        Ok((v, detail)) => Check { name, status: if v <= tol { "pass" } else { "fail" }, value: v, tolerance: tol, detail },
        Err(e) => match e.downcast_ref::<Error>() {
            Some(Error::UnsupportedType(m)) => Check { name, status: "skipped", value: f64::NAN, tolerance: tol, detail: m.clone() },
            _ => Check { name, status: "fail", value: f64::NAN, tolerance: tol, detail: e.to_string() },
        },
    }
}

/// Multiplicities `s k` for the scale factors in `s`, kept if they satisfy
/// the family's region and the integrability condition.
fn norm_grid(rs: &RootSystem, fam: &CuspidalFamily, k: &Multiplicity) -> Vec<Multiplicity> {
    for scales in [[rat(3, 5), rat(1, 1), rat(7, 5)], [rat(4, 5), rat(1, 1), rat(6, 5)], [rat(9, 10), rat(1, 1), rat(11, 10)]] {
        let g: Vec<Multiplicity> = scales.iter().map(|s| k.scaled(s)).collect();
        if g.iter().all(|m| check_integrability(rs, m).condition_1_6 && fam.sigma.iter().all(|s| s.holds(m.values()))) {
            return g;
        }
    }
    Vec::new()
}

pub fn verify_all(cfg: &RunConfig) -> Result<Report> {
    let rs = cfg.root_system()?;
    let k = cfg.multiplicity(&rs)?;
    require_regime(&rs, &k)?;
    let n = rs.rank;
    let mut checks = Vec::new();

    checks.push(run_check("operator identity", 0.0, || {
        let lam: Vec<Rat> = (0..n).map(|i| rat(2 * i as i64 + 1, 7 + 4 * i as i64)).collect();
        let cutoff = if n <= 2 { 8 } else { 4 };
        let e = verify_simultaneous_eigen(&rs, &k, &lam, cutoff)?;
        Ok((e.nonzero_at.len() as f64, format!("termwise L(k) Phi residual through height {cutoff}, exact")))
    }));
    checks.push(run_check("c factorization", 1e-12, || {
        let mut worst = 0.0f64;
        let mut used = 0;
        for j in 0..200u64 {
            let coords: Vec<Complex64> = (0..n as u64)
                .map(|i| {
                    let a = ((j * 7 + i * 3) % 23) as f64 / 23.0;
                    let b = ((j * 5 + i * 13) % 29) as f64 / 29.0;
                    Complex64::new(6.0 * a - 3.0 + 0.01, 10.0 * b - 5.0 + 0.01)
                })
                .collect();
            let l = SpectralPoint::new(&rs, coords);
            let (c, y, u) = (c_normalized(&rs, &l, &k)?, c_yang(&rs, &l, &k), c_upper(&rs, &l, &k)?);
            if c.is_finite() && y.is_finite() && u.is_finite() {
                worst = worst.max(((c.value - y.value * u.value) / c.value).norm());
                used += 1;
            }
        }
        Ok((worst, format!("max relative error over {used} points")))
    }));
    checks.push(run_check("c(rho) = 1", 1e-13, || {
        let c = c_normalized(&rs, &SpectralPoint::real(&rs, &rho_f(&rs, &k)), &k)?;
        Ok(((c.value - 1.0).norm(), "normalization".into()))
    }));
    let vol_tol = if n == 1 { 1e-6 } else { 1e-3 };
    checks.push(run_check("volume", vol_tol, || {
        let q = volume_check(&rs, &k, &quad_config(cfg, if n == 1 { 1e-8 } else { 1e-6 }))?;
        Ok((q.rel_err, format!("quadrature {} vs closed form {}", q.quadrature, q.formula)))
    }));
    checks.push(run_check("plancherel", 1e-3, || {
        let f = TestFunction::new(1.0, 0.5, Smoothness::Infinite)?;
        let rep = plancherel_verify(&rs, &k, &f, &PlancherelConfig::default())?;
        let consistency = (rep.consistency - 1.0).abs();
        let value = if consistency <= 1e-6 { rep.mismatch } else { f64::INFINITY };
        Ok((value, format!("norm {} spectral {} consistency {:e}", rep.norm_sq, rep.spectral, consistency)))
    }));
    checks.push(run_check("norm formula", 1e-4, || {
        let fams = cuspidal_families(&rs).map_err(|e| match e {
            Error::Contract(m) => Error::UnsupportedType(m),
            e => e,
        })?;
        let fam = rho_family(&rs, &fams).ok_or_else(|| anyhow!("no rho(k) family"))?;
        let grid = norm_grid(&rs, fam, &k);
        if grid.is_empty() {
            bail!(Error::UnsupportedType("no grid around k inside the family's region".into()));
        }
        let rep = norm_formula_check(&rs, fam, &grid, 1e-4, &quad_config(cfg, 1e-6))?;
        let w = rs.weyl_order() as f64;
        let value = if (rep.constant - w).abs() <= 1e-3 * w { rep.spread } else { f64::INFINITY };
        Ok((value, format!("constant {} (|W| = {w}) over k = {}", rep.constant, grid.iter().map(k_label).collect::<Vec<_>>().join(", "))))
    }));
    checks.push(run_check("growth and separation", 0.0, || {
        let list = enumerate_residual(&rs, &k)?;
        let pts = cuspidal_points(&rs, &list);
        let bad = pts.iter().filter(|p| !growth_classify(&rs, &k, &SpectralPoint::from_rat(&rs, p)).square_integrable).count();
        let sep = eigenvalues_separated(&rs, &k, &pts);
        Ok(((bad + usize::from(!sep)) as f64, format!("{} cuspidal points", pts.len())))
    }));

    let mut r = Report::new("verify-all", vec!["check", "status", "value", "tolerance", "detail"]);
    for c in &checks {
        r.check(c.status != "fail", || format!("{}: {}", c.name, c.detail));
        r.rows.push(vec![c.name.to_string(), c.status.to_string(), num(c.value), num(c.tolerance), c.detail.clone()]);
    }
    r.set(
        "checks",
        checks
            .iter()
            .map(|c| json!({ "check": c.name, "status": c.status, "value": if c.value.is_finite() { json!(c.value) } else { Value::Null }, "tolerance": c.tolerance, "detail": c.detail }))
            .collect::<Vec<_>>(),
    );
    Ok(r)
}

/// Exact rationals given on the command line are validated before any work.
pub fn validate_rationals(cfg: &RunConfig) -> Result<()> {
    for s in &cfg.k {
        parse_rational(s)?;
    }
    for g in &cfg.grid {
        for s in g.split(':') {
            parse_rational(s)?;
        }
    }
    Ok(())
}
