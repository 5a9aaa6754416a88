//! Fourier transform of W-invariant bumps, the rank-one Plancherel check and
//! the norm formula for cuspidal families.
//!
//! The continuous spectrum of a rank-one system is parametrized by
//! `lambda = i s alpha` with `s > 0`. Lebesgue measure on `i a*` is then
//! `|alpha| ds`, and the integrand is even in `s`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num::complex::Complex64;
use num::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cfunc::SpectralPoint;
use crate::error::{Error, Result};
use crate::gamma::gamma_laurent;
use crate::linalg::{to_f64, Rat};
use crate::quadrature::{pairwise_sum, weighted_norm_sq, NormReport, QuadratureConfig};
use crate::residual::{enumerate_residual, plancherel_parts, CuspidalFamily, Gamma};
use crate::rootsys::RootSystem;
use crate::series::{eval_f, HypergeometricF};
use crate::weights::{check_integrability, delta_density, rho, Multiplicity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    /// `exp(-1 / (1 - u^2))`.
    Infinite,
    /// `(1 - u^2)^m`, of class `C^{m-1}`.
    Finite(u32),
}

/// Radial bump `amplitude * phi((|x| - center) / half_width)`. The norm is
/// W-invariant, so the bump is too. Its support is the ball of radius
/// `center + half_width`, which is the hull `C_x` of `W x` in rank one with
/// `|x|` equal to that radius, and `H_x(lambda) = radius * |Re lambda|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub center: f64,
    pub half_width: f64,
    pub smoothness: Smoothness,
    pub amplitude: f64,
}

impl TestFunction {
    pub fn new(center: f64, half_width: f64, smoothness: Smoothness) -> Result<Self> {
        if !(half_width > 0.0) || center < half_width {
            return Err(Error::Contract(format!("bump ({center}, {half_width}) must satisfy 0 < half_width <= center")));
        }
        Ok(TestFunction { center, half_width, smoothness, amplitude: 1.0 })
    }

    pub fn zero() -> Self {
        TestFunction { center: 1.0, half_width: 0.5, smoothness: Smoothness::Infinite, amplitude: 0.0 }
    }

    pub fn support_radius(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn profile(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let v = 1.0 - u * u;
        self.amplitude
            * match self.smoothness {
                Smoothness::Infinite => (-1.0 / v).exp(),
                Smoothness::Finite(m) => v.powi(m as i32),
            }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.profile((r - self.center) / self.half_width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpConfig {
    /// Gauss-Legendre panels across the support.
    pub panels: usize,
    pub nodes: usize,
    /// Initial series cutoff for `F`; doubled on failure.
    pub cutoff: usize,
    pub series_tol: f64,
}

impl Default for BumpConfig {
    fn default() -> Self {
        BumpConfig { panels: 16, nodes: 24, cutoff: 64, series_tol: 1e-15 }
    }
}

/// Rank-one nodes on the support of `f` inside the negative chamber, with
/// weights `|W| dx delta(k; x)` and the values of `f`.
struct BumpRule {
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn require_rank_one(rs: &RootSystem) -> Result<()> {
    if rs.rank != 1 {
        return Err(Error::UnsupportedType(format!("Fourier transform is implemented in rank one, got {}{}", rs.family, rs.rank)));
    }
    Ok(())
}

fn bump_rule(rs: &RootSystem, k: &Multiplicity, f: &TestFunction, cfg: &BumpConfig) -> BumpRule {
    let rule = GaussLegendre::new(NonZeroUsize::new(cfg.nodes.max(1)).unwrap());
    // Orthonormal direction of the negative chamber.
    let dir = if rs.eval_root(0, &[1.0]) < 0.0 { 1.0 } else { -1.0 };
    let (lo, hi) = (f.center - f.half_width, f.support_radius());
    let h = (hi - lo) / cfg.panels as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for p in 0..cfg.panels {
        let m = lo + (p as f64 + 0.5) * h;
        for &(u, w) in rule.as_node_weight_pairs() {
            let r = m + 0.5 * h * u;
            if r <= 0.0 {
                continue;
            }
            let x = vec![dir * r];
            let fx = f.value(&x);
            if fx == 0.0 {
                continue;
            }
            weights.push(rs.weyl_order() as f64 * 0.5 * h * w * delta_density(rs, k, &x) * fx);
            nodes.push(x);
        }
    }
    BumpRule { nodes, weights }
}

/// `F(lambda, k; x_j)` at every node, raising the cutoff until the series
/// converges at all of them.
fn f_values(rs: &RootSystem, k: &Multiplicity, lambda: &SpectralPoint, nodes: &[Vec<f64>], cfg: &BumpConfig) -> Result<Vec<Complex64>> {
    let mut cutoff = cfg.cutoff;
    loop {
        let hf = HypergeometricF::new(rs, k, lambda, cutoff)?;
        let vals: Result<Vec<Complex64>> = nodes.iter().map(|x| hf.eval_chamber(rs, x, cfg.series_tol).map(|v| v.value)).collect();
        match vals {
            Err(Error::WeylTerm { source, .. }) if matches!(*source, Error::IncreaseCutoff { .. }) && cutoff < 4096 => cutoff *= 2,
            other => return other,
        }
    }
}

fn pairwise_sum_c(v: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

fn transform_at(rs: &RootSystem, k: &Multiplicity, rule: &BumpRule, lambda: &SpectralPoint, cfg: &BumpConfig) -> Result<Complex64> {
    if rule.nodes.is_empty() {
        return Ok(Complex64::zero());
    }
    let vals = f_values(rs, k, &lambda.neg(rs), &rule.nodes, cfg)?;
    let terms: Vec<Complex64> = vals.iter().zip(&rule.weights).map(|(v, w)| v * w).collect();
    Ok(pairwise_sum_c(&terms))
}

/// `Ff(lambda) = int f(x) F(-lambda, k; x) delta(k; x) dx` on a grid of
/// spectral parameters, in parallel over the grid.
pub fn fourier_transform(rs: &RootSystem, k: &Multiplicity, f: &TestFunction, lambdas: &[SpectralPoint], cfg: &BumpConfig) -> Result<Vec<Complex64>> {
    require_rank_one(rs)?;
    let rule = bump_rule(rs, k, f, cfg);
    lambdas.par_iter().map(|l| transform_at(rs, k, &rule, l, cfg)).collect()
}

/// `||f||^2` in `L^2(a, delta dx)` by the same bump rule.
pub fn bump_norm_sq(rs: &RootSystem, k: &Multiplicity, f: &TestFunction, cfg: &BumpConfig) -> Result<f64> {
    require_rank_one(rs)?;
    let rule = bump_rule(rs, k, f, cfg);
    let terms: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f.value(x)).collect();
    Ok(pairwise_sum(&terms))
}

/// `lambda = i s alpha` in simple-root coordinates.
fn imaginary(rs: &RootSystem, s: f64) -> SpectralPoint {
    SpectralPoint::new(rs, vec![Complex64::new(0.0, s)])
}

fn root_length(rs: &RootSystem) -> f64 {
    (rs.scale.value * to_f64(&rs.inner_ref(&[Rat::from_integer(1.into())], &[Rat::from_integer(1.into())]))).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlancherelConfig {
    pub tol: f64,
    /// Step in `s`.
    pub step: f64,
    /// Samples per truncation block.
    pub block: usize,
    /// Largest `|lambda|` before giving up on the tail.
    pub max_abs_lambda: f64,
    pub bump: BumpConfig,
    pub quadrature: QuadratureConfig,
}

impl Default for PlancherelConfig {
    fn default() -> Self {
        PlancherelConfig {
            tol: 1e-3,
            step: 0.01,
            block: 256,
            max_abs_lambda: 2000.0,
            bump: BumpConfig::default(),
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspidalTerm {
    #[serde(serialize_with = "ser_rat_vec")]
    pub point: Vec<Rat>,
    pub gamma: f64,
    pub f_l: f64,
    pub transform: f64,
}

fn ser_rat_vec<S: serde::Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlancherelReport {
    pub norm_sq: f64,
    pub continuous: f64,
    pub discrete: f64,
    pub spectral: f64,
    pub mismatch: f64,
    pub pass: bool,
    /// `sum gamma_L f_L(c)` over the cuspidal points.
    pub discrete_weight: f64,
    /// `discrete_weight * ||F(rho(k), k)||^2`, which should be 1.
    pub consistency: f64,
    pub cuspidal: Vec<CuspidalTerm>,
    pub samples: usize,
    pub max_abs_lambda: f64,
    /// `(|lambda|, |Ff|^2, gamma f_L)` on the continuous part.
    #[serde(skip)]
    pub trace: Vec<(f64, f64, f64)>,
}

/// Both sides of the Plancherel identity for a bump on a rank-one system.
pub fn plancherel_verify(rs: &RootSystem, k: &Multiplicity, f: &TestFunction, cfg: &PlancherelConfig) -> Result<PlancherelReport> {
    require_rank_one(rs)?;
    if !check_integrability(rs, k).condition_1_6 {
        return Err(Error::Contract("k violates the integrability condition".into()));
    }
    let subspaces = enumerate_residual(rs, k)?;
    let parts = plancherel_parts(rs, &subspaces);
    let mut gammas = Vec::new();
    for p in &parts {
        match &p.gamma {
            Gamma::Exact(g) => gammas.push(to_f64(g)),
            Gamma::Unknown => return Err(Error::UnderdeterminedMeasure(format!("gamma unknown on residual subspace {}", p.subspace))),
        }
    }
    let rule = bump_rule(rs, k, f, &cfg.bump);
    let norm_sq = pairwise_sum(&rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * f.value(x)).collect::<Vec<_>>());
    let alpha_len = root_length(rs);

    // Discrete part: point masses at the zero-dimensional subspaces.
    let mut cuspidal = Vec::new();
    for (p, &g) in parts.iter().zip(&gammas) {
        if p.dim != 0 || g == 0.0 {
            continue;
        }
        let c = &subspaces[p.subspace].center;
        let lam = SpectralPoint::from_rat(rs, c);
        let d = p.density(rs, k, &subspaces, &lam)?;
        if d.f_l < 0.0 {
            return Err(Error::Internal(format!("negative density {} at a cuspidal point", d.f_l)));
        }
        let t = transform_at(rs, k, &rule, &lam, &cfg.bump)?;
        cuspidal.push(CuspidalTerm { point: c.clone(), gamma: g, f_l: d.f_l / p.omega_normalizer(), transform: t.norm() });
    }
    let discrete = pairwise_sum(&cuspidal.iter().map(|c| c.gamma * c.f_l * c.transform * c.transform).collect::<Vec<_>>());
    let discrete_weight: f64 = cuspidal.iter().map(|c| c.gamma * c.f_l).sum();
    let volume: NormReport = weighted_norm_sq(rs, k, &cfg.quadrature, |_| Ok(1.0))?;
    let consistency = discrete_weight * volume.value;

    // Continuous part, summed block by block until the tail is negligible.
    let mut continuous = 0.0;
    let mut trace = Vec::new();
    for (p, &g) in parts.iter().zip(&gammas) {
        if p.dim != rs.rank || g == 0.0 {
            continue;
        }
        let scale = g * alpha_len / p.omega_normalizer();
        let mut blocks: Vec<f64> = Vec::new();
        let mut j0 = 1usize;
        loop {
            let idx: Vec<usize> = (j0..j0 + cfg.block).collect();
            let vals: Vec<(f64, f64, f64)> = idx
                .par_iter()
                .map(|&j| {
                    let s = j as f64 * cfg.step;
                    let lam = imaginary(rs, s);
                    let d = p.density(rs, k, &subspaces, &lam)?;
                    if !(d.f_l >= 0.0) {
                        return Err(Error::Internal(format!("density {} at s = {s}", d.f_l)));
                    }
                    let t = transform_at(rs, k, &rule, &lam, &cfg.bump)?;
                    Ok((s * alpha_len, t.norm_sqr(), g * d.f_l))
                })
                .collect::<Result<Vec<_>>>()?;
            // Even integrand: 2 h sum_{j >= 1} g(jh); the j = 0 term vanishes with f_L(0) = 0.
            let block = 2.0 * cfg.step * scale / g * pairwise_sum(&vals.iter().map(|(_, a, b)| a * b).collect::<Vec<_>>());
            trace.extend(vals);
            blocks.push(block);
            j0 += cfg.block;
            let total = pairwise_sum(&blocks);
            let decreasing = blocks.len() < 2 || block <= blocks[blocks.len() - 2];
            if decreasing && block <= 0.1 * cfg.tol * (total + discrete).abs().max(f64::MIN_POSITIVE) {
                break;
            }
            if total == 0.0 && blocks.len() >= 2 {
                break;
            }
            if (j0 as f64) * cfg.step * alpha_len > cfg.max_abs_lambda {
                return Err(Error::InsufficientDecay(format!("spectral tail above tolerance at |lambda| = {}", cfg.max_abs_lambda)));
            }
        }
        continuous += pairwise_sum(&blocks);
    }
    let spectral = continuous + discrete;
    let mismatch = if norm_sq == 0.0 {
        if spectral == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (norm_sq - spectral).abs() / norm_sq
    };
    let max_abs_lambda = trace.last().map_or(0.0, |t| t.0);
    Ok(PlancherelReport {
        norm_sq,
        continuous,
        discrete,
        spectral,
        mismatch,
        pass: mismatch <= cfg.tol,
        discrete_weight,
        consistency,
        cuspidal,
        samples: trace.len(),
        max_abs_lambda,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// `(|lambda|, (1 + |lambda|)^3 |Ff(lambda)|)`.
    pub samples: Vec<(f64, f64)>,
    pub max: f64,
    pub argmax: f64,
    /// `max |Ff(lambda) - Ff(w lambda)|` relative to `max |Ff|`.
    pub w_invariance: f64,
}

/// Samples `(1 + |lambda|)^3 |Ff|` on `i a*` for `|lambda| <= max_abs`.
pub fn decay_check(rs: &RootSystem, k: &Multiplicity, f: &TestFunction, max_abs: f64, samples: usize, cfg: &BumpConfig) -> Result<DecayReport> {
    require_rank_one(rs)?;
    let alpha_len = root_length(rs);
    let ss: Vec<f64> = (1..=samples).map(|j| j as f64 * max_abs / (samples as f64 * alpha_len)).collect();
    let lams: Vec<SpectralPoint> = ss.iter().map(|&s| imaginary(rs, s)).collect();
    let mirrored: Vec<SpectralPoint> = ss.iter().map(|&s| imaginary(rs, -s)).collect();
    let a = fourier_transform(rs, k, f, &lams, cfg)?;
    let b = fourier_transform(rs, k, f, &mirrored, cfg)?;
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let w_invariance = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE);
    let samples: Vec<(f64, f64)> = ss.iter().zip(&a).map(|(&s, z)| (s * alpha_len, (1.0 + s * alpha_len).powi(3) * z.norm())).collect();
    let (argmax, max) = samples.iter().fold((0.0, f64::NEG_INFINITY), |acc, &(l, v)| if v > acc.1 { (l, v) } else { acc });
    Ok(DecayReport { samples, max, argmax, w_invariance })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormPoint {
    #[serde(serialize_with = "ser_rat_vec")]
    pub k: Vec<Rat>,
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormFormulaReport {
    pub points: Vec<NormPoint>,
    /// `(max - min) / mean` of `|ratio|`.
    pub spread: f64,
    pub constant: f64,
    /// `gamma_L^{-1} |W lambda|^{-1}` when every grid point has exact gamma.
    pub expected: Option<f64>,
    pub pass: bool,
}

/// Exact check that a Gamma argument is a pole.
fn is_pole(z: &Rat) -> bool {
    z.is_integer() && !z.is_positive()
}

/// Real Gamma product `prod num / prod den` with the sign tracked.
fn gamma_ratio(num: &[Rat], den: &[Rat]) -> Result<f64> {
    let mut log = Complex64::zero();
    for (z, sgn) in num.iter().map(|z| (z, 1.0)).chain(den.iter().map(|z| (z, -1.0))) {
        if is_pole(z) {
            return Err(Error::SingularGrid(format!("Gamma pole at {z}")));
        }
        log += sgn * gamma_laurent(Complex64::new(to_f64(z), 0.0)).log;
    }
    Ok(log.exp().re)
}

/// The Gamma-factor side of the norm formula at `lambda`:
/// `prod_{a>0} Gamma(rho(a^v) + k_a)^2 / Gamma(rho(a^v))^2`
/// `* prod_{R \ R_z} Gamma(lambda(a^v)) / prod_{R \ R_p} Gamma(lambda(a^v) + k_a)`.
pub fn norm_gamma_side(rs: &RootSystem, k: &Multiplicity, lambda: &[Rat], r_z: &[usize], r_p: &[usize]) -> Result<f64> {
    let r = rho(rs, k);
    let mut num = Vec::new();
    let mut den = Vec::new();
    for i in rs.positive_roots() {
        let v = rs.pairing(&r, i);
        num.push(&v + k.k(rs, i));
        num.push(&v + k.k(rs, i));
        den.push(v.clone());
        den.push(v);
    }
    for i in 0..rs.num_roots() {
        let v = rs.pairing(lambda, i);
        if !r_z.contains(&i) {
            num.push(v.clone());
        }
        if !r_p.contains(&i) {
            den.push(v + k.k(rs, i));
        }
    }
    gamma_ratio(&num, &den)
}

fn orbit_size(rs: &RootSystem, lambda: &[Rat]) -> usize {
    let mut seen: Vec<Vec<Rat>> = Vec::new();
    for w in rs.weyl_group() {
        let v = rs.act(w, lambda);
        if !seen.contains(&v) {
            seen.push(v);
        }
    }
    seen.len()
}

/// Ratio of `||F(lambda(k), k)||^2` to the Gamma-factor side over a grid of
/// multiplicities. On the `rho(k)` family `F = 1` identically; other
/// families use the series, which needs every quadrature node to be far
/// enough from the walls.
pub fn norm_formula_check(
    rs: &RootSystem,
    family: &CuspidalFamily,
    grid: &[Multiplicity],
    tol: f64,
    cfg: &QuadratureConfig,
) -> Result<NormFormulaReport> {
    let mut rhs_all = Vec::new();
    for k in grid {
        let lam = family.at(k.values());
        rhs_all.push((lam.clone(), norm_gamma_side(rs, k, &lam, &family.r_z, &family.r_p)?));
    }
    let mut points = Vec::new();
    let mut expected: Option<f64> = None;
    let mut all_known = true;
    for (k, (lam, rhs)) in grid.iter().zip(rhs_all) {
        if !check_integrability(rs, k).condition_1_6 || !family.sigma.iter().all(|s| s.holds(k.values())) {
            return Err(Error::Contract(format!("k = {:?} is outside the family's region", k.values().iter().map(|q| q.to_string()).collect::<Vec<_>>())));
        }
        let r = rho(rs, k);
        let is_rho = rs.dominant(&lam) == rs.dominant(&r);
        let lhs = if is_rho {
            weighted_norm_sq(rs, k, cfg, |_| Ok(1.0))?
        } else {
            let sp = SpectralPoint::from_rat(rs, &lam);
            weighted_norm_sq(rs, k, cfg, |x| eval_f(rs, k, &sp, x, 1e-14).map(|v| v.value.re))?
        };
        let subspaces = enumerate_residual(rs, k)?;
        let gamma = subspaces.iter().find(|l| l.dim == 0 && rs.dominant(&l.center) == rs.dominant(&lam)).map(|l| l.gamma.clone());
        match gamma {
            Some(Gamma::Exact(g)) if !g.is_zero() => {
                let e = 1.0 / (to_f64(&g) * orbit_size(rs, &lam) as f64);
                if expected.is_some_and(|x| (x - e).abs() > 1e-12 * e) {
                    return Err(Error::Internal("gamma changes along the family".into()));
                }
                expected = Some(e);
            }
            _ => all_known = false,
        }
        points.push(NormPoint { k: k.values().to_vec(), lhs: lhs.value, lhs_error: lhs.error, rhs, ratio: lhs.value / rhs });
    }
    let abs: Vec<f64> = points.iter().map(|p| p.ratio.abs()).collect();
    let mean = abs.iter().sum::<f64>() / abs.len().max(1) as f64;
    let spread = if abs.is_empty() {
        0.0
    } else {
        (abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - abs.iter().cloned().fold(f64::INFINITY, f64::min)) / mean
    };
    let expected = if all_known { expected } else { None };
    let matches = expected.is_none_or(|e| (mean - e).abs() <= tol * mean);
    Ok(NormFormulaReport { points, spread, constant: mean, expected, pass: spread <= tol && matches })
}
