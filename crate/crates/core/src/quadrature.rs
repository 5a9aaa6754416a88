//! Quadrature for `int_a g(x) delta(k; x) dx` with W-invariant `g`, reduced
//! to the closed negative chamber.
//!
//! Chamber coordinates are `t_i = -alpha_i(x)`, so `alpha(x) = -a.t` for a
//! positive root `alpha = sum a_i alpha_i`. In rank two the chamber is
//! parametrized by `t = r (s, 1 - s)` with `dt = r dr ds`. The factors
//! `|alpha(x)|^{2k_alpha}` that blow up on the walls and at the origin are
//! absorbed by `s ~ w^{1/(1+2k)}` near each wall and `r ~ v^{1/q}` at the
//! origin, `q = n + 2 sum_{alpha>0} k_alpha`, on geometrically graded panels.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::det_f64;
use crate::rootsys::RootSystem;
use crate::weights::Multiplicity;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Relative tolerance; sets the truncation radius and bounds the tail.
    pub tol: f64,
    /// Truncation radius in chamber coordinates (`sum_i t_i <= t_max`).
    /// Chosen from the decay rate of `delta` when `None`.
    pub t_max: Option<f64>,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Width of the uniform radial panels.
    pub panel_width: f64,
    /// Radial extent of the graded segment at the origin.
    pub graded_radius: f64,
    /// Geometric levels of the graded panels.
    pub levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { tol: 1e-8, t_max: None, nodes: 16, panel_width: 1.0, graded_radius: 1.0, levels: 14 }
    }
}

impl QuadratureConfig {
    /// Halved mesh, more levels, doubled truncation radius.
    pub fn refined(&self, t_max: f64) -> Self {
        QuadratureConfig {
            tol: self.tol,
            t_max: Some(2.0 * t_max),
            nodes: self.nodes + self.nodes / 2,
            panel_width: self.panel_width / 2.0,
            graded_radius: self.graded_radius,
            levels: self.levels + 4,
        }
    }
}

fn gauss(n: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap())
}

/// Nodes and weights on `[a, b]`.
fn panel(rule: &GaussLegendre, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    out.extend(rule.as_node_weight_pairs().iter().map(|&(x, w)| (m + h * x, h * w)));
}

/// Rule on `[0, 1]` for integrands `v^{beta} * smooth`: panels
/// `[0, 2^-L], [2^-L, 2^-L+1], ..., [1/2, 1]`.
fn geometric(rule: &GaussLegendre, levels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = 0.5f64.powi(levels as i32);
    panel(rule, 0.0, lo, &mut out);
    for _ in 0..levels {
        panel(rule, lo, 2.0 * lo, &mut out);
        lo *= 2.0;
    }
    out
}

/// `ln |2 sinh(y/2)|` for `y > 0`, without overflow.
fn ln_two_sinh_half(y: f64) -> f64 {
    0.5 * y + (-(-y).exp_m1()).ln()
}

#[derive(Debug, Clone)]
pub struct ChamberQuadrature {
    pub t_max: f64,
    /// `1 + 2k` for each simple wall, then `q` for the origin.
    pub grading: Vec<f64>,
    /// Nodes in orthonormal coordinates of `a`, inside the negative chamber.
    pub nodes: Vec<Vec<f64>>,
    /// Weights including `|W|`, the Jacobian and `delta(k; x)`.
    pub weights: Vec<f64>,
    /// Radial panel of each node; panels past the graded segment are uniform.
    pub panel: Vec<usize>,
    pub n_panels: usize,
    /// Exponential decay rate of `delta` in `sum_i t_i`.
    pub decay_rate: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    /// Geometric extrapolation of the truncated radial tail.
    pub tail: f64,
    pub nodes: usize,
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

impl ChamberQuadrature {
    pub fn new(rs: &RootSystem, k: &Multiplicity, cfg: &QuadratureConfig) -> Result<Self> {
        let n = rs.rank;
        if n > 2 {
            return Err(Error::UnsupportedType(format!("chamber quadrature is implemented for rank <= 2, got {}{}", rs.family, n)));
        }
        let pos: Vec<(Vec<f64>, f64)> =
            rs.positive_roots().map(|i| (rs.root(i).iter().map(|&a| a as f64).collect(), k.k_f(rs, i))).collect();
        let p: Vec<f64> = (0..n).map(|i| 1.0 + 2.0 * k.k_f(rs, i)).collect();
        let q = n as f64 + 2.0 * pos.iter().map(|(_, kk)| kk).sum::<f64>();
        if p.iter().any(|&x| x <= 0.0) || q <= 0.0 {
            return Err(Error::SingularParameter("delta is not locally integrable".into()));
        }
        let decay_rate = (0..n).map(|i| pos.iter().map(|(a, kk)| -kk * a[i]).sum::<f64>()).fold(f64::INFINITY, f64::min);
        if decay_rate <= 0.0 {
            return Err(Error::InsufficientDecay(format!("delta does not decay (rate {decay_rate})")));
        }
        let t_max = cfg.t_max.unwrap_or(((10.0 / cfg.tol).ln() + 2.0 * n as f64) / decay_rate).max(2.0 * cfg.graded_radius);

        let rule = gauss(cfg.nodes);
        // Radial rule: graded segment (panel 0) then uniform panels.
        let mut radial: Vec<(f64, f64, usize)> = Vec::new();
        for (v, w) in geometric(&rule, cfg.levels) {
            let r = cfg.graded_radius * v.powf(1.0 / q);
            let dr = cfg.graded_radius * v.powf(1.0 / q - 1.0) / q;
            radial.push((r, w * dr, 0));
        }
        let m = ((t_max - cfg.graded_radius) / cfg.panel_width).ceil().max(2.0) as usize;
        let h = (t_max - cfg.graded_radius) / m as f64;
        for j in 0..m {
            let mut buf = Vec::new();
            let a = cfg.graded_radius + j as f64 * h;
            panel(&rule, a, a + h, &mut buf);
            radial.extend(buf.into_iter().map(|(r, w)| (r, w, j + 1)));
        }

        // Angular rule on s in [0, 1] (rank two): graded towards both ends.
        // Stored as `(s, 1 - s, weight)` so that neither coordinate rounds to zero.
        let angular: Vec<(f64, f64, f64)> = if n == 2 {
            let mut out = Vec::new();
            for (end, pe) in [(0usize, p[0]), (1, p[1])] {
                for (w, ww) in geometric(&rule, cfg.levels) {
                    let d = 0.5 * w.powf(1.0 / pe);
                    let ds = 0.5 * w.powf(1.0 / pe - 1.0) / pe;
                    out.push(if end == 0 { (d, 1.0 - d, ww * ds) } else { (1.0 - d, d, ww * ds) });
                }
            }
            out
        } else {
            vec![(1.0, 0.0, 1.0)]
        };

        let frame = rs.chamber_frame();
        let jac = rs.weyl_order() as f64 * det_f64(&frame).abs();
        let mut nodes = Vec::with_capacity(radial.len() * angular.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panel_of = Vec::with_capacity(nodes.capacity());
        for &(r, wr, pi) in &radial {
            for &(s, s_bar, ws) in &angular {
                let t: Vec<f64> = if n == 2 { vec![r * s, r * s_bar] } else { vec![r] };
                let log_delta: f64 =
                    pos.iter().map(|(a, kk)| 2.0 * kk * ln_two_sinh_half(a.iter().zip(&t).map(|(x, y)| x * y).sum())).sum();
                let polar = if n == 2 { r } else { 1.0 };
                let x: Vec<f64> = (0..n).map(|row| (0..n).map(|c| frame[row][c] * t[c]).sum()).collect();
                nodes.push(x);
                weights.push(jac * polar * wr * ws * log_delta.exp());
                panel_of.push(pi);
            }
        }
        let mut grading = p;
        grading.push(q);
        Ok(ChamberQuadrature { t_max, grading, nodes, weights, panel: panel_of, n_panels: m + 1, decay_rate, tol: cfg.tol })
    }

    /// `sum_j w_j g(x_j)`, evaluated in parallel and summed in node order.
    pub fn integrate<G>(&self, g: G) -> Result<Integral>
    where
        G: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let vals: Vec<f64> = self.nodes.par_iter().map(|x| g(x)).collect::<Result<Vec<f64>>>()?;
        let terms: Vec<f64> = vals.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        let value = pairwise_sum(&terms);
        let mut per_panel = vec![0.0; self.n_panels];
        for (t, &p) in terms.iter().zip(&self.panel) {
            per_panel[p] += t.abs();
        }
        let last = per_panel[self.n_panels - 1];
        let prev = per_panel[self.n_panels - 2];
        let tail = if last == 0.0 {
            0.0
        } else {
            let ratio = last / prev;
            if !(ratio < 1.0) {
                return Err(Error::InsufficientDecay(format!("integrand does not decay at t = {}", self.t_max)));
            }
            last * ratio / (1.0 - ratio)
        };
        if tail > self.tol * value.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InsufficientDecay(format!("tail {tail:e} exceeds tolerance at t = {}", self.t_max)));
        }
        Ok(Integral { value, tail, nodes: self.nodes.len() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    /// `|fine - coarse| + tail`.
    pub error: f64,
    pub tail: f64,
    pub t_max: f64,
    pub nodes: usize,
}

/// `||g||^2 = int_a |g|^2 delta dx` at two resolutions.
pub fn weighted_norm_sq<G>(rs: &RootSystem, k: &Multiplicity, cfg: &QuadratureConfig, g: G) -> Result<NormReport>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    let coarse_q = ChamberQuadrature::new(rs, k, cfg)?;
    let coarse = coarse_q.integrate(|x| g(x).map(|v| v * v))?;
    let fine_q = ChamberQuadrature::new(rs, k, &cfg.refined(coarse_q.t_max))?;
    let fine = fine_q.integrate(|x| g(x).map(|v| v * v))?;
    Ok(NormReport {
        value: fine.value,
        error: (fine.value - coarse.value).abs() + fine.tail,
        tail: fine.tail,
        t_max: fine_q.t_max,
        nodes: fine.nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeReport {
    pub quadrature: f64,
    pub error_estimate: f64,
    pub formula: f64,
    pub rel_err: f64,
}

/// `int_a delta dx` by quadrature against the closed product formula.
pub fn volume_check(rs: &RootSystem, k: &Multiplicity, cfg: &QuadratureConfig) -> Result<VolumeReport> {
    let r = weighted_norm_sq(rs, k, cfg, |_| Ok(1.0))?;
    let formula = crate::weights::macdonald_volume(rs, k)?;
    Ok(VolumeReport { quadrature: r.value, error_estimate: r.error, formula, rel_err: (r.value - formula).abs() / formula.abs() })
}
