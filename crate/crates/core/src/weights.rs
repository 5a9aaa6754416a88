//! Multiplicity functions, `rho(k)`, the density `delta(k; x)`, the
//! integrability gate, the Calogero-Moser potential and the Macdonald volume.
//!
//! Points `x` of `a` are given in orthonormal coordinates (see
//! [`RootSystem::to_orth`]).

use std::f64::consts::PI;

use num::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::gamma_real;
use crate::linalg::{rat_int, to_f64, Rat};
use crate::rootsys::RootSystem;

/// A W-invariant multiplicity: one exact value per root orbit (orbit 0 holds
/// the short roots).
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplicity {
    values: Vec<Rat>,
    values_f: Vec<f64>,
}

impl Multiplicity {
    /// A single value is broadcast to every orbit.
    pub fn new(rs: &RootSystem, values: Vec<Rat>) -> Result<Self> {
        let values = match values.len() {
            1 => vec![values[0].clone(); rs.num_orbits()],
            m if m == rs.num_orbits() => values,
            m => {
                return Err(Error::Contract(format!("{} has {} root orbits, got {m} multiplicities", rs.family, rs.num_orbits())))
            }
        };
        let values_f = values.iter().map(to_f64).collect();
        Ok(Multiplicity { values, values_f })
    }

    pub fn equal(rs: &RootSystem, k: Rat) -> Self {
        Self::new(rs, vec![k]).expect("a single value always fits")
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn values_f(&self) -> &[f64] {
        &self.values_f
    }

    pub fn k(&self, rs: &RootSystem, root: usize) -> &Rat {
        &self.values[rs.orbit(root)]
    }

    pub fn k_f(&self, rs: &RootSystem, root: usize) -> f64 {
        self.values_f[rs.orbit(root)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// The common value if all orbits carry the same multiplicity.
    pub fn equal_value(&self) -> Option<&Rat> {
        self.values.iter().all(|v| v == &self.values[0]).then(|| &self.values[0])
    }

    pub fn scaled(&self, t: &Rat) -> Self {
        let values: Vec<Rat> = self.values.iter().map(|v| v * t).collect();
        let values_f = values.iter().map(to_f64).collect();
        Multiplicity { values, values_f }
    }
}

/// `rho(k) = 1/2 sum_{alpha > 0} k_alpha alpha`, in simple-root coordinates.
pub fn rho(rs: &RootSystem, k: &Multiplicity) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); rs.rank];
    for i in rs.positive_roots() {
        let half_k = k.k(rs, i) / rat_int(2);
        for (o, &c) in out.iter_mut().zip(rs.root(i)) {
            *o += &half_k * rat_int(c);
        }
    }
    out
}

pub fn rho_f(rs: &RootSystem, k: &Multiplicity) -> Vec<f64> {
    rho(rs, k).iter().map(to_f64).collect()
}

/// `prod_{alpha > 0} |2 sinh(alpha(x)/2)|^{2 k_alpha}`; on a wall the factor
/// is `+inf` for negative, `0` for positive and `1` for zero multiplicity.
pub fn delta_density(rs: &RootSystem, k: &Multiplicity, x: &[f64]) -> f64 {
    let mut d = 1.0;
    for i in rs.positive_roots() {
        let ka = k.k_f(rs, i);
        if ka == 0.0 {
            continue;
        }
        let a = rs.eval_root(i, x);
        if a == 0.0 {
            return if ka < 0.0 { f64::INFINITY } else { 0.0 };
        }
        d *= (2.0 * (0.5 * a).sinh()).abs().powf(2.0 * ka);
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub all_negative: bool,
    pub condition_1_6: bool,
    pub condition_1_7: bool,
    /// `rho(k)(beta^v) + k_beta + 1` for the highest short root `beta`.
    pub margin: f64,
    pub margin_exact: String,
    /// `sum_i k_i h_i + 1`.
    pub margin_1_7: f64,
}

pub fn check_integrability(rs: &RootSystem, k: &Multiplicity) -> RegimeReport {
    let all_negative = k.values().iter().all(Signed::is_negative);
    let beta = rs.highest_short_root();
    let margin = rs.pairing(&rho(rs, k), beta) + k.k(rs, beta) + rat_int(1);
    let od = rs.orbit_data();
    let margin17 = od.h.iter().zip(k.values()).fold(rat_int(1), |acc, (h, kv)| acc + h * kv);
    RegimeReport {
        all_negative,
        condition_1_6: all_negative && margin.is_positive(),
        condition_1_7: all_negative && margin17.is_positive(),
        margin: to_f64(&margin),
        margin_exact: margin.to_string(),
        margin_1_7: to_f64(&margin17),
    }
}

/// `binom(a, b) = Gamma(a+1) / (Gamma(b+1) Gamma(a-b+1))`.
pub fn binom(a: f64, b: f64) -> Result<f64> {
    Ok(gamma_real(a + 1.0)? / (gamma_real(b + 1.0)? * gamma_real(a - b + 1.0)?))
}

/// `prod_i binom(d_i k, k) pi / sin(-m_i pi k)` for equal multiplicity `k`.
pub fn macdonald_volume(rs: &RootSystem, k: &Multiplicity) -> Result<f64> {
    let kv = k
        .equal_value()
        .ok_or_else(|| Error::Contract("the volume formula needs equal multiplicities".into()))?;
    let report = check_integrability(rs, k);
    if !report.condition_1_6 {
        return Err(Error::SingularParameter(format!("k = {kv} violates the integrability condition")));
    }
    let kf = to_f64(kv);
    let mut v = 1.0;
    for &d in rs.degrees() {
        let m = f64::from(d - 1);
        let s = (-m * PI * kf).sin();
        if s == 0.0 {
            return Err(Error::SingularParameter(format!("sin(-{m} pi k) = 0")));
        }
        v *= binom(f64::from(d) * kf, kf)? * PI / s;
    }
    Ok(v)
}

/// `-1/4 sum_{alpha > 0} (alpha, alpha) k (k - 1) / sinh^2(alpha(x)/2)`.
pub fn schrodinger_potential(rs: &RootSystem, k: &Multiplicity, x: &[f64]) -> Result<f64> {
    let mut v = 0.0;
    for i in rs.positive_roots() {
        let a = rs.eval_root(i, x);
        if a == 0.0 {
            return Err(Error::WallSingularity { root: i });
        }
        let ka = k.k_f(rs, i);
        v -= 0.25 * rs.root_len2(i) * ka * (ka - 1.0) / (0.5 * a).sinh().powi(2);
    }
    Ok(v)
}

/// Central second-order finite difference Laplacian.
pub fn laplacian_fd(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let f0 = f(x);
    let mut s = 0.0;
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        s += (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h);
    }
    s
}

/// `L(k) f = Laplacian f + sum_{alpha > 0} k_alpha coth(alpha(x)/2) d_{alpha} f`
/// by central differences; `d_alpha` is the derivative along the vector
/// representing `alpha`.
pub fn l_operator_fd(rs: &RootSystem, k: &Multiplicity, f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let mut s = laplacian_fd(f, x, h);
    for i in rs.positive_roots() {
        let dir = rs.root_orth(i);
        let xp: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + h * d).collect();
        let xm: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - h * d).collect();
        let deriv = (f(&xp) - f(&xm)) / (2.0 * h);
        s += k.k_f(rs, i) / (0.5 * rs.eval_root(i, x)).tanh() * deriv;
    }
    s
}
