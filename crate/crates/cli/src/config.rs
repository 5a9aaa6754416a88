use anyhow::{anyhow, bail, Result};
use hypergeo::linalg::{parse_rational, Rat};
use hypergeo::{Family, Multiplicity, RootSystem};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};

/// Everything a run depends on. Embedded verbatim in every report; exact
/// rationals are kept as the strings the user typed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunConfig {
    pub command: String,
    pub family: Option<String>,
    pub rank: Option<usize>,
    pub k: Vec<String>,
    pub lambda: Vec<String>,
    pub x: Vec<f64>,
    pub grid: Vec<String>,
    pub tol: Option<f64>,
    pub t_max: Option<f64>,
    pub nodes: Option<usize>,
    pub center: Option<f64>,
    pub half_width: Option<f64>,
    pub family_index: Option<usize>,
    pub out_dir: String,
    pub jobs: Option<usize>,
}

pub fn default_rank(family: Family) -> Option<usize> {
    match family {
        Family::G2 => Some(2),
        Family::F4 => Some(4),
        Family::E6 => Some(6),
        Family::E7 => Some(7),
        Family::E8 => Some(8),
        _ => None,
    }
}

impl RunConfig {
    pub fn root_system(&self) -> Result<RootSystem> {
        let fam: Family = self.family.as_deref().ok_or_else(|| anyhow!("--family is required"))?.parse()?;
        let rank = match (self.rank, default_rank(fam)) {
            (Some(r), _) | (None, Some(r)) => r,
            (None, None) => bail!("--rank is required for family {fam}"),
        };
        Ok(RootSystem::build(fam, rank)?)
    }

    pub fn multiplicity(&self, rs: &RootSystem) -> Result<Multiplicity> {
        parse_multiplicity(rs, &self.k)
    }
}

/// One value for every orbit, or one value per orbit (short roots first).
pub fn parse_multiplicity(rs: &RootSystem, k: &[String]) -> Result<Multiplicity> {
    let vals: Vec<Rat> = k.iter().map(|s| parse_rational(s)).collect::<hypergeo::Result<_>>()?;
    match vals.len() {
        0 => bail!("--k is required"),
        1 => Ok(Multiplicity::equal(rs, vals[0].clone())),
        _ => Ok(Multiplicity::new(rs, vals)?),
    }
}

/// Parses `a`, `bi` or `a+bi` with real parts written as decimals or `p/q`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let real = |t: &str| -> Result<f64> {
        if t.contains('/') || !t.contains(['e', 'E']) {
            return Ok(hypergeo::linalg::to_f64(&parse_rational(t)?));
        }
        t.parse::<f64>().map_err(|_| anyhow!("not a number: {t:?}"))
    };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(real(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(j) => (real(&body[..j])?, &body[j..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t)?,
    };
    Ok(Complex64::new(re, im))
}
