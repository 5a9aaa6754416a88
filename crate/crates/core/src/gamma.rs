//! Complex log-Gamma (Lanczos, g = 7) with pole bookkeeping.
//!
//! Values that may be zero or infinite are carried as a leading Laurent term
//! `exp(log) * eps^order`, so products of Gamma quotients can be formed
//! factor by factor without ever dividing by zero.

use std::f64::consts::PI;

use num::complex::Complex64;

use crate::error::{Error, Result};

const G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Distance below which an argument is treated as a Gamma pole.
pub const POLE_TOL: f64 = 1e-9;

fn ln_gamma_right(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `log(sin(pi z))` without overflow for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im.abs() < 20.0 {
        (z * PI).sin().ln()
    } else if z.im > 0.0 {
        -i * PI * z + ((2.0 * i * PI * z).exp() - 1.0).ln() - (2.0 * i).ln()
    } else {
        i * PI * z + (1.0 - (-2.0 * i * PI * z).exp()).ln() - (2.0 * i).ln()
    }
}

/// `log Gamma(z)` (some branch); `z` must not be a pole.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_right(1.0 - z)
    } else {
        ln_gamma_right(z)
    }
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// If `z` is within `POLE_TOL` of a nonpositive integer, returns it.
pub fn pole_index(z: Complex64) -> Option<u32> {
    if z.re > 0.5 || z.im.abs() > POLE_TOL {
        return None;
    }
    let m = (-z.re).round();
    ((z.re + m).abs() < POLE_TOL).then_some(m as u32)
}

/// Leading Laurent term `exp(log) * eps^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laurent {
    pub log: Complex64,
    pub order: i32,
}

impl Laurent {
    pub const ONE: Laurent = Laurent { log: Complex64 { re: 0.0, im: 0.0 }, order: 0 };

    pub fn mul(self, o: Laurent) -> Laurent {
        Laurent { log: self.log + o.log, order: self.order + o.order }
    }

    pub fn div(self, o: Laurent) -> Laurent {
        Laurent { log: self.log - o.log, order: self.order - o.order }
    }

    pub fn coefficient(self) -> Complex64 {
        self.log.exp()
    }
}

/// Gamma as a Laurent term: near `-m`, `Gamma(-m + eps) ~ (-1)^m / (m! eps)`.
pub fn gamma_laurent(z: Complex64) -> Laurent {
    match pole_index(z) {
        Some(m) => {
            let ln_fact: f64 = (1..=m).map(|j| f64::from(j).ln()).sum();
            let sign = if m % 2 == 1 { Complex64::new(0.0, PI) } else { Complex64::new(0.0, 0.0) };
            Laurent { log: sign - ln_fact, order: -1 }
        }
        None => Laurent { log: ln_gamma(z), order: 0 },
    }
}

/// Real Gamma with an explicit error at poles.
pub fn gamma_real(x: f64) -> Result<f64> {
    if pole_index(Complex64::new(x, 0.0)).is_some() {
        return Err(Error::SingularParameter(format!("Gamma pole at {x}")));
    }
    Ok(gamma(Complex64::new(x, 0.0)).re)
}
