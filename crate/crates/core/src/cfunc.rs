//! Harish-Chandra c-functions, the Yang factorization `c = c_Y c^Y`, and the
//! Plancherel density factor.

use num::complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{gamma_laurent, Laurent, POLE_TOL};
use crate::linalg::{to_f64, Rat};
use crate::rootsys::RootSystem;
use crate::weights::{rho, Multiplicity};

/// A point of `h*` (simple-root coordinates) with its coroot pairings cached.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub coords: Vec<Complex64>,
    pub pairings: Vec<Complex64>,
}

impl SpectralPoint {
    pub fn new(rs: &RootSystem, coords: Vec<Complex64>) -> Self {
        let pairings = (0..rs.num_roots()).map(|i| rs.pairing_c(&coords, i)).collect();
        SpectralPoint { coords, pairings }
    }

    pub fn real(rs: &RootSystem, coords: &[f64]) -> Self {
        Self::new(rs, coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_rat(rs: &RootSystem, coords: &[Rat]) -> Self {
        Self::new(rs, coords.iter().map(|x| Complex64::new(to_f64(x), 0.0)).collect())
    }

    pub fn neg(&self, rs: &RootSystem) -> Self {
        Self::new(rs, self.coords.iter().map(|z| -z).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Finite,
    Zero,
    Pole,
}

/// An extended value. For `Zero` and `Pole` the field `value` holds the
/// leading Laurent coefficient along the approach direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CFunctionValue {
    pub value: Complex64,
    pub flag: Flag,
    pub order: i32,
}

impl CFunctionValue {
    fn from_laurent(l: Laurent) -> Self {
        let flag = match l.order {
            0 => Flag::Finite,
            o if o > 0 => Flag::Zero,
            _ => Flag::Pole,
        };
        CFunctionValue { value: l.coefficient(), flag, order: l.order }
    }

    pub fn is_finite(&self) -> bool {
        self.flag == Flag::Finite
    }

    /// Value as an ordinary complex number (`0` or `inf` off the finite case).
    pub fn as_complex(&self) -> Complex64 {
        match self.flag {
            Flag::Finite => self.value,
            Flag::Zero => Complex64::new(0.0, 0.0),
            Flag::Pole => Complex64::new(f64::INFINITY, f64::INFINITY),
        }
    }
}

/// Linear factor as a Laurent term (a zero of order one when `|z| < tol`).
fn linear_laurent(z: Complex64) -> Laurent {
    if z.norm() < POLE_TOL {
        Laurent { log: Complex64::new(0.0, 0.0), order: 1 }
    } else {
        Laurent { log: z.ln(), order: 0 }
    }
}

fn c_tilde_laurent(rs: &RootSystem, lambda: &SpectralPoint, k: &Multiplicity) -> Laurent {
    let mut acc = Laurent::ONE;
    for i in rs.positive_roots() {
        let ka = k.k_f(rs, i);
        if ka == 0.0 {
            continue;
        }
        let z = lambda.pairings[i];
        acc = acc.mul(gamma_laurent(z)).div(gamma_laurent(z + ka));
    }
    acc
}

/// `prod_{alpha > 0} Gamma(lambda(alpha^v)) / Gamma(lambda(alpha^v) + k_alpha)`.
pub fn c_tilde(rs: &RootSystem, lambda: &SpectralPoint, k: &Multiplicity) -> CFunctionValue {
    CFunctionValue::from_laurent(c_tilde_laurent(rs, lambda, k))
}

fn rho_point(rs: &RootSystem, k: &Multiplicity) -> SpectralPoint {
    SpectralPoint::from_rat(rs, &rho(rs, k))
}

fn normalizer(rs: &RootSystem, k: &Multiplicity) -> Result<Laurent> {
    let n = c_tilde_laurent(rs, &rho_point(rs, k), k);
    match n.order {
        0 => Ok(n),
        o if o > 0 => Err(Error::NormalizationSingular("zero")),
        _ => Err(Error::NormalizationSingular("a pole")),
    }
}

/// `c(lambda, k) = c~(lambda, k) / c~(rho(k), k)`.
pub fn c_normalized(rs: &RootSystem, lambda: &SpectralPoint, k: &Multiplicity) -> Result<CFunctionValue> {
    let n = normalizer(rs, k)?;
    Ok(CFunctionValue::from_laurent(c_tilde_laurent(rs, lambda, k).div(n)))
}

/// `prod_{alpha > 0} (lambda(alpha^v) + k_alpha) / lambda(alpha^v)`.
pub fn c_yang(rs: &RootSystem, lambda: &SpectralPoint, k: &Multiplicity) -> CFunctionValue {
    let mut acc = Laurent::ONE;
    for i in rs.positive_roots() {
        let ka = k.k_f(rs, i);
        if ka == 0.0 {
            continue;
        }
        let z = lambda.pairings[i];
        acc = acc.mul(linear_laurent(z + ka)).div(linear_laurent(z));
    }
    CFunctionValue::from_laurent(acc)
}

/// `c~(rho(k), k)^{-1} prod_{alpha > 0} Gamma(lambda(alpha^v) + 1) / Gamma(lambda(alpha^v) + k_alpha + 1)`.
pub fn c_upper(rs: &RootSystem, lambda: &SpectralPoint, k: &Multiplicity) -> Result<CFunctionValue> {
    let n = normalizer(rs, k)?;
    let mut acc = Laurent::ONE;
    for i in rs.positive_roots() {
        let ka = k.k_f(rs, i);
        if ka == 0.0 {
            continue;
        }
        let z = lambda.pairings[i];
        acc = acc.mul(gamma_laurent(z + 1.0)).div(gamma_laurent(z + ka + 1.0));
    }
    Ok(CFunctionValue::from_laurent(acc.div(n)))
}

/// `c~(rho, k)^2 prod'_{alpha in R} |Gamma(lambda(alpha^v) + k_alpha)| / prod'_{alpha in R} |Gamma(lambda(alpha^v))|`.
///
/// `omit_num[i]` / `omit_den[i]` drop the numerator / denominator factor of
/// root `i`; they must be decided structurally by the caller.
pub fn density_with_omissions(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &SpectralPoint,
    omit_num: &[bool],
    omit_den: &[bool],
) -> Result<f64> {
    let n = normalizer(rs, k)?;
    let mut log = 2.0 * n.log.re;
    let mut order = 0;
    for i in 0..rs.num_roots() {
        let ka = k.k_f(rs, i);
        let z = lambda.pairings[i];
        if !omit_num[i] {
            let g = gamma_laurent(z + ka);
            log += g.log.re;
            order += g.order;
        }
        if !omit_den[i] {
            let g = gamma_laurent(z);
            log -= g.log.re;
            order -= g.order;
        }
    }
    Ok(match order {
        0 => log.exp(),
        o if o > 0 => 0.0,
        _ => f64::INFINITY,
    })
}

/// Density on `i a*`: `1 / |c(lambda) c(-lambda)|`.
pub fn density_full(rs: &RootSystem, k: &Multiplicity, lambda: &SpectralPoint) -> Result<f64> {
    let none = vec![false; rs.num_roots()];
    density_with_omissions(rs, k, lambda, &none, &none)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::rootsys::Family;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::function::gamma::gamma as sgamma;

    fn sys(f: Family, n: usize) -> RootSystem {
        RootSystem::build(f, n).unwrap()
    }

    fn point_with_pairing(rs: &RootSystem, p: Complex64) -> SpectralPoint {
        // rank one: lambda = p/2 * alpha
        SpectralPoint::new(rs, vec![p * 0.5])
    }

    fn mult(rs: &RootSystem, a: (i64, i64), b: (i64, i64)) -> Multiplicity {
        Multiplicity::new(rs, vec![rat(a.0, a.1), rat(b.0, b.1)][..rs.num_orbits()].to_vec()).unwrap()
    }

    #[test]
    fn k_zero_gives_one() {
        let rs = sys(Family::B, 2);
        let k0 = Multiplicity::equal(&rs, rat(0, 1));
        let l = SpectralPoint::new(&rs, vec![Complex64::new(0.3, 1.0), Complex64::new(-0.7, 0.2)]);
        assert_eq!(c_tilde(&rs, &l, &k0).as_complex(), Complex64::new(1.0, 0.0));
        assert_eq!(c_normalized(&rs, &l, &k0).unwrap().as_complex(), Complex64::new(1.0, 0.0));
        assert_eq!(c_yang(&rs, &l, &k0).as_complex(), Complex64::new(1.0, 0.0));
        assert_eq!(c_upper(&rs, &l, &k0).unwrap().as_complex(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn a1_values_against_statrs() {
        let a1 = sys(Family::A, 1);
        let k = Multiplicity::equal(&a1, rat(-1, 4));
        let l = point_with_pairing(&a1, Complex64::new(0.5, 0.0));
        let c = c_tilde(&a1, &l, &k);
        assert_eq!(c.flag, Flag::Finite);
        let expect = sgamma(0.5) / sgamma(0.25);
        assert!(((c.value.re - expect) / expect).abs() < 1e-13);
        assert!(c.value.im.abs() < 1e-15);
        // pole at lambda(alpha^v) = -1
        let p = c_tilde(&a1, &point_with_pairing(&a1, Complex64::new(-1.0, 0.0)), &k);
        assert_eq!(p.flag, Flag::Pole);
        // zero of c_Y at lambda(alpha^v) = -k
        let z = c_yang(&a1, &point_with_pairing(&a1, Complex64::new(0.25, 0.0)), &k);
        assert_eq!(z.flag, Flag::Zero);
    }

    #[test]
    fn normalized_at_rho_is_one() {
        for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::G2, 2), (Family::A, 3), (Family::C, 3)] {
            let rs = sys(f, n);
            let k = mult(&rs, (-1, 7), (-1, 9));
            let c = c_normalized(&rs, &rho_point(&rs, &k), &k).unwrap();
            assert!((c.value - 1.0).norm() < 1e-13, "{f}{n}");
        }
    }

    #[test]
    fn pole_approach_is_monotone() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-1, 5));
        // approach lambda(alpha_1^v) = -1 along a line
        let target = a2.from_pairings(&[rat(-1, 1), rat(3, 10)]);
        let dir = [0.37, 0.11];
        let mut prev = 0.0;
        for j in 1..=5 {
            let eps = 10f64.powi(-j);
            let coords: Vec<Complex64> =
                target.iter().zip(dir).map(|(t, d)| Complex64::new(to_f64(t) + eps * d, 0.0)).collect();
            let v = c_normalized(&a2, &SpectralPoint::new(&a2, coords), &k).unwrap().value.norm();
            assert!(v > prev);
            prev = v;
        }
        let at: Vec<Complex64> = target.iter().map(|t| Complex64::new(to_f64(t), 0.0)).collect();
        assert_eq!(c_normalized(&a2, &SpectralPoint::new(&a2, at), &k).unwrap().flag, Flag::Pole);
    }

    #[test]
    fn normalization_singular_detected() {
        // A1 with k = -1/2: rho(alpha^v) = -1/2, c~(rho) = Gamma(-1/2)/Gamma(-1) = 0
        let a1 = sys(Family::A, 1);
        let k = Multiplicity::equal(&a1, rat(-1, 2));
        let l = point_with_pairing(&a1, Complex64::new(0.3, 0.0));
        assert_eq!(c_normalized(&a1, &l, &k), Err(Error::NormalizationSingular("zero")));
    }

    #[test]
    fn inverse_c_upper_bounded_on_imaginary_axis() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-1, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut best, mut best_r) = (0.0f64, 0.0f64);
        let r_max = 50.0;
        for _ in 0..1000 {
            let r = r_max * rng.random::<f64>().sqrt();
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            let l = SpectralPoint::new(&a2, vec![Complex64::new(0.0, r * t.cos()), Complex64::new(0.0, r * t.sin())]);
            let v = 1.0 / c_upper(&a2, &l, &k).unwrap().value.norm();
            if v > best {
                best = v;
                best_r = r;
            }
        }
        assert!(best.is_finite());
        assert!(best_r < 0.5 * r_max, "max at radius {best_r}");
    }

    #[test]
    fn full_density_is_inverse_c_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::G2, 2)] {
            let rs = sys(f, n);
            let k = mult(&rs, (-1, 10), (-3, 40));
            for _ in 0..50 {
                let coords: Vec<Complex64> = (0..n).map(|_| Complex64::new(0.0, 8.0 * rng.random::<f64>() - 4.0)).collect();
                let l = SpectralPoint::new(&rs, coords);
                let c1 = c_normalized(&rs, &l, &k).unwrap().value;
                let c2 = c_normalized(&rs, &l.neg(&rs), &k).unwrap().value;
                let f1 = density_full(&rs, &k, &l).unwrap();
                let f2 = 1.0 / (c1 * c2).norm();
                assert!(((f1 - f2) / f2).abs() < 1e-10, "{f}{n}");
                assert!(f1 >= 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn yang_factorization(re0 in -3.0f64..3.0, im0 in -5.0f64..5.0, re1 in -3.0f64..3.0, im1 in -5.0f64..5.0) {
            for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::G2, 2)] {
                let rs = sys(f, n);
                let k = mult(&rs, (-1, 10), (-1, 20));
                let coords = vec![Complex64::new(re0, im0), Complex64::new(re1, im1)][..n].to_vec();
                let l = SpectralPoint::new(&rs, coords);
                let c = c_normalized(&rs, &l, &k).unwrap();
                let y = c_yang(&rs, &l, &k);
                let u = c_upper(&rs, &l, &k).unwrap();
                if c.is_finite() && y.is_finite() && u.is_finite() {
                    let prod = y.value * u.value;
                    prop_assert!(((c.value - prod) / c.value).norm() < 1e-12);
                }
            }
        }
    }
}
