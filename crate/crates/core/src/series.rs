//! The asymptotically free series `Phi`, the hypergeometric function `F`,
//! and termwise application of `L(k)` to exponential series.
//!
//! Substituting `Phi = sum Delta_kappa e^{lambda + rho + kappa}` into
//! `L(k) Phi = (lambda + rho, lambda - rho) Phi`, with
//! `(1 + e^a)/(1 - e^a) = 1 + 2 sum_{j>=1} e^{j a}` on the negative chamber,
//! gives
//!
//! ```text
//! (<k,k> + 2<lambda,k>) Delta_k = 2 sum_{a > 0} k_a sum_{j >= 1} <lambda + rho + k - j a, a> Delta_{k - j a}
//! ```
//!
//! (`k` on the left is the lattice index `kappa`). The sign on the right is
//! fixed by [`apply_l_series`], which applies `L(k)` directly; the two agree
//! exactly in rational arithmetic.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::complex::Complex64;
use num::{One, Zero};
use serde::Serialize;

use crate::cfunc::{c_normalized, Flag, SpectralPoint};
use crate::error::{Error, Result};
use crate::linalg::{rat_int, to_f64, Rat};
use crate::poly::RatFunc;
use crate::rootsys::RootSystem;
use crate::weights::{rho, Multiplicity};

/// Coefficient field for the recurrence: exact rationals, rational
/// functions of a parameter, or complex floats.
pub trait Scalar:
    Clone
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rat(q: &Rat) -> Self;
    fn from_i64(n: i64) -> Self {
        Self::from_rat(&rat_int(n))
    }
    /// Whether a divisor of size `scale` must be treated as zero.
    fn is_singular(&self, scale: f64) -> bool;
    fn magnitude(&self) -> f64;
}

impl Scalar for Rat {
    fn from_rat(q: &Rat) -> Self {
        q.clone()
    }
    fn is_singular(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        to_f64(self).abs()
    }
}

impl Scalar for Complex64 {
    fn from_rat(q: &Rat) -> Self {
        Complex64::new(to_f64(q), 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn is_singular(&self, scale: f64) -> bool {
        self.norm() < 1e-12 * scale.max(1.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Scalar for RatFunc {
    fn from_rat(q: &Rat) -> Self {
        RatFunc::constant(q.clone())
    }
    fn is_singular(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}

/// The cone `Q_+` up to a height cutoff, ordered by height.
#[derive(Debug, Clone, PartialEq)]
pub struct QPlusIndex {
    pub kappas: Vec<Vec<i64>>,
    /// `shells[h]` is the index range of height `h`.
    pub shells: Vec<std::ops::Range<usize>>,
    lookup: HashMap<Vec<i64>, usize>,
}

fn compositions(total: i64, parts: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl QPlusIndex {
    pub fn new(rank: usize, cutoff: usize) -> Self {
        let mut kappas = Vec::new();
        let mut shells = Vec::new();
        for h in 0..=cutoff as i64 {
            let start = kappas.len();
            compositions(h, rank, &mut Vec::new(), &mut kappas);
            shells.push(start..kappas.len());
        }
        let lookup = kappas.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        QPlusIndex { kappas, shells, lookup }
    }

    pub fn get(&self, kappa: &[i64]) -> Option<usize> {
        self.lookup.get(kappa).copied()
    }

    pub fn cutoff(&self) -> usize {
        self.shells.len() - 1
    }

    pub fn len(&self) -> usize {
        self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty()
    }
}

/// `sum_{kappa in Q_+, ht <= N} coeffs[kappa] e^{nu0 + kappa}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSeries<S> {
    pub nu0: Vec<S>,
    pub index: QPlusIndex,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> ExponentSeries<S> {
    pub fn zero(nu0: Vec<S>, index: QPlusIndex) -> Self {
        let coeffs = vec![S::zero(); index.len()];
        ExponentSeries { nu0, index, coeffs }
    }

    pub fn cutoff(&self) -> usize {
        self.index.cutoff()
    }

    pub fn coeff(&self, kappa: &[i64]) -> S {
        self.index.get(kappa).map(|i| self.coeffs[i].clone()).unwrap_or_else(S::zero)
    }

    pub fn scale(&self, a: &S) -> Self {
        ExponentSeries {
            nu0: self.nu0.clone(),
            index: self.index.clone(),
            coeffs: self.coeffs.iter().map(|c| a.clone() * c.clone()).collect(),
        }
    }

    /// Coefficientwise sum; both series must share `nu0` and cutoff.
    pub fn add(&self, o: &Self) -> Self {
        ExponentSeries {
            nu0: self.nu0.clone(),
            index: self.index.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

fn gram_s<S: Scalar>(rs: &RootSystem) -> Vec<Vec<S>> {
    rs.gram_ref().iter().map(|r| r.iter().map(S::from_rat).collect()).collect()
}

fn form_s<S: Scalar>(g: &[Vec<S>], a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            acc = acc + ai.clone() * g[i][j].clone() * bj.clone();
        }
    }
    acc
}

fn int_vec<S: Scalar>(v: &[i64]) -> Vec<S> {
    v.iter().map(|&c| S::from_i64(c)).collect()
}

/// Coefficients `Delta_kappa(lambda, k)` for `ht(kappa) <= cutoff`; `nu0 = lambda + rho(k)`.
pub fn series_coefficients<S: Scalar>(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &[S],
    cutoff: usize,
) -> Result<ExponentSeries<S>> {
    let n = rs.rank;
    let g = gram_s::<S>(rs);
    let rho_s: Vec<S> = rho(rs, k).iter().map(S::from_rat).collect();
    let nu0: Vec<S> = lambda.iter().zip(&rho_s).map(|(a, b)| a.clone() + b.clone()).collect();
    let index = QPlusIndex::new(n, cutoff);

    struct RootData<S> {
        two_k: S,
        root: Vec<i64>,
        nu0_a: S,
        aa: S,
        /// `(alpha_i, alpha)` for each simple root.
        simple_a: Vec<S>,
    }
    let roots: Vec<RootData<S>> = rs
        .positive_roots()
        .filter(|&i| !k.k(rs, i).is_zero())
        .map(|i| {
            let a = int_vec::<S>(rs.root(i));
            RootData {
                two_k: S::from_rat(&(k.k(rs, i) * rat_int(2))),
                root: rs.root(i).to_vec(),
                nu0_a: form_s(&g, &nu0, &a),
                aa: form_s(&g, &a, &a),
                simple_a: (0..n).map(|s| {
                    let e: Vec<S> = (0..n).map(|t| S::from_i64(i64::from(s == t))).collect();
                    form_s(&g, &e, &a)
                }).collect(),
            }
        })
        .collect();
    let lam_simple: Vec<S> = (0..n)
        .map(|s| {
            let e: Vec<S> = (0..n).map(|t| S::from_i64(i64::from(s == t))).collect();
            form_s(&g, lambda, &e)
        })
        .collect();
    let gram_rat = rs.gram_ref();

    let mut coeffs: Vec<S> = Vec::with_capacity(index.len());
    coeffs.push(S::one());
    for idx in 1..index.len() {
        let kappa = &index.kappas[idx];
        let kk: Rat = crate::linalg::form(gram_rat, &kappa.iter().map(|&c| rat_int(c)).collect::<Vec<_>>(), &kappa.iter().map(|&c| rat_int(c)).collect::<Vec<_>>());
        let mut lk = S::zero();
        for (s, &c) in kappa.iter().enumerate() {
            if c != 0 {
                lk = lk + S::from_i64(c) * lam_simple[s].clone();
            }
        }
        let denom = S::from_rat(&kk) + S::from_i64(2) * lk;
        if denom.is_singular(to_f64(&kk)) {
            return Err(Error::PoleHyperplane { kappa: kappa.clone() });
        }
        let mut rhs = S::zero();
        for rd in &roots {
            let mut ka = S::zero();
            for (s, &c) in kappa.iter().enumerate() {
                if c != 0 {
                    ka = ka + S::from_i64(c) * rd.simple_a[s].clone();
                }
            }
            let base = rd.nu0_a.clone() + ka;
            let mut inner = S::zero();
            let mut j = 1i64;
            loop {
                let prev: Vec<i64> = kappa.iter().zip(&rd.root).map(|(a, b)| a - j * b).collect();
                if prev.iter().any(|&c| c < 0) {
                    break;
                }
                let d = &coeffs[index.get(&prev).unwrap()];
                if !d.is_zero() {
                    inner = inner + (base.clone() - S::from_i64(j) * rd.aa.clone()) * d.clone();
                }
                j += 1;
            }
            rhs = rhs + rd.two_k.clone() * inner;
        }
        coeffs.push(rhs / denom);
    }
    Ok(ExponentSeries { nu0, index, coeffs })
}

/// Termwise `L(k)` on an exponential series, truncated at its own cutoff.
pub fn apply_l_series<S: Scalar>(rs: &RootSystem, k: &Multiplicity, series: &ExponentSeries<S>) -> ExponentSeries<S> {
    let g = gram_s::<S>(rs);
    let mut out = ExponentSeries::zero(series.nu0.clone(), series.index.clone());
    let cutoff = series.cutoff() as i64;
    for (idx, kappa) in series.index.kappas.iter().enumerate() {
        let a = &series.coeffs[idx];
        if a.is_zero() {
            continue;
        }
        let mu: Vec<S> = series.nu0.iter().zip(kappa).map(|(v, &c)| v.clone() + S::from_i64(c)).collect();
        out.coeffs[idx] = out.coeffs[idx].clone() + form_s(&g, &mu, &mu) * a.clone();
        for i in rs.positive_roots() {
            let kr = k.k(rs, i);
            if kr.is_zero() {
                continue;
            }
            let root = rs.root(i);
            let c = -(S::from_rat(kr) * form_s(&g, &mu, &int_vec::<S>(root)) * a.clone());
            out.coeffs[idx] = out.coeffs[idx].clone() + c.clone();
            let h: i64 = root.iter().sum();
            let mut j = 1i64;
            while kappa.iter().sum::<i64>() + j * h <= cutoff {
                let target: Vec<i64> = kappa.iter().zip(root).map(|(x, r)| x + j * r).collect();
                let t = series.index.get(&target).unwrap();
                out.coeffs[t] = out.coeffs[t].clone() + S::from_i64(2) * c.clone();
                j += 1;
            }
        }
    }
    out
}

/// `(lambda + rho, lambda - rho)` in the reference form.
pub fn eigenvalue<S: Scalar>(rs: &RootSystem, k: &Multiplicity, lambda: &[S]) -> S {
    let g = gram_s::<S>(rs);
    let rho_s: Vec<S> = rho(rs, k).iter().map(S::from_rat).collect();
    let p: Vec<S> = lambda.iter().zip(&rho_s).map(|(a, b)| a.clone() + b.clone()).collect();
    let m: Vec<S> = lambda.iter().zip(&rho_s).map(|(a, b)| a.clone() - b.clone()).collect();
    form_s(&g, &p, &m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub cutoff: usize,
    pub all_zero: bool,
    pub max_residual: f64,
    pub nonzero_at: Vec<Vec<i64>>,
}

/// Compares `L(k) Phi` with `(lambda + rho, lambda - rho) Phi` coefficientwise.
pub fn verify_simultaneous_eigen<S: Scalar>(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &[S],
    cutoff: usize,
) -> Result<EigenReport> {
    let phi = series_coefficients(rs, k, lambda, cutoff)?;
    let lphi = apply_l_series(rs, k, &phi);
    let ev = eigenvalue(rs, k, lambda);
    let mut max_residual = 0.0f64;
    let mut nonzero_at = Vec::new();
    for (i, kappa) in phi.index.kappas.iter().enumerate() {
        let r = lphi.coeffs[i].clone() - ev.clone() * phi.coeffs[i].clone();
        if !r.is_zero() {
            nonzero_at.push(kappa.clone());
            max_residual = max_residual.max(r.magnitude());
        }
    }
    Ok(EigenReport { cutoff, all_zero: nonzero_at.is_empty(), max_residual, nonzero_at })
}

/// `Delta_{n alpha}` of a rank-one system as rational functions of `t = lambda(alpha^v)`.
pub fn rank_one_symbolic(rs: &RootSystem, k: &Multiplicity, cutoff: usize) -> Result<Vec<RatFunc>> {
    if rs.rank != 1 {
        return Err(Error::Contract("symbolic coefficients are implemented in rank one".into()));
    }
    // lambda = (t/2) alpha
    let lambda = vec![RatFunc::var() * RatFunc::constant(Rat::new(1.into(), 2.into()))];
    let s = series_coefficients(rs, k, &lambda, cutoff)?;
    Ok(s.coeffs)
}

// ---- floating point evaluation ------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_estimate: f64,
    pub shells_used: usize,
}

/// Evaluates a float series at `x` (orthonormal coordinates, open negative
/// chamber), stopping once three consecutive height shells are below
/// `tol` relative to the partial sum.
pub fn eval_series(rs: &RootSystem, series: &ExponentSeries<Complex64>, x: &[f64], tol: f64) -> Result<SeriesValue> {
    let a: Vec<f64> = (0..rs.rank).map(|i| rs.eval_root(i, x)).collect();
    if a.iter().any(|&v| v >= 0.0) {
        return Err(Error::OutsideChamber);
    }
    let nu0_x: Complex64 = series.nu0.iter().zip(&a).map(|(c, v)| c * v).sum();
    let mut partial = Complex64::new(0.0, 0.0);
    let mut shells: Vec<f64> = Vec::new();
    for (h, range) in series.index.shells.iter().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for idx in range.clone() {
            let c = series.coeffs[idx];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let kx: f64 = series.index.kappas[idx].iter().zip(&a).map(|(&kc, v)| kc as f64 * v).sum();
            s += c * kx.exp();
        }
        partial += s;
        shells.push(s.norm());
        if h >= 3 {
            let scale = partial.norm();
            let last = &shells[shells.len() - 3..];
            if last.iter().all(|&v| v <= tol * scale) {
                let r = if shells[h - 1] > 0.0 { (shells[h] / shells[h - 1]).min(0.99) } else { 0.0 };
                let tail = shells[h] * r / (1.0 - r);
                let e = nu0_x.exp();
                return Ok(SeriesValue { value: e * partial, tail_estimate: tail * e.norm(), shells_used: h + 1 });
            }
        }
    }
    Err(Error::IncreaseCutoff { cutoff: series.cutoff(), shells: shells[shells.len().saturating_sub(3)..].to_vec() })
}

/// `Phi(lambda, k; x)` with coefficients computed to `cutoff`.
pub fn eval_phi(rs: &RootSystem, k: &Multiplicity, lambda: &SpectralPoint, x: &[f64], cutoff: usize, tol: f64) -> Result<SeriesValue> {
    let s = series_coefficients(rs, k, &lambda.coords, cutoff)?;
    eval_series(rs, &s, x, tol)
}

/// Precomputed Weyl-sum data for `F(lambda, k; .)` at a fixed `lambda`.
#[derive(Debug, Clone)]
pub struct HypergeometricF {
    /// `(w index, c(-w lambda), Phi(w lambda) series)` for the nonzero terms.
    pub terms: Vec<(usize, Complex64, ExponentSeries<Complex64>)>,
    pub cutoff: usize,
}

impl HypergeometricF {
    pub fn new(rs: &RootSystem, k: &Multiplicity, lambda: &SpectralPoint, cutoff: usize) -> Result<Self> {
        if lambda.pairings.iter().any(|p| p.norm() < 1e-12) {
            return Err(Error::Contract("lambda is not regular".into()));
        }
        let mut terms = Vec::new();
        for (wi, w) in rs.weyl_group().iter().enumerate() {
            let wl = SpectralPoint::new(rs, rs.act_c(w, &lambda.coords));
            let c = c_normalized(rs, &wl.neg(rs), k).map_err(|e| Error::WeylTerm { w: wi, source: Box::new(e) })?;
            match c.flag {
                Flag::Zero => continue,
                Flag::Pole => {
                    return Err(Error::WeylTerm {
                        w: wi,
                        source: Box::new(Error::Contract("c(-w lambda) has a pole".into())),
                    })
                }
                Flag::Finite => {}
            }
            let s = series_coefficients(rs, k, &wl.coords, cutoff).map_err(|e| Error::WeylTerm { w: wi, source: Box::new(e) })?;
            terms.push((wi, c.value, s));
        }
        Ok(HypergeometricF { terms, cutoff })
    }

    /// Evaluates at `x` in the open negative chamber.
    pub fn eval_chamber(&self, rs: &RootSystem, x: &[f64], tol: f64) -> Result<SeriesValue> {
        let mut value = Complex64::new(0.0, 0.0);
        let mut tail = 0.0;
        let mut shells = 0;
        for (wi, c, s) in &self.terms {
            let v = eval_series(rs, s, x, tol).map_err(|e| Error::WeylTerm { w: *wi, source: Box::new(e) })?;
            value += c * v.value;
            tail += c.norm() * v.tail_estimate;
            shells = shells.max(v.shells_used);
        }
        Ok(SeriesValue { value, tail_estimate: tail, shells_used: shells })
    }

    /// Evaluates at any `x` off the walls, using W-invariance in `x`.
    pub fn eval(&self, rs: &RootSystem, x: &[f64], tol: f64) -> Result<SeriesValue> {
        self.eval_chamber(rs, &to_negative_chamber(rs, x)?, tol)
    }
}

/// The W-translate of `x` in the open negative chamber.
pub fn to_negative_chamber(rs: &RootSystem, x: &[f64]) -> Result<Vec<f64>> {
    for i in rs.positive_roots() {
        if rs.eval_root(i, x) == 0.0 {
            return Err(Error::WallSingularity { root: i });
        }
    }
    for w in rs.weyl_orthogonal() {
        let wx: Vec<f64> = w.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
        if (0..rs.rank).all(|i| rs.eval_root(i, &wx) < 0.0) {
            return Ok(wx);
        }
    }
    Err(Error::Internal("no Weyl translate lands in the negative chamber".into()))
}

/// `F(lambda, k; x)`, doubling the cutoff until the three-shell rule holds.
pub fn eval_f(rs: &RootSystem, k: &Multiplicity, lambda: &SpectralPoint, x: &[f64], tol: f64) -> Result<SeriesValue> {
    let xc = to_negative_chamber(rs, x)?;
    let max_cutoff = if rs.rank == 1 { 4096 } else if rs.rank == 2 { 256 } else { 64 };
    let mut cutoff = 16;
    loop {
        let f = HypergeometricF::new(rs, k, lambda, cutoff)?;
        match f.eval_chamber(rs, &xc, tol) {
            Err(Error::WeylTerm { source, .. }) if matches!(*source, Error::IncreaseCutoff { .. }) && cutoff < max_cutoff => {
                cutoff *= 2;
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::poly::negative_integers;
    use crate::rootsys::Family;
    use crate::weights::{l_operator_fd, rho_f};
    use proptest::prelude::*;

    fn sys(f: Family, n: usize) -> RootSystem {
        RootSystem::build(f, n).unwrap()
    }

    #[test]
    fn shells_are_complete() {
        let q = QPlusIndex::new(2, 4);
        assert_eq!(q.len(), 15);
        assert_eq!(q.shells[3].len(), 4);
        let q3 = QPlusIndex::new(3, 2);
        assert_eq!(q3.len(), 1 + 3 + 6);
    }

    #[test]
    fn k_zero_series_is_free() {
        let a2 = sys(Family::A, 2);
        let k0 = Multiplicity::equal(&a2, rat(0, 1));
        let s = series_coefficients(&a2, &k0, &[rat(1, 3), rat(2, 7)], 6).unwrap();
        assert!(s.coeffs[1..].iter().all(Zero::is_zero));
        // L(0) e^lambda = <lambda,lambda> e^lambda
        let l = apply_l_series(&a2, &k0, &s);
        let lam = [rat(1, 3), rat(2, 7)];
        assert_eq!(l.coeffs[0], a2.inner_ref(&lam, &lam));
    }

    #[test]
    fn a1_first_coefficient() {
        let a1 = sys(Family::A, 1);
        for (kn, kd, ln, ld) in [(-1, 4, 1, 3), (-2, 5, -3, 7), (1, 2, 5, 2)] {
            let k = Multiplicity::equal(&a1, rat(kn, kd));
            let big_l = rat(ln, ld);
            let lambda = [&big_l / rat_int(2)];
            let s = series_coefficients(&a1, &k, &lambda, 3).unwrap();
            let kk = rat(kn, kd);
            let expect = &kk * (&big_l + &kk) / (rat_int(1) + &big_l);
            assert_eq!(s.coeffs[1], expect);
        }
    }

    #[test]
    fn a1_pole_is_named() {
        let a1 = sys(Family::A, 1);
        let k = Multiplicity::equal(&a1, rat(-1, 4));
        let err = series_coefficients(&a1, &k, &[rat(-1, 2)], 3).unwrap_err();
        assert_eq!(err, Error::PoleHyperplane { kappa: vec![1] });
        let err = series_coefficients(&a1, &k, &[rat(-3, 2)], 5).unwrap_err();
        assert_eq!(err, Error::PoleHyperplane { kappa: vec![3] });
    }

    #[test]
    fn termwise_operator_identity_exact() {
        for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::G2, 2)] {
            let rs = sys(f, n);
            let k = Multiplicity::new(&rs, vec![rat(-1, 4), rat(-1, 6)][..rs.num_orbits()].to_vec()).unwrap();
            let lambda: Vec<Rat> = vec![rat(2, 7), rat(-1, 5)][..n].to_vec();
            let rep = verify_simultaneous_eigen(&rs, &k, &lambda, 8).unwrap();
            assert!(rep.all_zero, "{f}{n}: residual at {:?}", rep.nonzero_at);
        }
    }

    #[test]
    fn linearity_of_termwise_l() {
        let b2 = sys(Family::B, 2);
        let k = Multiplicity::new(&b2, vec![rat(-1, 3), rat(-1, 5)]).unwrap();
        let s1 = series_coefficients(&b2, &k, &[rat(1, 2), rat(1, 9)], 5).unwrap();
        let mut s2 = ExponentSeries::zero(s1.nu0.clone(), s1.index.clone());
        for (i, c) in s2.coeffs.iter_mut().enumerate() {
            *c = rat(i as i64 * 3 - 7, 11);
        }
        let (a, b) = (rat(3, 4), rat(-2, 3));
        let lhs = apply_l_series(&b2, &k, &s1.scale(&a).add(&s2.scale(&b)));
        let rhs = apply_l_series(&b2, &k, &s1).scale(&a).add(&apply_l_series(&b2, &k, &s2).scale(&b));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rank_one_denominators() {
        let a1 = sys(Family::A, 1);
        let k = Multiplicity::equal(&a1, rat(-2, 7));
        let coeffs = rank_one_symbolic(&a1, &k, 8).unwrap();
        for (n, c) in coeffs.iter().enumerate().skip(1) {
            let roots = c.denominator_roots(&negative_integers(8)).expect("denominator splits over -1..-8");
            assert!(roots.iter().all(|(r, _)| r >= &-rat_int(n as i64)), "n={n}: {roots:?}");
            assert!(roots.iter().any(|(r, _)| r == &-rat_int(n as i64)), "n={n}: {roots:?}");
        }
    }

    #[test]
    fn phi_is_one_term_deep_in_chamber() {
        let a1 = sys(Family::A, 1);
        let k = Multiplicity::equal(&a1, rat(-1, 4));
        let lambda = SpectralPoint::real(&a1, &[0.3]);
        // alpha(x) = -10
        let x = [-10.0 / a1.root_orth(0)[0]];
        let v = eval_phi(&a1, &k, &lambda, &x, 40, 1e-14).unwrap();
        let lead = ((0.3 + to_f64(&rho(&a1, &k)[0])) * -10.0f64).exp();
        assert!(((v.value.re - lead) / lead).abs() < (-10.0f64).exp());
        let k0 = Multiplicity::equal(&a1, rat(0, 1));
        let v0 = eval_phi(&a1, &k0, &lambda, &x, 40, 1e-14).unwrap();
        assert!((v0.value.re - (0.3f64 * -10.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn doubling_cutoff_is_stable() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-1, 5));
        let lambda = SpectralPoint::new(&a2, vec![Complex64::new(0.2, 1.3), Complex64::new(-0.1, 0.4)]);
        let x = a2.to_orth(&[-0.4, -0.3]);
        let tol = 1e-10;
        let s1 = series_coefficients(&a2, &k, &lambda.coords, 40).unwrap();
        let s2 = series_coefficients(&a2, &k, &lambda.coords, 80).unwrap();
        let v1 = eval_series(&a2, &s1, &x, tol).unwrap();
        let v2 = eval_series(&a2, &s2, &x, tol).unwrap();
        assert!((v1.value - v2.value).norm() < 10.0 * tol * v1.value.norm());
    }

    #[test]
    fn increase_cutoff_reported() {
        let a1 = sys(Family::A, 1);
        let k = Multiplicity::equal(&a1, rat(-1, 4));
        let lambda = SpectralPoint::real(&a1, &[0.3]);
        let x = [-0.01];
        assert!(matches!(eval_phi(&a1, &k, &lambda, &x, 10, 1e-12), Err(Error::IncreaseCutoff { .. })));
        assert_eq!(eval_phi(&a1, &k, &lambda, &[0.2], 10, 1e-12), Err(Error::OutsideChamber));
    }

    fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
        // z < 0: Pfaff transformation to |w| < 1
        let w = z / (z - 1.0);
        let mut term = 1.0;
        let mut sum = 1.0;
        let (a2, b2) = (a, c - b);
        for n in 0..4000 {
            let nf = n as f64;
            term *= (a2 + nf) * (b2 + nf) / ((c + nf) * (nf + 1.0)) * w;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        (1.0 - z).powf(-a) * sum
    }

    #[test]
    fn a1_matches_gauss_closed_form() {
        // F = 2F1((k+L)/2, (k-L)/2; k+1/2; -sinh^2(alpha(x)/2))
        let a1 = sys(Family::A, 1);
        for (kn, kd) in [(-1, 4), (-2, 5), (-1, 10)] {
            let k = Multiplicity::equal(&a1, rat(kn, kd));
            let kf = kn as f64 / kd as f64;
            for big_l in [0.37, 1.3, -0.61] {
                let lambda = SpectralPoint::real(&a1, &[big_l / 2.0]);
                for ax in [-0.5, -1.5, -4.0] {
                    let x = [ax / a1.root_orth(0)[0]];
                    let v = eval_f(&a1, &k, &lambda, &x, 1e-13).unwrap().value;
                    let z = -(0.5 * ax).sinh().powi(2);
                    let expect = hyp2f1((kf + big_l) / 2.0, (kf - big_l) / 2.0, kf + 0.5, z);
                    assert!(((v.re - expect) / expect).abs() < 1e-9, "k={kf} L={big_l} ax={ax}: {v} vs {expect}");
                    assert!(v.im.abs() < 1e-9 * expect.abs());
                }
            }
        }
    }

    #[test]
    fn f_normalization_near_rho() {
        for (f, n) in [(Family::A, 1), (Family::A, 2)] {
            let rs = sys(f, n);
            let k = Multiplicity::equal(&rs, rat(-1, 4));
            let eps = 1e-3;
            let l: Vec<f64> = rho_f(&rs, &k).iter().map(|c| c * (1.0 + eps)).collect();
            let lambda = SpectralPoint::real(&rs, &l);
            let pts: Vec<Vec<f64>> = if n == 1 {
                vec![vec![-0.3], vec![-0.7], vec![-1.0], vec![-1.5], vec![-2.0]]
            } else {
                [[-0.5, -0.3], [-0.8, -0.9], [-1.0, -0.4], [-0.3, -1.2], [-1.1, -1.1]].iter().map(|p| rs.to_orth(p)).collect()
            };
            for x in pts {
                let v = eval_f(&rs, &k, &lambda, &x, 1e-12).unwrap().value;
                assert!((v - 1.0).norm() <= 10.0 * eps, "{f}{n} x={x:?} F={v}");
            }
        }
    }

    #[test]
    fn f_eigen_equation_finite_differences() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-1, 5));
        let lambda = SpectralPoint::real(&a2, &[0.31, -0.17]);
        let f = HypergeometricF::new(&a2, &k, &lambda, 128).unwrap();
        let ev = eigenvalue(&a2, &k, &lambda.coords).re * a2.scale.value;
        let func = |x: &[f64]| f.eval_chamber(&a2, x, 1e-14).unwrap().value.re;
        for p in [[-0.6, -0.5], [-1.0, -0.7]] {
            let x = a2.to_orth(&p);
            let d1 = l_operator_fd(&a2, &k, &func, &x, 2e-3);
            let d2 = l_operator_fd(&a2, &k, &func, &x, 1e-3);
            let lf = (4.0 * d2 - d1) / 3.0;
            let rhs = ev * func(&x);
            assert!(((lf - rhs) / rhs).abs() < 1e-6, "{lf} vs {rhs}");
        }
    }

    #[test]
    fn coefficient_shell_growth_is_geometric() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-1, 5));
        let lambda = SpectralPoint::new(&a2, vec![Complex64::new(0.1, 2.0), Complex64::new(0.2, -1.0)]);
        let s = series_coefficients(&a2, &k, &lambda.coords, 60).unwrap();
        let x0 = a2.to_orth(&[-0.2, -0.2]);
        let a: Vec<f64> = (0..2).map(|i| a2.eval_root(i, &x0)).collect();
        let maxes: Vec<f64> = s
            .index
            .shells
            .iter()
            .map(|r| {
                r.clone()
                    .map(|i| {
                        let kx: f64 = s.index.kappas[i].iter().zip(&a).map(|(&c, v)| c as f64 * v).sum();
                        s.coeffs[i].norm() * kx.exp()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let bound = maxes.iter().cloned().fold(0.0, f64::max);
        assert!(bound.is_finite() && bound < 10.0);
        assert!(maxes[60] < maxes[1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn f_is_w_invariant_in_lambda(a in 0.05f64..1.0, b in 0.05f64..1.0, im in -2.0f64..2.0) {
            let a2 = sys(Family::A, 2);
            let k = Multiplicity::equal(&a2, rat(-1, 5));
            let lambda = SpectralPoint::new(&a2, vec![Complex64::new(a, im), Complex64::new(-b, 0.5 * im)]);
            let x = a2.to_orth(&[-0.7, -0.6]);
            let base = eval_f(&a2, &k, &lambda, &x, 1e-13).unwrap().value;
            for w in a2.weyl_group() {
                let wl = SpectralPoint::new(&a2, a2.act_c(w, &lambda.coords));
                let v = eval_f(&a2, &k, &wl, &x, 1e-13).unwrap().value;
                prop_assert!((v - base).norm() < 1e-10 * base.norm().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn exact_identity_random_rationals(ln in -20i64..20, ld in 1i64..9, mn in -20i64..20, kn in 1i64..12) {
            let a2 = sys(Family::A, 2);
            let k = Multiplicity::equal(&a2, rat(-kn, 29));
            let lambda = [rat(ln, ld), rat(mn, 13)];
            match verify_simultaneous_eigen(&a2, &k, &lambda, 6) {
                Ok(rep) => prop_assert!(rep.all_zero),
                Err(Error::PoleHyperplane { .. }) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
