//! Trigonometric polynomials on the weight lattice and Cherednik operators,
//! in exact rational arithmetic.
//!
//! A weight `mu` is keyed by its integer coordinates `mu(alpha_i^v)`. The
//! element `xi` of `a` is given in the basis of simple coroots, so `alpha(xi)`
//! and `mu(xi)` are rational. All inner products use the reference metric.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, rat_int, Rat};
use crate::rootsys::RootSystem;
use crate::weights::{rho, Multiplicity};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrigPolynomial {
    terms: BTreeMap<Vec<i64>, Rat>,
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat, rank: usize) -> Self {
        Self::monomial(vec![0; rank], c)
    }

    pub fn monomial(weight: Vec<i64>, c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(weight, c);
        p
    }

    /// Monomial from simple-root coordinates; fails unless the vector lies in `P`.
    pub fn from_root_coords(rs: &RootSystem, mu: &[Rat], c: Rat) -> Result<Self> {
        let w: Vec<Rat> = rs.to_pairings(mu);
        if w.iter().any(|x| !x.is_integer()) {
            return Err(Error::Contract("exponent is not in the weight lattice".into()));
        }
        Ok(Self::monomial(w.iter().map(|x| num::ToPrimitive::to_i64(&x.to_integer()).unwrap()).collect(), c))
    }

    pub fn add_term(&mut self, weight: Vec<i64>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(weight) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rat_int(-1)))
    }

    /// Product of trig polynomials.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term(a.iter().zip(b).map(|(x, y)| x + y).collect(), ca * cb);
            }
        }
        out
    }

    /// Multiplies every coefficient `c_mu` by `g(mu)`.
    fn map_coeffs(&self, g: impl Fn(&[i64], &Rat) -> Rat) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), g(w, c));
        }
        out
    }

    pub fn apply_weyl(&self, rs: &RootSystem, w: &[Vec<i64>]) -> Self {
        let mut out = Self::zero();
        for (mu, c) in &self.terms {
            out.add_term(weyl_on_weight(rs, w, mu), c.clone());
        }
        out
    }

    pub fn is_w_invariant(&self, rs: &RootSystem) -> bool {
        rs.weyl_group().iter().all(|w| &self.apply_weyl(rs, w) == self)
    }

    /// `sum_{mu in W lambda} e^mu` for a weight `lambda` (weight coordinates).
    pub fn orbit_sum(rs: &RootSystem, lambda: &[i64]) -> Self {
        let orbit: BTreeSet<Vec<i64>> = rs.weyl_group().iter().map(|w| weyl_on_weight(rs, w, lambda)).collect();
        let mut out = Self::zero();
        for mu in orbit {
            out.add_term(mu, rat_int(1));
        }
        out
    }
}

/// Weight coordinates of `alpha_i` (a row of the Cartan matrix transposed).
fn root_weight(rs: &RootSystem, root: usize) -> Vec<i64> {
    let a = rs.root(root);
    (0..rs.rank).map(|j| (0..rs.rank).map(|l| a[l] * rs.cartan()[j][l]).sum()).collect()
}

/// `mu(alpha^v)` for a weight given by its weight coordinates.
fn pair_weight(rs: &RootSystem, mu: &[i64], root: usize) -> i64 {
    let c = rs.coroot_coords(root);
    let s: Rat = c.iter().zip(mu).fold(Rat::zero(), |acc, (x, &m)| acc + x * rat_int(m));
    num::ToPrimitive::to_i64(&s.to_integer()).unwrap()
}

fn weyl_on_weight(rs: &RootSystem, w: &[Vec<i64>], mu: &[i64]) -> Vec<i64> {
    let r: Vec<Rat> = rs.from_pairings(&mu.iter().map(|&m| rat_int(m)).collect::<Vec<_>>());
    let img: Vec<Rat> = rs.act(w, &r);
    rs.to_pairings(&img).iter().map(|x| num::ToPrimitive::to_i64(&x.to_integer()).unwrap()).collect()
}

/// `(1 - e^{-alpha})^{-1} (1 - r_alpha) f`, computed as a finite geometric sum.
pub fn divided_difference(rs: &RootSystem, root: usize, f: &TrigPolynomial) -> TrigPolynomial {
    let aw = root_weight(rs, root);
    let mut out = TrigPolynomial::zero();
    for (mu, c) in f.terms() {
        let m = pair_weight(rs, mu, root);
        if m > 0 {
            for j in 0..m {
                out.add_term(mu.iter().zip(&aw).map(|(x, a)| x - j * a).collect(), c.clone());
            }
        } else if m < 0 {
            for j in 1..=-m {
                out.add_term(mu.iter().zip(&aw).map(|(x, a)| x + j * a).collect(), -c.clone());
            }
        }
    }
    out
}

/// `mu(xi)` for `xi` in simple-coroot coordinates.
fn weight_at(mu: &[i64], xi: &[Rat]) -> Rat {
    mu.iter().zip(xi).fold(Rat::zero(), |acc, (&m, x)| acc + rat_int(m) * x)
}

/// `D_xi f = d_xi f + sum_{alpha > 0} k_alpha alpha(xi) (1 - e^{-alpha})^{-1}(1 - r_alpha) f - rho(k)(xi) f`.
pub fn apply_cherednik(rs: &RootSystem, k: &Multiplicity, xi: &[Rat], f: &TrigPolynomial) -> TrigPolynomial {
    let rho_w = rs.to_pairings(&rho(rs, k));
    let rho_xi = rho_w.iter().zip(xi).fold(Rat::zero(), |acc, (r, x)| acc + r * x);
    let mut out = f.map_coeffs(|mu, c| c * (weight_at(mu, xi) - &rho_xi));
    for i in rs.positive_roots() {
        let ka = k.k(rs, i);
        if ka.is_zero() {
            continue;
        }
        let a_xi = weight_at(&root_weight(rs, i), xi);
        if a_xi.is_zero() {
            continue;
        }
        out = out.add(&divided_difference(rs, i, f).scale(&(ka * a_xi)));
    }
    out
}

/// Inverse Gram matrix of the simple coroots (reference metric).
fn inverse_coroot_gram(rs: &RootSystem) -> Vec<Vec<Rat>> {
    let g = rs.gram_ref();
    let n = rs.rank;
    let gv: Vec<Vec<Rat>> =
        (0..n).map(|a| (0..n).map(|b| rat_int(4) * &g[a][b] / (&g[a][a] * &g[b][b])).collect()).collect();
    linalg::inverse(&gv).expect("coroot Gram is invertible")
}

/// `sum_i D_{X_i}^2 f` for an orthonormal basis `X_i` of `a`, written as
/// `sum_{a,b} (G^v)^{-1}_{ab} D_a D_b` over simple coroots.
pub fn cherednik_casimir(rs: &RootSystem, k: &Multiplicity, f: &TrigPolynomial) -> TrigPolynomial {
    let n = rs.rank;
    let ginv = inverse_coroot_gram(rs);
    let unit = |a: usize| -> Vec<Rat> { (0..n).map(|j| rat_int(i64::from(j == a))).collect() };
    let mut out = TrigPolynomial::zero();
    for b in 0..n {
        let db = apply_cherednik(rs, k, &unit(b), f);
        for a in 0..n {
            if ginv[a][b].is_zero() {
                continue;
            }
            out = out.add(&apply_cherednik(rs, k, &unit(a), &db).scale(&ginv[a][b]));
        }
    }
    out
}

/// `L(k) f` for W-invariant `f`, using
/// `coth(alpha/2) d_alpha f = (1 + e^{-alpha}) (1 - e^{-alpha})^{-1} (1 - r_alpha) (d_alpha f / 2)`.
pub fn apply_l_invariant(rs: &RootSystem, k: &Multiplicity, f: &TrigPolynomial) -> Result<TrigPolynomial> {
    if !f.is_w_invariant(rs) {
        return Err(Error::Contract("L(k) is applied exactly only to W-invariant polynomials".into()));
    }
    let n = rs.rank;
    let ginv = inverse_coroot_gram(rs);
    let norm2 = |mu: &[i64]| -> Rat {
        let mut s = Rat::zero();
        for a in 0..n {
            for b in 0..n {
                s += &ginv[a][b] * rat_int(mu[a] * mu[b]);
            }
        }
        s
    };
    let mut out = f.map_coeffs(|mu, c| c * norm2(mu));
    for i in rs.positive_roots() {
        let ka = k.k(rs, i);
        if ka.is_zero() {
            continue;
        }
        let a = rs.root_rat(i);
        let half_len = rs.inner_ref(&a, &a) / rat_int(2);
        // d_alpha e^mu = (mu, alpha) e^mu = mu(alpha^v) (alpha, alpha)/2 e^mu
        let half_deriv = f.map_coeffs(|mu, c| c * rat_int(pair_weight(rs, mu, i)) * &half_len / rat_int(2));
        let dd = divided_difference(rs, i, &half_deriv);
        let one_plus = TrigPolynomial::constant(rat_int(1), n).add(&TrigPolynomial::monomial(
            root_weight(rs, i).iter().map(|x| -x).collect(),
            rat_int(1),
        ));
        out = out.add(&one_plus.mul(&dd).scale(ka));
    }
    Ok(out)
}

/// `(rho(k), rho(k))` in the reference metric.
pub fn rho_norm2(rs: &RootSystem, k: &Multiplicity) -> Rat {
    let r = rho(rs, k);
    rs.inner_ref(&r, &r)
}

/// A pseudo-random polynomial with small rational coefficients, for tests.
pub fn sample_polynomial(rank: usize, terms: usize, box_size: i64, seed: u64) -> TrigPolynomial {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut p = TrigPolynomial::zero();
    for _ in 0..terms {
        let w: Vec<i64> = (0..rank).map(|_| rng.random_range(-box_size..=box_size)).collect();
        let c = Rat::new(rng.random_range(-9i64..=9).into(), rng.random_range(1i64..=5).into());
        p.add_term(w, c);
    }
    p
}

/// The dominant weights with coordinates in `0..=bound`.
pub fn dominant_box(rank: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (0..=bound).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out.retain(|w| w.iter().all(|c| !c.is_negative()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::rootsys::Family;

    fn sys(f: Family, n: usize) -> RootSystem {
        RootSystem::build(f, n).unwrap()
    }

    #[test]
    fn cherednik_on_constants() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-2, 7));
        let xi = vec![rat(3, 5), rat(-1, 4)];
        let one = TrigPolynomial::constant(rat_int(1), 2);
        let rho_xi = a2.to_pairings(&rho(&a2, &k)).iter().zip(&xi).fold(Rat::zero(), |acc, (r, x)| acc + r * x);
        assert_eq!(apply_cherednik(&a2, &k, &xi, &one), one.scale(&-rho_xi));
    }

    #[test]
    fn divided_difference_is_exact_quotient() {
        // (1 - e^{-alpha}) * DD(f) == (1 - r_alpha) f
        let b2 = sys(Family::B, 2);
        let f = sample_polynomial(2, 6, 3, 5);
        for i in b2.positive_roots() {
            let dd = divided_difference(&b2, i, &f);
            let lhs = TrigPolynomial::constant(rat_int(1), 2)
                .sub(&TrigPolynomial::monomial(root_weight(&b2, i).iter().map(|x| -x).collect(), rat_int(1)))
                .mul(&dd);
            let refl = b2
                .weyl_group()
                .iter()
                .find(|w| {
                    let r = b2.root_rat(i);
                    b2.act(w, &r) == r.iter().map(|x| -x).collect::<Vec<_>>()
                        && (0..2).all(|j| {
                            let e: Vec<Rat> = (0..2).map(|t| rat_int(i64::from(t == j))).collect();
                            b2.act(w, &e) == b2.reflect(i, &e)
                        })
                })
                .unwrap();
            assert_eq!(lhs, f.sub(&f.apply_weyl(&b2, refl)));
        }
    }

    #[test]
    fn orbit_sums_are_invariant() {
        for (f, n) in [(Family::A, 2), (Family::B, 2), (Family::G2, 2)] {
            let rs = sys(f, n);
            for lam in dominant_box(n, 2) {
                assert!(TrigPolynomial::orbit_sum(&rs, &lam).is_w_invariant(&rs));
            }
        }
    }

    #[test]
    fn cherednik_operators_commute() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-3, 11));
        for seed in 0..20u64 {
            let f = sample_polynomial(2, 5, 3, seed);
            let xi = vec![rat(seed as i64 % 5 - 2, 3), rat(1, 2)];
            let eta = vec![rat(1, 7), rat(2 - seed as i64 % 3, 5)];
            let a = apply_cherednik(&a2, &k, &xi, &apply_cherednik(&a2, &k, &eta, &f));
            let b = apply_cherednik(&a2, &k, &eta, &apply_cherednik(&a2, &k, &xi, &f));
            assert!(a.sub(&b).is_zero(), "seed {seed}");
        }
    }

    #[test]
    fn casimir_identity_on_invariants() {
        for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::G2, 2)] {
            let rs = sys(f, n);
            let k = Multiplicity::new(&rs, vec![rat(-1, 4), rat(-2, 9)][..rs.num_orbits()].to_vec()).unwrap();
            let rr = rho_norm2(&rs, &k);
            for lam in dominant_box(n, 2) {
                let p = TrigPolynomial::orbit_sum(&rs, &lam);
                let lhs = cherednik_casimir(&rs, &k, &p);
                let rhs = apply_l_invariant(&rs, &k, &p).unwrap().add(&p.scale(&rr));
                assert!(lhs.sub(&rhs).is_zero(), "{f}{n} lambda={lam:?}");
            }
        }
    }

    #[test]
    fn l_requires_invariance() {
        let a2 = sys(Family::A, 2);
        let k = Multiplicity::equal(&a2, rat(-1, 4));
        let p = TrigPolynomial::monomial(vec![1, 0], rat_int(1));
        assert!(matches!(apply_l_invariant(&a2, &k, &p), Err(Error::Contract(_))));
        assert!(TrigPolynomial::from_root_coords(&a2, &[rat(1, 2), rat(0, 1)], rat_int(1)).is_err());
    }
}
