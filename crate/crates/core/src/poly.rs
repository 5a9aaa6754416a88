//! Univariate polynomials and rational functions over `Q`, used to run the
//! series recurrence with a symbolic spectral parameter.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use crate::linalg::{rat_int, Rat};

/// Coefficients in increasing degree; no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(Vec<Rat>);

impl Poly {
    pub fn new(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly(c)
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `t`.
    pub fn var() -> Self {
        Poly::new(vec![Rat::zero(), Rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rat {
        self.0.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        self.0.iter().rev().fold(Rat::zero(), |acc, c| acc * t + c)
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rat::one() / self.lead()))
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree().unwrap();
        let mut r = self.0.clone();
        let mut q = vec![Rat::zero(); r.len().saturating_sub(dd).max(1)];
        let lead = d.lead();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let f = r.last().unwrap() / &lead;
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &f * c;
            }
            q[shift] = f;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (Poly::new(q), Poly::new(r))
    }

    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Multiplicity of `t = root` as a root, and the cofactor.
    pub fn deflate(&self, root: &Rat) -> (usize, Poly) {
        let lin = Poly::new(vec![-root.clone(), Rat::one()]);
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() {
            let (q, r) = p.div_rem(&lin);
            if !r.is_zero() {
                break;
            }
            p = q;
            m += 1;
        }
        (m, p)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new(
            (0..n)
                .map(|i| self.0.get(i).cloned().unwrap_or_else(Rat::zero) + o.0.get(i).cloned().unwrap_or_else(Rat::zero))
                .collect(),
        )
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        self + (-o)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut c = vec![Rat::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})*t"),
                _ => format!("({c})*t^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// Reduced quotient `num / den` with monic denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc { num, den: Poly::constant(Rat::one()) };
        }
        let g = Poly::gcd(&num, &den);
        let num = num.div_rem(&g).0;
        let den = den.div_rem(&g).0;
        let l = den.lead();
        RatFunc { num: num.scale(&(Rat::one() / &l)), den: den.scale(&(Rat::one() / &l)) }
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc { num: Poly::constant(c), den: Poly::constant(Rat::one()) }
    }

    pub fn var() -> Self {
        RatFunc { num: Poly::var(), den: Poly::constant(Rat::one()) }
    }

    pub fn eval(&self, t: &Rat) -> Option<Rat> {
        let d = self.den.eval(t);
        (!d.is_zero()).then(|| self.num.eval(t) / d)
    }

    /// Rational roots of the denominator, found by deflating the candidates
    /// and requiring a constant cofactor.
    pub fn denominator_roots(&self, candidates: &[Rat]) -> Option<Vec<(Rat, usize)>> {
        let mut p = self.den.clone();
        let mut out = Vec::new();
        for c in candidates {
            let (m, q) = p.deflate(c);
            if m > 0 {
                out.push((c.clone(), m));
                p = q;
            }
        }
        (p.degree() == Some(0)).then_some(out)
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(self.num + o.num, self.den);
        }
        RatFunc::new(self.num * o.den.clone() + o.num * self.den.clone(), self.den * o.den)
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -self.num, den: self.den }
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, o: RatFunc) -> RatFunc {
        self + (-o)
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, o: RatFunc) -> RatFunc {
        RatFunc::new(self.num * o.num, self.den * o.den)
    }
}

impl Div for RatFunc {
    type Output = RatFunc;
    fn div(self, o: RatFunc) -> RatFunc {
        assert!(!o.num.is_zero(), "division by zero rational function");
        RatFunc::new(self.num * o.den, self.den * o.num)
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::constant(Rat::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFunc {
    fn one() -> Self {
        RatFunc::constant(Rat::one())
    }
}

/// Integers `-1, ..., -n` as rationals.
pub fn negative_integers(n: i64) -> Vec<Rat> {
    (1..=n).map(|m| -rat_int(m)).collect()
}

pub fn is_negative_integer(q: &Rat) -> bool {
    q.is_integer() && q.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| rat_int(x)).collect())
    }

    #[test]
    fn division_and_gcd() {
        // (t+1)(t+2) / (t+1) = t+2
        let a = p(&[2, 3, 1]);
        let (q, r) = a.div_rem(&p(&[1, 1]));
        assert_eq!(q, p(&[2, 1]));
        assert!(r.is_zero());
        let g = Poly::gcd(&p(&[2, 3, 1]), &p(&[3, 4, 1]));
        assert_eq!(g, p(&[1, 1]));
    }

    #[test]
    fn rational_function_reduces() {
        let f = RatFunc::new(p(&[2, 3, 1]), p(&[3, 4, 1]));
        assert_eq!(f.num, p(&[2, 1]));
        assert_eq!(f.den, p(&[3, 1]));
        assert_eq!(f.eval(&rat(1, 1)), Some(rat(3, 4)));
        let roots = f.denominator_roots(&negative_integers(5)).unwrap();
        assert_eq!(roots, vec![(rat(-3, 1), 1)]);
        let g = RatFunc::new(p(&[1]), p(&[1, 0, 1]));
        assert!(g.denominator_roots(&negative_integers(5)).is_none());
    }

    #[test]
    fn field_identities() {
        let t = RatFunc::var();
        let one = RatFunc::one();
        let x = (t.clone() + one.clone()) / (t.clone() - one.clone());
        let y = x.clone() * ((t.clone() - one.clone()) / (t + one));
        assert_eq!(y, RatFunc::one());
        assert!((x.clone() - x).is_zero());
    }
}
