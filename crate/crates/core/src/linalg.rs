//! Small exact linear algebra over the rationals, plus the few float helpers
//! the numeric layers need. Dimensions here never exceed 3, so everything is
//! dense Gaussian elimination.

use num::bigint::BigInt;
use num::{BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rat) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses "p/q", a plain integer, or a finite decimal such as "-0.25" into an
/// exact rational. Decimals are read exactly (no float round trip).
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num::pow(BigInt::from(10), frac_part.len());
    let q = Rat::new(num, den);
    Ok(if neg { -q } else { q })
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

/// Bilinear form `a^T g b`.
pub fn form(g: &[Vec<Rat>], a: &[Rat], b: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            acc += ai * &g[i][j] * bj;
        }
    }
    acc
}

pub fn mat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..n).map(|j| row.iter().zip(b).fold(Rat::zero(), |acc, (x, br)| acc + x * &br[j])).collect())
        .collect()
}

pub fn identity(n: usize) -> Vec<Vec<Rat>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect()
}

pub fn transpose(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Reduced row echelon form; returns the reduced rows and pivot columns.
pub fn rref(rows: &[Vec<Rat>]) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rat>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rref(rows).1.len()
}

pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return Rat::zero() };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c].clone();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[c][c];
            for j in c..n {
                let sub = &f * &a[c][j];
                a[i][j] -= sub;
            }
        }
    }
    d
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    let aug: Vec<Vec<Rat>> = a.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect()).collect();
    let (r, piv) = rref(&aug);
    if piv.len() != n || piv.contains(&n) {
        return None;
    }
    Some(r.iter().map(|row| row[n].clone()).collect())
}

pub fn inverse(a: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = a.len();
    let cols: Option<Vec<Vec<Rat>>> = (0..n)
        .map(|j| {
            let e: Vec<Rat> = (0..n).map(|i| if i == j { Rat::one() } else { Rat::zero() }).collect();
            solve(a, &e)
        })
        .collect();
    cols.map(|c| transpose(&c))
}

/// General linear system `a x = b` (any shape). Returns one solution if the
/// system is consistent.
pub fn solve_general(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let aug: Vec<Vec<Rat>> = a.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect()).collect();
    let (r, piv) = rref(&aug);
    if piv.contains(&ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (row, &p) in r.iter().zip(&piv) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Coefficients `y` with `sum y_i basis_i = v`, for linearly independent `basis`.
pub fn coords_in_span(basis: &[Vec<Rat>], v: &[Rat]) -> Option<Vec<Rat>> {
    if basis.is_empty() {
        return v.iter().all(Zero::is_zero).then(Vec::new);
    }
    let a = transpose(basis);
    let y = solve_general(&a, v)?;
    (mat_vec(&a, &y) == v).then_some(y)
}

/// Basis of the null space `{x : a x = 0}`.
pub fn kernel(a: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    if a.is_empty() {
        return identity(ncols);
    }
    let (r, piv) = rref(a);
    (0..ncols)
        .filter(|c| !piv.contains(c))
        .map(|free| {
            let mut x = vec![Rat::zero(); ncols];
            x[free] = Rat::one();
            for (row, &p) in r.iter().zip(&piv) {
                x[p] = -row[free].clone();
            }
            x
        })
        .collect()
}

/// Z-basis of the lattice generated by integer vectors (row-style Hermite
/// reduction with Euclid steps). Zero rows are dropped.
pub fn integer_lattice_basis(vectors: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = vectors.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    for c in 0..ncols {
        loop {
            let nz: Vec<usize> = (0..m.len()).filter(|&i| !m[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| m[i][c].abs()).unwrap();
            for &i in &nz {
                if i == p {
                    continue;
                }
                let q = m[i][c].div_floor(&m[p][c]);
                for j in 0..ncols {
                    let sub = &q * &m[p][j];
                    m[i][j] -= sub;
                }
            }
        }
        if let Some(p) = (0..m.len()).find(|&i| !m[i][c].is_zero()) {
            out.push(m.remove(p));
        }
    }
    out
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            if i == j {
                l[i][i] = (g[i][i] - s).sqrt();
            } else {
                l[i][j] = (g[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

pub fn det_f64(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    d
}
