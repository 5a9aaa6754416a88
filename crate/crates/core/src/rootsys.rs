//! Irreducible reduced root systems of small rank.
//!
//! Vectors of `a*` are stored by their coordinates in the basis of simple
//! roots, so roots are integer vectors and every combinatorial question is
//! exact. The inner product is a rational reference Gram matrix (short roots
//! of squared length 2) times a global scale `t`, chosen so that the coroot
//! lattice has covolume 1 in `a`. Pairings `lambda(alpha^v)` do not depend on
//! `t`; only lengths, volumes and the float frame do.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, rat_int, to_f64, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E6,
    E7,
    E8,
    F4,
    G2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E6 => "E6",
            Family::E7 => "E7",
            Family::E8 => "E8",
            Family::F4 => "F4",
            Family::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "A" => Family::A,
            "B" => Family::B,
            "C" => Family::C,
            "D" => Family::D,
            "E6" => Family::E6,
            "E7" => Family::E7,
            "E8" => Family::E8,
            "F4" => Family::F4,
            "G2" | "G" => Family::G2,
            other => return Err(Error::UnsupportedType(format!("unknown family {other:?}"))),
        })
    }
}

/// The exact scale `t = radicand^(1/degree)` multiplying the reference form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scale {
    #[serde(serialize_with = "ser_rat")]
    pub radicand: Rat,
    pub degree: usize,
    pub value: f64,
}

fn ser_rat_vec<S: serde::Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

fn ser_rat<S: serde::Serializer>(q: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// An integer matrix acting on simple-root coordinates.
pub type WeylElement = Vec<Vec<i64>>;

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    /// Reference Gram matrix of the simple roots.
    gram_ref: Vec<Vec<Rat>>,
    /// `cartan[i][j] = alpha_j(alpha_i^v)`.
    cartan: Vec<Vec<i64>>,
    /// All roots in simple-root coordinates; positives first (by height),
    /// then their negatives in the same order.
    roots: Vec<Vec<i64>>,
    n_positive: usize,
    /// `coroot_fn[i]` is the rational covector with `lambda(alpha_i^v) = coroot_fn[i] . lambda`.
    coroot_fn: Vec<Vec<Rat>>,
    coroot_fn_f: Vec<Vec<f64>>,
    orbit_of: Vec<usize>,
    n_orbits: usize,
    pub scale: Scale,
    /// Transposed Cholesky factor: orthonormal coordinates are `frame * lambda`.
    frame: Vec<Vec<f64>>,
    roots_orth: Vec<Vec<f64>>,
    weyl: Vec<WeylElement>,
    degrees: Vec<u32>,
}

/// W-orbits of roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitData {
    pub orbits: Vec<Vec<usize>>,
    /// `h_i = #R_i / n`.
    #[serde(serialize_with = "ser_rat_vec")]
    pub h: Vec<Rat>,
}

fn reference_gram(family: Family, rank: usize) -> Result<(Vec<Vec<i64>>, Vec<u32>)> {
    let unsupported = || Error::UnsupportedType(format!("{family}{rank}"));
    let mut g = vec![vec![0i64; rank]; rank];
    let degrees: Vec<u32> = match family {
        Family::A if (1..=3).contains(&rank) => {
            for i in 0..rank {
                g[i][i] = 2;
                if i + 1 < rank {
                    g[i][i + 1] = -1;
                    g[i + 1][i] = -1;
                }
            }
            (2..=rank as u32 + 1).collect()
        }
        Family::B | Family::C if (2..=3).contains(&rank) => {
            // B: alpha_n short; C: alpha_n long.
            let (body, last) = if family == Family::B { (4, 2) } else { (2, 4) };
            for i in 0..rank {
                g[i][i] = if i + 1 == rank { last } else { body };
            }
            for i in 0..rank - 1 {
                let off = if i + 2 == rank { -2 } else { -body / 2 };
                g[i][i + 1] = off;
                g[i + 1][i] = off;
            }
            (1..=rank as u32).map(|i| 2 * i).collect()
        }
        Family::D if rank == 3 => {
            // Node 0 joined to nodes 1 and 2.
            for i in 0..3 {
                g[i][i] = 2;
            }
            g[0][1] = -1;
            g[1][0] = -1;
            g[0][2] = -1;
            g[2][0] = -1;
            vec![2, 3, 4]
        }
        Family::G2 if rank == 2 => {
            g[0][0] = 2;
            g[1][1] = 6;
            g[0][1] = -3;
            g[1][0] = -3;
            vec![2, 6]
        }
        _ => return Err(unsupported()),
    };
    Ok((g, degrees))
}

impl RootSystem {
    /// Builds the root system of the given type at the covolume-one normalization.
    pub fn build(family: Family, rank: usize) -> Result<Self> {
        let (g_int, degrees) = reference_gram(family, rank)?;
        let gram_ref: Vec<Vec<Rat>> = g_int.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect();
        let n = rank;
        let cartan: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| 2 * g_int[i][j] / g_int[i][i]).collect()).collect();

        // Close the simple roots under simple reflections.
        let simple_reflect = |i: usize, v: &[i64]| -> Vec<i64> {
            let p: i64 = (0..n).map(|j| v[j] * cartan[i][j]).sum();
            let mut w = v.to_vec();
            w[i] -= p;
            w
        };
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut queue: VecDeque<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        while let Some(v) = queue.pop_front() {
            if seen.insert(v.clone()) {
                for i in 0..n {
                    queue.push_back(simple_reflect(i, &v));
                }
            }
            if seen.len() > 1000 {
                return Err(Error::Internal("root closure did not terminate".into()));
            }
        }
        let mut positive: Vec<Vec<i64>> = seen.into_iter().filter(|v| v.iter().all(|&c| c >= 0)).collect();
        positive.sort_by(|a, b| a.iter().sum::<i64>().cmp(&b.iter().sum::<i64>()).then_with(|| b.cmp(a)));
        let n_positive = positive.len();
        let mut roots = positive.clone();
        roots.extend(positive.iter().map(|v| v.iter().map(|c| -c).collect::<Vec<_>>()));

        let coroot_fn: Vec<Vec<Rat>> = roots
            .iter()
            .map(|a| {
                let a_q: Vec<Rat> = a.iter().map(|&c| rat_int(c)).collect();
                let ga = linalg::mat_vec(&gram_ref, &a_q);
                let len2 = linalg::dot(&a_q, &ga);
                ga.iter().map(|x| rat_int(2) * x / &len2).collect()
            })
            .collect();
        let coroot_fn_f = coroot_fn.iter().map(|v| v.iter().map(to_f64).collect()).collect();

        // Orbits are separated by length in a reduced irreducible system.
        let lens: Vec<Rat> = roots.iter().map(|a| {
            let a_q: Vec<Rat> = a.iter().map(|&c| rat_int(c)).collect();
            linalg::form(&gram_ref, &a_q, &a_q)
        }).collect();
        let mut distinct: Vec<Rat> = lens.clone();
        distinct.sort();
        distinct.dedup();
        let orbit_of: Vec<usize> = lens.iter().map(|l| distinct.iter().position(|d| d == l).unwrap()).collect();

        // Scale: det of the coroot Gram (reference) = radicand, t^n = radicand.
        let simple_coroot_gram: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| rat_int(4) * &gram_ref[i][j] / (&gram_ref[i][i] * &gram_ref[j][j]))
                    .collect()
            })
            .collect();
        let radicand = linalg::det(&simple_coroot_gram);
        let value = to_f64(&radicand).powf(1.0 / n as f64);
        let scale = Scale { radicand, degree: n, value };

        let gram_f: Vec<Vec<f64>> = gram_ref.iter().map(|r| r.iter().map(|x| value * to_f64(x)).collect()).collect();
        let chol = linalg::cholesky(&gram_f);
        let frame: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| chol[j][i]).collect()).collect();
        let roots_orth = roots
            .iter()
            .map(|a| (0..n).map(|i| (0..n).map(|j| frame[i][j] * a[j] as f64).sum()).collect())
            .collect();

        let mut rs = RootSystem {
            family,
            rank,
            gram_ref,
            cartan,
            roots,
            n_positive,
            coroot_fn,
            coroot_fn_f,
            orbit_of,
            n_orbits: distinct.len(),
            scale,
            frame,
            roots_orth,
            weyl: Vec::new(),
            degrees,
        };
        rs.weyl = rs.generate_weyl_group()?;
        let expected: u32 = rs.degrees.iter().product();
        if rs.weyl.len() != expected as usize {
            return Err(Error::Internal(format!("|W| = {} but product of degrees = {expected}", rs.weyl.len())));
        }
        Ok(rs)
    }

    /// Generates W from the simple reflections by breadth-first closure.
    pub fn generate_weyl_group(&self) -> Result<Vec<WeylElement>> {
        let n = self.rank;
        let gens: Vec<WeylElement> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|m| (0..n).map(|j| i64::from(m == j) - if m == i { self.cartan[i][j] } else { 0 }).collect())
                    .collect()
            })
            .collect();
        let bound: usize = self.degrees.iter().product::<u32>() as usize * n.max(1) * 4;
        let id: WeylElement = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        let mut seen: HashSet<WeylElement> = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([id]);
        let mut steps = 0usize;
        while let Some(m) = queue.pop_front() {
            if !seen.insert(m.clone()) {
                continue;
            }
            steps += 1;
            if steps > bound {
                return Err(Error::Internal("Weyl group closure exceeded its bound".into()));
            }
            for g in &gens {
                queue.push_back(int_mat_mul(g, &m));
            }
            order.push(m);
        }
        Ok(order)
    }

    pub fn dim(&self) -> usize {
        self.rank
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn num_positive(&self) -> usize {
        self.n_positive
    }

    pub fn positive_roots(&self) -> std::ops::Range<usize> {
        0..self.n_positive
    }

    pub fn root(&self, i: usize) -> &[i64] {
        &self.roots[i]
    }

    pub fn root_rat(&self, i: usize) -> Vec<Rat> {
        self.roots[i].iter().map(|&c| rat_int(c)).collect()
    }

    pub fn roots(&self) -> &[Vec<i64>] {
        &self.roots
    }

    pub fn negative_of(&self, i: usize) -> usize {
        (i + self.n_positive) % self.roots.len()
    }

    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        self.roots.iter().position(|r| r == v)
    }

    pub fn height(&self, i: usize) -> i64 {
        self.roots[i].iter().sum()
    }

    pub fn orbit(&self, i: usize) -> usize {
        self.orbit_of[i]
    }

    pub fn num_orbits(&self) -> usize {
        self.n_orbits
    }

    pub fn is_simply_laced(&self) -> bool {
        self.n_orbits == 1
    }

    pub fn gram_ref(&self) -> &[Vec<Rat>] {
        &self.gram_ref
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn exponents(&self) -> Vec<u32> {
        self.degrees.iter().map(|d| d - 1).collect()
    }

    pub fn coxeter_number(&self) -> u32 {
        *self.degrees.iter().max().unwrap()
    }

    pub fn weyl_group(&self) -> &[WeylElement] {
        &self.weyl
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl.len()
    }

    /// Reference inner product (scale-free).
    pub fn inner_ref(&self, a: &[Rat], b: &[Rat]) -> Rat {
        linalg::form(&self.gram_ref, a, b)
    }

    /// Covector of `alpha_i^v` acting on simple-root coordinates.
    pub fn coroot_functional(&self, i: usize) -> &[Rat] {
        &self.coroot_fn[i]
    }

    /// `lambda(alpha_i^v)`, exact.
    pub fn pairing(&self, lambda: &[Rat], i: usize) -> Rat {
        linalg::dot(&self.coroot_fn[i], lambda)
    }

    pub fn pairing_f(&self, lambda: &[f64], i: usize) -> f64 {
        self.coroot_fn_f[i].iter().zip(lambda).map(|(a, b)| a * b).sum()
    }

    pub fn pairing_c(&self, lambda: &[num::complex::Complex64], i: usize) -> num::complex::Complex64 {
        self.coroot_fn_f[i].iter().zip(lambda).map(|(a, b)| b * a).sum()
    }

    /// `alpha_i^v` in the basis of simple coroots (integer coordinates).
    pub fn coroot_coords(&self, i: usize) -> Vec<Rat> {
        let a = self.root_rat(i);
        let len2 = self.inner_ref(&a, &a);
        (0..self.rank).map(|j| &a[j] * &self.gram_ref[j][j] / &len2).collect()
    }

    /// `kappa^v = 2 kappa / (kappa, kappa)`, expressed as a vector of `a*`
    /// (identification through the inner product).
    pub fn dual_vector(&self, kappa: &[Rat]) -> Vec<Rat> {
        let len2 = self.inner_ref(kappa, kappa);
        kappa.iter().map(|c| rat_int(2) * c / &len2).collect()
    }

    pub fn reflect(&self, i: usize, lambda: &[Rat]) -> Vec<Rat> {
        let p = self.pairing(lambda, i);
        lambda.iter().zip(&self.roots[i]).map(|(l, &a)| l - &p * rat_int(a)).collect()
    }

    pub fn act(&self, w: &[Vec<i64>], lambda: &[Rat]) -> Vec<Rat> {
        w.iter().map(|row| row.iter().zip(lambda).fold(Rat::zero(), |acc, (&m, l)| acc + rat_int(m) * l)).collect()
    }

    pub fn act_f(&self, w: &[Vec<i64>], lambda: &[f64]) -> Vec<f64> {
        w.iter().map(|row| row.iter().zip(lambda).map(|(&m, l)| m as f64 * l).sum()).collect()
    }

    pub fn act_c(&self, w: &[Vec<i64>], lambda: &[num::complex::Complex64]) -> Vec<num::complex::Complex64> {
        w.iter().map(|row| row.iter().zip(lambda).map(|(&m, l)| l * m as f64).sum()).collect()
    }

    /// Permutation of root indices induced by `w`.
    pub fn root_permutation(&self, w: &[Vec<i64>]) -> Vec<usize> {
        let lookup: HashMap<&[i64], usize> = self.roots.iter().enumerate().map(|(i, r)| (r.as_slice(), i)).collect();
        self.roots
            .iter()
            .map(|r| {
                let img: Vec<i64> = w.iter().map(|row| row.iter().zip(r).map(|(a, b)| a * b).sum()).collect();
                lookup[img.as_slice()]
            })
            .collect()
    }

    /// Fundamental weights in simple-root coordinates.
    pub fn fundamental_weights(&self) -> Vec<Vec<Rat>> {
        let a: Vec<Vec<Rat>> = self.cartan.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect();
        let inv = linalg::inverse(&a).expect("Cartan matrix is invertible");
        (0..self.rank).map(|i| inv.iter().map(|row| row[i].clone()).collect()).collect()
    }

    /// Converts weight coordinates (`lambda(alpha_i^v)`) to simple-root coordinates.
    pub fn from_pairings(&self, pairings: &[Rat]) -> Vec<Rat> {
        let w = self.fundamental_weights();
        (0..self.rank).map(|j| w.iter().zip(pairings).fold(Rat::zero(), |acc, (wi, p)| acc + &wi[j] * p)).collect()
    }

    pub fn to_pairings(&self, lambda: &[Rat]) -> Vec<Rat> {
        (0..self.rank).map(|i| self.pairing(lambda, i)).collect()
    }

    /// Highest root among the short roots (the highest root if simply laced).
    pub fn highest_short_root(&self) -> usize {
        let short_orbit = 0;
        self.positive_roots().filter(|&i| self.orbit_of[i] == short_orbit).max_by_key(|&i| self.height(i)).unwrap()
    }

    pub fn orbit_data(&self) -> OrbitData {
        let orbits: Vec<Vec<usize>> =
            (0..self.n_orbits).map(|o| (0..self.roots.len()).filter(|&i| self.orbit_of[i] == o).collect()).collect();
        let h = orbits.iter().map(|o| Rat::new(BigInt::from(o.len()), BigInt::from(self.rank))).collect();
        OrbitData { orbits, h }
    }

    // ---- float frame -------------------------------------------------

    /// Orthonormal coordinates of a vector of `a*` (scaled metric).
    pub fn to_orth(&self, lambda: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|row| row.iter().zip(lambda).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn root_orth(&self, i: usize) -> &[f64] {
        &self.roots_orth[i]
    }

    /// `alpha_i(x)` for `x` in orthonormal coordinates of `a`.
    pub fn eval_root(&self, i: usize, x: &[f64]) -> f64 {
        self.roots_orth[i].iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Scaled inner product of vectors given in simple-root coordinates.
    pub fn inner_f(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += a[i] * to_f64(&self.gram_ref[i][j]) * b[j];
            }
        }
        s * self.scale.value
    }

    /// Scaled squared length of root `i`.
    pub fn root_len2(&self, i: usize) -> f64 {
        self.roots_orth[i].iter().map(|x| x * x).sum()
    }

    /// Simple coroots in orthonormal coordinates of `a`.
    pub fn simple_coroots_orth(&self) -> Vec<Vec<f64>> {
        (0..self.rank)
            .map(|i| {
                let l2 = self.root_len2(i);
                self.roots_orth[i].iter().map(|x| 2.0 * x / l2).collect()
            })
            .collect()
    }

    /// Weyl group elements as orthogonal matrices in orthonormal coordinates.
    /// With `G = t G_ref = L L^T` the matrix is `L^T (W G_ref^{-1}) L / t`,
    /// where the middle factor is exact.
    pub fn weyl_orthogonal(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.rank;
        let g_inv = linalg::inverse(&self.gram_ref).expect("Gram matrix is invertible");
        let lt = &self.frame;
        self.weyl
            .iter()
            .map(|w| {
                let wq: Vec<Vec<Rat>> = w.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect();
                let mid: Vec<Vec<f64>> =
                    linalg::mat_mul(&wq, &g_inv).iter().map(|r| r.iter().map(|x| to_f64(x) / self.scale.value).collect()).collect();
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let mut s = 0.0;
                                for a in 0..n {
                                    for b in 0..n {
                                        s += lt[i][a] * mid[a][b] * lt[j][b];
                                    }
                                }
                                s
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Simple-root coordinates `t_i = -alpha_i(x)` of the negative chamber and
    /// back. The map `x -> t` is linear; this returns its inverse matrix, i.e.
    /// columns are the points with `t = e_i`.
    pub fn chamber_frame(&self) -> Vec<Vec<f64>> {
        let a: Vec<Vec<f64>> = (0..self.rank).map(|i| self.roots_orth[i].iter().map(|x| -x).collect()).collect();
        invert_f64(&a)
    }

    // ---- convex hulls ------------------------------------------------

    /// Dominant representative of the W-orbit of `lambda`.
    pub fn dominant(&self, lambda: &[Rat]) -> Vec<Rat> {
        let mut v = lambda.to_vec();
        loop {
            match (0..self.rank).find(|&i| self.pairing(&v, i).is_negative()) {
                Some(i) => v = self.reflect(i, &v),
                None => return v,
            }
        }
    }

    /// True iff `point` lies in the convex hull of `W . orbit_generator`.
    pub fn hull_contains(&self, orbit_generator: &[Rat], point: &[Rat]) -> bool {
        self.hull_contains_union(&[orbit_generator.to_vec()], point)
    }

    /// Convex hull of a union of one or two W-orbits. Uses the dominance
    /// description: `p` lies in `conv(W g)` iff `g+ - p+` is a nonnegative
    /// combination of simple roots, and `conv(Wa) + conv(Wb) = conv(W(a+b))`
    /// for dominant `a, b`.
    pub fn hull_contains_union(&self, generators: &[Vec<Rat>], point: &[Rat]) -> bool {
        let p = self.dominant(point);
        let gens: Vec<Vec<Rat>> = generators.iter().map(|g| self.dominant(g)).collect();
        match gens.as_slice() {
            [] => false,
            [g] => g.iter().zip(&p).all(|(a, b)| a >= b),
            [a, b] => {
                // Need t in [0,1] with t*a_i + (1-t)*b_i - p_i >= 0 for all i.
                let mut lo = Rat::zero();
                let mut hi = Rat::one();
                for i in 0..self.rank {
                    let slope = &a[i] - &b[i];
                    let rhs = &p[i] - &b[i];
                    if slope.is_zero() {
                        if rhs.is_positive() {
                            return false;
                        }
                    } else if slope.is_positive() {
                        lo = lo.max(rhs / slope);
                    } else {
                        hi = hi.min(rhs / slope);
                    }
                }
                lo <= hi
            }
            _ => unimplemented!("hulls of more than two orbits are not needed in rank <= 3"),
        }
    }

    /// Coroots of all roots as vectors of `a*` (for hull questions about `R^v`).
    pub fn coroot_generators(&self) -> Vec<Vec<Rat>> {
        (0..self.n_orbits)
            .map(|o| {
                let i = self.positive_roots().find(|&i| self.orbit_of[i] == o).unwrap();
                self.dual_vector(&self.root_rat(i))
            })
            .collect()
    }

    // ---- lattices ----------------------------------------------------

    /// Index of the lattice spanned by `sub_basis` (vectors in simple-coroot
    /// coordinates) inside `Q^v`: `|det|` of the change of basis.
    pub fn lattice_index(&self, sub_basis: &[Vec<Rat>]) -> Result<Rat> {
        if sub_basis.len() != self.rank || linalg::rank(sub_basis) != self.rank {
            return Err(Error::DegenerateBasis(format!("{} vectors of rank {}", sub_basis.len(), linalg::rank(sub_basis))));
        }
        Ok(linalg::det(sub_basis).abs())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let o = self.orbit_data();
        serde_json::json!({
            "family": self.family.to_string(),
            "rank": self.rank,
            "scale": self.scale,
            "gram_reference": self.gram_ref.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "roots": self.roots.iter().enumerate().map(|(i, r)| serde_json::json!({
                "simple_coords": r,
                "exact": format!("({})^(1/{}) * gram_ref-length {}", self.scale.radicand, self.scale.degree,
                    self.inner_ref(&self.root_rat(i), &self.root_rat(i))),
                "orthonormal": self.roots_orth[i].iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>(),
                "positive": i < self.n_positive,
            })).collect::<Vec<_>>(),
            "weyl_order": self.weyl.len(),
            "weyl_matrices": self.weyl_orthogonal().iter().map(|m| m.iter().map(|r| r.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "degrees": self.degrees,
            "exponents": self.exponents(),
            "coxeter_number": self.coxeter_number(),
            "highest_short_root": self.roots[self.highest_short_root()],
            "orbits": o.orbits,
            "h": o.h.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        })
    }
}

fn int_mat_mul(a: &WeylElement, b: &WeylElement) -> WeylElement {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub(crate) fn invert_f64(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().enumerate().map(|(i, r)| {
        let mut row = r.clone();
        row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
        row
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        for x in m[c].iter_mut() {
            *x /= d;
        }
        for i in 0..n {
            if i != c {
                let f = m[i][c];
                for j in 0..2 * n {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Integer coset counting: number of integer points in the half-open
/// parallelepiped spanned by `basis`. Equals the lattice index; used as an
/// independent check of the determinant route.
pub fn count_cosets(basis: &[Vec<i64>]) -> usize {
    let n = basis.len();
    let b: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| rat_int(basis[j][i])).collect()).collect();
    let inv = linalg::inverse(&b).expect("nonsingular basis");
    let bound: i64 = basis.iter().map(|v| v.iter().map(|x| x.abs()).sum::<i64>()).sum();
    let mut count = 0;
    let mut p = vec![-bound; n];
    loop {
        let pq: Vec<Rat> = p.iter().map(|&x| rat_int(x)).collect();
        let c = linalg::mat_vec(&inv, &pq);
        if c.iter().all(|x| !x.is_negative() && x < &Rat::one()) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            p[i] += 1;
            if p[i] <= bound {
                break;
            }
            p[i] = -bound;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_supported() -> Vec<(Family, usize)> {
        vec![
            (Family::A, 1),
            (Family::A, 2),
            (Family::A, 3),
            (Family::B, 2),
            (Family::B, 3),
            (Family::C, 2),
            (Family::C, 3),
            (Family::D, 3),
            (Family::G2, 2),
        ]
    }

    #[test]
    fn a1_normalization() {
        let r = RootSystem::build(Family::A, 1).unwrap();
        assert_eq!(r.num_roots(), 2);
        assert!((r.root_len2(0) - 4.0).abs() < 1e-14);
        let cor = r.simple_coroots_orth();
        assert!((cor[0][0].abs() - 1.0).abs() < 1e-14);
        assert_eq!(r.scale.radicand, rat_int(2));
    }

    #[test]
    fn table_data() {
        let a2 = RootSystem::build(Family::A, 2).unwrap();
        assert_eq!((a2.num_roots(), a2.weyl_order()), (6, 6));
        assert_eq!(a2.degrees(), &[2, 3]);
        assert_eq!(a2.exponents(), vec![1, 2]);
        let g2 = RootSystem::build(Family::G2, 2).unwrap();
        assert_eq!((g2.num_roots(), g2.weyl_order()), (12, 12));
        let od = g2.orbit_data();
        assert_eq!(od.orbits.iter().map(Vec::len).collect::<Vec<_>>(), vec![6, 6]);
        let b2 = RootSystem::build(Family::B, 2).unwrap();
        assert_eq!(b2.weyl_order(), 8);
        let a1 = RootSystem::build(Family::A, 1).unwrap();
        assert_eq!(a1.weyl_order(), 2);
    }

    #[test]
    fn unsupported_types_are_rejected() {
        assert!(matches!(RootSystem::build(Family::A, 4), Err(Error::UnsupportedType(_))));
        assert!(matches!(RootSystem::build(Family::E8, 8), Err(Error::UnsupportedType(_))));
        assert!(matches!(RootSystem::build(Family::B, 1), Err(Error::UnsupportedType(_))));
        assert!(matches!(RootSystem::build(Family::F4, 4), Err(Error::UnsupportedType(_))));
    }

    #[test]
    fn invariants_for_every_supported_type() {
        for (f, n) in all_supported() {
            let r = RootSystem::build(f, n).unwrap();
            let sum_m: u32 = r.exponents().iter().sum();
            assert_eq!(r.num_positive() as u32, sum_m, "{f}{n}");
            assert_eq!(r.weyl_order() as u32, r.degrees().iter().product::<u32>());
            assert_eq!(r.coxeter_number() as usize * n, r.num_roots(), "{f}{n}: h*n = #R");
            // covolume of Q^v is one
            let d = linalg::det_f64(&r.simple_coroots_orth());
            assert!((d.abs() - 1.0).abs() < 1e-12, "{f}{n}: covolume {d}");
            // W permutes R and preserves the form, exactly
            for w in r.weyl_group() {
                let perm = r.root_permutation(w);
                let mut sorted = perm.clone();
                sorted.sort();
                assert_eq!(sorted, (0..r.num_roots()).collect::<Vec<_>>());
                for i in 0..n {
                    for j in 0..n {
                        let ei: Vec<Rat> = (0..n).map(|k| rat_int(i64::from(k == i))).collect();
                        let ej: Vec<Rat> = (0..n).map(|k| rat_int(i64::from(k == j))).collect();
                        assert_eq!(r.inner_ref(&r.act(w, &ei), &r.act(w, &ej)), r.inner_ref(&ei, &ej));
                    }
                }
            }
            for o in r.weyl_orthogonal() {
                for i in 0..n {
                    for j in 0..n {
                        let s: f64 = (0..n).map(|k| o[k][i] * o[k][j]).sum();
                        assert!((s - f64::from(u8::from(i == j))).abs() < 1e-12);
                    }
                }
            }
            // every reflection is in W
            for i in r.positive_roots() {
                let m: WeylElement = (0..n)
                    .map(|row| {
                        (0..n)
                            .map(|col| {
                                let e: Vec<Rat> = (0..n).map(|k| rat_int(i64::from(k == col))).collect();
                                let v = r.reflect(i, &e);
                                num::ToPrimitive::to_i64(&v[row].to_integer()).unwrap()
                            })
                            .collect()
                    })
                    .collect();
                assert!(r.weyl_group().contains(&m));
            }
        }
    }

    #[test]
    fn hull_basic() {
        let r = RootSystem::build(Family::A, 1).unwrap();
        let rho = vec![linalg::rat(-1, 8)];
        assert!(r.hull_contains(&rho, &[Rat::zero()]));
        assert!(!r.hull_contains(&rho, &[linalg::rat(-2, 8)]));
        assert!(r.hull_contains(&rho, &[linalg::rat(1, 8)]));
    }

    // Independent 2-D hull oracle: orbit polygon in orthonormal coordinates
    // and a winding/cross-product test.
    fn polygon_contains(r: &RootSystem, gens: &[Vec<Rat>], p: &[Rat]) -> bool {
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for g in gens {
            for w in r.weyl_group() {
                let v: Vec<f64> = r.act(w, g).iter().map(to_f64).collect();
                pts.push(r.to_orth(&v));
            }
        }
        let pf = r.to_orth(&p.iter().map(to_f64).collect::<Vec<_>>());
        // convex hull by gift wrapping on angles around the centroid
        let cx = pts.iter().map(|v| v[0]).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|v| v[1]).sum::<f64>() / pts.len() as f64;
        let mut hull = monotone_chain(pts);
        hull.dedup();
        let _ = (cx, cy);
        let m = hull.len();
        (0..m).all(|i| {
            let a = &hull[i];
            let b = &hull[(i + 1) % m];
            (b[0] - a[0]) * (pf[1] - a[1]) - (b[1] - a[1]) * (pf[0] - a[0]) >= -1e-9
        })
    }

    fn monotone_chain(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let cross = |o: &Vec<f64>, a: &Vec<f64>, b: &Vec<f64>| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        let mut lower: Vec<Vec<f64>> = Vec::new();
        for p in &pts {
            while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-12 {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<Vec<f64>> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-12 {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    }

    /// All kappa in Q_+ with 0 < height <= 6, rank 2.
    fn q_plus(n: usize, max_h: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for a in 0..=max_h {
            for b in 0..=max_h - a {
                if a + b > 0 {
                    out.push(if n == 2 { vec![a, b] } else { vec![a] });
                }
            }
            if n == 1 {
                break;
            }
        }
        if n == 1 {
            out = (1..=max_h).map(|a| vec![a]).collect();
        }
        out
    }

    #[test]
    fn lemma_dual_of_lattice_points_in_coroot_hull() {
        for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::C, 2), (Family::G2, 2)] {
            let r = RootSystem::build(f, n).unwrap();
            let gens = r.coroot_generators();
            for kappa in q_plus(n, 6) {
                let k: Vec<Rat> = kappa.iter().map(|&c| rat_int(c)).collect();
                let kv = r.dual_vector(&k);
                assert!(r.hull_contains_union(&gens, &kv), "{f}{n} kappa={kappa:?}");
                if n == 2 {
                    assert!(polygon_contains(&r, &gens, &kv));
                }
            }
        }
    }

    #[test]
    fn hull_agrees_with_polygon_oracle() {
        let r = RootSystem::build(Family::B, 2).unwrap();
        let g = vec![linalg::rat(3, 10), linalg::rat(1, 2)];
        for a in -8..=8 {
            for b in -8..=8 {
                let p = vec![linalg::rat(a, 10), linalg::rat(b, 10)];
                let exact = r.hull_contains(&g, &p);
                let poly = polygon_contains(&r, std::slice::from_ref(&g), &p);
                assert_eq!(exact, poly, "p = {a}/10, {b}/10");
            }
        }
    }

    #[test]
    fn lattice_index_matches_coset_count() {
        let a1 = RootSystem::build(Family::A, 1).unwrap();
        assert_eq!(a1.lattice_index(&[vec![rat_int(1)]]).unwrap(), rat_int(1));
        assert_eq!(a1.lattice_index(&[vec![rat_int(2)]]).unwrap(), rat_int(2));
        let b2 = RootSystem::build(Family::B, 2).unwrap();
        let long: Vec<usize> = b2.positive_roots().filter(|&i| b2.orbit(i) == 1).collect();
        let basis: Vec<Vec<Rat>> = long.iter().map(|&i| b2.coroot_coords(i)).collect();
        let idx = b2.lattice_index(&basis).unwrap();
        let ints: Vec<Vec<i64>> =
            basis.iter().map(|v| v.iter().map(|x| num::ToPrimitive::to_i64(&x.to_integer()).unwrap()).collect()).collect();
        assert_eq!(idx, rat_int(count_cosets(&ints) as i64));
        for sub in [vec![vec![2, 0], vec![0, 1]], vec![vec![2, 1], vec![1, 3]], vec![vec![4, 0], vec![1, 2]]] {
            let q: Vec<Vec<Rat>> = sub.iter().map(|v| v.iter().map(|&x| rat_int(x)).collect()).collect();
            let idx = b2.lattice_index(&q).unwrap();
            assert!(idx <= rat_int(8));
            assert_eq!(idx, rat_int(count_cosets(&sub) as i64));
        }
        assert!(matches!(
            b2.lattice_index(&[vec![rat_int(1), rat_int(1)], vec![rat_int(2), rat_int(2)]]),
            Err(Error::DegenerateBasis(_))
        ));
    }
}
