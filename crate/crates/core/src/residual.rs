//! Residual subspaces of the arrangement `{lambda(alpha^v) = k_alpha}`, their
//! tempered forms, the pieces of the spectral measure, and linear families
//! of distinguished points.
//!
//! Subspaces are affine subspaces of `a*` in simple-root coordinates. A node
//! of the intersection lattice is identified by its set of k-incidences
//! `K_L = {alpha : L(alpha^v) = k_alpha}`, which determines `L`.

use std::collections::{BTreeMap, BTreeSet};

use num::complex::Complex64;
use num::{BigInt, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::cfunc::{c_tilde, c_upper, density_with_omissions, Flag, SpectralPoint};
use crate::error::{Error, Result};
use crate::linalg::{self, rat, rat_int, to_f64, Rat};
use crate::rootsys::RootSystem;
use crate::weights::{check_integrability, rho, Multiplicity};

fn ser_rat<S: Serializer>(q: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_vec<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

fn ser_mat<S: Serializer>(m: &[Vec<Rat>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|r| r.iter().map(|q| q.to_string()).collect::<Vec<_>>()))
}

fn ser_pairs<S: Serializer>(v: &[(usize, Rat)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(i, q)| (i, q.to_string())))
}

/// The constant `gamma_L`, when one of the easy cases decides it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gamma {
    Exact(Rat),
    Unknown,
}

impl Gamma {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            Gamma::Exact(q) => Some(q),
            Gamma::Unknown => None,
        }
    }

    /// True unless `gamma` is known to vanish.
    pub fn possibly_nonzero(&self) -> bool {
        !matches!(self, Gamma::Exact(q) if q.is_zero())
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gamma::Exact(q) => s.serialize_str(&q.to_string()),
            Gamma::Unknown => s.serialize_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Presence {
    Yes,
    No,
    /// Decided by an unknown `gamma`; treated as present.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSubspace {
    pub dim: usize,
    /// Roots with `L(alpha^v) = k_alpha` (these define `L`).
    pub k_incident: Vec<usize>,
    /// Roots with `L(alpha^v) = 0`.
    pub zero_incident: Vec<usize>,
    /// `R_L` with the constant values `L(alpha^v)`.
    #[serde(serialize_with = "ser_pairs")]
    pub r_l: Vec<(usize, Rat)>,
    #[serde(serialize_with = "ser_vec")]
    pub center: Vec<Rat>,
    /// Basis of `V^L`, the direction space of `L`.
    #[serde(serialize_with = "ser_mat")]
    pub directions: Vec<Vec<Rat>>,
    pub residual: bool,
    pub distinguished: bool,
    pub cuspidal: Presence,
    pub gamma: Gamma,
    /// Residual parents `M` (indices into the same list) that satisfy the
    /// incidence count for `L`.
    pub parents: Vec<usize>,
    /// `c_L` lies in the convex hull of `W rho(k)`.
    pub center_in_hull: bool,
    /// `|c_L(alpha^v)| < 1` for every root.
    pub center_bounded: bool,
}

impl ResidualSubspace {
    pub fn codim(&self) -> usize {
        self.center.len() - self.dim
    }

    pub fn value(&self, root: usize) -> Option<&Rat> {
        self.r_l.iter().find(|(i, _)| *i == root).map(|(_, v)| v)
    }

    /// Defining incidences `(alpha, value)` with value `k_alpha` or `0`.
    pub fn defining(&self, rs: &RootSystem, k: &Multiplicity) -> Vec<(usize, Rat)> {
        let mut out: Vec<(usize, Rat)> = self.k_incident.iter().map(|&i| (i, k.k(rs, i).clone())).collect();
        out.extend(self.zero_incident.iter().map(|&i| (i, Rat::zero())));
        out
    }

    /// `lambda` lies on `c_L + i V^L` (within `tol`).
    pub fn on_tempered_form(&self, rs: &RootSystem, lambda: &SpectralPoint, tol: f64) -> bool {
        let re_ok = lambda.coords.iter().zip(&self.center).all(|(z, c)| (z.re - to_f64(c)).abs() <= tol * (1.0 + to_f64(c).abs()));
        let im: Vec<f64> = lambda.coords.iter().map(|z| z.im).collect();
        let im_ok = self.r_l.iter().all(|(i, _)| rs.pairing_f(&im, *i).abs() <= tol);
        re_ok && im_ok
    }
}

#[derive(Debug, Clone)]
struct Node {
    codim: usize,
    k_set: Vec<usize>,
    zero_set: Vec<usize>,
    r_l: Vec<(usize, Rat)>,
    center: Vec<Rat>,
    directions: Vec<Vec<Rat>>,
    residual: bool,
    parents: Vec<Vec<usize>>,
}

fn node_from_subset(rs: &RootSystem, k: &Multiplicity, subset: &[usize]) -> Node {
    let n = rs.rank;
    let a: Vec<Vec<Rat>> = subset.iter().map(|&i| rs.coroot_functional(i).to_vec()).collect();
    let b: Vec<Rat> = subset.iter().map(|&i| k.k(rs, i).clone()).collect();
    let p = if subset.is_empty() { vec![Rat::zero(); n] } else { linalg::solve_general(&a, &b).expect("independent rows") };
    let mut r_l = Vec::new();
    for i in 0..rs.num_roots() {
        let mut ext = a.clone();
        ext.push(rs.coroot_functional(i).to_vec());
        if linalg::rank(&ext) == subset.len() {
            r_l.push((i, rs.pairing(&p, i)));
        }
    }
    let k_set = r_l.iter().filter(|(i, v)| v == k.k(rs, *i)).map(|(i, _)| *i).collect();
    let zero_set = r_l.iter().filter(|(_, v)| v.is_zero()).map(|(i, _)| *i).collect();
    // Center: the point of L in span(R_L) = span(subset roots).
    let center = if subset.is_empty() {
        vec![Rat::zero(); n]
    } else {
        let m: Vec<Vec<Rat>> = subset.iter().map(|&i| subset.iter().map(|&j| linalg::dot(rs.coroot_functional(i), &rs.root_rat(j))).collect()).collect();
        let y = linalg::solve(&m, &b).expect("independent roots");
        (0..n).map(|c| subset.iter().zip(&y).fold(Rat::zero(), |acc, (&j, yj)| acc + yj * rat_int(rs.root(j)[c]))).collect()
    };
    Node {
        codim: subset.len(),
        k_set,
        zero_set,
        r_l,
        center,
        directions: linalg::kernel(&a, n),
        residual: false,
        parents: Vec::new(),
    }
}

/// All nodes of the intersection lattice, with the residual marking.
fn build_lattice(rs: &RootSystem, k: &Multiplicity) -> Result<Vec<Node>> {
    let n = rs.rank;
    let nr = rs.num_roots();
    let mut nodes: BTreeMap<Vec<usize>, Node> = BTreeMap::new();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(subset) = stack.pop() {
        let node = node_from_subset(rs, k, &subset);
        nodes.entry(node.k_set.clone()).or_insert(node);
        if subset.len() == n {
            continue;
        }
        let start = subset.last().map_or(0, |&l| l + 1);
        for i in start..nr {
            let mut next = subset.clone();
            next.push(i);
            let rows: Vec<Vec<Rat>> = next.iter().map(|&j| rs.coroot_functional(j).to_vec()).collect();
            if linalg::rank(&rows) == next.len() {
                stack.push(next);
            }
        }
    }
    let mut list: Vec<Node> = nodes.into_values().collect();
    list.sort_by(|a, b| a.codim.cmp(&b.codim).then_with(|| a.k_set.cmp(&b.k_set)));
    for li in 0..list.len() {
        if list[li].codim == 0 {
            list[li].residual = true;
            continue;
        }
        let mut parents = Vec::new();
        for m in list.iter().filter(|m| m.residual && m.codim + 1 == list[li].codim) {
            let l = &list[li];
            if !m.k_set.iter().all(|i| l.k_set.contains(i)) {
                continue;
            }
            let in_m: BTreeSet<usize> = m.r_l.iter().map(|(i, _)| *i).collect();
            let (mut kc, mut zc) = (0usize, 0usize);
            for (i, v) in l.r_l.iter().filter(|(i, _)| !in_m.contains(i)) {
                if v == k.k(rs, *i) {
                    kc += 1;
                }
                if v.is_zero() {
                    zc += 1;
                }
            }
            if kc > zc {
                parents.push(m.k_set.clone());
            }
        }
        if !parents.is_empty() {
            let l = &mut list[li];
            let roots: Vec<Vec<Rat>> = l.r_l.iter().map(|(i, _)| rs.root_rat(*i)).collect();
            if linalg::rank(&roots) != l.codim {
                return Err(Error::Internal(format!("residual subspace {:?} has codim {} but rank(R_L) = {}", l.k_set, l.codim, linalg::rank(&roots))));
            }
            l.residual = true;
            l.parents = parents;
        }
    }
    Ok(list)
}

type Signature = Vec<(Vec<usize>, Vec<usize>, Vec<usize>, bool)>;

fn signature(nodes: &[Node]) -> Signature {
    let mut s: Signature =
        nodes.iter().map(|n| (n.k_set.clone(), n.zero_set.clone(), n.r_l.iter().map(|(i, _)| *i).collect(), n.residual)).collect();
    s.sort();
    s
}

/// Relative perturbation `p / 10007` with `0 < |p| <= 50`.
fn random_factor(rng: &mut ChaCha8Rng) -> Rat {
    let mut p = 0i64;
    while p == 0 {
        p = rng.random_range(-50..=50);
    }
    Rat::one() + rat(p, 10007)
}

/// How `k` is perturbed in the genericity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// An independent factor per orbit.
    PerOrbit,
    /// One common factor (stays inside the equal-parameter family).
    Joint,
}

fn perturb(rs: &RootSystem, k: &Multiplicity, mode: Perturbation, rng: &mut ChaCha8Rng) -> Multiplicity {
    let joint = random_factor(rng);
    let values = k
        .values()
        .iter()
        .map(|v| match mode {
            Perturbation::Joint => v * &joint,
            Perturbation::PerOrbit => v * random_factor(rng),
        })
        .collect();
    Multiplicity::new(rs, values).expect("same number of orbits")
}

const STABILITY_SEEDS: [u64; 3] = [11, 23, 47];

/// Checks that the incidence data of the lattice does not change when `k`
/// is perturbed by small random rationals.
pub fn check_stability(rs: &RootSystem, k: &Multiplicity, mode: Perturbation) -> Result<()> {
    stable_against(rs, k, &signature(&build_lattice(rs, k)?), mode)
}

fn stable_against(rs: &RootSystem, k: &Multiplicity, sig: &Signature, mode: Perturbation) -> Result<()> {
    for seed in STABILITY_SEEDS {
        let kp = perturb(rs, k, mode, &mut ChaCha8Rng::seed_from_u64(seed));
        if &signature(&build_lattice(rs, &kp)?) != sig {
            return Err(Error::UnstableParameter(format!(
                "incidence data of {}{} changes under perturbation of k = {:?}",
                rs.family,
                rs.rank,
                k.values().iter().map(|v| v.to_string()).collect::<Vec<_>>()
            )));
        }
    }
    Ok(())
}

/// Residual subspaces for exact `k`, ordered by decreasing dimension and then
/// by incidence sets. Equal multiplicities are perturbed jointly, distinct
/// ones independently.
pub fn enumerate_residual(rs: &RootSystem, k: &Multiplicity) -> Result<Vec<ResidualSubspace>> {
    if k.values().iter().any(Zero::is_zero) {
        return Err(Error::SingularParameter("a multiplicity is zero; the hyperplanes pass through the origin".into()));
    }
    let mode = if k.equal_value().is_some() { Perturbation::Joint } else { Perturbation::PerOrbit };
    let nodes = build_lattice(rs, k)?;
    stable_against(rs, k, &signature(&nodes), mode)?;

    let residual: Vec<&Node> = nodes.iter().filter(|n| n.residual).collect();
    let index: BTreeMap<&[usize], usize> = residual.iter().enumerate().map(|(i, n)| (n.k_set.as_slice(), i)).collect();

    // W-closure: K_{wL} = w K_L.
    for w in rs.weyl_group() {
        let perm = rs.root_permutation(w);
        for node in &residual {
            let mut img: Vec<usize> = node.k_set.iter().map(|&i| perm[i]).collect();
            img.sort_unstable();
            if !index.contains_key(img.as_slice()) {
                return Err(Error::Internal(format!("residual set not W-stable at {:?}", node.k_set)));
            }
        }
    }

    let rho_k = rho(rs, k);
    let n = rs.rank;
    let mut out: Vec<ResidualSubspace> = residual
        .iter()
        .map(|node| {
            let dim = n - node.codim;
            let center_in_hull = rs.hull_contains(&rho_k, &node.center);
            let center_bounded = (0..rs.num_roots()).all(|i| rs.pairing(&node.center, i).abs() < Rat::one());
            let mut l = ResidualSubspace {
                dim,
                k_incident: node.k_set.clone(),
                zero_incident: node.zero_set.clone(),
                r_l: node.r_l.clone(),
                center: node.center.clone(),
                directions: node.directions.clone(),
                residual: true,
                distinguished: dim == 0,
                cuspidal: Presence::No,
                gamma: Gamma::Unknown,
                parents: node.parents.iter().map(|p| index[p.as_slice()]).collect(),
                center_in_hull,
                center_bounded,
            };
            l.gamma = gamma_easy(rs, k, &l);
            if l.distinguished {
                l.cuspidal = match &l.gamma {
                    Gamma::Exact(q) if q.is_zero() => Presence::No,
                    Gamma::Exact(_) => Presence::Yes,
                    Gamma::Unknown => Presence::Unknown,
                };
            }
            l
        })
        .collect();
    // Decreasing dimension; `parents` indices must follow the reordering.
    let order: Vec<usize> = {
        let mut o: Vec<usize> = (0..out.len()).collect();
        o.sort_by(|&a, &b| out[b].dim.cmp(&out[a].dim).then_with(|| out[a].k_incident.cmp(&out[b].k_incident)));
        o
    };
    let mut new_pos = vec![0; out.len()];
    for (pos, &old) in order.iter().enumerate() {
        new_pos[old] = pos;
    }
    for l in &mut out {
        for p in &mut l.parents {
            *p = new_pos[*p];
        }
    }
    let mut sorted: Vec<Option<ResidualSubspace>> = out.into_iter().map(Some).collect();
    Ok(order.iter().map(|&i| sorted[i].take().unwrap()).collect())
}

/// `(c_L, basis of V^L)`; the tempered form is `c_L + i V^L`.
pub fn tempered_form(l: &ResidualSubspace) -> (Vec<Rat>, Vec<Vec<Rat>>) {
    (l.center.clone(), l.directions.clone())
}

/// The easy cases of `gamma_L`: `|W|^-2` for `L = a*`, and for a regular
/// distinguished point `c` with `beta_i^v(c) + k_{beta_i} = 0`,
/// `|W|^-2 ind^-1` or `0` according to whether `c` is a strictly positive
/// combination of the `beta_i`.
pub fn gamma_easy(rs: &RootSystem, k: &Multiplicity, l: &ResidualSubspace) -> Gamma {
    let n = rs.rank;
    let w2 = rat_int(rs.weyl_order() as i64).pow(2);
    if l.dim == n {
        return Gamma::Exact(Rat::one() / w2);
    }
    if l.dim != 0 {
        return Gamma::Unknown;
    }
    let betas: Vec<usize> = (0..rs.num_roots()).filter(|&i| (rs.pairing(&l.center, i) + k.k(rs, i)).is_zero()).collect();
    if betas.len() != n {
        return Gamma::Unknown;
    }
    let basis: Vec<Vec<Rat>> = betas.iter().map(|&i| rs.root_rat(i)).collect();
    let Some(y) = linalg::coords_in_span(&basis, &l.center) else {
        return Gamma::Unknown;
    };
    if !y.iter().all(Signed::is_positive) {
        return Gamma::Exact(Rat::zero());
    }
    let coroots: Vec<Vec<Rat>> = betas.iter().map(|&i| rs.coroot_coords(i)).collect();
    match rs.lattice_index(&coroots) {
        Ok(ind) => Gamma::Exact(Rat::one() / (w2 * ind)),
        Err(_) => Gamma::Unknown,
    }
}

/// `f_L(lambda, k)` for `lambda` on the tempered form of `L`. Factors that
/// vanish or blow up identically along `L` are left out.
pub fn f_l_density(rs: &RootSystem, k: &Multiplicity, l: &ResidualSubspace, lambda: &SpectralPoint) -> Result<f64> {
    if !l.on_tempered_form(rs, lambda, 1e-9) {
        return Err(Error::Contract("lambda is not on the tempered form of L".into()));
    }
    let nr = rs.num_roots();
    let mut omit_num = vec![false; nr];
    let mut omit_den = vec![false; nr];
    for (i, v) in &l.r_l {
        omit_num[*i] = (v + k.k(rs, *i)).is_zero();
        omit_den[*i] = v.is_zero();
    }
    density_with_omissions(rs, k, lambda, &omit_num, &omit_den)
}

/// One piece `nu_L = gamma_L f_L omega_L` of the spectral measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasurePart {
    /// Index into the residual list.
    pub subspace: usize,
    pub dim: usize,
    pub gamma: Gamma,
    /// Covolume of `P ∩ V^L` in `V^L`; `omega_L` is Lebesgue measure on
    /// `i V^L` divided by `(2 pi)^dim` times this.
    pub lattice_covolume: f64,
}

/// Value of one part at a point of its tempered form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartDensity {
    pub f_l: f64,
    /// `gamma_L f_L`, if `gamma_L` is known.
    pub weighted: Option<f64>,
}

impl SpectralMeasurePart {
    pub fn omega_normalizer(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.dim as i32) * self.lattice_covolume
    }

    pub fn density(&self, rs: &RootSystem, k: &Multiplicity, subspaces: &[ResidualSubspace], lambda: &SpectralPoint) -> Result<PartDensity> {
        let f_l = f_l_density(rs, k, &subspaces[self.subspace], lambda)?;
        Ok(PartDensity { f_l, weighted: self.gamma.value().map(|g| to_f64(g) * f_l) })
    }
}

/// Z-basis of `{m in Z^n : rows . m = 0}` for integer rows.
fn integer_kernel(rows: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let r = rows.len();
    let aug: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            let mut v: Vec<BigInt> = rows.iter().map(|row| row[j].clone()).collect();
            v.extend((0..n).map(|c| BigInt::from((c == j) as i64)));
            v
        })
        .collect();
    linalg::integer_lattice_basis(&aug).into_iter().filter(|v| v[..r].iter().all(Zero::is_zero)).map(|v| v[r..].to_vec()).collect()
}

/// Covolume of `P ∩ V^L` in the metric of `a*`.
pub fn weight_lattice_covolume(rs: &RootSystem, l: &ResidualSubspace) -> f64 {
    if l.dim == 0 {
        return 1.0;
    }
    let rows: Vec<Vec<BigInt>> = l.r_l.iter().map(|(i, _)| rs.coroot_coords(*i).iter().map(|q| q.to_integer()).collect()).collect();
    let basis: Vec<Vec<Rat>> = integer_kernel(&rows, rs.rank)
        .iter()
        .map(|m| rs.from_pairings(&m.iter().map(|x| Rat::from_integer(x.clone())).collect::<Vec<_>>()))
        .collect();
    let t = rs.scale.value;
    let g: Vec<Vec<f64>> = basis.iter().map(|a| basis.iter().map(|b| t * to_f64(&rs.inner_ref(a, b))).collect()).collect();
    linalg::det_f64(&g).sqrt()
}

/// One part per residual subspace.
pub fn plancherel_parts(rs: &RootSystem, subspaces: &[ResidualSubspace]) -> Vec<SpectralMeasurePart> {
    subspaces
        .iter()
        .enumerate()
        .map(|(i, l)| SpectralMeasurePart { subspace: i, dim: l.dim, gamma: l.gamma.clone(), lattice_covolume: weight_lattice_covolume(rs, l) })
        .collect()
}

/// `lambda` lies on the tempered form of a residual subspace whose part is
/// not known to vanish.
pub fn in_support(rs: &RootSystem, subspaces: &[ResidualSubspace], lambda: &SpectralPoint, tol: f64) -> bool {
    subspaces.iter().any(|l| l.gamma.possibly_nonzero() && l.on_tempered_form(rs, lambda, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    /// Weyl indices `w` with `Re(w lambda)` in the closed cone of positive roots.
    pub candidates: Vec<usize>,
    /// Weyl indices `w` with `c(-w lambda) != 0`, i.e. the exponents that
    /// occur in the expansion of `F(lambda)`.
    pub used: Vec<usize>,
    /// `w lambda` for the used `w`, deduplicated.
    pub exponents: Vec<Vec<Complex64>>,
    pub tempered: bool,
    pub square_integrable: bool,
}

/// Growth classification from the leading exponents of `F(lambda, k)`.
pub fn growth_classify(rs: &RootSystem, k: &Multiplicity, lambda: &SpectralPoint) -> GrowthReport {
    const TOL: f64 = 1e-10;
    let mut candidates = Vec::new();
    let mut used = Vec::new();
    let mut exponents: Vec<Vec<Complex64>> = Vec::new();
    for (wi, w) in rs.weyl_group().iter().enumerate() {
        let mu = rs.act_c(w, &lambda.coords);
        if mu.iter().all(|z| z.re >= -TOL) {
            candidates.push(wi);
        }
        let c = c_tilde(rs, &SpectralPoint::new(rs, mu.clone()).neg(rs), k);
        if c.flag != Flag::Zero {
            used.push(wi);
            if !exponents.iter().any(|e| e.iter().zip(&mu).all(|(a, b)| (a - b).norm() <= TOL)) {
                exponents.push(mu);
            }
        }
    }
    let tempered = exponents.iter().all(|mu| mu.iter().all(|z| z.re >= -TOL));
    let square_integrable = !exponents.is_empty() && exponents.iter().all(|mu| mu.iter().all(|z| z.re > TOL));
    GrowthReport { candidates, used, exponents, tempered, square_integrable }
}

/// `c^(lambda) c^(-lambda)` along the tempered form of `l`, sampled at
/// `lambda = c_L + i sum_j t_j v_j`.
pub fn upper_product(rs: &RootSystem, k: &Multiplicity, l: &ResidualSubspace, t: &[f64]) -> Result<Complex64> {
    let mut coords: Vec<Complex64> = l.center.iter().map(|c| Complex64::new(to_f64(c), 0.0)).collect();
    for (v, tj) in l.directions.iter().zip(t) {
        for (z, vc) in coords.iter_mut().zip(v) {
            z.im += tj * to_f64(vc);
        }
    }
    let lam = SpectralPoint::new(rs, coords);
    let a = c_upper(rs, &lam, k)?;
    let b = c_upper(rs, &lam.neg(rs), k)?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Contract("c^ is singular on the tempered form".into()));
    }
    Ok(a.value * b.value)
}

/// Dominant representatives of the cuspidal (or possibly cuspidal) points.
pub fn cuspidal_points(rs: &RootSystem, subspaces: &[ResidualSubspace]) -> Vec<Vec<Rat>> {
    let mut pts: Vec<Vec<Rat>> = subspaces.iter().filter(|l| l.distinguished && l.cuspidal != Presence::No).map(|l| rs.dominant(&l.center)).collect();
    pts.sort();
    pts.dedup();
    pts
}

/// `(lambda + rho, lambda - rho)` in the reference metric (a positive
/// multiple of the actual eigenvalue).
pub fn eigenvalue_ref(rs: &RootSystem, k: &Multiplicity, lambda: &[Rat]) -> Rat {
    let r = rho(rs, k);
    let p: Vec<Rat> = lambda.iter().zip(&r).map(|(a, b)| a + b).collect();
    let m: Vec<Rat> = lambda.iter().zip(&r).map(|(a, b)| a - b).collect();
    rs.inner_ref(&p, &m)
}

/// Distinct dominant cuspidal points have distinct eigenvalues.
pub fn eigenvalues_separated(rs: &RootSystem, k: &Multiplicity, points: &[Vec<Rat>]) -> bool {
    let ev: BTreeSet<Rat> = points.iter().map(|p| eigenvalue_ref(rs, k, p)).collect();
    ev.len() == points.len()
}

/// `coeffs . k + constant > 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LinearInequality {
    #[serde(serialize_with = "ser_vec")]
    pub coeffs: Vec<Rat>,
    #[serde(serialize_with = "ser_rat")]
    pub constant: Rat,
}

impl LinearInequality {
    pub fn holds(&self, k: &[Rat]) -> bool {
        (linalg::dot(&self.coeffs, k) + &self.constant).is_positive()
    }
}

/// A family `lambda(k) = map . k` of distinguished points, linear in the
/// orbit multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspidalFamily {
    /// Roots `beta_i` with `beta_i^v(lambda(k)) + k_{beta_i} = 0`.
    pub defining: Vec<usize>,
    /// `n x m` matrix: simple-root coordinates of `lambda(k)` per orbit value.
    #[serde(serialize_with = "ser_mat")]
    pub map: Vec<Vec<Rat>>,
    pub r_z: Vec<usize>,
    pub r_p: Vec<usize>,
    /// Linear maps of the exponents that occur in `F(lambda(k))`.
    #[serde(skip)]
    pub exponents: Vec<Vec<Vec<Rat>>>,
    /// Defines the validity region of the family.
    pub sigma: Vec<LinearInequality>,
    /// A point of the region, if it is not empty.
    #[serde(serialize_with = "ser_opt_vec")]
    pub sigma_witness: Option<Vec<Rat>>,
    /// The region as an open interval when there is one orbit.
    #[serde(serialize_with = "ser_interval")]
    pub sigma_interval: Option<(Rat, Rat)>,
}

fn ser_opt_vec<S: Serializer>(v: &Option<Vec<Rat>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.iter().map(|q| q.to_string())),
        None => s.serialize_none(),
    }
}

fn ser_interval<S: Serializer>(v: &Option<(Rat, Rat)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some((a, b)) => s.collect_seq([a.to_string(), b.to_string()]),
        None => s.serialize_none(),
    }
}

impl CuspidalFamily {
    pub fn at(&self, k: &[Rat]) -> Vec<Rat> {
        apply_map(&self.map, k)
    }
}

fn apply_map(map: &[Vec<Rat>], k: &[Rat]) -> Vec<Rat> {
    map.iter().map(|row| linalg::dot(row, k)).collect()
}

/// `w . map`, column by column.
fn act_map(rs: &RootSystem, w: &[Vec<i64>], map: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let cols = linalg::transpose(map);
    linalg::transpose(&cols.iter().map(|c| rs.act(w, c)).collect::<Vec<_>>())
}

/// Linear form `k -> lambda(k)(alpha^v)` of a map.
fn pairing_form(rs: &RootSystem, map: &[Vec<Rat>], i: usize) -> Vec<Rat> {
    linalg::transpose(map).iter().map(|c| rs.pairing(c, i)).collect()
}

fn unit(m: usize, o: usize) -> Vec<Rat> {
    (0..m).map(|j| if j == o { Rat::one() } else { Rat::zero() }).collect()
}

/// A rational `k` inside the `(1.6)` region on which the enumeration is stable.
fn sample_multiplicity(rs: &RootSystem) -> Result<Multiplicity> {
    let h = rs.coxeter_number() as i64;
    for attempt in 0..8i64 {
        let values: Vec<Rat> = (0..rs.num_orbits() as i64).map(|o| -rat(1, 3 * h + 2 + 3 * o + 5 * attempt)).collect();
        let k = Multiplicity::new(rs, values)?;
        if check_integrability(rs, &k).condition_1_6 && enumerate_residual(rs, &k).is_ok() {
            return Ok(k);
        }
    }
    Err(Error::Internal("no stable sample multiplicity found".into()))
}

/// Linear families of distinguished points, one per W-orbit, represented by
/// the member that is dominant at a sample `k`. Rank at most 2.
pub fn cuspidal_families(rs: &RootSystem) -> Result<Vec<CuspidalFamily>> {
    if rs.rank > 2 {
        return Err(Error::Contract("cuspidal families are computed for rank <= 2".into()));
    }
    let n = rs.rank;
    let m = rs.num_orbits();
    let ks = sample_multiplicity(rs)?;
    let points: Vec<Vec<Rat>> = enumerate_residual(rs, &ks)?.into_iter().filter(|l| l.distinguished).map(|l| l.center).collect();

    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let nr = rs.num_roots();
    if n == 1 {
        subsets.extend((0..nr).map(|i| vec![i]));
    } else {
        for i in 0..nr {
            for j in i + 1..nr {
                subsets.push(vec![i, j]);
            }
        }
    }

    let mut families: BTreeMap<Vec<Vec<Rat>>, CuspidalFamily> = BTreeMap::new();
    for b in subsets {
        let a: Vec<Vec<Rat>> = b.iter().map(|&i| rs.coroot_functional(i).to_vec()).collect();
        if linalg::rank(&a) != n {
            continue;
        }
        let cols: Vec<Vec<Rat>> = (0..m)
            .map(|o| {
                let rhs: Vec<Rat> = b.iter().map(|&i| if rs.orbit(i) == o { -Rat::one() } else { Rat::zero() }).collect();
                linalg::solve(&a, &rhs).expect("independent coroots")
            })
            .collect();
        let map = linalg::transpose(&cols);
        let lam = apply_map(&map, ks.values());
        if !points.contains(&lam) {
            continue;
        }
        let dom = rs.dominant(&lam);
        let w = rs.weyl_group().iter().find(|w| rs.act(w, &lam) == dom).expect("dominant representative is in the orbit");
        let rep = act_map(rs, w, &map);
        if families.contains_key(&rep) {
            continue;
        }
        let perm = rs.root_permutation(w);
        let mut defining: Vec<usize> = b.iter().map(|&i| perm[i]).collect();
        defining.sort_unstable();
        families.insert(rep.clone(), family_data(rs, rep, defining));
    }
    Ok(families.into_values().collect())
}

fn family_data(rs: &RootSystem, map: Vec<Vec<Rat>>, defining: Vec<usize>) -> CuspidalFamily {
    let m = rs.num_orbits();
    let mut r_z = Vec::new();
    let mut r_p = Vec::new();
    for i in 0..rs.num_roots() {
        let f = pairing_form(rs, &map, i);
        if f.iter().all(Zero::is_zero) {
            r_z.push(i);
        }
        let e = unit(m, rs.orbit(i));
        if f.iter().zip(&e).all(|(a, b)| (a + b).is_zero()) {
            r_p.push(i);
        }
    }

    // Exponents w lambda(k) whose coefficient c(-w lambda(k)) is not
    // identically zero. For generic k only identically vanishing arguments
    // produce Gamma poles.
    let mut exponents: Vec<Vec<Vec<Rat>>> = Vec::new();
    for w in rs.weyl_group() {
        let mu = act_map(rs, w, &map);
        let mut order = 0i32;
        for i in rs.positive_roots() {
            let z: Vec<Rat> = pairing_form(rs, &mu, i).into_iter().map(|x| -x).collect();
            let e = unit(m, rs.orbit(i));
            if z.iter().all(Zero::is_zero) {
                order -= 1;
            }
            if z.iter().zip(&e).all(|(a, b)| (a + b).is_zero()) {
                order += 1;
            }
        }
        if order <= 0 && !exponents.contains(&mu) {
            exponents.push(mu);
        }
    }

    let mut sigma: BTreeSet<LinearInequality> = BTreeSet::new();
    for o in 0..m {
        sigma.insert(LinearInequality { coeffs: unit(m, o).into_iter().map(|x| -x).collect(), constant: Rat::zero() });
    }
    let beta = rs.highest_short_root();
    let margin: Vec<Rat> = (0..m)
        .map(|o| {
            let ko = Multiplicity::new(rs, unit(m, o)).expect("orbit count");
            rs.pairing(&rho(rs, &ko), beta) + if rs.orbit(beta) == o { Rat::one() } else { Rat::zero() }
        })
        .collect();
    sigma.insert(LinearInequality { coeffs: margin, constant: Rat::one() });
    for mu in &exponents {
        for row in mu {
            if row.iter().any(|x| !x.is_zero()) {
                sigma.insert(LinearInequality { coeffs: row.clone(), constant: Rat::zero() });
            }
        }
    }
    let sigma: Vec<LinearInequality> = sigma.into_iter().collect();
    let sigma_interval = (m == 1).then(|| interval(&sigma)).flatten();
    let sigma_witness = witness(&sigma, m);
    CuspidalFamily { defining, map, r_z, r_p, exponents, sigma, sigma_witness, sigma_interval }
}

/// A point satisfying all inequalities, for at most two variables. Every
/// inequality except the integrability margin is homogeneous, so the region
/// is an open cone cut by a half-space containing the apex; it suffices to
/// find a ray of the cone and then shrink along it.
fn witness(ineqs: &[LinearInequality], m: usize) -> Option<Vec<Rat>> {
    let mut rays: Vec<Vec<Rat>> = Vec::new();
    for q in ineqs {
        rays.push(q.coeffs.clone());
        if m == 2 {
            let d = vec![-q.coeffs[1].clone(), q.coeffs[0].clone()];
            rays.push(d.iter().map(|x| -x).collect());
            rays.push(d);
        } else {
            rays.push(vec![-q.coeffs[0].clone()]);
        }
    }
    let base = rays.clone();
    for a in &base {
        for b in &base {
            rays.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
        }
    }
    let homogeneous: Vec<&LinearInequality> = ineqs.iter().filter(|q| q.constant.is_zero()).collect();
    let ray = rays.into_iter().find(|r| r.iter().any(|x| !x.is_zero()) && homogeneous.iter().all(|q| linalg::dot(&q.coeffs, r).is_positive()))?;
    let mut t = Rat::one();
    for _ in 0..64 {
        let p: Vec<Rat> = ray.iter().map(|x| x * &t).collect();
        if ineqs.iter().all(|q| q.holds(&p)) {
            return Some(p);
        }
        t /= rat_int(2);
    }
    None
}

/// Solution set of one-variable strict inequalities as an open interval.
fn interval(ineqs: &[LinearInequality]) -> Option<(Rat, Rat)> {
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for q in ineqs {
        let a = &q.coeffs[0];
        if a.is_zero() {
            if !q.constant.is_positive() {
                return None;
            }
            continue;
        }
        let x = -&q.constant / a;
        if a.is_positive() {
            lo = Some(lo.map_or(x.clone(), |l: Rat| l.max(x)));
        } else {
            hi = Some(hi.map_or(x.clone(), |h: Rat| h.min(x)));
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) if l < h => Some((l, h)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::Family;
    use proptest::prelude::*;

    fn sys(f: Family, r: usize) -> RootSystem {
        RootSystem::build(f, r).unwrap()
    }

    fn mult(rs: &RootSystem, v: &[(i64, i64)]) -> Multiplicity {
        Multiplicity::new(rs, v.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    fn cases() -> Vec<(RootSystem, Multiplicity)> {
        let mut out = Vec::new();
        for (f, r, k) in [
            (Family::A, 2, vec![(-1, 4)]),
            (Family::B, 2, vec![(-1, 5)]),
            (Family::B, 2, vec![(-1, 5), (-1, 7)]),
            (Family::C, 2, vec![(-1, 5), (-1, 7)]),
            (Family::G2, 2, vec![(-1, 9)]),
            (Family::G2, 2, vec![(-1, 9), (-1, 13)]),
            (Family::A, 3, vec![(-1, 6)]),
        ] {
            let rs = sys(f, r);
            let k = mult(&rs, &k);
            out.push((rs, k));
        }
        out
    }

    #[test]
    fn a1_list_is_exact() {
        let rs = sys(Family::A, 1);
        let k = mult(&rs, &[(-1, 4)]);
        let ls = enumerate_residual(&rs, &k).unwrap();
        assert_eq!(ls.len(), 3);
        assert_eq!(ls[0].dim, 1);
        let mut centers: Vec<Vec<Rat>> = ls[1..].iter().map(|l| l.center.clone()).collect();
        centers.sort();
        let r = rho(&rs, &k);
        let mut expect = vec![r.clone(), r.iter().map(|x| -x).collect()];
        expect.sort();
        assert_eq!(centers, expect);
        for l in &ls {
            assert_eq!(l.gamma, Gamma::Exact(rat(1, 4)));
        }
        assert!(ls[1..].iter().all(|l| l.parents == vec![0] && l.cuspidal == Presence::Yes));
    }

    /// Independent oracle for A2 in weight coordinates `m_i = lambda(alpha_i^v)`:
    /// a root `a_1 alpha_1 + a_2 alpha_2` pairs to `a . m`.
    #[test]
    fn a2_points_match_brute_force() {
        let rs = sys(Family::A, 2);
        let k = rat(-1, 4);
        let roots: Vec<[i64; 2]> = vec![[1, 0], [0, 1], [1, 1], [-1, 0], [0, -1], [-1, -1]];
        let pair = |a: &[i64; 2], m: &[Rat; 2]| rat_int(a[0]) * &m[0] + rat_int(a[1]) * &m[1];
        let mut oracle: BTreeSet<Vec<Rat>> = BTreeSet::new();
        for a in &roots {
            for b in &roots {
                let d = a[0] * b[1] - a[1] * b[0];
                if d == 0 {
                    continue;
                }
                let m = [(&k * rat_int(b[1] - a[1])) / rat_int(d), (&k * rat_int(a[0] - b[0])) / rat_int(d)];
                // Residual if some line through the point through a root `g`
                // has more k-incidences than zero-incidences off {g, -g}.
                let ok = roots.iter().filter(|g| pair(g, &m) == k).any(|g| {
                    let others: Vec<&[i64; 2]> = roots.iter().filter(|c| *c != g && **c != [-g[0], -g[1]]).collect();
                    let kc = others.iter().filter(|c| pair(c, &m) == k).count();
                    let zc = others.iter().filter(|c| pair(c, &m).is_zero()).count();
                    kc > zc
                });
                if ok {
                    oracle.insert(m.to_vec());
                }
            }
        }
        let km = Multiplicity::equal(&rs, k.clone());
        let ls = enumerate_residual(&rs, &km).unwrap();
        assert_eq!(ls.len(), 13);
        assert_eq!(ls.iter().filter(|l| l.dim == 1).count(), 6);
        let got: BTreeSet<Vec<Rat>> = ls.iter().filter(|l| l.dim == 0).map(|l| rs.to_pairings(&l.center)).collect();
        assert_eq!(got, oracle);
        let orbit: BTreeSet<Vec<Rat>> = rs.weyl_group().iter().map(|w| rs.to_pairings(&rs.act(w, &rho(&rs, &km)))).collect();
        assert_eq!(got, orbit);
        assert!(ls.iter().filter(|l| l.dim == 0).all(|l| l.gamma == Gamma::Exact(rat(1, 36))));
    }

    #[test]
    fn structural_invariants() {
        for (rs, k) in cases() {
            let ls = enumerate_residual(&rs, &k).unwrap();
            let centers: BTreeSet<(usize, Vec<Rat>)> = ls.iter().map(|l| (l.dim, l.center.clone())).collect();
            for l in &ls {
                let roots: Vec<Vec<Rat>> = l.r_l.iter().map(|(i, _)| rs.root_rat(*i)).collect();
                assert_eq!(linalg::rank(&roots), l.codim());
                assert!(l.center_in_hull && l.center_bounded, "{}{} {:?}", rs.family, rs.rank, l.center);
                // R_L is closed under addition inside R.
                let ids: BTreeSet<usize> = l.r_l.iter().map(|(i, _)| *i).collect();
                for &a in &ids {
                    for &b in &ids {
                        let s: Vec<i64> = rs.root(a).iter().zip(rs.root(b)).map(|(x, y)| x + y).collect();
                        if let Some(c) = rs.index_of(&s) {
                            assert!(ids.contains(&c));
                        }
                    }
                }
                if l.dim < rs.rank {
                    assert!(!l.parents.is_empty());
                    assert!(l.parents.iter().all(|&p| ls[p].dim == l.dim + 1));
                }
                for w in rs.weyl_group() {
                    let img = (l.dim, rs.act(w, &l.center));
                    assert!(centers.contains(&img));
                    let twin = ls.iter().find(|m| m.dim == img.0 && m.center == img.1 && m.dim == 0);
                    if let Some(m) = twin {
                        assert_eq!(m.gamma, l.gamma);
                    }
                }
            }
        }
    }

    #[test]
    fn equal_parameters_are_special_in_two_orbit_systems() {
        for f in [Family::B, Family::G2] {
            let rs = sys(f, 2);
            let k = mult(&rs, &[(-1, 9)]);
            assert!(matches!(check_stability(&rs, &k, Perturbation::PerOrbit), Err(Error::UnstableParameter(_))));
            assert!(check_stability(&rs, &k, Perturbation::Joint).is_ok());
        }
        let rs = sys(Family::A, 2);
        assert!(matches!(enumerate_residual(&rs, &mult(&rs, &[(0, 1)])), Err(Error::SingularParameter(_))));
    }

    #[test]
    fn gamma_easy_cases() {
        let rs = sys(Family::G2, 2);
        let ls = enumerate_residual(&rs, &mult(&rs, &[(-1, 9)])).unwrap();
        assert_eq!(ls[0].gamma, Gamma::Exact(rat(1, 144)));
        assert!(ls.iter().any(|l| l.dim == 0 && l.gamma == Gamma::Unknown));
        assert!(ls.iter().filter(|l| l.dim == 1).all(|l| l.gamma == Gamma::Unknown));
    }

    /// `f_{rho}` in rank one against statrs' Gamma: `|Gamma(k)| / (|Gamma(2k)| |Gamma(-k)|)`.
    #[test]
    fn f_l_rank_one_point() {
        let rs = sys(Family::A, 1);
        for (p, q) in [(-1, 4), (-3, 20), (-7, 20)] {
            let km = mult(&rs, &[(p, q)]);
            let k = p as f64 / q as f64;
            let ls = enumerate_residual(&rs, &km).unwrap();
            let g = statrs::function::gamma::gamma;
            let expect = g(k).abs() / (g(2.0 * k).abs() * g(-k).abs());
            for l in ls.iter().filter(|l| l.dim == 0) {
                let lam = SpectralPoint::from_rat(&rs, &l.center);
                let f = f_l_density(&rs, &km, l, &lam).unwrap();
                assert!((f - expect).abs() <= 1e-12 * expect, "{f} vs {expect}");
            }
            let lam = SpectralPoint::new(&rs, vec![Complex64::new(0.0, 0.7)]);
            let full = crate::cfunc::density_full(&rs, &km, &lam).unwrap();
            assert_eq!(f_l_density(&rs, &km, &ls[0], &lam).unwrap(), full);
            let off = SpectralPoint::new(&rs, vec![Complex64::new(0.1, 0.7)]);
            assert!(matches!(f_l_density(&rs, &km, &ls[0], &off), Err(Error::Contract(_))));
        }
    }

    #[test]
    fn upper_product_positive_on_tempered_forms() {
        for (rs, k) in cases().into_iter().filter(|(rs, _)| rs.rank == 2) {
            for l in enumerate_residual(&rs, &k).unwrap() {
                for t in [[0.0, 0.0], [0.37, -1.1], [2.5, 0.4]] {
                    let v = upper_product(&rs, &k, &l, &t[..l.dim]).unwrap();
                    assert!(v.re > 0.0 && v.im.abs() <= 1e-10 * v.re, "{}{} {:?}: {v}", rs.family, rs.rank, l.center);
                }
            }
        }
    }

    #[test]
    fn growth_examples() {
        let rs = sys(Family::A, 1);
        let k = mult(&rs, &[(-1, 4)]);
        let ls = enumerate_residual(&rs, &k).unwrap();
        let g = growth_classify(&rs, &k, &SpectralPoint::new(&rs, vec![Complex64::new(0.0, 1.3)]));
        assert!(g.tempered && !g.square_integrable);
        for s in [1.0, -1.0] {
            let lam = SpectralPoint::real(&rs, &[s * -0.125]);
            let g = growth_classify(&rs, &k, &lam);
            assert!(g.square_integrable && g.tempered);
            assert_eq!(g.exponents.len(), 1);
            assert!(g.exponents[0][0].re > 0.0);
            assert!(in_support(&rs, &ls, &lam, 1e-9));
        }
        let big = SpectralPoint::real(&rs, &[3.0]);
        let g = growth_classify(&rs, &k, &big);
        assert!(!g.tempered && !g.square_integrable);
        assert_eq!(g.candidates, vec![rs.weyl_group().iter().position(|w| rs.act_f(w, &[1.0])[0] > 0.0).unwrap()]);
        assert!(!in_support(&rs, &ls, &big, 1e-9));
    }

    #[test]
    fn measure_parts_rank_one() {
        let rs = sys(Family::A, 1);
        let k = mult(&rs, &[(-1, 4)]);
        let ls = enumerate_residual(&rs, &k).unwrap();
        let parts = plancherel_parts(&rs, &ls);
        assert_eq!(parts.len(), 3);
        assert!(parts.iter().all(|p| p.gamma == Gamma::Exact(rat(1, 4))));
        assert!((parts[0].omega_normalizer() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(parts[1].omega_normalizer(), 1.0);
    }

    #[test]
    fn weight_lattice_has_unit_covolume() {
        for (rs, k) in cases() {
            let ls = enumerate_residual(&rs, &k).unwrap();
            assert!((weight_lattice_covolume(&rs, &ls[0]) - 1.0).abs() < 1e-12);
            for l in ls.iter().filter(|l| l.dim > 0) {
                assert!(weight_lattice_covolume(&rs, l) > 0.0);
            }
        }
    }

    #[test]
    fn integer_kernel_is_saturated() {
        // x + 2y = 0 has kernel Z(2, -1); 2x + 2y = 0 has kernel Z(1, -1).
        let b = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        let k1 = integer_kernel(&[b(&[1, 2])], 2);
        assert_eq!(k1.len(), 1);
        assert!(k1[0] == b(&[2, -1]) || k1[0] == b(&[-2, 1]));
        let k2 = integer_kernel(&[b(&[2, 2])], 2);
        assert!(k2[0] == b(&[1, -1]) || k2[0] == b(&[-1, 1]));
    }

    #[test]
    fn cuspidal_families_simply_laced() {
        for (r, h) in [(1usize, 2i64), (2, 3)] {
            let rs = sys(Family::A, r);
            let fams = cuspidal_families(&rs).unwrap();
            assert_eq!(fams.len(), 1);
            let f = &fams[0];
            assert_eq!(f.sigma_interval, Some((rat(-1, h), Rat::zero())));
            let minus_rho: Vec<Rat> = rho(&rs, &Multiplicity::equal(&rs, Rat::one())).iter().map(|x| -x).collect();
            assert_eq!(linalg::transpose(&f.map)[0], minus_rho);
            assert!(f.r_z.is_empty());
        }
        let rs = sys(Family::A, 1);
        let f = &cuspidal_families(&rs).unwrap()[0];
        assert_eq!(f.r_p, vec![0]);
        assert_eq!(f.defining, vec![0]);
    }

    #[test]
    fn cuspidal_families_rank_two() {
        for f in [Family::A, Family::B, Family::C, Family::G2] {
            let rs = sys(f, 2);
            let fams = cuspidal_families(&rs).unwrap();
            assert!(!fams.is_empty());
            let m = rs.num_orbits();
            for fam in &fams {
                for &b in &fam.defining {
                    let form = pairing_form(&rs, &fam.map, b);
                    let e = unit(m, rs.orbit(b));
                    assert!(form.iter().zip(&e).all(|(a, c)| (a + c).is_zero()));
                }
                // At a point of the region the member is a distinguished,
                // square-integrable point.
                let kw = fam.sigma_witness.clone().expect("nonempty region");
                let km = Multiplicity::new(&rs, kw.clone()).unwrap();
                let lam = fam.at(&kw);
                let ls = enumerate_residual(&rs, &km).unwrap();
                assert!(ls.iter().any(|l| l.dim == 0 && l.center == lam));
                let g = growth_classify(&rs, &km, &SpectralPoint::from_rat(&rs, &lam));
                assert!(g.square_integrable, "{f} {:?}", lam);
            }
        }
        assert!(matches!(cuspidal_families(&sys(Family::A, 3)), Err(Error::Contract(_))));
    }

    #[test]
    fn cuspidal_eigenvalues_are_separated() {
        for (rs, k) in cases() {
            let ls = enumerate_residual(&rs, &k).unwrap();
            let pts = cuspidal_points(&rs, &ls);
            assert!(!pts.is_empty());
            assert!(eigenvalues_separated(&rs, &k, &pts));
        }
    }

    fn combinatorics(ls: &[ResidualSubspace]) -> Vec<(usize, Vec<usize>, Vec<usize>)> {
        ls.iter().map(|l| (l.dim, l.k_incident.clone(), l.zero_incident.clone())).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn a2_output_constant_in_k(p in 1i64..300) {
            let rs = sys(Family::A, 2);
            let base = enumerate_residual(&rs, &mult(&rs, &[(-1, 4)])).unwrap();
            let k = mult(&rs, &[(-p, 901)]);
            let ls = enumerate_residual(&rs, &k).unwrap();
            prop_assert_eq!(combinatorics(&ls), combinatorics(&base));
        }

        #[test]
        fn b2_output_constant_in_cell(p in -40i64..40, q in -40i64..40) {
            let rs = sys(Family::B, 2);
            let base = enumerate_residual(&rs, &mult(&rs, &[(-1, 5), (-1, 7)])).unwrap();
            let k = Multiplicity::new(&rs, vec![rat(-1, 5) * (Rat::one() + rat(p, 4000)), rat(-1, 7) * (Rat::one() + rat(q, 4000))]).unwrap();
            let ls = enumerate_residual(&rs, &k).unwrap();
            prop_assert_eq!(combinatorics(&ls), combinatorics(&base));
        }
    }
}
