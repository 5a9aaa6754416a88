//! On-disk memo of series coefficients, enabled by `HYPERGEO_CACHE_DIR`.
//!
//! Entries are keyed by the SHA-256 of `(family, rank, k, lambda, N)` and
//! carry a digest of their payload; an entry whose digest does not match is
//! ignored and rewritten.

use std::fs;
use std::path::PathBuf;

use hypergeo::cfunc::SpectralPoint;
use hypergeo::series::{series_coefficients, ExponentSeries, HypergeometricF, QPlusIndex};
use hypergeo::{Multiplicity, RootSystem};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    digest: String,
    /// `[re, im]` per coefficient, in `Q_+` index order.
    coeffs: Vec<[f64; 2]>,
}

fn sha_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

fn payload_digest(coeffs: &[[f64; 2]]) -> String {
    let mut h = Sha256::new();
    for c in coeffs {
        h.update(c[0].to_le_bytes());
        h.update(c[1].to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub struct SeriesCache {
    dir: Option<PathBuf>,
}

impl SeriesCache {
    pub fn from_env() -> Self {
        SeriesCache { dir: std::env::var_os("HYPERGEO_CACHE_DIR").map(PathBuf::from) }
    }

    fn key(rs: &RootSystem, k: &Multiplicity, lambda: &[Complex64], cutoff: usize) -> String {
        let ks: Vec<String> = k.values().iter().map(|q| q.to_string()).collect();
        let ls: Vec<String> = lambda.iter().map(|z| format!("{:016x}:{:016x}", z.re.to_bits(), z.im.to_bits())).collect();
        format!("{}|{}|{}|{}|{}", rs.family, rs.rank, ks.join(","), ls.join(","), cutoff)
    }

    fn load(&self, key: &str) -> Option<Vec<[f64; 2]>> {
        let path = self.dir.as_ref()?.join(format!("{}.json", sha_hex(key)));
        let e: Entry = serde_json::from_slice(&fs::read(path).ok()?).ok()?;
        (e.key == key && e.digest == payload_digest(&e.coeffs)).then_some(e.coeffs)
    }

    fn store(&self, key: &str, coeffs: &[[f64; 2]]) {
        let Some(dir) = &self.dir else { return };
        if fs::create_dir_all(dir).is_err() {
            return;
        }
        let e = Entry { key: key.to_string(), digest: payload_digest(coeffs), coeffs: coeffs.to_vec() };
        if let Ok(bytes) = serde_json::to_vec(&e) {
            // Write then rename so concurrent readers never see a partial file.
            let tmp = dir.join(format!("{}.tmp{}", sha_hex(key), std::process::id()));
            if fs::write(&tmp, bytes).is_ok() {
                let _ = fs::rename(&tmp, dir.join(format!("{}.json", sha_hex(key))));
            }
        }
    }

    pub fn series(&self, rs: &RootSystem, k: &Multiplicity, lambda: &[Complex64], cutoff: usize) -> hypergeo::Result<ExponentSeries<Complex64>> {
        let key = Self::key(rs, k, lambda, cutoff);
        let index = QPlusIndex::new(rs.rank, cutoff);
        if let Some(c) = self.load(&key) {
            if c.len() == index.len() {
                let nu0 = series_coefficients(rs, k, lambda, 0)?.nu0;
                let mut s = ExponentSeries::zero(nu0, index);
                s.coeffs = c.iter().map(|v| Complex64::new(v[0], v[1])).collect();
                return Ok(s);
            }
        }
        let s = series_coefficients(rs, k, lambda, cutoff)?;
        self.store(&key, &s.coeffs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
        Ok(s)
    }

    /// `HypergeometricF::new` with every `Phi(w lambda)` series memoized.
    pub fn hypergeometric(&self, rs: &RootSystem, k: &Multiplicity, lambda: &SpectralPoint, cutoff: usize) -> hypergeo::Result<HypergeometricF> {
        let plain = HypergeometricF::new(rs, k, lambda, 0)?;
        let mut terms = Vec::with_capacity(plain.terms.len());
        for (wi, c, _) in plain.terms {
            let wl = rs.act_c(&rs.weyl_group()[wi], &lambda.coords);
            terms.push((wi, c, self.series(rs, k, &wl, cutoff)?));
        }
        Ok(HypergeometricF { terms, cutoff })
    }
}
