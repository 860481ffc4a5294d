use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Keeps quadrature nodes strictly inside the open annulus.
pub const GEOMETRY_MARGIN: f64 = 1e-9;

/// `Ann(r, R) = {r < |z| < R}` in ℂⁿ; `outer = None` means `R = ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusSpec {
    pub n: usize,
    pub r: f64,
    pub outer: Option<f64>,
}

impl AnnulusSpec {
    pub fn new(n: usize, r: f64, outer: Option<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("n must be at least 1".into()));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Contract(format!("inner radius must be finite and >= 0, got {r}")));
        }
        if let Some(big) = outer {
            if !(big > r) {
                return Err(Error::Contract(format!("outer radius {big} must exceed inner radius {r}")));
            }
        }
        Ok(Self { n, r, outer })
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho > self.r && self.outer.map_or(true, |big| rho < big)
    }
}

impl Serialize for AnnulusSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AnnulusSpec", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("r", &self.r)?;
        match self.outer {
            Some(big) => st.serialize_field("R", &big)?,
            None => st.serialize_field("R", "inf")?,
        }
        st.end()
    }
}

pub fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `S_s(z) ⊂ Ann(r, R)` and `B_r(0) ⊂ B_s(z)`, i.e. `s > r + |z|` and
/// `s + |z| < R`, each with a small safety margin.
pub fn admissible(z: &[Complex64], s: f64, ann: &AnnulusSpec) -> bool {
    let zn = norm(z);
    s > ann.r + zn + GEOMETRY_MARGIN && ann.outer.map_or(true, |big| s + zn < big - GEOMETRY_MARGIN)
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

/// Unit vector in ℂⁿ from `2n − 1` numbers in `[0, 1)`: Dirichlet moduli by
/// stick breaking, uniform phases.
fn direction_from(n: usize, u: &[f64]) -> Vec<Complex64> {
    let mut t = Vec::with_capacity(n);
    let mut rest = 1.0;
    for j in 0..n - 1 {
        let part = rest * (1.0 - (1.0 - u[j]).powf(1.0 / (n - 1 - j) as f64));
        t.push(part);
        rest -= part;
    }
    t.push(rest.max(0.0));
    t.iter()
        .enumerate()
        .map(|(k, tk)| Complex64::from_polar(tk.sqrt(), 2.0 * std::f64::consts::PI * u[n - 1 + k]))
        .collect()
}

/// `count` centres with `|z|` evenly spaced in `[0, max_norm]` (the first is
/// the origin) along Halton directions; the seed picks the sequence offset.
pub fn sample_centres(n: usize, count: usize, max_norm: f64, seed: u64) -> Vec<Vec<Complex64>> {
    let offset = ChaCha8Rng::seed_from_u64(seed).gen_range(1..4096u64);
    (0..count)
        .map(|k| {
            let radius = if count > 1 { max_norm * k as f64 / (count - 1) as f64 } else { 0.0 };
            let u: Vec<f64> = (0..2 * n - 1).map(|d| radical_inverse(offset + k as u64, PRIMES[d % PRIMES.len()])).collect();
            direction_from(n, &u).into_iter().map(|c| Complex64::new(c.re * radius + 0.0, c.im * radius + 0.0)).collect()
        })
        .collect()
}

/// `(z, s)` with `s = r + |z| + offset`, keeping admissible pairs only.
pub fn admissible_pairs(ann: &AnnulusSpec, centres: &[Vec<Complex64>], offsets: &[f64]) -> Vec<(Vec<Complex64>, f64)> {
    let mut out = Vec::new();
    for z in centres {
        for off in offsets {
            let s = ann.r + norm(z) + off;
            if admissible(z, s, ann) {
                out.push((z.clone(), s));
            }
        }
    }
    out
}
