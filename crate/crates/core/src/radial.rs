//! Radial profiles `Σ c·e^{σρ²/4}ρ^m`, the first-order operators
//! `{A(ρ d/dρ + κρ²) + 1}`, the closed-form kernel bases they annihilate,
//! and least-squares fitting of sampled profiles.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use num::{BigRational, One, Zero};

use crate::cq::{parse_rational, rat, rat_int, rat_to_f64, ComplexRational};
use crate::error::{Error, Result};

/// `(σ, m)` for the term `e^{σρ²/4}ρ^m`.
pub type ProfileKey = (BigRational, i32);

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadialProfile {
    terms: BTreeMap<ProfileKey, ComplexRational>,
}

fn format_sigma(s: &BigRational) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

impl RadialProfile {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(sigma: BigRational, m: i32, c: ComplexRational) -> Self {
        let mut out = Self::zero();
        out.add_term(sigma, m, c);
        out
    }

    /// `e^{σρ²/4}ρ^m` with unit coefficient and integer `σ`.
    pub fn monomial(sigma: i64, m: i32) -> Self {
        Self::term(rat_int(sigma), m, ComplexRational::one())
    }

    pub fn constant(c: ComplexRational) -> Self {
        Self::term(BigRational::zero(), 0, c)
    }

    pub fn from_terms<I: IntoIterator<Item = (BigRational, i32, ComplexRational)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (s, m, c) in terms {
            out.add_term(s, m, c);
        }
        out
    }

    pub fn add_term(&mut self, sigma: BigRational, m: i32, c: ComplexRational) {
        if c.is_zero() {
            return;
        }
        let key = (sigma, m);
        let sum = match self.terms.remove(&key) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ProfileKey, &ComplexRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((s, m), c) in &other.terms {
            out.add_term(s.clone(), *m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&ComplexRational::from_int(-1)))
    }

    pub fn scale(&self, k: &ComplexRational) -> Self {
        Self::from_terms(self.terms.iter().map(|((s, m), c)| (s.clone(), *m, c * k)))
    }

    /// Multiplies by `ρ^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self::from_terms(self.terms.iter().map(|((s, m), c)| (s.clone(), m + k, c.clone())))
    }

    /// `(1/ρ) d/dρ`, using `(1/ρ)(e^{σρ²/4}ρ^m)' = e^{σρ²/4}(m ρ^{m-2} + (σ/2)ρ^m)`.
    pub fn radial_derivative_over_rho(&self) -> Self {
        let mut out = Self::zero();
        for ((s, m), c) in &self.terms {
            out.add_term(s.clone(), m - 2, c.scale(&rat_int(*m as i64)));
            out.add_term(s.clone(), *m, c.scale(&(s / rat_int(2))));
        }
        out
    }

    /// `{A(ρ d/dρ + drift·ρ²) + 1}` applied term by term.
    pub fn euler_apply_drift(&self, a: &BigRational, drift: &BigRational) -> Self {
        let mut out = Self::zero();
        let half = rat(1, 2);
        for ((s, m), c) in &self.terms {
            let same = a * rat_int(*m as i64) + BigRational::one();
            out.add_term(s.clone(), *m, c.scale(&same));
            let up = a * (s * &half + drift);
            out.add_term(s.clone(), m + 2, c.scale(&up));
        }
        out
    }

    /// `{A(ρ d/dρ + sign·ρ²/2) + 1}`.
    pub fn euler_apply(&self, a: &BigRational, sign: i8) -> Self {
        self.euler_apply_drift(a, &rat(sign as i64, 2))
    }

    pub fn eval(&self, rho: f64) -> Complex64 {
        let ln = rho.ln();
        let mut acc = Complex64::zero();
        for ((s, m), c) in &self.terms {
            let e = rat_to_f64(s) * rho * rho / 4.0 + *m as f64 * ln;
            acc += c.to_c64() * e.exp();
        }
        acc
    }

    /// Lines `sigma m re im`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((s, m), c) in &self.terms {
            let _ = writeln!(out, "{} {} {}", format_sigma(s), m, c);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut out = Self::zero();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: &str| Error::Parse { line: idx + 1, message: message.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(bad("expected `sigma m re im`"));
            }
            let sigma = parse_rational(parts[0]).ok_or_else(|| bad("invalid sigma"))?;
            let m: i32 = parts[1].parse().map_err(|_| bad("invalid exponent m"))?;
            let re = parse_rational(parts[2]).ok_or_else(|| bad("invalid real part"))?;
            let im = parse_rational(parts[3]).ok_or_else(|| bad("invalid imaginary part"))?;
            out.add_term(sigma, m, ComplexRational::new(re, im));
        }
        Ok(out)
    }
}

/// One factor `{A(ρ d/dρ + sign·ρ²/2) + 1}` of an annihilator chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainFactor {
    pub coefficient: BigRational,
    pub sign: i8,
}

/// Factors in product order; the last factor acts first.
///
/// The `−` family carries `1/(2(n+p−i))`, `i = 1..p`; the `+` family carries
/// `1/(2(n+p+q−k))`, `k = 1..q`, and is applied first.
pub fn annihilator_chain(n: usize, p: u32, q: u32) -> Result<Vec<ChainFactor>> {
    if p + q == 0 {
        return Err(Error::Contract("annihilator chain needs p + q >= 1".into()));
    }
    let (n, p, q) = (n as i64, p as i64, q as i64);
    let mut chain = Vec::with_capacity((p + q) as usize);
    for i in 1..=p {
        chain.push(ChainFactor { coefficient: rat(1, 2 * (n + p - i)), sign: -1 });
    }
    for k in 1..=q {
        chain.push(ChainFactor { coefficient: rat(1, 2 * (n + p + q - k)), sign: 1 });
    }
    Ok(chain)
}

/// Applies a chain with Gaussian rate `λ` (drift `sign·λ/2`).
pub fn apply_chain(profile: &RadialProfile, chain: &[ChainFactor], lambda: &BigRational) -> RadialProfile {
    chain.iter().rev().fold(profile.clone(), |acc, f| {
        let drift = lambda * rat(f.sign as i64, 2);
        acc.euler_apply_drift(&f.coefficient, &drift)
    })
}

fn exponent(n: usize, p: u32, q: u32, i: u32) -> i32 {
    -2 * (n as i32 + p as i32 + q as i32 - i as i32)
}

/// `{e^{λρ²/4}ρ^{−2(n+p+q−i)}}_{i≤p} ∪ {e^{−λρ²/4}ρ^{−2(n+p+q−k)}}_{k≤q}`.
pub fn characterization_basis_lambda(n: usize, p: u32, q: u32, lambda: &BigRational) -> Vec<RadialProfile> {
    truncated_basis(n, p, q, p, q, lambda)
}

pub fn characterization_basis(n: usize, p: u32, q: u32) -> Vec<RadialProfile> {
    characterization_basis_lambda(n, p, q, &BigRational::one())
}

/// Both families cut off at `min(p, q)`; empty for pure types.
pub fn two_sided_basis(n: usize, p: u32, q: u32, lambda: &BigRational) -> Vec<RadialProfile> {
    let t = p.min(q);
    truncated_basis(n, p, q, t, t, lambda)
}

fn truncated_basis(n: usize, p: u32, q: u32, up: u32, down: u32, lambda: &BigRational) -> Vec<RadialProfile> {
    let one = ComplexRational::one();
    let mut out = Vec::with_capacity((up + down) as usize);
    for i in 1..=up {
        out.push(RadialProfile::term(lambda.clone(), exponent(n, p, q, i), one.clone()));
    }
    for k in 1..=down {
        out.push(RadialProfile::term(-lambda, exponent(n, p, q, k), one.clone()));
    }
    out
}

/// Samples of a radial function on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledProfile {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SampledProfile {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Contract(format!("{} grid points but {} values", grid.len(), values.len())));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Contract("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_profile(profile: &RadialProfile, grid: &[f64]) -> Self {
        Self { grid: grid.to_vec(), values: grid.iter().map(|&r| profile.eval(r)).collect() }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Multiplies sample `i` by `ρ_i^k`.
    pub fn times_power(&self, k: i32) -> Self {
        let values = self.grid.iter().zip(&self.values).map(|(r, v)| v * r.powi(k)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,re,im\n");
        for (r, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", r, v.re, v.im);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || (idx == 0 && line.starts_with("rho")) {
                continue;
            }
            let bad = || Error::Parse { line: idx + 1, message: "expected `rho,re,im`".into() };
            let parts: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if parts.len() != 3 {
                return Err(bad());
            }
            grid.push(parts[0]);
            values.push(Complex64::new(parts[1], parts[2]));
        }
        Self::new(grid, values)
    }
}

/// `count` Chebyshev points in `(lo, hi)`, increasing.
pub fn chebyshev_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..count)
        .rev()
        .map(|k| mid + half * ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos())
        .collect()
}

/// Chebyshev grid in `(r+δ, R−δ)` with `δ = 0.05(R−r)`; for an unbounded
/// annulus the window is `(r+δ, r+δ+4)` with `δ = 0.2`.
pub fn verification_grid(r: f64, big_r: Option<f64>, count: usize) -> Vec<f64> {
    match big_r {
        Some(big) => {
            let d = 0.05 * (big - r);
            chebyshev_grid(r + d, big - d, count)
        }
        None => chebyshev_grid(r + 0.2, r + 4.2, count),
    }
}

pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileFit {
    pub coefficients: Vec<Complex64>,
    pub residual: f64,
    pub condition: f64,
    pub ill_conditioned: bool,
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Column-normalized least squares of `samples` against `basis`.
pub fn fit_profile(samples: &SampledProfile, basis: &[RadialProfile]) -> Result<ProfileFit> {
    let rows = samples.len();
    let cols = basis.len();
    if rows < 2 * cols {
        return Err(Error::Contract(format!("{rows} samples cannot support a fit with {cols} basis profiles")));
    }
    let bnorm = l2(&samples.values);
    if bnorm == 0.0 {
        return Ok(ProfileFit { coefficients: vec![Complex64::zero(); cols], residual: 0.0, condition: 1.0, ill_conditioned: false });
    }
    if cols == 0 {
        return Ok(ProfileFit { coefficients: Vec::new(), residual: 1.0, condition: 1.0, ill_conditioned: false });
    }
    let mut a = DMatrix::<Complex64>::zeros(rows, cols);
    let mut scales = vec![0.0; cols];
    for (j, prof) in basis.iter().enumerate() {
        for (i, &r) in samples.grid.iter().enumerate() {
            a[(i, j)] = prof.eval(r);
        }
        let sup = a.column(j).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        scales[j] = sup;
        if sup > 0.0 && sup.is_finite() {
            a.column_mut(j).scale_mut(1.0 / sup);
        }
    }
    let b = DVector::<Complex64>::from_column_slice(&samples.values);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let eps = smax * (rows.max(cols) as f64) * f64::EPSILON;
    let x = svd.solve(&b, eps).map_err(|e| Error::Contract(e.to_string()))?;
    let misfit = &a * &x - &b;
    let residual = misfit.norm() / bnorm;
    let coefficients = x
        .iter()
        .zip(&scales)
        .map(|(v, s)| if *s > 0.0 && s.is_finite() { v / s } else { Complex64::zero() })
        .collect();
    let ill = !(condition <= ILL_CONDITIONED) || scales.iter().any(|s| !(*s > 0.0 && s.is_finite()));
    Ok(ProfileFit { coefficients, residual, condition, ill_conditioned: ill })
}

/// True when two profiles are exactly equal after subtraction.
pub fn profiles_equal(a: &RadialProfile, b: &RadialProfile) -> bool {
    a.sub(b).is_zero()
}

/// Distinct `(σ, m)` signatures, i.e. the span dimension of a term basis.
pub fn span_dimension(basis: &[RadialProfile]) -> usize {
    let mut keys: Vec<&ProfileKey> = basis.iter().flat_map(|p| p.terms.keys()).collect();
    keys.sort();
    keys.dedup();
    if basis.iter().all(|p| p.len() == 1) {
        keys.len()
    } else {
        0
    }
}
