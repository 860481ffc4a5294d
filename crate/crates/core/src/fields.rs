//! Functions `Σ ã(ρ)P(z)` with harmonic polynomial factors, and the vector
//! fields `Z_j = ∂_j − z̄_j/4`, `Z̄_j = ∂̄_j + z_j/4` acting on them.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::{BigRational, Zero};

use crate::cq::{rat, rat_int, rat_to_f64, ComplexRational};
use crate::error::{Error, Result};
use crate::harmonic::harmonic_decompose;
use crate::poly::{Bidegree, BigradedPolynomial, FloatPoly};
use crate::quad::{twisted_mean, FunctionSampler, SphereRule};
use crate::radial::{ProfileKey, RadialProfile};

/// Canonical form: one harmonic polynomial per radial term `e^{σρ²/4}ρ^m`.
/// Two functions are equal exactly when their maps are equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredFunction {
    n: usize,
    terms: BTreeMap<ProfileKey, BigradedPolynomial>,
}

impl StructuredFunction {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    /// `ã(ρ)P(z)` for harmonic `P`.
    pub fn from_product(profile: &RadialProfile, poly: &BigradedPolynomial) -> Result<Self> {
        if !poly.is_harmonic() {
            return Err(Error::NotHarmonic);
        }
        let mut out = Self::zero(poly.n());
        for ((s, m), c) in profile.terms() {
            out.add_entry(s.clone(), *m, &poly.scale(c));
        }
        Ok(out)
    }

    /// `ã(ρ)P(z)` for any polynomial; the harmonic layers `|z|^{2k}P_k` are
    /// folded into the radial exponent.
    pub fn from_polynomial(profile: &RadialProfile, poly: &BigradedPolynomial) -> Result<Self> {
        let mut out = Self::zero(poly.n());
        for (p, q) in poly.bidegrees() {
            let part = poly.homogeneous_part(p, q);
            let dec = harmonic_decompose(&part)?;
            for (k, layer) in &dec.layers {
                out = out.add(&Self::from_product(&profile.shift(2 * *k as i32), layer)?)?;
            }
        }
        Ok(out)
    }

    fn add_entry(&mut self, sigma: BigRational, m: i32, poly: &BigradedPolynomial) {
        if poly.is_zero() {
            return;
        }
        let key = (sigma, m);
        let sum = match self.terms.remove(&key) {
            Some(old) => &old + poly,
            None => poly.clone(),
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ProfileKey, &BigradedPolynomial)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut out = self.clone();
        for ((s, m), p) in &other.terms {
            out.add_entry(s.clone(), *m, p);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ComplexRational) -> Self {
        let mut out = Self::zero(self.n);
        for ((s, m), p) in &self.terms {
            out.add_entry(s.clone(), *m, &p.scale(c));
        }
        out
    }

    /// All bidegrees present in some polynomial factor.
    pub fn bidegrees(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = self.terms.values().flat_map(|p| p.bidegrees()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Sum of the parts whose polynomial lies in `H_{p,q}`.
    pub fn project_component(&self, p: u32, q: u32) -> Self {
        let mut out = Self::zero(self.n);
        for ((s, m), poly) in &self.terms {
            out.add_entry(s.clone(), *m, &poly.homogeneous_part(p, q));
        }
        out
    }

    /// `Z̄_j f` (`conjugate = true`) or `Z_j f`, again in canonical form.
    pub fn apply_field(&self, j: usize, conjugate: bool) -> Result<Self> {
        if j == 0 || j > self.n {
            return Err(Error::AxisOutOfRange { index: j, n: self.n });
        }
        let quarter = rat(1, 4);
        let mut out = Self::zero(self.n);
        for ((s, m), poly) in &self.terms {
            // Z̄_j(gP) = ½(g'/ρ + g/2) z_j P + g ∂̄_j P, Z_j mirrors with z̄_j and −g/2.
            let drift = if conjugate { (s + rat_int(1)) * &quarter } else { (s - rat_int(1)) * &quarter };
            let low = rat(*m as i64, 2);
            for (p, q) in poly.bidegrees() {
                let part = poly.homogeneous_part(p, q);
                out.add_entry(s.clone(), *m, &part.wirtinger(j, conjugate)?);
                let moved = part.times_coordinate(j, !conjugate)?;
                for (k, layer) in harmonic_decompose(&moved)?.layers {
                    let shift = 2 * k as i32;
                    out.add_entry(s.clone(), m - 2 + shift, &layer.scale_rational(&low));
                    out.add_entry(s.clone(), m + shift, &layer.scale_rational(&drift));
                }
            }
        }
        Ok(out)
    }

    pub fn compile(&self) -> CompiledStructured {
        let terms = self
            .terms
            .iter()
            .map(|((s, m), p)| (rat_to_f64(s), *m, p.compile()))
            .collect();
        let degree = self.terms.values().map(|p| p.total_degree()).max().unwrap_or(0);
        CompiledStructured { n: self.n, terms, degree }
    }

    /// Plain text: each radial key as `@ sigma m` followed by polynomial lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((s, m), p) in &self.terms {
            let sigma = if s.is_integer() { s.numer().to_string() } else { format!("{}/{}", s.numer(), s.denom()) };
            out.push_str(&format!("@ {sigma} {m}\n"));
            out.push_str(&p.to_text());
        }
        out
    }
}

/// Floating evaluator for a [`StructuredFunction`].
#[derive(Clone, Debug)]
pub struct CompiledStructured {
    n: usize,
    terms: Vec<(f64, i32, FloatPoly)>,
    degree: u32,
}

impl FunctionSampler for CompiledStructured {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[Complex64]) -> std::result::Result<Complex64, String> {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let rho = r2.sqrt();
        let mut acc = Complex64::zero();
        for (s, m, p) in &self.terms {
            if rho == 0.0 {
                if *m < 0 {
                    return Err("radial factor is singular at the origin".into());
                }
                if *m > 0 {
                    continue;
                }
            }
            acc += p.eval(z) * (s * r2 / 4.0).exp() * rho.powi(*m);
        }
        Ok(acc)
    }

    fn angular_degree(&self) -> Option<u32> {
        Some(self.degree)
    }
}

fn homogeneous_bidegree(p: &BigradedPolynomial) -> Result<(u32, u32)> {
    match p.bidegree() {
        Bidegree::Homogeneous(a, b) if p.is_harmonic() => Ok((a, b)),
        Bidegree::Homogeneous(..) => Err(Error::NotHarmonic),
        Bidegree::Inhomogeneous => Err(Error::NotHomogeneous),
    }
}

/// `[{(1/(2(n+p+q−1)))(ρ d/dρ ± ρ²/2) + 1}ã] · ∂P`, where the `+` sign and
/// `∂̄_j` go with `Z̄_j` and the `−` sign and `∂_j` with `Z_j`.
pub fn projection_closed_form(profile: &RadialProfile, poly: &BigradedPolynomial, j: usize, conjugate: bool) -> Result<StructuredFunction> {
    let (p, q) = homogeneous_bidegree(poly)?;
    if p + q == 0 {
        return Ok(StructuredFunction::zero(poly.n()));
    }
    let a = rat(1, 2 * (poly.n() as i64 + p as i64 + q as i64 - 1));
    let sign = if conjugate { 1 } else { -1 };
    StructuredFunction::from_product(&profile.euler_apply(&a, sign), &poly.wirtinger(j, conjugate)?)
}

/// `Π_{p,q−1}(Z̄_j(ãP))` (or `Π_{p−1,q}(Z_j(ãP))`) through the operator algebra.
pub fn projected_field(profile: &RadialProfile, poly: &BigradedPolynomial, j: usize, conjugate: bool) -> Result<StructuredFunction> {
    let (p, q) = homogeneous_bidegree(poly)?;
    let f = StructuredFunction::from_product(profile, poly)?;
    let image = f.apply_field(j, conjugate)?;
    let target = if conjugate { q.checked_sub(1).map(|b| (p, b)) } else { p.checked_sub(1).map(|a| (a, q)) };
    Ok(match target {
        Some((a, b)) => image.project_component(a, b),
        None => StructuredFunction::zero(poly.n()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Commutation {
    /// `Z(f × μ_s)(z)` by central differences.
    pub lhs: Complex64,
    /// `(Zf) × μ_s(z)`.
    pub rhs: Complex64,
    pub residual: f64,
}

pub const FD_STEP: f64 = 1e-4;

/// Compares the field applied to the twisted mean with the mean of the field.
pub fn commutation_residual(
    f: &StructuredFunction,
    j: usize,
    conjugate: bool,
    z: &[Complex64],
    rule: &SphereRule,
) -> Result<Commutation> {
    if z.len() != f.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), found: z.len() });
    }
    let compiled = f.compile();
    let mean_at = |shift: Complex64| -> Result<Complex64> {
        let mut x = z.to_vec();
        x[j - 1] += shift;
        twisted_mean(&compiled, &x, 1.0, rule)
    };
    let image = f.apply_field(j, conjugate)?;
    let h = FD_STEP;
    let dx = (mean_at(Complex64::new(h, 0.0))? - mean_at(Complex64::new(-h, 0.0))?) / (2.0 * h);
    let dy = (mean_at(Complex64::new(0.0, h))? - mean_at(Complex64::new(0.0, -h))?) / (2.0 * h);
    let centre = mean_at(Complex64::zero())?;
    let i = Complex64::new(0.0, 1.0);
    let zj = z[j - 1];
    let lhs = if conjugate {
        0.5 * (dx + i * dy) + 0.25 * zj * centre
    } else {
        0.5 * (dx - i * dy) - 0.25 * zj.conj() * centre
    };
    let rhs = twisted_mean(&image.compile(), z, 1.0, rule)?;
    Ok(Commutation { lhs, rhs, residual: (lhs - rhs).norm() })
}
