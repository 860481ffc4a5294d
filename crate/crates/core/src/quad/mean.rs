//! Twisted and Euclidean spherical means.

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::rule::SphereRule;
use crate::quad::sum::par_indexed_sum_max;

/// Constants `C_k` in bounds of the form `|z|^k w(|z|) |f(z)| <= C_k`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecayBounds {
    pub constants: Vec<(u32, f64)>,
}

/// A deterministic complex function on ℂⁿ (or ℝ^{2n}).
pub trait FunctionSampler: Sync {
    fn n(&self) -> usize;

    /// `Err` carries a human-readable reason, e.g. a singularity.
    fn eval(&self, z: &[Complex64]) -> std::result::Result<Complex64, String>;

    fn decay(&self) -> Option<&DecayBounds> {
        None
    }

    /// Upper bound on the total degree of `ω ↦ f(ρω)` when it is a
    /// polynomial on each sphere.
    fn angular_degree(&self) -> Option<u32> {
        None
    }
}

impl<F: FunctionSampler + ?Sized> FunctionSampler for &F {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn eval(&self, z: &[Complex64]) -> std::result::Result<Complex64, String> {
        (**self).eval(z)
    }
    fn decay(&self) -> Option<&DecayBounds> {
        (**self).decay()
    }
    fn angular_degree(&self) -> Option<u32> {
        (**self).angular_degree()
    }
}

/// `f ↦ conj ∘ f`.
pub struct Conjugated<F>(pub F);

impl<F: FunctionSampler> FunctionSampler for Conjugated<F> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn eval(&self, z: &[Complex64]) -> std::result::Result<Complex64, String> {
        self.0.eval(z).map(|v| v.conj())
    }
    fn angular_degree(&self) -> Option<u32> {
        self.0.angular_degree()
    }
}

/// Mean value together with the largest `|f|` seen on the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereSample {
    pub value: Complex64,
    pub sup_abs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `f × μ_s`
    Right,
    /// `μ_s × f`
    Left,
    /// Plain average, no phase.
    Euclidean,
}

fn check_dims(fn_n: usize, z: &[Complex64], rule: &SphereRule) -> Result<()> {
    if z.len() != rule.n() {
        return Err(Error::DimensionMismatch { expected: rule.n(), found: z.len() });
    }
    if fn_n != rule.n() {
        return Err(Error::DimensionMismatch { expected: rule.n(), found: fn_n });
    }
    Ok(())
}

/// Computes the mean and the sphere sup of `|f|` in one pass.
pub fn sphere_sample(
    f: &(impl FunctionSampler + ?Sized),
    z: &[Complex64],
    lambda: f64,
    rule: &SphereRule,
    side: Side,
) -> Result<SphereSample> {
    let n = rule.n();
    check_dims(f.n(), z, rule)?;
    let sign = if side == Side::Euclidean { 1.0 } else { -1.0 };
    let (value, sup_abs) = par_indexed_sum_max(rule.len(), |i| {
        let w = rule.node(i);
        let x: Vec<Complex64> = w.iter().zip(z).map(|(wk, zk)| zk + wk * sign).collect();
        let v = f.eval(&x).map_err(|message| Error::Sampler { point: x, message })?;
        let term = match side {
            Side::Euclidean => v,
            Side::Right | Side::Left => {
                // Im(z·w̄) with z·w̄ = Σ z_k conj(w_k)
                let im: f64 = (0..n).map(|k| (z[k] * w[k].conj()).im).sum();
                let phase = Complex64::from_polar(1.0, 0.5 * lambda * im);
                let phase = if side == Side::Left { phase.conj() } else { phase };
                v * phase
            }
        };
        Ok::<_, Error>((term * rule.weight(i), v.norm()))
    })?;
    Ok(SphereSample { value, sup_abs })
}

/// `f ×_λ μ_s(z) = ∫ f(z−w) e^{iλ/2·Im(z·w̄)} dμ_s(w)`.
pub fn twisted_mean(f: &(impl FunctionSampler + ?Sized), z: &[Complex64], lambda: f64, rule: &SphereRule) -> Result<Complex64> {
    sphere_sample(f, z, lambda, rule, Side::Right).map(|s| s.value)
}

/// `μ_s ×_λ f(z) = ∫ f(z−w) e^{−iλ/2·Im(z·w̄)} dμ_s(w)`.
pub fn left_twisted_mean(f: &(impl FunctionSampler + ?Sized), z: &[Complex64], lambda: f64, rule: &SphereRule) -> Result<Complex64> {
    sphere_sample(f, z, lambda, rule, Side::Left).map(|s| s.value)
}

/// `∫ g(x + y) dσ_s(y)` under `ℂⁿ ≅ ℝ^{2n}`.
pub fn euclidean_mean(g: &(impl FunctionSampler + ?Sized), x: &[Complex64], rule: &SphereRule) -> Result<Complex64> {
    sphere_sample(g, x, 0.0, rule, Side::Euclidean).map(|s| s.value)
}
