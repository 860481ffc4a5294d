//! Built-in test functions.

use num::complex::Complex64;
use num::BigRational;

use crate::cq::ComplexRational;
use crate::error::{Error, Result};
use crate::fields::StructuredFunction;
use crate::poly::{BigradedPolynomial, MultiIndex};
use crate::quad::{DecayBounds, FunctionSampler};
use crate::radial::RadialProfile;

/// Which Gaussian family a model function belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `e^{λρ²/4}P/ρ^{2(n+p+q−i)}`, `1 <= i <= p`.
    Growing,
    /// `e^{−λρ²/4}P/ρ^{2(n+p+q−k)}`, `1 <= k <= q`.
    Decaying,
}

/// `z_1^p z̄_2^q` for `n >= 2`; for `n = 1` only pure types exist.
pub fn default_harmonic(n: usize, p: u32, q: u32) -> Result<BigradedPolynomial> {
    if n == 0 {
        return Err(Error::Contract("n must be at least 1".into()));
    }
    let (a_axis, b_axis) = if n >= 2 {
        (0, 1)
    } else if p == 0 || q == 0 {
        (0, 0)
    } else {
        return Err(Error::Contract(format!("H_{{{p},{q}}} is trivial in one complex dimension")));
    };
    let mut alpha = vec![0u32; n];
    let mut beta = vec![0u32; n];
    alpha[a_axis] = p;
    beta[b_axis] = q;
    Ok(BigradedPolynomial::monomial(MultiIndex::new(alpha), MultiIndex::new(beta), ComplexRational::one()))
}

/// Model functions whose right twisted means vanish on every admissible
/// sphere of `Ann(r, ∞)`.
pub fn model_function(family: Family, index: u32, poly: &BigradedPolynomial, lambda: &BigRational) -> Result<StructuredFunction> {
    let (p, q) = match poly.bidegree() {
        crate::poly::Bidegree::Homogeneous(p, q) => (p, q),
        crate::poly::Bidegree::Inhomogeneous => return Err(Error::NotHomogeneous),
    };
    let limit = match family {
        Family::Growing => p,
        Family::Decaying => q,
    };
    if index < 1 || index > limit {
        return Err(Error::Contract(format!("index {index} outside 1..={limit} for bidegree ({p},{q})")));
    }
    let m = -2 * (poly.n() as i32 + p as i32 + q as i32 - index as i32);
    let sigma = match family {
        Family::Growing => lambda.clone(),
        Family::Decaying => -lambda,
    };
    StructuredFunction::from_product(&RadialProfile::term(sigma, m, ComplexRational::one()), poly)
}

pub fn constant(n: usize, c: ComplexRational) -> StructuredFunction {
    StructuredFunction::from_product(&RadialProfile::constant(c), &BigradedPolynomial::one(n)).expect("constant is harmonic")
}

/// `e^{sign·|z|²/4}`.
pub fn gaussian(n: usize, sign: i64) -> StructuredFunction {
    StructuredFunction::from_product(&RadialProfile::monomial(sign, 0), &BigradedPolynomial::one(n)).expect("constant is harmonic")
}

/// `z^α z̄^β`, stored in harmonic canonical form.
pub fn monomial(alpha: MultiIndex, beta: MultiIndex) -> Result<StructuredFunction> {
    let poly = BigradedPolynomial::monomial(alpha, beta, ComplexRational::one());
    StructuredFunction::from_polynomial(&RadialProfile::monomial(0, 0), &poly)
}

/// `|x|^{−2n−2i}P(x)` on ℝ^{2n}: degree-`k` solid harmonic `P` times the
/// `i`-th radial power, i.e. `ρ^{k−d−2i}` times a spherical harmonic.
pub fn euclidean_model(poly: &BigradedPolynomial, i: u32) -> Result<StructuredFunction> {
    let m = -2 * (poly.n() as i32 + i as i32);
    StructuredFunction::from_product(&RadialProfile::monomial(0, m), poly)
}

/// `exp(−1/(1−|z−c|²/r²))` inside the ball, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub centre: Vec<Complex64>,
    pub radius: f64,
    decay: DecayBounds,
}

impl Bump {
    pub fn new(centre: Vec<Complex64>, radius: f64) -> Result<Self> {
        if centre.is_empty() {
            return Err(Error::Contract("bump needs n >= 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Contract(format!("bump radius must be positive, got {radius}")));
        }
        let reach = centre.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() + radius;
        let peak = (-1.0f64).exp();
        let constants = (0..=4).map(|k| (k, reach.powi(k as i32) * (reach * reach / 4.0).exp() * peak)).collect();
        Ok(Self { centre, radius, decay: DecayBounds { constants } })
    }

    pub fn centred(n: usize, radius: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n], radius)
    }

    /// Same bump with bounds for `|x|^k |g(x)|` instead.
    pub fn with_polynomial_decay(mut self) -> Self {
        let reach = self.centre.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() + self.radius;
        let peak = (-1.0f64).exp();
        self.decay = DecayBounds { constants: (0..=4).map(|k| (k, reach.powi(k as i32) * peak)).collect() };
        self
    }
}

impl FunctionSampler for Bump {
    fn n(&self) -> usize {
        self.centre.len()
    }

    fn eval(&self, z: &[Complex64]) -> std::result::Result<Complex64, String> {
        let d2: f64 = z.iter().zip(&self.centre).map(|(a, b)| (a - b).norm_sqr()).sum();
        let u = d2 / (self.radius * self.radius);
        if u >= 1.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(Complex64::new((-1.0 / (1.0 - u)).exp(), 0.0))
    }

    fn decay(&self) -> Option<&DecayBounds> {
        Some(&self.decay)
    }
}

/// Attaches decay metadata to any sampler.
pub struct WithDecay<F> {
    pub inner: F,
    pub decay: DecayBounds,
}

impl<F: FunctionSampler> FunctionSampler for WithDecay<F> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn eval(&self, z: &[Complex64]) -> std::result::Result<Complex64, String> {
        self.inner.eval(z)
    }
    fn decay(&self) -> Option<&DecayBounds> {
        Some(&self.decay)
    }
    fn angular_degree(&self) -> Option<u32> {
        self.inner.angular_degree()
    }
}

/// Pointwise sum of two samplers.
pub struct Sum<A, B>(pub A, pub B);

impl<A: FunctionSampler, B: FunctionSampler> FunctionSampler for Sum<A, B> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn eval(&self, z: &[Complex64]) -> std::result::Result<Complex64, String> {
        Ok(self.0.eval(z)? + self.1.eval(z)?)
    }
    fn angular_degree(&self) -> Option<u32> {
        Some(self.0.angular_degree()?.max(self.1.angular_degree()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::{rat, rat_int};

    #[test]
    fn default_harmonics() {
        let p = default_harmonic(2, 2, 1).unwrap();
        assert!(p.is_harmonic());
        assert_eq!(p.to_text(), "(2,0|0,1) 1/1 0/1\n");
        assert!(default_harmonic(1, 1, 1).is_err());
        assert_eq!(default_harmonic(1, 0, 3).unwrap().to_text(), "(0|3) 1/1 0/1\n");
    }

    #[test]
    fn model_values() {
        let p = default_harmonic(2, 1, 1).unwrap();
        let h = model_function(Family::Growing, 1, &p, &rat_int(1)).unwrap().compile();
        let z = [Complex64::new(1.0, 0.5), Complex64::new(-0.2, 0.7)];
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let want = (r2 / 4.0).exp() * z[0] * z[1].conj() / r2.powi(3);
        assert!((h.eval(&z).unwrap() - want).norm() < 1e-14);
        assert!(model_function(Family::Growing, 2, &p, &rat_int(1)).is_err());
        assert!(model_function(Family::Decaying, 0, &p, &rat_int(1)).is_err());
        let d = model_function(Family::Decaying, 1, &p, &rat(2, 1)).unwrap().compile();
        let want = (-r2 / 2.0).exp() * z[0] * z[1].conj() / r2.powi(3);
        assert!((d.eval(&z).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn bump_support_and_bounds() {
        let b = Bump::centred(2, 1.0).unwrap();
        assert_eq!(b.eval(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap().re, 0.0);
        assert!((b.eval(&[Complex64::new(0.0, 0.0); 2]).unwrap().re - (-1.0f64).exp()).abs() < 1e-15);
        assert!(b.decay().unwrap().constants.len() == 5);
        assert!(Bump::centred(2, 0.0).is_err());
    }

    #[test]
    fn monomial_is_reproduced() {
        let f = monomial(MultiIndex::new(vec![1, 1]), MultiIndex::new(vec![2, 0])).unwrap().compile();
        let z = [Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.4)];
        let want = z[0] * z[1] * z[0].conj() * z[0].conj();
        assert!((f.eval(&z).unwrap() - want).norm() < 1e-15);
    }
}
