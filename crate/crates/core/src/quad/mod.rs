//! Sphere quadrature and spherical mean operators.

mod exact;
mod mean;
mod rule;
pub mod sum;

pub use exact::monomial_sphere_integral;
pub use mean::{
    euclidean_mean, left_twisted_mean, sphere_sample, twisted_mean, Conjugated, DecayBounds, FunctionSampler, Side,
    SphereSample,
};
pub use rule::{build_sphere_rule, SphereRule};

/// Order used when the caller declares polynomial-times-Gaussian structure
/// of bidegree `(p, q)`.
pub fn default_order(p: u32, q: u32) -> usize {
    2 * (p + q) as usize + 16
}
