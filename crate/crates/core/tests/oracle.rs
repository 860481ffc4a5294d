//! Independent Monte Carlo cross-check of the sphere rules.

use num::complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use twisted_means::cq::rat_int;
use twisted_means::functions::{default_harmonic, gaussian, model_function, Family};
use twisted_means::quad::{build_sphere_rule, twisted_mean, FunctionSampler};

/// Plain average of `f(z − w) e^{(i/2) Im(z·w̄)}` over uniform `w` on `S_s`,
/// with its standard error.
fn monte_carlo(f: &impl FunctionSampler, z: &[Complex64], s: f64, samples: usize, seed: u64) -> (Complex64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = z.len();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let g: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w: Vec<Complex64> = (0..n).map(|k| Complex64::new(g[2 * k], g[2 * k + 1]) * (s / len)).collect();
        let x: Vec<Complex64> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
        let dot: Complex64 = z.iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
        let v = f.eval(&x).unwrap() * Complex64::from_polar(1.0, 0.5 * dot.im);
        sum += v;
        sum_sq += v.norm_sqr();
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean.norm_sqr()).max(0.0);
    (mean, (var / samples as f64).sqrt())
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    let z = [Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)];
    let s = 1.7;
    let rule = build_sphere_rule(2, s, 48).unwrap();
    let model = model_function(Family::Decaying, 1, &default_harmonic(2, 1, 1).unwrap(), &rat_int(1)).unwrap().compile();
    let g = gaussian(2, -1).compile();
    let (mc, err) = monte_carlo(&g, &z, s, 200_000, 1);
    let q = twisted_mean(&g, &z, 1.0, &rule).unwrap();
    assert!((mc - q).norm() < 5.0 * err + 1e-12, "{mc} vs {q} (se {err})");
    // the model mean vanishes, so Monte Carlo must be statistically zero
    let far = [Complex64::new(0.2, 0.0), Complex64::new(0.0, 0.1)];
    let s = 2.5;
    let (mc, err) = monte_carlo(&model, &far, s, 200_000, 2);
    assert!(mc.norm() < 5.0 * err, "{mc} (se {err})");
    assert!(twisted_mean(&model, &far, 1.0, &build_sphere_rule(2, s, 48).unwrap()).unwrap().norm() < 1e-10);
}
