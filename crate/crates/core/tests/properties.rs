use num::complex::Complex64;
use num::{BigRational, One};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twisted_means::cq::{rat, rat_int, rat_to_f64, ComplexRational};
use twisted_means::fields::StructuredFunction;
use twisted_means::functions::{default_harmonic, model_function, Family};
use twisted_means::harmonic::{harmonic_decompose, harmonic_space_basis, norm_sq_power, orthonormal_basis, product_components, product_nu};
use twisted_means::poly::{BigradedPolynomial, MultiIndex};
use twisted_means::quad::{build_sphere_rule, left_twisted_mean, monomial_sphere_integral, twisted_mean, Conjugated};
use twisted_means::radial::{
    annihilator_chain, apply_chain, characterization_basis, fit_profile, span_dimension, two_sided_basis, verification_grid,
    ChainFactor, RadialProfile, SampledProfile,
};
use twisted_means::zspace::{
    admissible, admissible_pairs, characterize, membership_test, norm, sample_centres, two_sided_characterize, AnnulusSpec,
    Verdict,
};

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| rat(a, b))
}

fn small_complex() -> impl Strategy<Value = ComplexRational> {
    (small_rational(), small_rational()).prop_map(|(a, b)| ComplexRational::new(a, b))
}

/// Random element of P_{p,q}: a rational combination of monomials.
fn random_homogeneous(n: usize, p: u32, q: u32, coeffs: &[ComplexRational]) -> BigradedPolynomial {
    let mut out = BigradedPolynomial::zero(n);
    let mut k = 0;
    for a in MultiIndex::all_of_degree(n, p) {
        for b in MultiIndex::all_of_degree(n, q) {
            let c = coeffs[k % coeffs.len()].clone();
            k += 1;
            out = &out + &BigradedPolynomial::monomial(a.clone(), b, c);
        }
    }
    out
}

fn homogeneous() -> impl Strategy<Value = BigradedPolynomial> {
    (1usize..=3, 0u32..=3, 0u32..=3, prop::collection::vec(small_complex(), 1..12))
        .prop_filter("degree <= 3", |(_, p, q, _)| p + q <= 3)
        .prop_map(|(n, p, q, c)| random_homogeneous(n, p, q, &c))
}

fn pair_same_n() -> impl Strategy<Value = (BigradedPolynomial, BigradedPolynomial)> {
    (1usize..=3, 0u32..=2, 0u32..=2, 0u32..=2, 0u32..=2, prop::collection::vec(small_complex(), 1..8), prop::collection::vec(small_complex(), 1..8))
        .prop_map(|(n, p, q, l, m, c1, c2)| (random_homogeneous(n, p, q, &c1), random_homogeneous(n, l, m, &c2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_obeys_leibniz((a, b) in pair_same_n()) {
        let n = a.n();
        let mut want = &(&a.laplacian() * &b) + &(&a * &b.laplacian());
        let four = ComplexRational::from_int(4);
        for j in 1..=n {
            let cross = &(&a.wirtinger(j, false).unwrap() * &b.wirtinger(j, true).unwrap())
                + &(&a.wirtinger(j, true).unwrap() * &b.wirtinger(j, false).unwrap());
            want = &want + &cross.scale(&four);
        }
        prop_assert_eq!((&a * &b).laplacian(), want);
    }

    #[test]
    fn wirtinger_derivatives_commute(p in homogeneous(), i in 1usize..=3, j in 1usize..=3) {
        let n = p.n();
        let (i, j) = ((i - 1) % n + 1, (j - 1) % n + 1);
        for (ci, cj) in [(false, true), (false, false), (true, true)] {
            let ab = p.wirtinger(i, ci).unwrap().wirtinger(j, cj).unwrap();
            let ba = p.wirtinger(j, cj).unwrap().wirtinger(i, ci).unwrap();
            prop_assert_eq!(ab, ba);
        }
    }

    #[test]
    fn decomposition_reconstructs(p in homogeneous()) {
        let dec = harmonic_decompose(&p).unwrap();
        prop_assert_eq!(dec.reconstruct(), p);
        for (_, layer) in &dec.layers {
            prop_assert!(layer.is_harmonic());
        }
    }

    #[test]
    fn decomposition_is_unique(n in 1usize..=3, p in 0u32..=3, q in 0u32..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total = BigradedPolynomial::zero(n);
        let mut layers = Vec::new();
        for k in 0..=p.min(q) {
            let basis = harmonic_space_basis(n, p - k, q - k);
            let mut layer = BigradedPolynomial::zero(n);
            for e in &basis.elements {
                let c = ComplexRational::new(rat(rng.gen_range(-3..=3), 1), rat(rng.gen_range(-3..=3), 2));
                layer = &layer + &e.poly.scale(&c);
            }
            total = &total + &(&norm_sq_power(n, k) * &layer);
            layers.push(layer);
        }
        let dec = harmonic_decompose(&total).unwrap();
        for (k, layer) in layers.iter().enumerate() {
            prop_assert_eq!(&dec.layer(k as u32), layer);
        }
    }

    #[test]
    fn scaled_rules_integrate_monomials(n in 1usize..=3, s in 0.2f64..3.0, da in 0u32..=5, db in 0u32..=5, pick in any::<u64>()) {
        let order = 10usize;
        prop_assume!((da + db) as usize <= order);
        let rule = build_sphere_rule(n, s, order).unwrap();
        let alphas = MultiIndex::all_of_degree(n, da);
        let betas = MultiIndex::all_of_degree(n, db);
        let a = &alphas[(pick % alphas.len() as u64) as usize];
        let b = &betas[((pick / 7) % betas.len() as u64) as usize];
        let mut got = Complex64::new(0.0, 0.0);
        for i in 0..rule.len() {
            let m = rule.node(i).iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (k, z)| acc * z.powu(a.get(k)) * z.conj().powu(b.get(k)));
            got += m * rule.weight(i);
        }
        let exact = rat_to_f64(&monomial_sphere_integral(n, a, b)) * s.powi((da + db) as i32);
        prop_assert!((got - exact).norm() < 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn fit_recovers_span_members(n in 1usize..=3, p in 0u32..=3, q in 0u32..=3, coeffs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 6)) {
        prop_assume!(p + q >= 1);
        let basis = characterization_basis(n, p, q);
        let grid = verification_grid(1.0, None, 24);
        let c: Vec<Complex64> = coeffs.iter().take(basis.len()).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let values: Vec<Complex64> = grid.iter().map(|r| basis.iter().zip(&c).map(|(b, k)| b.eval(*r) * k).sum()).collect();
        let fit = fit_profile(&SampledProfile::new(grid, values).unwrap(), &basis).unwrap();
        let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assume!(scale > 1e-3);
        for (got, want) in fit.coefficients.iter().zip(&c) {
            prop_assert!((got - want).norm() < 1e-12 * scale * 1e2, "{got} vs {want}");
        }
        prop_assert!(fit.residual < 1e-12);
    }

    #[test]
    fn admissible_spheres_avoid_the_hole(n in 1usize..=3, r in 0.0f64..2.0, width in 0.5f64..4.0, infinite in any::<bool>(), zr in 0.0f64..1.5, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let ann = AnnulusSpec::new(n, r, if infinite { None } else { Some(r + width) }).unwrap();
        let z = sample_centres(n, 2, zr, seed).pop().unwrap();
        let lo = r + norm(&z);
        let hi = ann.outer.map_or(lo + 3.0, |big| big - norm(&z));
        let s = lo + frac * (hi - lo);
        prop_assume!(admissible(&z, s, &ann));
        let rule = build_sphere_rule(n, s, 6).unwrap();
        for i in 0..rule.len() {
            let x: Vec<Complex64> = z.iter().zip(rule.node(i)).map(|(a, b)| a - b).collect();
            let rho = norm(&x);
            prop_assert!(rho > r + 1e-12);
            if let Some(big) = ann.outer {
                prop_assert!(rho < big - 1e-12);
            }
        }
        prop_assert!(norm(&z) + r < s);
    }

    #[test]
    fn fields_keep_harmonic_factors(seed in any::<u64>(), j in 1usize..=2, conj in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = twisted_means::selftest::random_structured(2, &mut rng).unwrap();
        let g = f.apply_field(j, conj).unwrap();
        for (_, poly) in g.terms() {
            prop_assert!(poly.is_harmonic());
        }
    }

    #[test]
    fn left_mean_is_conjugate_of_right_mean(seed in any::<u64>(), zr in 0.0f64..1.5, s in 0.2f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = twisted_means::selftest::random_structured(2, &mut rng).unwrap().compile();
        let z = sample_centres(2, 3, zr, seed).pop().unwrap();
        let rule = build_sphere_rule(2, s, 12).unwrap();
        let left = left_twisted_mean(&f, &z, 1.0, &rule).unwrap();
        let right = twisted_mean(&Conjugated(&f), &z, 1.0, &rule).unwrap().conj();
        prop_assert!((left - right).norm() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn assembled_members_pass_membership(p in 0u32..=2, q in 0u32..=2, seed in any::<u64>()) {
        prop_assume!(p + q >= 1);
        let n = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = orthonormal_basis(n, p, q);
        let profiles = characterization_basis(n, p, q);
        let mut f = StructuredFunction::zero(n);
        for e in &basis.elements {
            for prof in &profiles {
                let c = ComplexRational::new(rat(rng.gen_range(-4..=4), 2), rat(rng.gen_range(-4..=4), 3));
                f = f.add(&StructuredFunction::from_product(&prof.scale(&c), &e.poly).unwrap()).unwrap();
            }
        }
        prop_assume!(!f.is_zero());
        let ann = AnnulusSpec::new(n, 1.0, None).unwrap();
        let pairs = admissible_pairs(&ann, &sample_centres(n, 6, 1.5, seed), &[0.4, 1.3]);
        let compiled = f.compile();
        let report = membership_test(&compiled, &ann, &pairs, 1.0, 1e-8, 48).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Consistent, "{:e}", report.max_abs_mean / report.scale);
        let grid = verification_grid(1.0, None, 16);
        let pq: Vec<(u32, u32)> = vec![(0, 0), (p, q)];
        let fits = characterize(&compiled, &ann, &pq, &grid, 16, &BigRational::one()).unwrap();
        prop_assert!(fits.max_residual() < 1e-8);
        let bump = RadialProfile::term(rat_int(0), 1 - 2 * rng.gen_range(0..3), ComplexRational::from_rational(rat(1, 100)));
        let perturbed = f.add(&StructuredFunction::from_product(&bump, &basis.elements[0].poly).unwrap()).unwrap();
        let fits = characterize(&perturbed.compile(), &ann, &pq, &grid, 16, &BigRational::one()).unwrap();
        prop_assert!(fits.max_residual() > 1e-4, "{:e}", fits.max_residual());
    }
}

#[test]
fn product_bidegrees_respect_the_bound() {
    for n in 1..=3usize {
        for p in 0..=3u32 {
            for q in 0..=3u32 {
                let left = harmonic_space_basis(n, p, q);
                if left.elements.is_empty() {
                    continue;
                }
                for l in 0..=3u32 {
                    for m in 0..=3u32 {
                        let right = harmonic_space_basis(n, l, m);
                        if right.elements.is_empty() {
                            continue;
                        }
                        let nu = product_nu(p, q, l, m);
                        let firsts = [&left.elements[0].poly, &left.elements[left.elements.len() - 1].poly];
                        let seconds = [&right.elements[0].poly, &right.elements[right.elements.len() - 1].poly];
                        for a in firsts {
                            for b in seconds {
                                for (pp, qq) in product_components(a, b).unwrap() {
                                    let i = p + l - pp;
                                    assert!(i <= nu && q + m - qq == i, "n={n} ({p},{q})x({l},{m}) -> ({pp},{qq})");
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn chain_spans_and_order_robustness() {
    let one = BigRational::one();
    for n in 1..=3usize {
        for p in 0..=4u32 {
            for q in 0..=4u32 {
                if p + q == 0 {
                    continue;
                }
                let basis = characterization_basis(n, p, q);
                assert_eq!(span_dimension(&basis), (p + q) as usize);
                let chain = annihilator_chain(n, p, q).unwrap();
                let minus: Vec<ChainFactor> = chain.iter().filter(|f| f.sign < 0).cloned().collect();
                let plus: Vec<ChainFactor> = chain.iter().filter(|f| f.sign > 0).cloned().collect();
                let mut orders = Vec::new();
                for flip_minus in [false, true] {
                    for flip_plus in [false, true] {
                        let mut m = minus.clone();
                        let mut pl = plus.clone();
                        if flip_minus {
                            m.reverse();
                            let half = m.len() / 2;
                            m.rotate_left(half);
                        }
                        if flip_plus {
                            pl.reverse();
                        }
                        m.extend(pl);
                        orders.push(m);
                    }
                }
                for order in &orders {
                    for b in &basis {
                        assert!(apply_chain(b, order, &one).is_zero(), "n={n} ({p},{q})");
                    }
                }
            }
        }
    }
}

#[test]
fn two_sided_members_pass_one_sided_fits() {
    let lam = BigRational::one();
    let ann = AnnulusSpec::new(2, 1.0, None).unwrap();
    let grid = verification_grid(1.0, None, 16);
    let pairs = admissible_pairs(&ann, &sample_centres(2, 4, 1.0, 3), &[0.5, 1.5]);
    for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        let poly = default_harmonic(2, p, q).unwrap();
        let mut f = StructuredFunction::zero(2);
        for (k, prof) in two_sided_basis(2, p, q, &lam).iter().enumerate() {
            let c = ComplexRational::new(rat(k as i64 + 1, 2), rat(1 - k as i64, 3));
            f = f.add(&StructuredFunction::from_product(&prof.scale(&c), &poly).unwrap()).unwrap();
        }
        let compiled = f.compile();
        let both = two_sided_characterize(&compiled, &ann, &[(0, 0), (p, q)], &grid, 48, &lam, &pairs, 1e-8).unwrap();
        assert_eq!(both.verdict, Verdict::Member, "({p},{q}) {:?}", both.flags);
        let one = characterize(&compiled, &ann, &[(0, 0), (p, q)], &grid, 16, &lam).unwrap();
        assert_eq!(one.verdict, Verdict::Member);
    }
}

#[test]
fn doubling_order_changes_model_means_little() {
    let lam = rat_int(1);
    let ann = AnnulusSpec::new(2, 1.0, None).unwrap();
    let pairs = admissible_pairs(&ann, &sample_centres(2, 3, 1.0, 5), &[0.5, 1.5]);
    for (family, index, p, q) in [(Family::Growing, 1, 1, 1), (Family::Decaying, 1, 2, 1)] {
        let h = model_function(family, index, &default_harmonic(2, p, q).unwrap(), &lam).unwrap().compile();
        for (z, s) in &pairs {
            let a = twisted_mean(&h, z, 1.0, &build_sphere_rule(2, *s, 48).unwrap()).unwrap();
            let b = twisted_mean(&h, z, 1.0, &build_sphere_rule(2, *s, 96).unwrap()).unwrap();
            assert!((a - b).norm() < 1e-10, "{a} {b}");
        }
    }
}
