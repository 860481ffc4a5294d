use num::complex::Complex64;
use twisted_means::cq::{rat, rat_int, ComplexRational};
use twisted_means::fields::StructuredFunction;
use twisted_means::functions::{constant, default_harmonic, euclidean_model, gaussian, model_function, monomial, Bump, Family};
use twisted_means::poly::MultiIndex;
use twisted_means::quad::build_sphere_rule;
use twisted_means::radial::{verification_grid, RadialProfile};
use twisted_means::zspace::*;
use twisted_means::Error;

fn ann2() -> AnnulusSpec {
    AnnulusSpec::new(2, 1.0, None).unwrap()
}

fn pairs_for(ann: &AnnulusSpec, count: usize, max: f64, offsets: &[f64]) -> Vec<(Vec<Complex64>, f64)> {
    admissible_pairs(ann, &sample_centres(ann.n, count, max, 7), offsets)
}

#[test]
fn constant_lives_in_the_trivial_channel() {
    let ann = ann2();
    let f = constant(2, ComplexRational::one()).compile();
    let rule = build_sphere_rule(2, 1.0, 12).unwrap();
    let grid = verification_grid(1.0, None, 6);
    let ex = extract_coefficients(&f, &ann, 0, 0, &grid, &rule).unwrap();
    assert!(ex.tables[0].a.iter().all(|a| (a - 1.0).norm() < 1e-13));
    for (p, q) in [(1, 0), (0, 1), (1, 1), (2, 0)] {
        let ex = extract_coefficients(&f, &ann, p, q, &grid, &rule).unwrap();
        assert!(ex.tables.iter().all(|t| t.a.iter().all(|a| a.norm() < 1e-12)));
        assert!(ex.negligible.iter().all(|x| *x));
    }
}

#[test]
fn mixed_monomial_has_constant_normalized_coefficient() {
    let ann = ann2();
    let f = monomial(MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1])).unwrap().compile();
    let rule = build_sphere_rule(2, 1.0, 12).unwrap();
    let grid = verification_grid(1.0, None, 6);
    for (p, q) in [(0, 0), (1, 0), (2, 0), (0, 2), (2, 2)] {
        let ex = extract_coefficients(&f, &ann, p, q, &grid, &rule).unwrap();
        assert!(ex.tables.iter().all(|t| t.a.iter().all(|a| a.norm() < 1e-12)), "({p},{q})");
    }
    let ex = extract_coefficients(&f, &ann, 1, 1, &grid, &rule).unwrap();
    let mut energy = 0.0;
    for t in &ex.tables {
        let first = t.a_tilde[0];
        assert!(t.a_tilde.iter().all(|v| (v - first).norm() < 1e-13));
        energy += first.norm_sqr();
    }
    // ∫|z₁z̄₂|² over S³ = 1/6
    assert!((energy - 1.0 / 6.0).abs() < 1e-13);
}

#[test]
fn growing_model_coefficient_matches_its_profile() {
    let ann = ann2();
    let poly = default_harmonic(2, 1, 1).unwrap();
    let f = model_function(Family::Growing, 1, &poly, &rat_int(1)).unwrap().compile();
    let rule = build_sphere_rule(2, 1.0, 16).unwrap();
    let grid = verification_grid(1.0, None, 12);
    let ex = extract_coefficients(&f, &ann, 1, 1, &grid, &rule).unwrap();
    let mut energy = 0.0;
    for t in &ex.tables {
        let ratios: Vec<Complex64> = t.grid.iter().zip(&t.a_tilde).map(|(r, v)| v / ((r * r / 4.0).exp() * r.powi(-6))).collect();
        assert!(ratios.iter().all(|v| (v - ratios[0]).norm() < 1e-12));
        energy += ratios[0].norm_sqr();
    }
    assert!((energy - 1.0 / 6.0).abs() < 1e-13);
    let report = characterize(&f, &ann, &[(1, 1)], &grid, 16, &rat_int(1)).unwrap();
    assert!(report.max_residual() < 1e-10);
}

#[test]
fn low_order_is_flagged() {
    let ann = ann2();
    let f = monomial(MultiIndex::new(vec![3, 0]), MultiIndex::new(vec![0, 3])).unwrap().compile();
    let rule = build_sphere_rule(2, 1.0, 4).unwrap();
    let ex = extract_coefficients(&f, &ann, 1, 1, &verification_grid(1.0, None, 4), &rule).unwrap();
    assert_eq!(ex.flags.len(), 1);
}

#[test]
fn models_pass_membership_and_gaussian_does_not() {
    let ann = ann2();
    let pairs = pairs_for(&ann, 20, 2.0, &[0.5, 1.0, 1.5, 2.0, 2.5]);
    assert_eq!(pairs.len(), 100);
    let poly = default_harmonic(2, 2, 1).unwrap();
    for (family, index) in [(Family::Growing, 1), (Family::Growing, 2), (Family::Decaying, 1)] {
        let h = model_function(family, index, &poly, &rat_int(1)).unwrap().compile();
        let report = membership_test(&h, &ann, &pairs, 1.0, 1e-8, 48).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent, "{family:?} {index}: {:e}", report.max_abs_mean / report.scale);
    }
    let g = gaussian(2, -1).compile();
    let report = membership_test(&g, &ann, &pairs, 1.0, 1e-8, 24).unwrap();
    assert!(report.max_abs_mean > 1e-3 * report.scale);
    assert_eq!(report.verdict, Verdict::Inconsistent);
}

#[test]
fn membership_rejects_bad_pairs() {
    let ann = ann2();
    let f = constant(2, ComplexRational::one()).compile();
    assert!(matches!(membership_test(&f, &ann, &[], 1.0, 1e-8, 8), Err(Error::EmptyAdmissibleSet)));
    let z = vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)];
    assert!(membership_test(&f, &ann, &[(z, 1.2)], 1.0, 1e-8, 8).is_err());
}

#[test]
fn lambda_rescaled_models_pass() {
    let ann = ann2();
    let pairs = pairs_for(&ann, 6, 1.0, &[0.5, 1.5]);
    let lambda = rat(2, 1);
    let h = model_function(Family::Growing, 1, &default_harmonic(2, 1, 1).unwrap(), &lambda).unwrap().compile();
    assert_eq!(membership_test(&h, &ann, &pairs, 2.0, 1e-8, 48).unwrap().verdict, Verdict::Consistent);
    assert_ne!(membership_test(&h, &ann, &pairs, 1.0, 1e-8, 48).unwrap().verdict, Verdict::Consistent);
}

#[test]
fn characterization_examples() {
    let ann = ann2();
    let lam = rat_int(1);
    let grid = verification_grid(1.0, None, 20);
    let p11 = default_harmonic(2, 1, 1).unwrap();
    let member = model_function(Family::Growing, 1, &p11, &lam)
        .unwrap()
        .add(&model_function(Family::Decaying, 1, &default_harmonic(2, 2, 1).unwrap(), &lam).unwrap())
        .unwrap();
    let pq = [(0, 0), (1, 0), (1, 1), (2, 1), (1, 2)];
    let report = characterize(&member.compile(), &ann, &pq, &grid, 16, &lam).unwrap();
    assert_eq!(report.verdict, Verdict::Member);
    assert!(report.max_residual() < 1e-9);

    let bump = RadialProfile::term(rat_int(0), -1, ComplexRational::from_rational(rat(1, 1000)));
    let perturbed = member.add(&StructuredFunction::from_product(&bump, &p11).unwrap()).unwrap();
    let report = characterize(&perturbed.compile(), &ann, &pq, &grid, 16, &lam).unwrap();
    assert_eq!(report.verdict, Verdict::NonMember);
    assert!(report.fit(1, 1).any(|f| f.residual > 1e-4));

    let report = characterize(&constant(2, ComplexRational::one()).compile(), &ann, &[(0, 0)], &grid, 8, &lam).unwrap();
    assert_eq!(report.fits[0].residual, 1.0);
    assert_eq!(report.verdict, Verdict::NonMember);
    assert_eq!(report.coefficient_csvs().len(), 1);
}

#[test]
fn two_sided_examples() {
    let lam = rat_int(1);
    let ann1 = AnnulusSpec::new(1, 1.0, None).unwrap();
    let grid = verification_grid(1.0, None, 16);
    let pairs1 = pairs_for(&ann1, 8, 1.5, &[0.5, 1.5]);
    let one_sided = model_function(Family::Growing, 1, &default_harmonic(1, 2, 0).unwrap(), &lam).unwrap().compile();
    let right = membership_test(&one_sided, &ann1, &pairs1, 1.0, 1e-8, 32).unwrap();
    assert_eq!(right.verdict, Verdict::Consistent);
    let report = two_sided_characterize(&one_sided, &ann1, &[(0, 0), (2, 0)], &grid, 32, &lam, &pairs1, 1e-8).unwrap();
    assert_eq!(report.verdict, Verdict::NonMember);
    assert!(report.pairs.iter().any(|p| p.side == "left" && p.abs_mean() > 1e-4 * report.scale));

    let zero = StructuredFunction::zero(1).compile();
    let report = two_sided_characterize(&zero, &ann1, &[(0, 0), (1, 0), (0, 1)], &grid, 16, &lam, &pairs1, 1e-8).unwrap();
    assert_eq!(report.verdict, Verdict::Member);
    assert!(report.fits.iter().all(|f| f.residual == 0.0));

    let ann = ann2();
    let p11 = default_harmonic(2, 1, 1).unwrap();
    let both = model_function(Family::Growing, 1, &p11, &lam)
        .unwrap()
        .add(&model_function(Family::Decaying, 1, &p11, &lam).unwrap().scale(&ComplexRational::from_rational(rat(-3, 2))))
        .unwrap();
    let pairs = pairs_for(&ann, 8, 1.5, &[0.5, 1.5]);
    let report = two_sided_characterize(&both.compile(), &ann, &[(0, 0), (1, 0), (1, 1)], &grid, 48, &lam, &pairs, 1e-8).unwrap();
    assert_eq!(report.verdict, Verdict::Member, "{:?}", report.flags);
    assert!(report.max_residual() < 1e-9);
    let plain = characterize(&both.compile(), &ann, &[(0, 0), (1, 0), (1, 1)], &grid, 16, &lam).unwrap();
    assert_eq!(plain.verdict, Verdict::Member);
}

#[test]
fn euclidean_examples() {
    let ann = ann2();
    let grid = verification_grid(1.0, None, 16);
    let y = default_harmonic(2, 1, 1).unwrap();
    let g = euclidean_model(&y, 0).unwrap().compile();
    let report = euclidean_characterize(&g, &ann, &[0, 1, 2], &grid, 16).unwrap();
    assert_eq!(report.verdict, Verdict::Member);
    assert!(report.max_residual() < 1e-10);
    let radial = gaussian(2, -1).compile();
    let report = euclidean_characterize(&radial, &ann, &[0], &grid, 16).unwrap();
    assert_eq!(report.verdict, Verdict::NonMember);

    let pairs = pairs_for(&ann, 10, 1.5, &[0.5, 1.0, 2.0]);
    for (p, q, i) in [(1, 1, 0), (1, 1, 1), (2, 1, 1), (2, 1, 2)] {
        let g = euclidean_model(&default_harmonic(2, p, q).unwrap(), i).unwrap().compile();
        let report = euclidean_membership_test(&g, &ann, &pairs, 1e-8, 48).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent, "({p},{q}) i={i}: {:e}", report.max_abs_mean / report.scale);
    }
}

#[test]
fn support_examples() {
    let job = SupportJob::default();
    let report = support_radius(&Bump::centred(2, 1.0).unwrap(), &job).unwrap();
    assert!((report.r_hat.unwrap() - 1.0).abs() <= job.step + 1e-12);
    assert!(!report.violating_pairs.is_empty());
    assert_eq!(report.exit_code(), 0);

    let shifted = Bump::new(vec![Complex64::new(0.3, 0.4), Complex64::new(0.0, 0.0)], 1.0).unwrap();
    let report = support_radius(&shifted, &job).unwrap();
    assert!((report.r_hat.unwrap() - 1.5).abs() <= 2.0 * job.step + 1e-12);

    let h = model_function(Family::Growing, 1, &default_harmonic(2, 1, 1).unwrap(), &rat_int(1)).unwrap().compile();
    let report = support_radius(&h, &job).unwrap();
    assert!(report.has_flag(FLAG_DECAY_VIOLATED));
    assert_eq!(report.exit_code(), 3);

    let tiny = SupportJob { r_max: 0.3, ..SupportJob::default() };
    let report = support_radius(&gaussian(2, -1).compile(), &tiny).unwrap();
    assert_eq!(report.r_hat, None);
    assert!(report.has_flag(FLAG_NO_SUPPORT));
    assert_eq!(report.exit_code(), 2);

    let report = helgason_support_check(&Bump::centred(2, 1.0).unwrap().with_polynomial_decay(), &job).unwrap();
    assert!((report.r_hat.unwrap() - 1.0).abs() <= job.step + 1e-12);
    assert!(report.flags.is_empty());
    let g = euclidean_model(&default_harmonic(2, 1, 0).unwrap(), 0).unwrap().compile();
    let report = helgason_support_check(&g, &job).unwrap();
    assert!(report.has_flag(FLAG_DECAY_VIOLATED));
}
