//! The built-in acceptance suite, shared by the `selftest` subcommand and the
//! acceptance tests.

use std::time::{Duration, Instant};

use num::complex::Complex64;
use num::{BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cq::{rat, rat_int, rat_to_f64, ComplexRational};
use crate::error::{Error, Result};
use crate::fields::{commutation_residual, projected_field, projection_closed_form, StructuredFunction};
use crate::functions::{default_harmonic, euclidean_model, model_function, Bump, Family};
use crate::harmonic::{harmonic_decompose, harmonic_space_basis};
use crate::poly::{BigradedPolynomial, MultiIndex};
use crate::quad::{build_sphere_rule, left_twisted_mean, monomial_sphere_integral, twisted_mean, Conjugated};
use crate::radial::{annihilator_chain, apply_chain, characterization_basis, verification_grid, RadialProfile};
use crate::zspace::{
    admissible_pairs, characterize, helgason_support_check, membership_test, sample_centres, support_radius,
    two_sided_characterize, AnnulusSpec, MembershipReport, SupportJob, SupportReport, Verdict, FLAG_DECAY_VIOLATED,
};

pub const CRITERIA: [u8; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// The quantity compared against `threshold`.
    pub metric: f64,
    pub threshold: f64,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Artifacts besides the JSON summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteArtifacts {
    pub means_csv: Option<String>,
    pub coefficient_csvs: Vec<((u32, u32), String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
    #[serde(skip)]
    pub artifacts: SuiteArtifacts,
}

impl SelftestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                format!(
                    "criterion {:>2} {}: {} (metric {:e}, threshold {:e}, {:.2?}) {}",
                    c.id,
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.metric,
                    c.threshold,
                    c.elapsed,
                    c.detail
                )
            })
            .collect()
    }
}

fn timed(id: u8, name: &'static str, body: impl FnOnce() -> Result<(bool, f64, f64, String)>) -> CriterionResult {
    let start = Instant::now();
    let (passed, metric, threshold, detail) = match body() {
        Ok(v) => v,
        Err(e) => (false, f64::NAN, f64::NAN, format!("error: {e}")),
    };
    CriterionResult { id, name, passed, metric, threshold, detail, elapsed: start.elapsed() }
}

/// Runs the listed criteria in order. Criterion 12 re-runs the others under
/// thread pools of 1, 2 and 8 workers and compares the serialized artifacts.
pub fn run_suite(ids: &[u8]) -> SelftestReport {
    let mut criteria = Vec::new();
    let mut artifacts = SuiteArtifacts::default();
    for &id in ids {
        let result = match id {
            1 => timed(1, "exact identities", exact_identities),
            2 => timed(2, "dimension law", dimension_law),
            3 => timed(3, "quadrature exactness", quadrature_exactness),
            4 => timed(4, "annihilation", annihilation),
            5 => timed(5, "model sufficiency", || {
                let (out, report) = model_sufficiency()?;
                artifacts.means_csv = Some(report.means_csv());
                Ok(out)
            }),
            6 => timed(6, "numerical necessity", || {
                let (out, report) = numerical_necessity()?;
                artifacts.coefficient_csvs = report.coefficient_csvs();
                Ok(out)
            }),
            7 => timed(7, "projection formula", projection_formula),
            8 => timed(8, "commutation", commutation),
            9 => timed(9, "conjugation identity", conjugation_identity),
            10 => timed(10, "support radius", support_checks),
            11 => timed(11, "two-sided", two_sided),
            12 => {
                let others: Vec<u8> = ids.iter().copied().filter(|i| *i != 12).collect();
                timed(12, "determinism", || thread_determinism(&others))
            }
            other => timed(other, "unknown", || Err(Error::Contract(format!("no criterion {other}")))),
        };
        criteria.push(result);
    }
    let passed = criteria.iter().all(|c| c.passed);
    SelftestReport { criteria, passed, artifacts }
}

/// Serialized artifacts of a suite run, in a fixed order.
pub fn artifact_bytes(report: &SelftestReport) -> Vec<(String, String)> {
    let mut out = vec![("report.json".to_string(), report.to_json())];
    if let Some(m) = &report.artifacts.means_csv {
        out.push(("means.csv".to_string(), m.clone()));
    }
    for ((p, q), body) in &report.artifacts.coefficient_csvs {
        out.push((format!("coeffs_{p}_{q}.csv"), body.clone()));
    }
    out
}

fn thread_determinism(ids: &[u8]) -> Result<(bool, f64, f64, String)> {
    let ids: Vec<u8> = if ids.is_empty() { vec![5, 6, 9, 10] } else { ids.to_vec() };
    let mut runs = Vec::new();
    for threads in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Contract(e.to_string()))?;
        runs.push(pool.install(|| artifact_bytes(&run_suite(&ids))));
    }
    let differing = runs.iter().skip(1).filter(|r| **r != runs[0]).count();
    let files = runs[0].len();
    Ok((differing == 0, differing as f64, 0.0, format!("{files} artifacts compared across 1, 2, 8 threads")))
}

fn range_np() -> impl Iterator<Item = (usize, u32, u32)> {
    (1..=3usize).flat_map(|n| (0..=4u32).flat_map(move |p| (0..=4u32).map(move |q| (n, p, q))))
}

/// `Δ(z_j P) = 4 ∂P/∂z̄_j`, `Δ(z̄_j P) = 4 ∂P/∂z_j`, `Δ(|z|²P) = 4(n+p+q)P`
/// and `z_j P = P₀ + |z|² ∂P/∂z̄_j / (n+p+q−1)`, all exactly.
fn exact_identities() -> Result<(bool, f64, f64, String)> {
    let mut failures = 0usize;
    let mut checked = 0usize;
    for (n, p, q) in range_np() {
        let basis = harmonic_space_basis(n, p, q);
        let eigen = ComplexRational::from_int(4 * (n as i64 + p as i64 + q as i64));
        for e in &basis.elements {
            let poly = &e.poly;
            let r2 = BigradedPolynomial::norm_sq(n).try_mul(poly)?;
            if !r2.laplacian().try_sub(&poly.scale(&eigen))?.is_zero() {
                failures += 1;
            }
            for j in 1..=n {
                for conj in [false, true] {
                    let lifted = poly.times_coordinate(j, conj)?;
                    let d = poly.wirtinger(j, !conj)?;
                    let four = ComplexRational::from_int(4);
                    if !lifted.laplacian().try_sub(&d.scale(&four))?.is_zero() {
                        failures += 1;
                    }
                    let dec = harmonic_decompose(&lifted)?;
                    let denom = n as i64 + p as i64 + q as i64 - 1;
                    let ok = if d.is_zero() {
                        dec.layer(1).is_zero() && dec.layer(0) == lifted
                    } else {
                        let want = d.scale_rational(&rat(1, denom));
                        dec.layer(1) == want && dec.layer(0).is_harmonic() && dec.reconstruct() == lifted
                    };
                    if !ok {
                        failures += 1;
                    }
                    checked += 3;
                }
            }
        }
    }
    Ok((failures == 0, failures as f64, 0.0, format!("{checked} identities checked")))
}

fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

fn dimension_law() -> Result<(bool, f64, f64, String)> {
    let mut mismatches = 0usize;
    for (n, p, q) in range_np() {
        let (n, pi, qi) = (n as i64, p as i64, q as i64);
        let formula = binomial(pi + n - 1, pi) * binomial(qi + n - 1, qi) - binomial(pi + n - 2, pi - 1) * binomial(qi + n - 2, qi - 1);
        let kernel = harmonic_space_basis(n as usize, p, q).elements.len() as i64;
        if kernel != formula || (n == 1 && p >= 1 && q >= 1 && kernel != 0) {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, mismatches as f64, 0.0, "n <= 3, p,q <= 4".into()))
}

/// Monomials `z^α` with `|α| <= max`, grouped by degree.
fn exponents_up_to(n: usize, max: u32) -> Vec<MultiIndex> {
    (0..=max).flat_map(|d| MultiIndex::all_of_degree(n, d)).collect()
}

fn quadrature_exactness() -> Result<(bool, f64, f64, String)> {
    let order = 12u32;
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for n in 1..=3usize {
        let rule = build_sphere_rule(n, 1.0, order as usize)?;
        let exps = exponents_up_to(n, order);
        let pairs: Vec<(usize, usize)> = (0..exps.len())
            .flat_map(|a| (0..exps.len()).map(move |b| (a, b)))
            .filter(|(a, b)| exps[*a].degree() + exps[*b].degree() <= order)
            .collect();
        let mut acc = vec![Complex64::zero(); pairs.len()];
        let mut values = vec![Complex64::zero(); exps.len()];
        for i in 0..rule.len() {
            let node = rule.node(i);
            for (slot, e) in values.iter_mut().zip(&exps) {
                *slot = e.entries().iter().zip(node).fold(Complex64::new(1.0, 0.0), |m, (k, z)| m * z.powu(*k));
            }
            let w = rule.weight(i);
            for (a, (x, y)) in acc.iter_mut().zip(&pairs) {
                *a += values[*x] * values[*y].conj() * w;
            }
        }
        for ((x, y), got) in pairs.iter().zip(&acc) {
            let exact = rat_to_f64(&monomial_sphere_integral(n, &exps[*x], &exps[*y]));
            worst = worst.max((got - exact).norm());
        }
        count += pairs.len();
    }
    Ok((worst < 1e-12, worst, 1e-12, format!("{count} monomials, order {order}, n <= 3")))
}

fn annihilation() -> Result<(bool, f64, f64, String)> {
    let mut survivors = 0usize;
    let mut count = 0usize;
    let one = BigRational::one();
    for n in 1..=3usize {
        for total in 1..=8u32 {
            for p in 0..=total {
                let q = total - p;
                let chain = annihilator_chain(n, p, q)?;
                for profile in characterization_basis(n, p, q) {
                    if !apply_chain(&profile, &chain, &one).is_zero() {
                        survivors += 1;
                    }
                    count += 1;
                }
            }
        }
    }
    Ok((survivors == 0, survivors as f64, 0.0, format!("{count} basis profiles annihilated")))
}

/// `(family, index, p, q)` for the sufficiency models.
const SUFFICIENCY_MODELS: [(Family, u32, u32, u32); 7] = [
    (Family::Growing, 1, 1, 0),
    (Family::Decaying, 1, 0, 1),
    (Family::Growing, 1, 1, 1),
    (Family::Decaying, 1, 1, 1),
    (Family::Growing, 1, 2, 1),
    (Family::Growing, 2, 2, 1),
    (Family::Decaying, 1, 2, 1),
];

pub const SUFFICIENCY_ORDER: usize = 48;

fn model_sufficiency() -> Result<((bool, f64, f64, String), MembershipReport)> {
    let ann = AnnulusSpec::new(2, 1.0, None)?;
    let pairs = admissible_pairs(&ann, &sample_centres(2, 20, 2.0, 0), &[0.5, 1.0, 1.5, 2.0, 2.5]);
    let lam = rat_int(1);
    let mut worst = 0.0f64;
    let mut last = None;
    for (family, index, p, q) in SUFFICIENCY_MODELS {
        let h = model_function(family, index, &default_harmonic(2, p, q)?, &lam)?.compile();
        let report = membership_test(&h, &ann, &pairs, 1.0, 1e-8, SUFFICIENCY_ORDER)?;
        worst = worst.max(report.max_abs_mean / report.scale);
        last = Some(report);
    }
    let report = last.expect("models listed");
    Ok(((worst < 1e-8, worst, 1e-8, format!("{} pairs per model, order {SUFFICIENCY_ORDER}", pairs.len())), report))
}

/// `1e−3 ρ^{−1} z₁z̄₂`, outside the (1,1) kernel span.
pub fn necessity_perturbation() -> Result<StructuredFunction> {
    let profile = RadialProfile::term(BigRational::zero(), -1, ComplexRational::from_rational(rat(1, 1000)));
    StructuredFunction::from_product(&profile, &default_harmonic(2, 1, 1)?)
}

fn numerical_necessity() -> Result<((bool, f64, f64, String), MembershipReport)> {
    let ann = AnnulusSpec::new(2, 1.0, None)?;
    let lam = rat_int(1);
    let grid = verification_grid(1.0, None, 24);
    let member = model_function(Family::Growing, 1, &default_harmonic(2, 1, 1)?, &lam)?;
    let perturbed = member.add(&necessity_perturbation()?)?;
    let pq = [(0, 0), (1, 1)];
    let clean = characterize(&member.compile(), &ann, &pq, &grid, 16, &lam)?;
    let dirty = characterize(&perturbed.compile(), &ann, &pq, &grid, 16, &lam)?;
    let clean_res = clean.max_residual();
    let dirty_res = dirty.fit(1, 1).map(|f| f.residual).fold(0.0, f64::max);
    let ok = clean_res < 1e-9 && dirty_res > 1e-4 && clean.verdict == Verdict::Member && dirty.verdict == Verdict::NonMember;
    Ok(((ok, dirty_res, 1e-4, format!("unperturbed residual {clean_res:e}")), dirty))
}

fn projection_formula() -> Result<(bool, f64, f64, String)> {
    let mut mismatches = 0usize;
    let mut count = 0usize;
    for n in 1..=3usize {
        for p in 1..=3u32 {
            for q in 1..=3u32 {
                let basis = harmonic_space_basis(n, p, q);
                let mut profiles = characterization_basis(n, p, q);
                profiles.push(RadialProfile::monomial(0, 2));
                profiles.push(RadialProfile::monomial(0, -3));
                for e in &basis.elements {
                    for a in &profiles {
                        for j in 1..=n {
                            for conj in [true, false] {
                                if projected_field(a, &e.poly, j, conj)? != projection_closed_form(a, &e.poly, j, conj)? {
                                    mismatches += 1;
                                }
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((mismatches == 0, mismatches as f64, 0.0, format!("{count} projections compared")))
}

/// Functions, centres and radii of the commutation matrix; the singular
/// models are only probed on spheres that avoid the unit ball.
pub fn commutation_matrix() -> Result<Vec<(StructuredFunction, Vec<Complex64>, f64)>> {
    let lam = rat_int(1);
    let one = BigradedPolynomial::one(2);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let near = vec![c(0.4, -0.3), c(0.2, 0.5)];
    let far = vec![c(0.3, 0.1), c(-0.2, 0.4)];
    let constant = StructuredFunction::from_product(&RadialProfile::monomial(0, 0), &one)?;
    let gaussian = StructuredFunction::from_product(&RadialProfile::monomial(-1, 0), &one)?;
    let poly = StructuredFunction::from_product(&RadialProfile::monomial(0, 0), &default_harmonic(2, 1, 1)?)?;
    let mixed = StructuredFunction::from_product(&RadialProfile::monomial(-1, 2), &default_harmonic(2, 2, 1)?)?;
    let grow = model_function(Family::Growing, 1, &default_harmonic(2, 1, 1)?, &lam)?;
    let decay = model_function(Family::Decaying, 1, &default_harmonic(2, 2, 1)?, &lam)?;
    Ok(vec![
        (constant, vec![c(0.0, 0.0); 2], 1.2),
        (gaussian.clone(), near.clone(), 1.2),
        (poly, near.clone(), 0.9),
        (mixed, near, 1.4),
        (grow, far.clone(), 2.0),
        (decay, far, 2.2),
        (gaussian, vec![c(1.1, 0.0), c(0.0, -0.6)], 0.7),
    ])
}

fn commutation() -> Result<(bool, f64, f64, String)> {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for (f, z, s) in commutation_matrix()? {
        let rule = build_sphere_rule(2, s, 32)?;
        for j in 1..=2 {
            for conj in [false, true] {
                worst = worst.max(commutation_residual(&f, j, conj, &z, &rule)?.residual);
                count += 1;
            }
        }
    }
    Ok((worst < 1e-6, worst, 1e-6, format!("{count} cases, h = 1e-4")))
}

/// A random smooth structured function of bidegree at most (2,2).
pub fn random_structured(n: usize, rng: &mut impl Rng) -> Result<StructuredFunction> {
    let mut f = StructuredFunction::zero(n);
    for _ in 0..rng.gen_range(1..=3) {
        let p = rng.gen_range(0..=2u32);
        let q = if n == 1 && p > 0 { 0 } else { rng.gen_range(0..=2u32) };
        let basis = harmonic_space_basis(n, p, q);
        if basis.elements.is_empty() {
            continue;
        }
        let e = &basis.elements[rng.gen_range(0..basis.elements.len())];
        let sigma = rat(rng.gen_range(-2..=2i64), 2);
        let m = 2 * rng.gen_range(0..=1i32);
        let c = ComplexRational::new(rat(rng.gen_range(-5..=5i64), 4), rat(rng.gen_range(-5..=5i64), 4));
        f = f.add(&StructuredFunction::from_product(&RadialProfile::term(sigma, m, c), &e.poly)?)?;
    }
    Ok(f)
}

fn conjugation_identity() -> Result<(bool, f64, f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let n = 2;
    let unit = build_sphere_rule(n, 1.0, 16)?;
    let mut points = Vec::new();
    for _ in 0..10 {
        let z: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        points.push((z, rng.gen_range(0.3..1.5)));
    }
    for _ in 0..10 {
        let f = random_structured(n, &mut rng)?.compile();
        let conj_f = Conjugated(&f);
        for (z, s) in &points {
            let rule = unit.scaled(*s);
            let left = left_twisted_mean(&f, z, 1.0, &rule)?;
            let right = twisted_mean(&conj_f, z, 1.0, &rule)?.conj();
            worst = worst.max((left - right).norm());
        }
    }
    Ok((worst < 1e-13, worst, 1e-13, "10 functions x 10 pairs".into()))
}

fn support_ok(report: &SupportReport, want: f64, step: f64) -> bool {
    report.r_hat.is_some_and(|r| (r - want).abs() <= step + 1e-9)
}

fn support_checks() -> Result<(bool, f64, f64, String)> {
    let job = SupportJob::default();
    let bump = support_radius(&Bump::centred(2, 1.0)?, &job)?;
    let lam = rat_int(1);
    let h = model_function(Family::Growing, 1, &default_harmonic(2, 1, 1)?, &lam)?.compile();
    let model = support_radius(&h, &job)?;
    let vanishing = model.r_hat.is_some() && model.rows.last().is_some_and(|r| r.pass);
    let e_bump = helgason_support_check(&Bump::centred(2, 1.0)?.with_polynomial_decay(), &job)?;
    let g = euclidean_model(&default_harmonic(2, 1, 0)?, 0)?.compile();
    let e_model = helgason_support_check(&g, &job)?;
    let bump_err = bump.r_hat.map_or(f64::INFINITY, |r| (r - 1.0).abs());
    let ok = support_ok(&bump, 1.0, job.step)
        && bump.flags.is_empty()
        && vanishing
        && model.has_flag(FLAG_DECAY_VIOLATED)
        && support_ok(&e_bump, 1.0, job.step)
        && e_bump.flags.is_empty()
        && e_model.has_flag(FLAG_DECAY_VIOLATED);
    let detail = format!(
        "bump r_hat {:?}, model r_hat {:?} flagged {}, euclidean bump r_hat {:?}, euclidean model flagged {}",
        bump.r_hat,
        model.r_hat,
        model.has_flag(FLAG_DECAY_VIOLATED),
        e_bump.r_hat,
        e_model.has_flag(FLAG_DECAY_VIOLATED)
    );
    Ok((ok, bump_err, job.step, detail))
}

fn two_sided() -> Result<(bool, f64, f64, String)> {
    let lam = rat_int(1);
    let ann1 = AnnulusSpec::new(1, 1.0, None)?;
    let grid = verification_grid(1.0, None, 16);
    let pairs1 = admissible_pairs(&ann1, &sample_centres(1, 8, 1.5, 0), &[0.5, 1.5]);
    let pq1 = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2)];
    let one_sided = model_function(Family::Growing, 1, &default_harmonic(1, 2, 0)?, &lam)?.compile();
    let right_only = membership_test(&one_sided, &ann1, &pairs1, 1.0, 1e-8, 32)?;
    let fails = two_sided_characterize(&one_sided, &ann1, &pq1, &grid, 32, &lam, &pairs1, 1e-8)?;
    let zero = two_sided_characterize(&StructuredFunction::zero(1).compile(), &ann1, &pq1, &grid, 16, &lam, &pairs1, 1e-8)?;
    let inside = two_sided_characterize(&Bump::centred(1, 0.9)?, &ann1, &pq1, &grid, 16, &lam, &pairs1, 1e-8)?;
    let ann2 = AnnulusSpec::new(2, 1.0, None)?;
    let p11 = default_harmonic(2, 1, 1)?;
    let both = model_function(Family::Growing, 1, &p11, &lam)?
        .add(&model_function(Family::Decaying, 1, &p11, &lam)?.scale(&ComplexRational::from_rational(rat(-3, 2))))?;
    let pairs2 = admissible_pairs(&ann2, &sample_centres(2, 6, 1.5, 0), &[0.5, 1.5]);
    let member = two_sided_characterize(&both.compile(), &ann2, &[(0, 0), (1, 0), (1, 1)], &grid, 48, &lam, &pairs2, 1e-8)?;
    let ok = right_only.verdict == Verdict::Consistent
        && fails.verdict == Verdict::NonMember
        && zero.verdict == Verdict::Member
        && inside.verdict == Verdict::Member
        && member.verdict == Verdict::Member;
    let detail = format!(
        "one-sided {:?} (right means {:?}), zero {:?}, interior bump {:?}, n=2 (1,1) member {:?}",
        fails.verdict, right_only.verdict, zero.verdict, inside.verdict, member.verdict
    );
    Ok((ok, member.max_residual(), 1e-9, detail))
}
