use num::complex::Complex64;
use num::{BigRational, Zero};
use rayon::prelude::*;

use crate::cq::rat_to_f64;
use crate::error::{Error, Result};
use crate::harmonic::{orthonormal_basis, CompiledHarmonic};
use crate::quad::sum::pairwise_sum;
use crate::quad::{build_sphere_rule, sphere_sample, FunctionSampler, Side, SphereRule};
use crate::radial::{characterization_basis_lambda, fit_profile, two_sided_basis, RadialProfile, SampledProfile};
use crate::zspace::geometry::{admissible, AnnulusSpec};
use crate::zspace::report::{
    fit_verdict, mean_verdict, ChannelTable, FitRecord, MembershipReport, PairRecord, Verdict, NEGLIGIBLE,
};

/// Means at each `(z, s)`; pairs are processed in parallel but reported in
/// input order.
pub fn sample_means(
    f: &(impl FunctionSampler + ?Sized),
    pairs: &[(Vec<Complex64>, f64)],
    lambda: f64,
    unit_rule: &SphereRule,
    side: Side,
) -> Result<Vec<PairRecord>> {
    pairs
        .par_iter()
        .map(|(z, s)| {
            let rule = unit_rule.scaled(*s);
            let sample = sphere_sample(f, z, lambda, &rule, side)?;
            Ok(PairRecord::new(z, *s, side, sample.value, sample.sup_abs))
        })
        .collect::<Vec<Result<PairRecord>>>()
        .into_iter()
        .collect()
}

fn check_pairs(pairs: &[(Vec<Complex64>, f64)], ann: &AnnulusSpec) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyAdmissibleSet);
    }
    for (z, s) in pairs {
        if z.len() != ann.n {
            return Err(Error::DimensionMismatch { expected: ann.n, found: z.len() });
        }
        if !admissible(z, *s, ann) {
            return Err(Error::Contract(format!("pair with |z| = {} and s = {s} is not admissible", crate::zspace::geometry::norm(z))));
        }
    }
    Ok(())
}

fn summarize(records: &[PairRecord]) -> (f64, f64) {
    let max = records.iter().map(PairRecord::abs_mean).fold(0.0, f64::max);
    let scale = records.iter().map(|r| r.sphere_sup).fold(0.0, f64::max);
    (max, scale)
}

/// Samples `f × μ_s(z)` over admissible pairs; consistent when every mean is
/// below `tol` times the largest `|f|` seen on the spheres.
pub fn membership_test(
    f: &(impl FunctionSampler + ?Sized),
    ann: &AnnulusSpec,
    pairs: &[(Vec<Complex64>, f64)],
    lambda: f64,
    tol: f64,
    order: usize,
) -> Result<MembershipReport> {
    check_pairs(pairs, ann)?;
    let rule = build_sphere_rule(ann.n, 1.0, order)?;
    let records = sample_means(f, pairs, lambda, &rule, Side::Right)?;
    let (max_abs_mean, scale) = summarize(&records);
    Ok(MembershipReport {
        kind: "membership",
        annulus: *ann,
        lambda,
        pairs: records,
        max_abs_mean,
        scale,
        fits: Vec::new(),
        verdict: mean_verdict(max_abs_mean, scale, tol),
        flags: Vec::new(),
        tables: Vec::new(),
    })
}

/// Coefficients `a_j^{p,q}(ρ) = ∫ f(ρω) conj(Y_j(ω)) dμ₁(ω)` on a grid, plus
/// a flag per channel marking samples below the noise floor.
pub struct Extraction {
    pub tables: Vec<ChannelTable>,
    pub negligible: Vec<bool>,
    pub flags: Vec<String>,
}

pub fn extract_coefficients(
    f: &(impl FunctionSampler + ?Sized),
    ann: &AnnulusSpec,
    p: u32,
    q: u32,
    grid: &[f64],
    unit_rule: &SphereRule,
) -> Result<Extraction> {
    let n = ann.n;
    if f.n() != n || unit_rule.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.n() });
    }
    if let Some(bad) = grid.iter().find(|r| !ann.contains(**r)) {
        return Err(Error::Contract(format!("grid radius {bad} lies outside the annulus")));
    }
    let mut flags = Vec::new();
    if let Some(deg) = f.angular_degree() {
        let need = (deg + p + q) as usize;
        if unit_rule.order() < need {
            flags.push(format!(
                "quadrature order {} below the {need} needed for bidegree ({p},{q}) at angular degree {deg}",
                unit_rule.order()
            ));
        }
    }
    let basis = orthonormal_basis(n, p, q);
    let compiled: Vec<CompiledHarmonic> = basis.elements.iter().map(|e| e.compile()).collect();
    let d = compiled.len();
    let nodes = unit_rule.len();
    // conj(Y_j(ω_i)) · weight_i, node-major
    let kernel: Vec<Complex64> = (0..nodes)
        .into_par_iter()
        .flat_map_iter(|i| {
            let w = unit_rule.weight(i);
            let omega = unit_rule.node(i);
            compiled.iter().map(move |y| y.eval(omega).conj() * w).collect::<Vec<_>>()
        })
        .collect();
    let rows: Vec<Result<(Vec<Complex64>, f64)>> = grid
        .par_iter()
        .map(|&rho| {
            let mut values = Vec::with_capacity(nodes);
            let mut sup: f64 = 0.0;
            for i in 0..nodes {
                let x: Vec<Complex64> = unit_rule.node(i).iter().map(|c| c * rho).collect();
                let v = f.eval(&x).map_err(|message| Error::Sampler { point: x, message })?;
                sup = sup.max(v.norm());
                values.push(v);
            }
            let mut coeffs = Vec::with_capacity(d);
            let mut buf = vec![Complex64::zero(); nodes];
            for j in 0..d {
                for i in 0..nodes {
                    buf[i] = values[i] * kernel[i * d + j];
                }
                coeffs.push(pairwise_sum(&buf));
            }
            Ok((coeffs, sup))
        })
        .collect();
    let mut per_rho = Vec::with_capacity(grid.len());
    for r in rows {
        per_rho.push(r?);
    }
    let mut tables = Vec::with_capacity(d);
    let mut negligible = Vec::with_capacity(d);
    for j in 0..d {
        let a: Vec<Complex64> = per_rho.iter().map(|(c, _)| c[j]).collect();
        let a_tilde = grid.iter().zip(&a).map(|(r, v)| v * r.powi(-((p + q) as i32))).collect();
        let tiny = per_rho.iter().all(|(c, sup)| c[j].norm() <= NEGLIGIBLE * sup);
        negligible.push(tiny);
        tables.push(ChannelTable { p, q, j: j + 1, grid: grid.to_vec(), a, a_tilde });
    }
    Ok(Extraction { tables, negligible, flags })
}

fn fit_channels(
    extraction: &Extraction,
    basis: &[RadialProfile],
    use_tilde: bool,
) -> Result<Vec<FitRecord>> {
    let mut fits = Vec::with_capacity(extraction.tables.len());
    for (t, &tiny) in extraction.tables.iter().zip(&extraction.negligible) {
        let values = if use_tilde { t.a_tilde.clone() } else { t.a.clone() };
        let samples = SampledProfile::new(t.grid.clone(), values)?;
        let record = if tiny {
            FitRecord {
                p: t.p,
                q: t.q,
                j: t.j,
                coeffs: vec![[0.0, 0.0]; basis.len()],
                residual: 0.0,
                conditioning: 1.0,
                ill_conditioned: false,
                negligible: true,
            }
        } else {
            let fit = fit_profile(&samples, basis)?;
            FitRecord {
                p: t.p,
                q: t.q,
                j: t.j,
                coeffs: fit.coefficients.iter().map(|c| [c.re, c.im]).collect(),
                residual: fit.residual,
                conditioning: fit.condition,
                ill_conditioned: fit.ill_conditioned,
                negligible: false,
            }
        };
        fits.push(record);
    }
    Ok(fits)
}

fn ill_flags(fits: &[FitRecord]) -> Vec<String> {
    fits.iter()
        .filter(|f| f.ill_conditioned && !f.negligible)
        .map(|f| format!("ill-conditioned fit for ({},{}) channel {}: condition {:e}", f.p, f.q, f.j, f.conditioning))
        .collect()
}

/// Fits each `ã_j^{p,q}` against the closed-form kernel basis (empty for
/// `(0,0)`).
pub fn characterize(
    f: &(impl FunctionSampler + ?Sized),
    ann: &AnnulusSpec,
    pq_list: &[(u32, u32)],
    grid: &[f64],
    order: usize,
    lambda: &BigRational,
) -> Result<MembershipReport> {
    let rule = build_sphere_rule(ann.n, 1.0, order)?;
    let mut fits = Vec::new();
    let mut tables = Vec::new();
    let mut flags = Vec::new();
    for &(p, q) in pq_list {
        let ex = extract_coefficients(f, ann, p, q, grid, &rule)?;
        let basis = characterization_basis_lambda(ann.n, p, q, lambda);
        fits.extend(fit_channels(&ex, &basis, true)?);
        flags.extend(ex.flags);
        tables.extend(ex.tables);
    }
    flags.extend(ill_flags(&fits));
    Ok(MembershipReport {
        kind: "characterization",
        annulus: *ann,
        lambda: rat_to_f64(lambda),
        pairs: Vec::new(),
        max_abs_mean: 0.0,
        scale: 0.0,
        verdict: fit_verdict(&fits),
        fits,
        flags,
        tables,
    })
}

/// Fits against the basis truncated at `min(p, q)` and samples both the left
/// and the right means over `pairs`.
#[allow(clippy::too_many_arguments)]
pub fn two_sided_characterize(
    f: &(impl FunctionSampler + ?Sized),
    ann: &AnnulusSpec,
    pq_list: &[(u32, u32)],
    grid: &[f64],
    order: usize,
    lambda: &BigRational,
    pairs: &[(Vec<Complex64>, f64)],
    tol: f64,
) -> Result<MembershipReport> {
    check_pairs(pairs, ann)?;
    let rule = build_sphere_rule(ann.n, 1.0, order)?;
    let mut fits = Vec::new();
    let mut tables = Vec::new();
    let mut flags = Vec::new();
    for &(p, q) in pq_list {
        let ex = extract_coefficients(f, ann, p, q, grid, &rule)?;
        let basis = two_sided_basis(ann.n, p, q, lambda);
        fits.extend(fit_channels(&ex, &basis, true)?);
        flags.extend(ex.flags);
        tables.extend(ex.tables);
    }
    flags.extend(ill_flags(&fits));
    let lam = rat_to_f64(lambda);
    let mut records = sample_means(f, pairs, lam, &rule, Side::Right)?;
    records.extend(sample_means(f, pairs, lam, &rule, Side::Left)?);
    let (max_abs_mean, scale) = summarize(&records);
    let means = mean_verdict(max_abs_mean, scale, tol);
    let fitted = fit_verdict(&fits);
    if means.is_negative() {
        flags.push("some one-sided mean does not vanish".into());
    }
    let verdict = if fitted.is_negative() || means.is_negative() {
        Verdict::NonMember
    } else if fitted.is_positive() && means.is_positive() {
        Verdict::Member
    } else {
        Verdict::Inconclusive
    };
    Ok(MembershipReport {
        kind: "two-sided characterization",
        annulus: *ann,
        lambda: lam,
        pairs: records,
        max_abs_mean,
        scale,
        fits,
        verdict,
        flags,
        tables,
    })
}

/// Euclidean counterpart on ℝ^{2n}: each degree-`k` coefficient `a(ρ)` must
/// lie in the span of `ρ^{k−2n−2i}`, `0 <= i < k`; degree 0 must vanish.
pub fn euclidean_characterize(
    g: &(impl FunctionSampler + ?Sized),
    ann: &AnnulusSpec,
    k_list: &[u32],
    grid: &[f64],
    order: usize,
) -> Result<MembershipReport> {
    let rule = build_sphere_rule(ann.n, 1.0, order)?;
    let d = 2 * ann.n as i32;
    let mut fits = Vec::new();
    let mut tables = Vec::new();
    let mut flags = Vec::new();
    for &k in k_list {
        let basis: Vec<RadialProfile> = (0..k as i32).map(|i| RadialProfile::monomial(0, k as i32 - d - 2 * i)).collect();
        for p in 0..=k {
            let ex = extract_coefficients(g, ann, p, k - p, grid, &rule)?;
            fits.extend(fit_channels(&ex, &basis, false)?);
            flags.extend(ex.flags);
            tables.extend(ex.tables);
        }
    }
    flags.extend(ill_flags(&fits));
    Ok(MembershipReport {
        kind: "euclidean characterization",
        annulus: *ann,
        lambda: 0.0,
        pairs: Vec::new(),
        max_abs_mean: 0.0,
        scale: 0.0,
        verdict: fit_verdict(&fits),
        fits,
        flags,
        tables,
    })
}

/// Samples plain Euclidean sphere means over admissible pairs.
pub fn euclidean_membership_test(
    g: &(impl FunctionSampler + ?Sized),
    ann: &AnnulusSpec,
    pairs: &[(Vec<Complex64>, f64)],
    tol: f64,
    order: usize,
) -> Result<MembershipReport> {
    check_pairs(pairs, ann)?;
    let rule = build_sphere_rule(ann.n, 1.0, order)?;
    let records = sample_means(g, pairs, 0.0, &rule, Side::Euclidean)?;
    let (max_abs_mean, scale) = summarize(&records);
    Ok(MembershipReport {
        kind: "euclidean membership",
        annulus: *ann,
        lambda: 0.0,
        pairs: records,
        max_abs_mean,
        scale,
        fits: Vec::new(),
        verdict: mean_verdict(max_abs_mean, scale, tol),
        flags: Vec::new(),
        tables: Vec::new(),
    })
}
