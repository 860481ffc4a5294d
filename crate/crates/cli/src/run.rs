//! Executes a validated [`Job`] and writes its artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num::complex::Complex64;
use serde::Serialize;
use serde_json::json;
use twisted_means::cq::{format_rational, rat_to_f64, ComplexRational};
use twisted_means::fields::StructuredFunction;
use twisted_means::functions::{constant, default_harmonic, euclidean_model, gaussian, model_function, monomial, Bump, Family};
use twisted_means::harmonic::{harmonic_decompose, orthonormal_basis};
use twisted_means::poly::{BigradedPolynomial, MultiIndex};
use twisted_means::quad::{build_sphere_rule, sphere_sample, FunctionSampler, Side};
use twisted_means::radial::{chebyshev_grid, verification_grid, RadialProfile};
use twisted_means::selftest::{artifact_bytes, run_suite};
use twisted_means::zspace::{
    admissible_pairs, characterize, euclidean_characterize, euclidean_membership_test, helgason_support_check,
    membership_test, sample_centres, support_radius, two_sided_characterize, MembershipReport, PairRecord, SupportJob,
};

use crate::config::{Command, ConfigError, FunctionSpec, Job, Mode, Placement};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] twisted_means::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

type Result<T> = std::result::Result<T, RunError>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

/// Files are written only after the whole job succeeded.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Artifacts {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    fn flush(self) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|source| RunError::Io { path: self.dir.clone(), source })?;
        for (name, body) in self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, body).map_err(|source| RunError::Io { path, source })?;
        }
        Ok(())
    }
}

fn to_complex(point: &[(f64, f64)]) -> Vec<Complex64> {
    point.iter().map(|(re, im)| Complex64::new(*re, *im)).collect()
}

fn model_poly(job: &Job, p: u32, q: u32, file: &Option<PathBuf>) -> Result<BigradedPolynomial> {
    match file {
        Some(path) => Ok(BigradedPolynomial::from_text(&read(path)?, job.n)?),
        None => Ok(default_harmonic(job.n, p, q)?),
    }
}

fn build_function(job: &Job) -> Result<Box<dyn FunctionSampler>> {
    let spec = job.function.as_ref().ok_or(ConfigError::Field { field: "function", message: "missing".into() })?;
    let structured = |f: StructuredFunction| -> Box<dyn FunctionSampler> { Box::new(f.compile()) };
    Ok(match spec {
        FunctionSpec::Zero => structured(StructuredFunction::zero(job.n)),
        FunctionSpec::Constant { value } => structured(constant(job.n, ComplexRational::from_rational(value.clone()))),
        FunctionSpec::Gaussian { sign } => structured(gaussian(job.n, *sign)),
        FunctionSpec::Bump { centre, radius } => {
            let bump = Bump::new(to_complex(centre), *radius)?;
            if job.mode == Mode::Euclidean {
                Box::new(bump.with_polynomial_decay())
            } else {
                Box::new(bump)
            }
        }
        FunctionSpec::GrowingModel { p, q, index, poly } => {
            structured(model_function(Family::Growing, *index, &model_poly(job, *p, *q, poly)?, &job.lambda)?)
        }
        FunctionSpec::DecayingModel { p, q, index, poly } => {
            structured(model_function(Family::Decaying, *index, &model_poly(job, *p, *q, poly)?, &job.lambda)?)
        }
        FunctionSpec::Euclid { p, q, index, poly } => structured(euclidean_model(&model_poly(job, *p, *q, poly)?, *index)?),
        FunctionSpec::Monomial { alpha, beta } => {
            structured(monomial(MultiIndex::new(alpha.clone()), MultiIndex::new(beta.clone()))?)
        }
        FunctionSpec::Structured { profile, poly } => {
            let profile = RadialProfile::from_text(&read(profile)?)?;
            let poly = BigradedPolynomial::from_text(&read(poly)?, job.n)?;
            structured(StructuredFunction::from_polynomial(&profile, &poly)?)
        }
    })
}

fn grid(job: &Job) -> Vec<f64> {
    match job.placement {
        Placement::Chebyshev => verification_grid(job.annulus.r, job.annulus.outer, job.grid_count),
        Placement::Uniform => {
            let (lo, hi) = match job.annulus.outer {
                Some(big) => {
                    let d = 0.05 * (big - job.annulus.r);
                    (job.annulus.r + d, big - d)
                }
                None => (job.annulus.r + 0.2, job.annulus.r + 4.2),
            };
            if job.grid_count < 2 {
                return chebyshev_grid(lo, hi, job.grid_count);
            }
            (0..job.grid_count).map(|k| lo + (hi - lo) * k as f64 / (job.grid_count - 1) as f64).collect()
        }
    }
}

fn pairs(job: &Job) -> Vec<(Vec<Complex64>, f64)> {
    let centres = sample_centres(job.n, job.sample_count, job.sample_max_norm, job.seed);
    admissible_pairs(&job.annulus, &centres, &job.offsets)
}

fn membership_artifacts(report: &MembershipReport, out: &mut Artifacts) {
    out.add("report.json", report.to_json());
    if !report.pairs.is_empty() {
        out.add("means.csv", report.means_csv());
    }
    for ((p, q), body) in report.coefficient_csvs() {
        out.add(format!("coeffs_{p}_{q}.csv"), body);
    }
}

fn basis(job: &Job, out: &mut Artifacts) -> Result<i32> {
    let mut spaces = Vec::new();
    for &(p, q) in &job.degrees {
        let b = orthonormal_basis(job.n, p, q);
        let mut csv = String::from("j,alpha,beta,re,im,scale_sq\n");
        let mut elements = Vec::new();
        for (j, e) in b.elements.iter().enumerate() {
            for ((a, bb), c) in e.poly.terms() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    j + 1,
                    a.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                    bb.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                    format_rational(&c.re),
                    format_rational(&c.im),
                    format_rational(&e.scale_sq)
                );
            }
            elements.push(json!({"j": j + 1, "scale_sq": format_rational(&e.scale_sq), "poly": e.poly.to_text()}));
        }
        out.add(format!("basis_{p}_{q}.csv"), csv);
        out.add(format!("basis_{p}_{q}.txt"), b.to_text());
        spaces.push(json!({"p": p, "q": q, "dimension": b.dimension(), "orthonormal": b.gram_is_identity(), "elements": elements}));
        println!("H_{{{p},{q}}} in n = {}: dimension {}", job.n, b.dimension());
    }
    out.add("report.json", pretty(&json!({"kind": "basis", "n": job.n, "spaces": spaces})));
    Ok(0)
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn decompose(job: &Job, out: &mut Artifacts) -> Result<i32> {
    let path = job.input.as_ref().ok_or(ConfigError::Field { field: "input", message: "decompose needs a polynomial file".into() })?;
    let poly = BigradedPolynomial::from_text(&read(path)?, job.n)?;
    let dec = harmonic_decompose(&poly)?;
    let mut csv = String::from("k,alpha,beta,re,im\n");
    let mut layers = Vec::new();
    for (k, layer) in &dec.layers {
        for ((a, b), c) in layer.terms() {
            let _ = writeln!(
                csv,
                "{k},{},{},{},{}",
                a.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                b.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                format_rational(&c.re),
                format_rational(&c.im)
            );
        }
        layers.push(json!({"k": k, "poly": layer.to_text()}));
        println!("P_{k}: {}", layer.to_text().trim_end().replace('\n', " + "));
    }
    out.add("layers.csv", csv);
    out.add("report.json", pretty(&json!({"kind": "decomposition", "n": job.n, "p": dec.p, "q": dec.q, "layers": layers})));
    Ok(0)
}

fn mean(job: &Job, out: &mut Artifacts) -> Result<i32> {
    let f = build_function(job)?;
    let side = match job.side.as_str() {
        "left" => Side::Left,
        "euclidean" => Side::Euclidean,
        _ => Side::Right,
    };
    let z = to_complex(&job.point);
    let rule = build_sphere_rule(job.n, job.s, job.order)?;
    let lambda = rat_to_f64(&job.lambda);
    let sample = sphere_sample(&*f, &z, lambda, &rule, side)?;
    let record = PairRecord::new(&z, job.s, side, sample.value, sample.sup_abs);
    let mut csv = String::new();
    for k in 1..=job.n {
        let _ = write!(csv, "z{k}_re,z{k}_im,");
    }
    csv.push_str("s,side,mean_re,mean_im\n");
    for c in &record.z {
        let _ = write!(csv, "{},{},", c[0], c[1]);
    }
    let _ = writeln!(csv, "{},{},{},{}", record.s, record.side, record.mean_re, record.mean_im);
    println!("mean = {} + {}i (sphere sup {})", record.mean_re, record.mean_im, record.sphere_sup);
    out.add("means.csv", csv);
    out.add("report.json", pretty(&json!({"kind": "mean", "lambda": lambda, "order": job.order, "pair": record})));
    Ok(0)
}

fn verify(job: &Job, out: &mut Artifacts) -> Result<i32> {
    let f = build_function(job)?;
    let pairs = pairs(job);
    let report = if job.mode == Mode::Euclidean {
        euclidean_membership_test(&*f, &job.annulus, &pairs, job.tolerance, job.order)?
    } else {
        membership_test(&*f, &job.annulus, &pairs, rat_to_f64(&job.lambda), job.tolerance, job.order)?
    };
    println!(
        "verdict {:?}: max |mean| {:e} against scale {:e} over {} pairs",
        report.verdict,
        report.max_abs_mean,
        report.scale,
        report.pairs.len()
    );
    membership_artifacts(&report, out);
    Ok(report.verdict.exit_code())
}

fn characterize_job(job: &Job, out: &mut Artifacts) -> Result<i32> {
    let f = build_function(job)?;
    let grid = grid(job);
    let report = match job.mode {
        Mode::OneSided => characterize(&*f, &job.annulus, &job.degrees, &grid, job.order, &job.lambda)?,
        Mode::TwoSided => {
            two_sided_characterize(&*f, &job.annulus, &job.degrees, &grid, job.order, &job.lambda, &pairs(job), job.tolerance)?
        }
        Mode::Euclidean => {
            let mut ks: Vec<u32> = job.degrees.iter().map(|(p, q)| p + q).collect();
            ks.sort_unstable();
            ks.dedup();
            euclidean_characterize(&*f, &job.annulus, &ks, &grid, job.order)?
        }
    };
    println!("verdict {:?}: largest residual {:e}", report.verdict, report.max_residual());
    for flag in &report.flags {
        println!("flag: {flag}");
    }
    membership_artifacts(&report, out);
    Ok(report.verdict.exit_code())
}

fn support(job: &Job, out: &mut Artifacts) -> Result<i32> {
    let f = build_function(job)?;
    let sj = SupportJob {
        r_max: job.r_max,
        step: job.step,
        centre_count: job.support_centres,
        centre_max: job.support_centre_max,
        offsets: job.support_offsets.clone(),
        tol: job.tolerance,
        order: job.order,
        seed: job.seed,
        lambda: rat_to_f64(&job.lambda),
        ..SupportJob::default()
    };
    let report = if job.mode == Mode::Euclidean { helgason_support_check(&*f, &sj)? } else { support_radius(&*f, &sj)? };
    match report.r_hat {
        Some(r) => println!("support radius estimate {r}"),
        None => println!("no radius passed"),
    }
    for flag in &report.flags {
        println!("flag: {flag}");
    }
    let mut csv = String::from("r,max_abs_mean,scale,pass\n");
    for row in &report.rows {
        let _ = writeln!(csv, "{},{},{},{}", row.r, row.max_abs_mean, row.scale, row.pass);
    }
    out.add("support.csv", csv);
    out.add("report.json", report.to_json());
    Ok(report.exit_code())
}

fn selftest(job: &Job, out: &mut Artifacts) -> Result<i32> {
    let report = run_suite(&job.criteria);
    for line in report.summary_lines() {
        println!("{line}");
    }
    for (name, body) in artifact_bytes(&report) {
        out.add(name, body);
    }
    Ok(if report.passed { 0 } else { 2 })
}

/// Runs the job and returns the process exit code.
pub fn run(job: &Job) -> Result<i32> {
    let mut out = Artifacts::new(&job.output);
    let code = match job.command {
        Command::Basis => basis(job, &mut out)?,
        Command::Decompose => decompose(job, &mut out)?,
        Command::Mean => mean(job, &mut out)?,
        Command::Verify => verify(job, &mut out)?,
        Command::Characterize => characterize_job(job, &mut out)?,
        Command::Support => support(job, &mut out)?,
        Command::Selftest => selftest(job, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}
